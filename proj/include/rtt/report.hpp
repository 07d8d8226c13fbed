#pragma once

#include <iosfwd>

#include "json.hpp"

#include "rtt/library.hpp"
#include "rtt/matcher.hpp"
#include "rtt/testgen.hpp"

namespace rtt {

/// Ranked entries with per-peak labels and residuals. Residuals of
/// interferent peaks are null.
nlohmann::ordered_json match_report(const MatchResult& result, const SamplePeaks& sample, const RttLibrary& lib);

/// Fixed-width table: one column per sample peak, one row per rank.
void write_match_text(std::ostream& out, const MatchResult& result, const SamplePeaks& sample,
                      const RttLibrary& lib);

/// Timing is left out unless asked for so that repeated runs compare equal.
nlohmann::ordered_json eval_report(const EvalReport& report, bool include_timing = false);
void write_eval_text(std::ostream& out, const EvalReport& report);

}  // namespace rtt
