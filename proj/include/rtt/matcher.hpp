#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "rtt/library.hpp"
#include "rtt/peaklist.hpp"

namespace rtt {

/// How many trajectories survive standard-based screening.
struct ScreenKeep {
    enum class Mode { All, Fraction, TopK, HalfOrTop20 };

    Mode mode = Mode::HalfOrTop20;
    double fraction = 0.5;
    std::size_t count = 20;

    static ScreenKeep all() { return {Mode::All, 1.0, 0}; }
    static ScreenKeep top(std::size_t k) { return {Mode::TopK, 0.0, k}; }
    static ScreenKeep share(double f) { return {Mode::Fraction, f, 0}; }
    /// The more permissive of "first half" and "top 20".
    static ScreenKeep half_or_top20() { return {}; }

    /// Accepts `all`, `default`, a fraction such as `0.5`, or a count `20`.
    static ScreenKeep parse(std::string_view text);

    /// Number of trajectories to keep out of `n`.
    [[nodiscard]] std::size_t resolve(std::size_t n) const;
};

struct MatchConfig {
    double delta_t = 30.0;  // seconds; +inf disables the window
    ScreenKeep screen_keep;
    double kappa = 2.0;     // squared residual > kappa * msr flags an interferent
    bool iterate_interferents = false;
    /// Lets the enumerator also try "interferent" for peaks that do have
    /// candidate compounds. Off by default; residual reflagging covers
    /// the usual case.
    bool branch_interferents = false;
    std::size_t max_results = 10;  // 0 keeps every ranked entry
    bool require_standards = true;
    unsigned jobs = 1;

    /// Throws ValidationError for delta_t <= 0 or kappa <= 1.
    void validate() const;
};

/// One candidate RTT_sample: target id or kInterferent per unknown peak.
struct Assignment {
    std::vector<CompoundId> mapping;

    [[nodiscard]] std::size_t interferent_count() const noexcept;
    friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct MatchScore {
    std::size_t lib_index = 0;
    double ssr_std = 0.0;       // s^2
    double ssr_total = 0.0;     // standards + non-interferent pairs
    std::size_t n_std = 0;
    std::size_t n_paired = 0;   // n_std + n_sample - n_interf
    double msr = 0.0;           // ssr_total / n_paired
    std::vector<std::size_t> interferents;  // unknown-peak indices
    /// Squared residual per unknown peak; NaN for interferents.
    std::vector<double> residuals;
};

struct MatchEntry {
    Assignment assignment;
    MatchScore score;
    bool reflagged = false;     // produced by residual-based interferent detection
};

/// Ranking order: msr, then fewer interferents, then the smaller compound-id
/// tuple (interferent sorts last), then the lower trajectory index.
bool ranks_before(const MatchEntry& a, const MatchEntry& b);

struct MatchResult {
    std::vector<MatchEntry> ranked;     // ascending msr
    std::vector<std::size_t> screened;  // trajectories that were enumerated
    std::uint64_t assignments = 0;      // admissible assignments scored
    std::string diagnostic;             // set when `ranked` is empty

    [[nodiscard]] bool empty() const noexcept { return ranked.empty(); }
};

/// Sum over standards of (rt_lib - rt_sample)^2, in catalog order.
double ssr_standards(const SamplePeaks& sample, const Rtt& rtt);

/// Trajectory indices ordered by ssr_standards and truncated per
/// cfg.screen_keep. Without standards every index is returned in order.
std::vector<std::size_t> screen_by_standards(const SamplePeaks& sample, const RttLibrary& lib,
                                             const MatchConfig& cfg);

/// Per-peak admissible compounds against one trajectory.
struct CandidateWindows {
    std::vector<std::vector<CompoundId>> candidates;  // ascending ids
    std::vector<bool> forced_interferent;             // no admissible compound
};

/// Window (|rt_lib - rt_peak| <= delta_t) intersected with the region the
/// sample standards carve out of the catalog.
CandidateWindows candidate_windows(const SamplePeaks& sample, const Rtt& rtt,
                                   const CompoundCatalog& catalog, const MatchConfig& cfg);

using AssignmentVisitor = std::function<void(const Assignment&)>;

/// Streams every admissible assignment (injective, order preserving,
/// region consistent, inside the window) in lexicographic order and returns
/// how many were produced. Peaks without candidates are flagged interferent.
std::uint64_t enumerate_candidates(const SamplePeaks& sample, const Rtt& rtt,
                                   const CompoundCatalog& catalog, const MatchConfig& cfg,
                                   const AssignmentVisitor& visit);

std::vector<Assignment> collect_candidates(const SamplePeaks& sample, const Rtt& rtt,
                                           const CompoundCatalog& catalog, const MatchConfig& cfg);

/// Mean squared residual over standards and non-interferent pairs. Throws
/// UnscorableError when nothing is paired.
MatchScore score(const Assignment& assignment, const Rtt& rtt, const SamplePeaks& sample,
                 std::size_t lib_index = 0);

struct InterferentCheck {
    MatchEntry variant;
    std::size_t newly_flagged = 0;
    bool degenerate = false;    // every unknown peak ended up flagged

    [[nodiscard]] bool changed() const noexcept { return newly_flagged > 0 && !degenerate; }
};

/// Flags paired peaks whose squared residual exceeds kappa * msr and
/// renormalises over the remaining pairs; repeats to a fixed point when
/// cfg.iterate_interferents is set.
InterferentCheck detect_interferents(const MatchEntry& entry, const MatchConfig& cfg);

/// Screens, enumerates, scores and ranks. Throws EmptyLibraryError for an
/// unusable library; an empty result carries a diagnostic instead.
MatchResult match(const SamplePeaks& sample, const RttLibrary& lib, const MatchConfig& cfg);

/// Moves each identified peak onto the reference rt of its compound using the
/// top-ranked entry; interferents keep their rt.
PeakList align_to_reference(const SamplePeaks& sample, const MatchResult& result,
                            const Rtt& reference);

/// Standards-free copy of a sample (the `--no-standards` mode).
SamplePeaks without_standards(const SamplePeaks& sample);

}  // namespace rtt
