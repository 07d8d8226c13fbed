#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rtt/error.hpp"
#include "rtt/library.hpp"
#include "rtt/matcher.hpp"
#include "rtt/peaklist.hpp"

namespace rtt {

using BigCount = boost::multiprecision::cpp_int;

/// Exact binomial coefficient C(n, k); zero when k > n.
BigCount binomial(std::size_t n, std::size_t k);

/// n_chroms * sum over sizes of C(n_tgt, size). Throws ValidationError for a
/// size outside 1..n_tgt.
BigCount count_tests(std::size_t n_tgt, const std::vector<std::size_t>& sizes, std::size_t n_chroms = 1);

/// A sample with its answer key.
struct TestCase {
    SamplePeaks sample;
    std::vector<CompoundId> truth;  // per unknown peak; kInterferent for injected peaks
    std::string source;

    /// Throws ValidationError when rts are out of order or the truth refers
    /// to something other than a catalog target.
    void validate(const CompoundCatalog& catalog) const;
};

struct Sampling {
    enum class Mode { Exhaustive, Random };

    Mode mode = Mode::Exhaustive;
    std::size_t per_size = 0;   // random mode: subsets drawn per size
    std::uint64_t seed = 0;

    static Sampling exhaustive() { return {}; }
    static Sampling random(std::size_t per_size, std::uint64_t seed) { return {Mode::Random, per_size, seed}; }
};

using TestVisitor = std::function<void(const TestCase&)>;

struct SubsetStats {
    std::uint64_t emitted = 0;
    std::vector<std::string> warnings;  // e.g. random draws capped at the population
};

/// Builds one test per chosen target subset of `run`: the subset's rts plus
/// every standard. Exhaustive mode walks each size in lexicographic subset
/// order; random mode draws distinct subsets per size, emitted in
/// lexicographic order.
SubsetStats subset_tests(const Rtt& run, const CompoundCatalog& catalog, const std::vector<std::size_t>& sizes,
                         const Sampling& sampling, const TestVisitor& visit);

/// Same, from a peak list labeled with every catalog compound.
SubsetStats subset_tests(const PeakList& labeled, const CompoundCatalog& catalog,
                         const std::vector<std::size_t>& sizes, const Sampling& sampling, const TestVisitor& visit);

/// The test for one explicit subset of target ids.
TestCase make_test(const Rtt& run, const CompoundCatalog& catalog, const std::vector<CompoundId>& subset,
                   std::string source = {});

/// Merges interferent peaks into a test. Throws ValidationError when an rt
/// coincides with an existing peak.
TestCase inject_interferents(const TestCase& test, const std::vector<double>& rts);

/// Draws `count` interferent rts inside the span of `reference`, at least
/// `min_gap` seconds from every reference rt unless `near_targets` is set,
/// and never on top of an existing sample peak.
std::vector<double> random_interferents(const TestCase& test, const Rtt& reference, std::size_t count,
                                        std::uint64_t seed, double min_gap = 5.0, bool near_targets = false);

// ---------------------------------------------------------------------------
// Drift simulation

struct DriftBump {
    double center = 0.0;     // seconds
    double amplitude = 0.0;  // seconds, signed
    double width = 1.0;      // seconds
};

/// t -> a*t + b + sum amp * exp(-(t - c)^2 / (2 w^2)).
struct DriftModel {
    double a = 1.0;
    double b = 0.0;
    std::vector<DriftBump> bumps;
    std::uint64_t seed = 0;

    [[nodiscard]] double operator()(double t) const;

    /// Seeded model over [lo, hi]: scale within 1 +- 2%, offset within
    /// +-2 s and `n_bumps` bumps whose amplitude is up to
    /// `amplitude_fraction` of their center time.
    static DriftModel random(std::uint64_t seed, double lo, double hi, std::size_t n_bumps = 3,
                             double amplitude_fraction = 0.01);
};

/// Maps every rt through the model. Throws OrderViolationError naming the
/// first compound pair whose order the model would break.
Rtt drift_simulate(const Rtt& base, const DriftModel& model);

// ---------------------------------------------------------------------------
// Evaluation

struct TestOutcome {
    std::size_t index = 0;
    std::string source;
    std::size_t correct_rank = 0;       // 1-based rank of the true assignment; 0 when absent
    std::size_t n_ranked = 0;
    double top_msr = 0.0;               // NaN when nothing ranked
    std::size_t peaks = 0;
    std::size_t peaks_correct = 0;      // top-1 per-peak agreement
    std::size_t interf_tp = 0;
    std::size_t interf_fp = 0;
    std::size_t interf_fn = 0;
    bool starved = false;               // nothing ranked, or every peak called interferent
    double seconds = 0.0;
};

struct EvalReport {
    std::size_t tests = 0;
    std::size_t max_rank = 0;
    std::vector<double> rank_accuracy;  // [k-1]: share of tests whose truth ranks exactly k
    std::vector<double> topk_accuracy;  // [k-1]: share whose truth ranks within k
    double peak_accuracy = 0.0;
    double interferent_precision = 1.0; // 1 when nothing was called interferent
    double interferent_recall = 1.0;    // 1 when nothing was an interferent
    std::size_t starved = 0;
    double total_seconds = 0.0;
    double max_seconds = 0.0;
    std::vector<TestOutcome> outcomes;

    [[nodiscard]] double top1() const { return topk_accuracy.empty() ? 0.0 : topk_accuracy.front(); }
};

/// Matches every test and compares the ranking against the truth. Runs
/// across cfg.jobs threads; outcomes stay in test order.
EvalReport evaluate(const RttLibrary& lib, const std::vector<TestCase>& tests, const MatchConfig& cfg);

// ---------------------------------------------------------------------------
// Test-suite files: JSON Lines, one test per line.

void write_test_case(std::ostream& out, const TestCase& test, const CompoundCatalog& catalog);
std::vector<TestCase> read_test_suite(std::istream& in, const CompoundCatalog& catalog);
std::vector<TestCase> load_test_suite_file(const std::string& path, const CompoundCatalog& catalog);

}  // namespace rtt
