#include "rtt/testgen.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <thread>

#include "json.hpp"

namespace rtt {

BigCount binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    BigCount c = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        c *= n - k + i;
        c /= i;
    }
    return c;
}

BigCount count_tests(std::size_t n_tgt, const std::vector<std::size_t>& sizes, std::size_t n_chroms) {
    BigCount total = 0;
    for (std::size_t s : sizes) {
        if (s < 1 || s > n_tgt) {
            throw ValidationError("subset size " + std::to_string(s) + " is outside 1.." + std::to_string(n_tgt));
        }
        total += binomial(n_tgt, s);
    }
    return total * n_chroms;
}

void TestCase::validate(const CompoundCatalog& catalog) const {
    validate_sample(sample, catalog, false);
    if (truth.size() != sample.unknowns.size()) throw ValidationError("test truth must cover every unknown peak");
    std::set<CompoundId> seen;
    for (CompoundId id : truth) {
        if (id == kInterferent) continue;
        if (id < 0 || static_cast<std::size_t>(id) >= catalog.size() || !catalog.is_target(id)) {
            throw ValidationError("test truth names " + std::to_string(id) + ", which is not a catalog target");
        }
        if (!seen.insert(id).second) throw ValidationError("test truth repeats compound " + catalog.label_of(id));
    }
}

TestCase make_test(const Rtt& run, const CompoundCatalog& catalog, const std::vector<CompoundId>& subset,
                   std::string source) {
    TestCase t;
    t.source = std::move(source);
    for (CompoundId s : catalog.standards()) t.sample.standards.emplace(s, run.rt(s));
    std::vector<std::pair<double, CompoundId>> peaks;
    for (CompoundId id : subset) peaks.emplace_back(run.rt(id), id);
    std::sort(peaks.begin(), peaks.end());
    for (const auto& [rt, id] : peaks) {
        t.sample.unknowns.push_back(rt);
        t.truth.push_back(id);
    }
    return t;
}

namespace {

std::string subset_source(const std::string& run, const std::vector<CompoundId>& subset) {
    std::string s = run + "{";
    for (std::size_t i = 0; i < subset.size(); ++i) s += (i ? "," : "") + std::to_string(subset[i]);
    return s + "}";
}

/// Advances a k-combination of {0..n-1} in lexicographic order; false at the end.
bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
    const std::size_t k = c.size();
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
    return true;
}

}  // namespace

SubsetStats subset_tests(const Rtt& run, const CompoundCatalog& catalog, const std::vector<std::size_t>& sizes,
                         const Sampling& sampling, const TestVisitor& visit) {
    validate_rtt(run, catalog.size());
    const auto& targets = catalog.targets();
    const std::size_t n = targets.size();
    for (std::size_t s : sizes) {
        if (s < 1 || s > n) throw ValidationError("subset size " + std::to_string(s) + " is outside 1.." + std::to_string(n));
    }
    const std::string run_id = run.provenance.describe();

    SubsetStats stats;
    auto emit = [&](const std::vector<std::size_t>& combo) {
        std::vector<CompoundId> subset;
        subset.reserve(combo.size());
        for (std::size_t i : combo) subset.push_back(targets[i]);
        visit(make_test(run, catalog, subset, subset_source(run_id, subset)));
        ++stats.emitted;
    };

    std::mt19937_64 rng(sampling.seed);
    for (std::size_t size : sizes) {
        const BigCount population = binomial(n, size);
        const bool exhaustive = sampling.mode == Sampling::Mode::Exhaustive || population <= sampling.per_size;
        if (sampling.mode == Sampling::Mode::Random && population < sampling.per_size) {
            stats.warnings.push_back("size " + std::to_string(size) + ": only " + population.str() +
                                     " subsets exist; requested " + std::to_string(sampling.per_size));
        }
        if (exhaustive) {
            std::vector<std::size_t> combo(size);
            for (std::size_t i = 0; i < size; ++i) combo[i] = i;
            do emit(combo);
            while (next_combination(combo, n));
            continue;
        }
        // Floyd's algorithm per draw; duplicates are redrawn.
        std::set<std::vector<std::size_t>> drawn;
        while (drawn.size() < sampling.per_size) {
            std::set<std::size_t> pick;
            for (std::size_t j = n - size; j < n; ++j) {
                const std::size_t r = std::uniform_int_distribution<std::size_t>(0, j)(rng);
                if (!pick.insert(r).second) pick.insert(j);
            }
            drawn.emplace(pick.begin(), pick.end());
        }
        for (const auto& combo : drawn) emit(combo);
    }
    return stats;
}

SubsetStats subset_tests(const PeakList& labeled, const CompoundCatalog& catalog,
                         const std::vector<std::size_t>& sizes, const Sampling& sampling, const TestVisitor& visit) {
    Rtt run;
    run.rts.assign(catalog.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<bool> seen(catalog.size(), false);
    for (const auto& p : labeled.peaks) {
        if (!p.label || *p.label == kInterferent) continue;
        const auto id = static_cast<std::size_t>(*p.label);
        if (id >= catalog.size()) throw ValidationError("peak label outside the catalog");
        if (seen[id]) throw ValidationError("compound " + catalog.label_of(*p.label) + " is labeled twice");
        seen[id] = true;
        run.rts[id] = p.rt;
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) {
            throw ValidationError("labeled run lacks compound " + catalog.label_of(static_cast<CompoundId>(i)));
        }
    }
    run.provenance = Provenance::measured(labeled.source_id);
    return subset_tests(run, catalog, sizes, sampling, visit);
}

namespace {

constexpr double kCollision = 1e-9;

bool occupied(const TestCase& t, double rt) {
    for (const auto& [id, s] : t.sample.standards) {
        if (std::abs(s - rt) <= kCollision) return true;
    }
    return std::any_of(t.sample.unknowns.begin(), t.sample.unknowns.end(),
                       [rt](double u) { return std::abs(u - rt) <= kCollision; });
}

}  // namespace

TestCase inject_interferents(const TestCase& test, const std::vector<double>& rts) {
    TestCase out = test;
    std::vector<std::pair<double, CompoundId>> peaks;
    for (std::size_t j = 0; j < test.sample.unknowns.size(); ++j) peaks.emplace_back(test.sample.unknowns[j], test.truth[j]);
    for (double rt : rts) {
        if (!(rt > 0.0) || !std::isfinite(rt)) throw ValidationError("interferent rt must be positive and finite");
        if (occupied(out, rt)) throw ValidationError("interferent at " + std::to_string(rt) + " s collides with an existing peak");
        peaks.emplace_back(rt, kInterferent);
        out.sample.unknowns.push_back(rt);
    }
    std::sort(peaks.begin(), peaks.end());
    out.sample.unknowns.clear();
    out.truth.clear();
    for (const auto& [rt, id] : peaks) {
        out.sample.unknowns.push_back(rt);
        out.truth.push_back(id);
    }
    return out;
}

std::vector<double> random_interferents(const TestCase& test, const Rtt& reference, std::size_t count,
                                        std::uint64_t seed, double min_gap, bool near_targets) {
    if (reference.rts.empty()) throw ValidationError("reference trajectory is empty");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(reference.rts.front(), reference.rts.back());
    TestCase scratch = test;
    std::vector<double> out;
    std::size_t attempts = 0;
    while (out.size() < count) {
        if (++attempts > 10000 * (count + 1)) {
            throw ValidationError("could not place " + std::to_string(count) + " interferents with a " +
                                  std::to_string(min_gap) + " s gap");
        }
        // Tenth-of-a-second resolution, like a peak table.
        const double rt = std::round(uni(rng) * 10.0) / 10.0;
        if (occupied(scratch, rt)) continue;
        if (!near_targets && std::any_of(reference.rts.begin(), reference.rts.end(),
                                         [&](double r) { return std::abs(r - rt) < min_gap; })) {
            continue;
        }
        out.push_back(rt);
        scratch.sample.unknowns.push_back(rt);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double DriftModel::operator()(double t) const {
    double v = a * t + b;
    for (const auto& bump : bumps) {
        const double d = t - bump.center;
        v += bump.amplitude * std::exp(-d * d / (2.0 * bump.width * bump.width));
    }
    return v;
}

DriftModel DriftModel::random(std::uint64_t seed, double lo, double hi, std::size_t n_bumps,
                              double amplitude_fraction) {
    if (!(hi > lo)) throw ValidationError("drift range must be non-empty");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    DriftModel m;
    m.seed = seed;
    m.a = 1.0 + 0.04 * (unit(rng) - 0.5);
    m.b = 4.0 * (unit(rng) - 0.5);
    const double span = hi - lo;
    for (std::size_t i = 0; i < n_bumps; ++i) {
        DriftBump bump;
        bump.center = lo + span * unit(rng);
        bump.amplitude = amplitude_fraction * bump.center * (2.0 * unit(rng) - 1.0);
        bump.width = span * (0.08 + 0.17 * unit(rng));
        m.bumps.push_back(bump);
    }
    return m;
}

Rtt drift_simulate(const Rtt& base, const DriftModel& model) {
    Rtt out;
    out.provenance = Provenance::measured(base.provenance.describe() + "+drift(" + std::to_string(model.seed) + ")");
    out.rts.reserve(base.rts.size());
    for (std::size_t i = 0; i < base.rts.size(); ++i) {
        const double v = model(base.rts[i]);
        if (!std::isfinite(v) || !(v > 0.0)) {
            throw OrderViolationError("drift maps compound " + std::to_string(i) + " to a non-positive rt");
        }
        if (i > 0 && !(v > out.rts.back())) {
            throw OrderViolationError("drift reverses compounds " + std::to_string(i - 1) + " and " + std::to_string(i));
        }
        out.rts.push_back(v);
    }
    return out;
}

namespace {

TestOutcome evaluate_one(const RttLibrary& lib, const TestCase& test, const MatchConfig& cfg, std::size_t index) {
    TestOutcome o;
    o.index = index;
    o.source = test.source;
    o.peaks = test.truth.size();
    const auto start = std::chrono::steady_clock::now();
    MatchResult r = match(test.sample, lib, cfg);
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.n_ranked = r.ranked.size();
    o.top_msr = r.empty() ? std::numeric_limits<double>::quiet_NaN() : r.ranked.front().score.msr;
    for (std::size_t k = 0; k < r.ranked.size(); ++k) {
        if (r.ranked[k].assignment.mapping == test.truth) {
            o.correct_rank = k + 1;
            break;
        }
    }
    if (r.empty()) {
        o.starved = true;
        for (CompoundId t : test.truth) {
            if (t == kInterferent) ++o.interf_fn;
        }
        return o;
    }
    const auto& top = r.ranked.front().assignment.mapping;
    bool all_interferent = !top.empty();
    for (std::size_t j = 0; j < top.size(); ++j) {
        const bool called = top[j] == kInterferent;
        const bool actual = test.truth[j] == kInterferent;
        all_interferent = all_interferent && called;
        if (top[j] == test.truth[j]) ++o.peaks_correct;
        if (called && actual) ++o.interf_tp;
        if (called && !actual) ++o.interf_fp;
        if (!called && actual) ++o.interf_fn;
    }
    const bool has_targets = std::any_of(test.truth.begin(), test.truth.end(), [](CompoundId t) { return t != kInterferent; });
    o.starved = all_interferent && has_targets;
    return o;
}

}  // namespace

EvalReport evaluate(const RttLibrary& lib, const std::vector<TestCase>& tests, const MatchConfig& cfg) {
    cfg.validate();
    for (const auto& t : tests) t.validate(lib.catalog);

    EvalReport rep;
    rep.tests = tests.size();
    rep.outcomes.resize(tests.size());
    MatchConfig inner = cfg;
    inner.jobs = 1;
    const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(std::max<std::size_t>(tests.size(), 1))));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < tests.size(); ++i) rep.outcomes[i] = evaluate_one(lib, tests[i], inner, i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < tests.size(); i = next++) {
                    try {
                        rep.outcomes[i] = evaluate_one(lib, tests[i], inner, i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& w : workers) w.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::size_t peaks = 0, peaks_ok = 0, tp = 0, fp = 0, fn = 0;
    for (const auto& o : rep.outcomes) {
        rep.max_rank = std::max(rep.max_rank, o.n_ranked);
        peaks += o.peaks;
        peaks_ok += o.peaks_correct;
        tp += o.interf_tp;
        fp += o.interf_fp;
        fn += o.interf_fn;
        rep.starved += o.starved ? 1 : 0;
        rep.total_seconds += o.seconds;
        rep.max_seconds = std::max(rep.max_seconds, o.seconds);
    }
    rep.rank_accuracy.assign(rep.max_rank, 0.0);
    for (const auto& o : rep.outcomes) {
        if (o.correct_rank > 0) rep.rank_accuracy[o.correct_rank - 1] += 1.0;
    }
    double cumulative = 0.0;
    for (auto& a : rep.rank_accuracy) {
        a /= static_cast<double>(std::max<std::size_t>(rep.tests, 1));
        cumulative += a;
        rep.topk_accuracy.push_back(std::min(cumulative, 1.0));
    }
    rep.peak_accuracy = peaks ? static_cast<double>(peaks_ok) / static_cast<double>(peaks) : 0.0;
    if (tp + fp) rep.interferent_precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn) rep.interferent_recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return rep;
}

void write_test_case(std::ostream& out, const TestCase& test, const CompoundCatalog& catalog) {
    nlohmann::ordered_json j;
    j["source"] = test.source;
    nlohmann::ordered_json stds = nlohmann::ordered_json::object();
    for (const auto& [id, rt] : test.sample.standards) stds[catalog.label_of(id)] = rt;
    j["standards"] = stds;
    j["rts"] = test.sample.unknowns;
    nlohmann::ordered_json truth = nlohmann::ordered_json::array();
    for (CompoundId id : test.truth) truth.push_back(id == kInterferent ? std::string("INTERFERENT") : catalog.label_of(id));
    j["truth"] = truth;
    out << j.dump() << '\n';
}

std::vector<TestCase> read_test_suite(std::istream& in, const CompoundCatalog& catalog) {
    std::vector<TestCase> tests;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            TestCase t;
            t.source = j.value("source", std::string{});
            for (const auto& [key, value] : j.at("standards").items()) {
                const auto id = catalog.resolve(key);
                if (!id || !catalog.is_standard(*id)) throw ParseError(lineno, "unknown standard '" + key + "'");
                t.sample.standards[*id] = value.get<double>();
            }
            t.sample.unknowns = j.at("rts").get<std::vector<double>>();
            for (const auto& label : j.at("truth")) {
                const auto id = catalog.resolve(label.get<std::string>());
                if (!id) throw ParseError(lineno, "unknown label '" + label.get<std::string>() + "'");
                t.truth.push_back(*id);
            }
            t.validate(catalog);
            tests.push_back(std::move(t));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(lineno, std::string("malformed test record: ") + e.what());
        } catch (const ValidationError& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return tests;
}

std::vector<TestCase> load_test_suite_file(const std::string& path, const CompoundCatalog& catalog) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open test suite '" + path + "'");
    try {
        return read_test_suite(in, catalog);
    } catch (const ParseError& e) {
        throw InputError(path + ": " + e.what());
    }
}

}  // namespace rtt
