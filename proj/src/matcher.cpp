#include "rtt/matcher.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iterator>
#include <set>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "rtt/error.hpp"

namespace rtt {

// ---------------------------------------------------------------------------
// Configuration

ScreenKeep ScreenKeep::parse(std::string_view text) {
    const auto t = csv::trim(text);
    if (t == "all") return all();
    if (t == "default") return half_or_top20();
    if (t.find('.') != std::string_view::npos) {
        auto f = csv::to_double(t);
        if (!f || !(*f > 0.0 && *f <= 1.0)) {
            throw ValidationError("screen-keep fraction must be in (0, 1], got '" + std::string(t) + "'");
        }
        return share(*f);
    }
    auto k = csv::to_int(t);
    if (!k || *k < 1) throw ValidationError("screen-keep must be all, default, a fraction or a count >= 1");
    return top(static_cast<std::size_t>(*k));
}

std::size_t ScreenKeep::resolve(std::size_t n) const {
    switch (mode) {
        case Mode::All: return n;
        case Mode::Fraction:
            return std::min(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));
        case Mode::TopK: return std::min(n, count);
        case Mode::HalfOrTop20: return std::max((n + 1) / 2, std::min<std::size_t>(20, n));
    }
    return n;
}

void MatchConfig::validate() const {
    if (!(delta_t > 0.0)) throw ValidationError("delta_t must be > 0");
    if (!(kappa > 1.0) || !std::isfinite(kappa)) throw ValidationError("kappa must be a finite value > 1");
    if (screen_keep.mode == ScreenKeep::Mode::Fraction &&
        !(screen_keep.fraction > 0.0 && screen_keep.fraction <= 1.0)) {
        throw ValidationError("screen-keep fraction must be in (0, 1]");
    }
    if (screen_keep.mode == ScreenKeep::Mode::TopK && screen_keep.count == 0) {
        throw ValidationError("screen-keep count must be >= 1");
    }
}

std::size_t Assignment::interferent_count() const noexcept {
    return static_cast<std::size_t>(std::count(mapping.begin(), mapping.end(), kInterferent));
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int tuple_compare(const std::vector<CompoundId>& a, const std::vector<CompoundId>& b) {
    const auto key = [](CompoundId c) {
        return c == kInterferent ? std::numeric_limits<CompoundId>::max() : c;
    };
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto ka = key(a[i]), kb = key(b[i]);
        if (ka != kb) return ka < kb ? -1 : 1;
    }
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    return 0;
}

}  // namespace

bool ranks_before(const MatchEntry& a, const MatchEntry& b) {
    if (a.score.msr != b.score.msr) return a.score.msr < b.score.msr;
    const auto ia = a.assignment.interferent_count(), ib = b.assignment.interferent_count();
    if (ia != ib) return ia < ib;
    if (const int c = tuple_compare(a.assignment.mapping, b.assignment.mapping); c != 0) return c < 0;
    return a.score.lib_index < b.score.lib_index;
}

// ---------------------------------------------------------------------------
// Screening

double ssr_standards(const SamplePeaks& sample, const Rtt& rtt) {
    double ssr = 0.0;
    for (const auto& [id, rt] : sample.standards) {
        const double d = rtt.rt(id) - rt;
        ssr += d * d;
    }
    return ssr;
}

std::vector<std::size_t> screen_by_standards(const SamplePeaks& sample, const RttLibrary& lib,
                                             const MatchConfig& cfg) {
    if (!lib.usable()) throw EmptyLibraryError("empty library: no trajectories to match against");
    std::vector<std::size_t> order(lib.n_lib());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (sample.standards.empty()) return order;

    std::vector<double> ssr(lib.n_lib());
    for (std::size_t i = 0; i < ssr.size(); ++i) ssr[i] = ssr_standards(sample, lib.trajectories[i]);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ssr[a] < ssr[b]; });
    order.resize(cfg.screen_keep.resolve(order.size()));
    return order;
}

// ---------------------------------------------------------------------------
// Candidate generation

CandidateWindows candidate_windows(const SamplePeaks& sample, const Rtt& rtt,
                                   const CompoundCatalog& catalog, const MatchConfig& cfg) {
    // Region boundaries from the standards actually present, in catalog order.
    std::vector<CompoundId> std_ids;
    std::vector<double> std_rts;
    for (const auto& [id, rt] : sample.standards) {
        std_ids.push_back(id);
        std_rts.push_back(rt);
    }
    const auto n = static_cast<CompoundId>(catalog.size());

    CandidateWindows w;
    w.candidates.resize(sample.unknowns.size());
    w.forced_interferent.resize(sample.unknowns.size(), false);
    for (std::size_t j = 0; j < sample.unknowns.size(); ++j) {
        const double p = sample.unknowns[j];
        const auto k = static_cast<std::size_t>(std::lower_bound(std_rts.begin(), std_rts.end(), p) - std_rts.begin());
        const CompoundId lo = k > 0 ? std_ids[k - 1] : -1;
        const CompoundId hi = k < std_ids.size() ? std_ids[k] : n;
        for (CompoundId c = lo + 1; c < hi; ++c) {
            if (catalog.is_standard(c)) continue;
            if (std::abs(rtt.rt(c) - p) <= cfg.delta_t) w.candidates[j].push_back(c);
        }
        w.forced_interferent[j] = w.candidates[j].empty();
    }
    return w;
}

namespace {

/// Depth-first generator over admissible assignments. `bound_[j]` is the
/// largest id the last assigned peak before j may carry so that peaks j..
/// can still be completed; the search therefore never dead-ends.
class Enumerator {
public:
    Enumerator(const SamplePeaks& sample, const Rtt& rtt, const CandidateWindows& windows, bool branch)
        : sample_(sample), rtt_(rtt), w_(windows), branch_(branch), m_(sample.unknowns.size()) {
        bound_.assign(m_ + 1, std::numeric_limits<CompoundId>::max());
        for (std::size_t j = m_; j-- > 0;) {
            if (w_.forced_interferent[j] || branch_) {
                bound_[j] = bound_[j + 1];
                continue;
            }
            const auto& cand = w_.candidates[j];
            const auto it = std::upper_bound(cand.begin(), cand.end(), bound_[j + 1]);
            bound_[j] = it == cand.begin() ? -2 : *std::prev(it) - 1;
        }
        mapping_.assign(m_, kInterferent);
        residual_.assign(m_, kNaN);
    }

    /// visit(mapping, residuals, ssr_including_start, n_interferent)
    template <typename Visit>
    std::uint64_t run(double ssr_start, Visit&& visit) {
        count_ = 0;
        if (bound_[0] < -1) return 0;
        descend(0, -1, ssr_start, 0, visit);
        return count_;
    }

private:
    template <typename Visit>
    void descend(std::size_t j, CompoundId last, double acc, std::size_t n_interf, Visit& visit) {
        if (j == m_) {
            ++count_;
            visit(mapping_, residual_, acc, n_interf);
            return;
        }
        if (!w_.forced_interferent[j]) {
            const double p = sample_.unknowns[j];
            for (CompoundId c : w_.candidates[j]) {
                if (c <= last) continue;
                if (c > bound_[j + 1]) break;
                const double d = rtt_.rt(c) - p;
                mapping_[j] = c;
                residual_[j] = d * d;
                descend(j + 1, c, acc + residual_[j], n_interf, visit);
            }
            if (!branch_) return;
        }
        mapping_[j] = kInterferent;
        residual_[j] = kNaN;
        descend(j + 1, last, acc, n_interf + 1, visit);
    }

    const SamplePeaks& sample_;
    const Rtt& rtt_;
    const CandidateWindows& w_;
    bool branch_;
    std::size_t m_;
    std::vector<CompoundId> bound_;
    std::vector<CompoundId> mapping_;
    std::vector<double> residual_;
    std::uint64_t count_ = 0;
};

}  // namespace

std::uint64_t enumerate_candidates(const SamplePeaks& sample, const Rtt& rtt,
                                   const CompoundCatalog& catalog, const MatchConfig& cfg,
                                   const AssignmentVisitor& visit) {
    const auto windows = candidate_windows(sample, rtt, catalog, cfg);
    Enumerator en(sample, rtt, windows, cfg.branch_interferents);
    Assignment a;
    return en.run(0.0, [&](const std::vector<CompoundId>& mapping, const std::vector<double>&, double, std::size_t) {
        a.mapping = mapping;
        visit(a);
    });
}

std::vector<Assignment> collect_candidates(const SamplePeaks& sample, const Rtt& rtt,
                                           const CompoundCatalog& catalog, const MatchConfig& cfg) {
    std::vector<Assignment> out;
    enumerate_candidates(sample, rtt, catalog, cfg, [&](const Assignment& a) { out.push_back(a); });
    return out;
}

// ---------------------------------------------------------------------------
// Scoring

MatchScore score(const Assignment& assignment, const Rtt& rtt, const SamplePeaks& sample,
                 std::size_t lib_index) {
    if (assignment.mapping.size() != sample.unknowns.size()) {
        throw ValidationError("assignment covers " + std::to_string(assignment.mapping.size()) +
                              " peaks, sample has " + std::to_string(sample.unknowns.size()));
    }
    MatchScore s;
    s.lib_index = lib_index;
    s.ssr_std = ssr_standards(sample, rtt);
    s.n_std = sample.standards.size();
    s.residuals.assign(sample.unknowns.size(), kNaN);
    double total = s.ssr_std;
    for (std::size_t j = 0; j < sample.unknowns.size(); ++j) {
        const CompoundId c = assignment.mapping[j];
        if (c == kInterferent) {
            s.interferents.push_back(j);
            continue;
        }
        const double d = rtt.rt(c) - sample.unknowns[j];
        s.residuals[j] = d * d;
        total += s.residuals[j];
    }
    s.ssr_total = total;
    s.n_paired = s.n_std + sample.unknowns.size() - s.interferents.size();
    if (s.n_paired == 0) throw UnscorableError("assignment pairs no compounds");
    s.msr = total / static_cast<double>(s.n_paired);
    return s;
}

InterferentCheck detect_interferents(const MatchEntry& entry, const MatchConfig& cfg) {
    InterferentCheck out{entry, 0, false};
    out.variant.reflagged = true;
    auto& a = out.variant.assignment.mapping;
    auto& s = out.variant.score;
    const std::size_t m = a.size();

    while (true) {
        const double threshold = cfg.kappa * s.msr;
        std::size_t flagged = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (a[j] == kInterferent) continue;
            if (s.residuals[j] > threshold) {
                a[j] = kInterferent;
                s.residuals[j] = kNaN;
                ++flagged;
            }
        }
        if (flagged == 0) break;
        out.newly_flagged += flagged;

        double total = s.ssr_std;
        s.interferents.clear();
        for (std::size_t j = 0; j < m; ++j) {
            if (a[j] == kInterferent) s.interferents.push_back(j);
            else total += s.residuals[j];
        }
        if (s.interferents.size() == m) {
            out.degenerate = true;
            break;
        }
        s.ssr_total = total;
        s.n_paired = s.n_std + m - s.interferents.size();
        s.msr = total / static_cast<double>(s.n_paired);
        if (!cfg.iterate_interferents) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Matching

namespace {

struct RankLess {
    bool operator()(const MatchEntry& a, const MatchEntry& b) const { return ranks_before(a, b); }
};

/// Ordered, optionally bounded set of ranked entries; duplicates collapse.
class RankedPool {
public:
    explicit RankedPool(std::size_t cap) : cap_(cap) {}

    [[nodiscard]] bool admits(double msr) const {
        return cap_ == 0 || set_.size() < cap_ || msr <= std::prev(set_.end())->score.msr;
    }

    void offer(MatchEntry&& e) {
        // The same mapping reached directly and by reflagging keeps the direct entry.
        if (auto it = set_.find(e); it != set_.end()) {
            if (!it->reflagged || e.reflagged) return;
            set_.erase(it);
        }
        set_.insert(std::move(e));
        if (cap_ != 0 && set_.size() > cap_) set_.erase(std::prev(set_.end()));
    }

    void absorb(RankedPool&& other) {
        for (auto it = other.set_.begin(); it != other.set_.end();) {
            auto node = other.set_.extract(it++);
            if (!admits(node.value().score.msr)) continue;
            offer(std::move(node.value()));
        }
    }

    std::vector<MatchEntry> take() && {
        std::vector<MatchEntry> out;
        out.reserve(set_.size());
        for (auto it = set_.begin(); it != set_.end();) out.push_back(std::move(set_.extract(it++).value()));
        return out;
    }

private:
    std::size_t cap_;
    std::set<MatchEntry, RankLess> set_;
};

struct TrajectoryOutcome {
    std::uint64_t assignments = 0;
    bool infeasible = false;
    double worst_miss = 0.0;   // largest distance from a peak to its nearest region compound
};

TrajectoryOutcome match_trajectory(const SamplePeaks& sample, const RttLibrary& lib, std::size_t index,
                                   const MatchConfig& cfg, RankedPool& pool) {
    const Rtt& rtt = lib.trajectories[index];
    const auto windows = candidate_windows(sample, rtt, lib.catalog, cfg);
    Enumerator en(sample, rtt, windows, cfg.branch_interferents);

    const double ssr_std = ssr_standards(sample, rtt);
    const std::size_t n_std = sample.standards.size();
    const std::size_t m = sample.unknowns.size();

    TrajectoryOutcome outcome;
    outcome.assignments = en.run(ssr_std, [&](const std::vector<CompoundId>& mapping,
                                              const std::vector<double>& residuals, double ssr,
                                              std::size_t n_interf) {
        const std::size_t n_paired = n_std + m - n_interf;
        if (n_paired == 0) return;
        const double msr = ssr / static_cast<double>(n_paired);
        const double threshold = cfg.kappa * msr;
        bool outlier = false;
        for (std::size_t j = 0; j < m && !outlier; ++j) outlier = mapping[j] != kInterferent && residuals[j] > threshold;

        if (!pool.admits(msr) && !outlier) return;

        MatchEntry entry;
        entry.assignment.mapping = mapping;
        auto& s = entry.score;
        s.lib_index = index;
        s.ssr_std = ssr_std;
        s.ssr_total = ssr;
        s.n_std = n_std;
        s.n_paired = n_paired;
        s.msr = msr;
        s.residuals = residuals;
        for (std::size_t j = 0; j < m; ++j) {
            if (mapping[j] == kInterferent) s.interferents.push_back(j);
        }
        if (outlier) {
            auto check = detect_interferents(entry, cfg);
            if (check.changed() && pool.admits(check.variant.score.msr)) pool.offer(std::move(check.variant));
        }
        if (pool.admits(msr)) pool.offer(std::move(entry));
    });

    if (outcome.assignments == 0) {
        outcome.infeasible = true;
        for (std::size_t j = 0; j < m; ++j) {
            double best = std::numeric_limits<double>::infinity();
            for (CompoundId c : lib.catalog.targets()) best = std::min(best, std::abs(rtt.rt(c) - sample.unknowns[j]));
            outcome.worst_miss = std::max(outcome.worst_miss, best);
        }
    }
    return outcome;
}

std::string format_seconds(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

MatchResult match(const SamplePeaks& sample, const RttLibrary& lib, const MatchConfig& cfg) {
    cfg.validate();
    if (!lib.usable()) throw EmptyLibraryError("empty library: no trajectories to match against");
    validate_sample(sample, lib.catalog, cfg.require_standards);

    MatchResult result;
    result.screened = screen_by_standards(sample, lib, cfg);

    const std::size_t n = result.screened.size();
    const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(n)));
    std::vector<RankedPool> pools(jobs, RankedPool(cfg.max_results));
    std::vector<TrajectoryOutcome> outcomes(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&](unsigned w) {
        for (std::size_t i = next++; i < n; i = next++) {
            outcomes[i] = match_trajectory(sample, lib, result.screened[i], cfg, pools[w]);
        }
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < jobs; ++w) threads.emplace_back(worker, w);
        for (auto& t : threads) t.join();
    }
    for (unsigned w = 1; w < jobs; ++w) pools[0].absorb(std::move(pools[w]));
    result.ranked = std::move(pools[0]).take();

    for (const auto& o : outcomes) result.assignments += o.assignments;
    if (result.ranked.empty()) {
        std::ostringstream os;
        os << "no admissible assignment against any of " << n << " screened trajectories";
        double smallest = std::numeric_limits<double>::infinity();
        for (const auto& o : outcomes) {
            if (o.infeasible) smallest = std::min(smallest, o.worst_miss);
        }
        if (std::isfinite(smallest)) {
            os << "; smallest window miss " << format_seconds(smallest) << " s (delta-t "
               << format_seconds(cfg.delta_t) << " s)";
        } else {
            os << "; every assignment left nothing paired";
        }
        result.diagnostic = os.str();
    }
    return result;
}

PeakList align_to_reference(const SamplePeaks& sample, const MatchResult& result, const Rtt& reference) {
    PeakList out;
    out.source_id = "aligned";
    if (result.ranked.empty()) throw ValidationError("cannot align: match result is empty");
    const auto& top = result.ranked.front().assignment.mapping;
    for (const auto& [id, rt] : sample.standards) {
        (void)rt;
        out.peaks.push_back(Peak{reference.rt(id), std::nullopt, id});
    }
    for (std::size_t j = 0; j < sample.unknowns.size(); ++j) {
        const CompoundId c = top.at(j);
        out.peaks.push_back(c == kInterferent ? Peak{sample.unknowns[j], std::nullopt, kInterferent}
                                              : Peak{reference.rt(c), std::nullopt, c});
    }
    std::stable_sort(out.peaks.begin(), out.peaks.end(), [](const Peak& a, const Peak& b) { return a.rt < b.rt; });
    return out;
}

SamplePeaks without_standards(const SamplePeaks& sample) { return SamplePeaks{{}, sample.unknowns}; }

}  // namespace rtt
