#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace oracle {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool admissible_target(const rtt::SamplePeaks& sample, const rtt::Rtt& rtt, rtt::CompoundId c, double p,
                       double delta_t) {
    if (std::abs(rtt.rt(c) - p) > delta_t) return false;
    // Same side of every present standard in both time and elution order.
    for (const auto& [s, srt] : sample.standards) {
        if ((srt < p) != (s < c)) return false;
    }
    return true;
}

std::size_t keep_count(const rtt::ScreenKeep& k, std::size_t n) {
    using M = rtt::ScreenKeep::Mode;
    if (k.mode == M::All) return n;
    if (k.mode == M::TopK) return std::min(n, k.count);
    if (k.mode == M::Fraction) return std::min(n, static_cast<std::size_t>(std::ceil(k.fraction * double(n))));
    const std::size_t half = n / 2 + n % 2;
    return std::max(half, std::min<std::size_t>(n, 20));
}

double ssr_std(const rtt::SamplePeaks& sample, const rtt::Rtt& rtt) {
    double s = 0.0;
    for (const auto& [id, rt] : sample.standards) s += (rtt.rt(id) - rt) * (rtt.rt(id) - rt);
    return s;
}

/// Scores a mapping with the standards first and peaks in order.
bool score_into(rtt::MatchEntry& e, const rtt::SamplePeaks& sample, const rtt::Rtt& rtt, std::size_t lib_index) {
    auto& s = e.score;
    s = {};
    s.lib_index = lib_index;
    s.ssr_std = ssr_std(sample, rtt);
    s.n_std = sample.standards.size();
    double acc = s.ssr_std;
    for (std::size_t j = 0; j < sample.unknowns.size(); ++j) {
        const auto c = e.assignment.mapping[j];
        if (c == rtt::kInterferent) {
            s.interferents.push_back(j);
            s.residuals.push_back(kNaN);
            continue;
        }
        const double d = rtt.rt(c) - sample.unknowns[j];
        s.residuals.push_back(d * d);
        acc += d * d;
    }
    s.ssr_total = acc;
    s.n_paired = s.n_std + sample.unknowns.size() - s.interferents.size();
    if (s.n_paired == 0) return false;
    s.msr = acc / double(s.n_paired);
    return true;
}

bool before(const rtt::MatchEntry& a, const rtt::MatchEntry& b) {
    if (a.score.msr < b.score.msr) return true;
    if (b.score.msr < a.score.msr) return false;
    if (a.score.interferents.size() != b.score.interferents.size()) {
        return a.score.interferents.size() < b.score.interferents.size();
    }
    std::vector<std::int64_t> ka, kb;
    for (auto c : a.assignment.mapping) ka.push_back(c < 0 ? std::numeric_limits<std::int64_t>::max() : c);
    for (auto c : b.assignment.mapping) kb.push_back(c < 0 ? std::numeric_limits<std::int64_t>::max() : c);
    if (ka != kb) return ka < kb;
    return a.score.lib_index < b.score.lib_index;
}

}  // namespace

std::vector<std::vector<rtt::CompoundId>> naive_candidates(const rtt::SamplePeaks& sample, const rtt::Rtt& rtt,
                                                           const rtt::CompoundCatalog& catalog,
                                                           const rtt::MatchConfig& cfg) {
    const std::size_t m = sample.unknowns.size();
    const auto& targets = catalog.targets();
    std::vector<bool> has_candidate(m, false);
    for (std::size_t j = 0; j < m; ++j) {
        for (auto c : targets) has_candidate[j] = has_candidate[j] || admissible_target(sample, rtt, c, sample.unknowns[j], cfg.delta_t);
    }

    std::vector<std::vector<rtt::CompoundId>> out;
    // Odometer over (interferent, target_0, ..., target_{T-1}) per peak.
    std::vector<std::size_t> digit(m, 0);
    const std::size_t base = targets.size() + 1;
    while (true) {
        std::vector<rtt::CompoundId> mapping(m);
        bool ok = true;
        rtt::CompoundId last = -1;
        for (std::size_t j = 0; j < m && ok; ++j) {
            if (digit[j] == 0) {
                mapping[j] = rtt::kInterferent;
                ok = cfg.branch_interferents || !has_candidate[j];
                continue;
            }
            const auto c = targets[digit[j] - 1];
            mapping[j] = c;
            ok = c > last && admissible_target(sample, rtt, c, sample.unknowns[j], cfg.delta_t);
            last = c;
        }
        if (ok) out.push_back(mapping);
        std::size_t j = m;
        bool done = m == 0;
        while (j > 0) {
            --j;
            if (++digit[j] < base) break;
            digit[j] = 0;
            if (j == 0) done = true;
        }
        if (done) break;
    }
    // Lexicographic with the interferent sorting after every target.
    auto key = [](const std::vector<rtt::CompoundId>& v) {
        std::vector<std::int64_t> k;
        for (auto c : v) k.push_back(c < 0 ? std::numeric_limits<std::int64_t>::max() : c);
        return k;
    };
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    return out;
}

std::vector<rtt::MatchEntry> naive_match(const rtt::SamplePeaks& sample, const rtt::RttLibrary& lib,
                                         const rtt::MatchConfig& cfg) {
    std::vector<std::size_t> order(lib.n_lib());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (!sample.standards.empty()) {
        std::vector<double> key(lib.n_lib());
        for (std::size_t i = 0; i < key.size(); ++i) key[i] = ssr_std(sample, lib.trajectories[i]);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
        order.resize(keep_count(cfg.screen_keep, order.size()));
    }

    std::map<std::pair<std::vector<rtt::CompoundId>, std::size_t>, rtt::MatchEntry> all;
    auto add = [&](rtt::MatchEntry e) {
        auto key = std::make_pair(e.assignment.mapping, e.score.lib_index);
        auto it = all.find(key);
        if (it == all.end()) {
            all.emplace(std::move(key), std::move(e));
        } else if (it->second.reflagged && !e.reflagged) {
            it->second = std::move(e);
        }
    };
    for (std::size_t idx : order) {
        const auto& rtt = lib.trajectories[idx];
        for (auto& mapping : naive_candidates(sample, rtt, lib.catalog, cfg)) {
            rtt::MatchEntry e;
            e.assignment.mapping = mapping;
            if (!score_into(e, sample, rtt, idx)) continue;

            // Reflagging: drop pairs whose squared residual exceeds kappa * msr.
            rtt::MatchEntry v = e;
            v.reflagged = true;
            bool changed = false, degenerate = false;
            while (true) {
                const double limit = cfg.kappa * v.score.msr;
                bool any = false;
                for (std::size_t j = 0; j < mapping.size(); ++j) {
                    if (v.assignment.mapping[j] != rtt::kInterferent && v.score.residuals[j] > limit) {
                        v.assignment.mapping[j] = rtt::kInterferent;
                        any = true;
                    }
                }
                if (!any) break;
                changed = true;
                if (v.assignment.interferent_count() == mapping.size()) {
                    degenerate = true;
                    break;
                }
                score_into(v, sample, rtt, idx);
                v.reflagged = true;
                if (!cfg.iterate_interferents) break;
            }
            if (changed && !degenerate) add(v);
            add(e);
        }
    }
    std::vector<rtt::MatchEntry> ranked;
    for (auto& [k, e] : all) ranked.push_back(std::move(e));
    std::sort(ranked.begin(), ranked.end(), before);
    if (cfg.max_results > 0 && ranked.size() > cfg.max_results) ranked.resize(cfg.max_results);
    return ranked;
}

std::uint64_t pascal(unsigned n, unsigned k) {
    std::vector<std::vector<std::uint64_t>> row(n + 1);
    for (unsigned i = 0; i <= n; ++i) {
        row[i].assign(i + 1, 1);
        for (unsigned j = 1; j < i; ++j) row[i][j] = row[i - 1][j - 1] + row[i - 1][j];
    }
    return k > n ? 0 : row[n][k];
}

double emg_mode_grid(const rtt::EmgPeak& p, double step) {
    double best_t = p.mu, best = -1.0;
    const double lo = p.mu - 3.0 * p.sigma, hi = p.mu + p.tau + 3.0 * p.sigma;
    for (double t = lo; t <= hi; t += step) {
        // Closed-form density, evaluated without the library's stable branch.
        const double z = (p.mu + p.sigma * p.sigma / p.tau - t) / (std::sqrt(2.0) * p.sigma);
        const double v = p.area / (2.0 * p.tau) *
                         std::exp(p.sigma * p.sigma / (2.0 * p.tau * p.tau) - (t - p.mu) / p.tau) * std::erfc(z);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }
    return best_t;
}

double trapezoid(const rtt::Chromatogram& c) {
    double s = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i) s += 0.5 * (c.signal[i - 1] + c.signal[i]) * c.dt;
    return s;
}

CowBest cow_exhaustive(const rtt::Chromatogram& sample, const rtt::Chromatogram& reference, const rtt::CowConfig& cfg) {
    const auto layout = rtt::cow_layout(reference.size(), sample.size(), cfg);
    const std::size_t segs = layout.reference.size() - 1;
    const std::size_t last = sample.size() - 1;
    CowBest best{-std::numeric_limits<double>::infinity(), {}};
    std::vector<std::size_t> b(segs + 1);
    b[0] = 0;
    b[segs] = last;

    // Recursive walk over interior boundaries.
    auto rec = [&](auto&& self, std::size_t k) -> void {
        if (k == segs) {
            double total = 0.0;
            for (std::size_t i = 1; i <= segs; ++i) {
                if (b[i] <= b[i - 1]) return;
                total += rtt::cow_segment_benefit(reference.signal, layout.reference[i - 1], layout.reference[i],
                                                  sample.signal, b[i - 1], b[i], cfg.power);
            }
            if (total > best.benefit) best = {total, b};
            return;
        }
        const long nom = static_cast<long>(layout.nominal[k]);
        for (long s = nom - static_cast<long>(cfg.slack); s <= nom + static_cast<long>(cfg.slack); ++s) {
            if (s < 1 || s > static_cast<long>(last) - 1) continue;
            b[k] = static_cast<std::size_t>(s);
            self(self, k + 1);
        }
    };
    rec(rec, 1);
    return best;
}

}  // namespace oracle
