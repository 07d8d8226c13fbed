#include <algorithm>
#include <cmath>
#include <limits>

#include "rtt/baselines.hpp"

namespace rtt {

void CowConfig::validate() const {
    if (segment_length < 2) throw ValidationError("COW segment length must be >= 2 samples");
    if (segment_length <= 2 * slack) throw ValidationError("COW segment length must exceed twice the slack");
    if (power < 1) throw ValidationError("COW correlation power must be >= 1");
}

CowLayout cow_layout(std::size_t reference_length, std::size_t sample_length, const CowConfig& cfg) {
    cfg.validate();
    if (reference_length < 2 || sample_length < 2) throw ValidationError("COW traces need at least 2 samples");
    const std::size_t segments = (reference_length - 1) / cfg.segment_length;
    if (segments == 0) throw ValidationError("reference trace is shorter than one COW segment");
    CowLayout layout;
    const double ratio = static_cast<double>(sample_length - 1) / static_cast<double>(reference_length - 1);
    for (std::size_t k = 0; k <= segments; ++k) {
        const std::size_t r = k == segments ? reference_length - 1 : k * cfg.segment_length;
        layout.reference.push_back(r);
        layout.nominal.push_back(static_cast<std::size_t>(std::lround(static_cast<double>(r) * ratio)));
    }
    return layout;
}

namespace {

/// Value of `y` at fractional index x (linear interpolation).
double sample_at(const std::vector<double>& y, double x) {
    const auto i = static_cast<std::size_t>(std::floor(x));
    if (i + 1 >= y.size()) return y.back();
    const double f = x - static_cast<double>(i);
    return f == 0.0 ? y[i] : y[i] + f * (y[i + 1] - y[i]);
}

double resampled(const std::vector<double>& sample, std::size_t s0, std::size_t s1, std::size_t i, std::size_t len) {
    const double x = static_cast<double>(s0) +
                     static_cast<double>(i) * static_cast<double>(s1 - s0) / static_cast<double>(len - 1);
    return sample_at(sample, x);
}

}  // namespace

double cow_segment_benefit(const std::vector<double>& reference, std::size_t r0, std::size_t r1,
                           const std::vector<double>& sample, std::size_t s0, std::size_t s1, int power) {
    const std::size_t len = r1 - r0 + 1;
    std::vector<double> w(len);
    double mr = 0.0, mw = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        w[i] = resampled(sample, s0, s1, i, len);
        mr += reference[r0 + i];
        mw += w[i];
    }
    mr /= static_cast<double>(len);
    mw /= static_cast<double>(len);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double a = reference[r0 + i] - mr;
        const double b = w[i] - mw;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx == 0.0 && syy == 0.0) return 1.0;
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    const double c = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    return c * std::pow(std::abs(c), power - 1);
}

Chromatogram cow_apply(const Chromatogram& sample, const Chromatogram& reference, const std::vector<CowBoundary>& path) {
    Chromatogram out{reference.t0, reference.dt, std::vector<double>(reference.size(), 0.0)};
    for (std::size_t k = 1; k < path.size(); ++k) {
        const std::size_t r0 = path[k - 1].reference, r1 = path[k].reference;
        const std::size_t len = r1 - r0 + 1;
        for (std::size_t i = 0; i < len; ++i) {
            out.signal[r0 + i] = resampled(sample.signal, path[k - 1].sample, path[k].sample, i, len);
        }
    }
    return out;
}

double cow_map_time(const Chromatogram& sample, const Chromatogram& reference, const std::vector<CowBoundary>& path,
                    double rt) {
    if (path.size() < 2) throw ValidationError("COW path needs at least two boundaries");
    const double x = (rt - sample.t0) / sample.dt;
    std::size_t k = 1;
    while (k + 1 < path.size() && x > static_cast<double>(path[k].sample)) ++k;
    const auto s0 = static_cast<double>(path[k - 1].sample), s1 = static_cast<double>(path[k].sample);
    const auto r0 = static_cast<double>(path[k - 1].reference), r1 = static_cast<double>(path[k].reference);
    return reference.t0 + reference.dt * (r0 + (x - s0) * (r1 - r0) / (s1 - s0));
}

CowResult cow_align(const Chromatogram& sample, const Chromatogram& reference, const CowConfig& cfg) {
    sample.validate();
    reference.validate();
    const CowLayout layout = cow_layout(reference.size(), sample.size(), cfg);
    const std::size_t segments = layout.reference.size() - 1;
    const std::size_t last = sample.size() - 1;

    // Admissible sample positions for each boundary; endpoints are pinned.
    std::vector<std::vector<std::size_t>> options(segments + 1);
    options[0] = {0};
    options[segments] = {last};
    for (std::size_t k = 1; k < segments; ++k) {
        const std::size_t nom = layout.nominal[k];
        const std::size_t lo = nom > cfg.slack ? nom - cfg.slack : 1;
        const std::size_t hi = std::min(nom + cfg.slack, last - 1);
        for (std::size_t s = std::max<std::size_t>(lo, 1); s <= hi; ++s) options[k].push_back(s);
        if (options[k].empty()) throw ValidationError("sample trace too short for the COW segment/slack setting");
    }

    constexpr double kNone = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best(segments + 1);
    std::vector<std::vector<std::size_t>> from(segments + 1);
    best[0] = {0.0};
    from[0] = {0};
    for (std::size_t k = 1; k <= segments; ++k) {
        best[k].assign(options[k].size(), kNone);
        from[k].assign(options[k].size(), 0);
        for (std::size_t b = 0; b < options[k].size(); ++b) {
            const std::size_t s1 = options[k][b];
            for (std::size_t a = 0; a < options[k - 1].size(); ++a) {
                const std::size_t s0 = options[k - 1][a];
                if (s0 >= s1 || best[k - 1][a] == kNone) continue;
                const double v = best[k - 1][a] + cow_segment_benefit(reference.signal, layout.reference[k - 1],
                                                                      layout.reference[k], sample.signal, s0, s1,
                                                                      cfg.power);
                if (v > best[k][b]) {
                    best[k][b] = v;
                    from[k][b] = a;
                }
            }
        }
    }
    if (best[segments][0] == kNone) throw ValidationError("no monotone COW path exists for this segment/slack setting");

    CowResult out;
    out.benefit = best[segments][0];
    out.path.resize(segments + 1);
    std::size_t idx = 0;
    for (std::size_t k = segments + 1; k-- > 0;) {
        out.path[k] = {layout.reference[k], options[k][idx]};
        idx = from[k][idx];
    }
    out.warped = cow_apply(sample, reference, out.path);
    return out;
}

}  // namespace rtt
