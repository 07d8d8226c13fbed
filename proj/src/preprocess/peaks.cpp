#include <algorithm>
#include <cmath>

#include "rtt/preprocess.hpp"

namespace rtt {

double estimate_noise(const Chromatogram& chrom) {
    const auto& y = chrom.signal;
    if (y.size() < 3) return 0.0;
    std::vector<double> diff(y.size() - 1);
    for (std::size_t i = 0; i + 1 < y.size(); ++i) diff[i] = y[i + 1] - y[i];
    auto mid = diff.begin() + static_cast<std::ptrdiff_t>(diff.size() / 2);
    std::nth_element(diff.begin(), mid, diff.end());
    const double med = *mid;
    for (auto& d : diff) d = std::abs(d - med);
    std::nth_element(diff.begin(), mid, diff.end());
    // 1.4826 * MAD estimates the sigma of the differences, which is
    // sqrt(2) times the per-sample sigma for white noise.
    return 1.4826 * *mid / std::sqrt(2.0);
}

std::vector<DetectedPeak> detect_peaks(const Chromatogram& chrom, double min_snr, double min_separation) {
    chrom.validate();
    const auto& y = chrom.signal;
    const std::size_t n = y.size();
    double peak_max = 0.0;
    for (double v : y) peak_max = std::max(peak_max, std::abs(v));
    // The relative floor keeps round-off ripples on noiseless traces out.
    const double threshold = std::max(min_snr * estimate_noise(chrom), 1e-9 * peak_max);

    std::vector<DetectedPeak> found;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1]) || !(y[i] > threshold)) continue;
        DetectedPeak p;
        p.apex = i;
        const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
        double delta = 0.0;
        if (denom < 0.0) delta = std::clamp(0.5 * (y[i - 1] - y[i + 1]) / denom, -0.5, 0.5);
        p.apex_rt = chrom.time(i) + delta * chrom.dt;
        p.height = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * delta;
        std::size_t l = i;
        while (l > 0 && y[l - 1] < y[l]) --l;
        std::size_t r = i;
        while (r + 1 < n && y[r + 1] < y[r]) ++r;
        p.left = l;
        p.right = r;
        found.push_back(p);
    }

    if (min_separation > 0.0 && found.size() > 1) {
        std::vector<std::size_t> order(found.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return found[a].height > found[b].height; });
        std::vector<DetectedPeak> kept;
        for (std::size_t idx : order) {
            const auto& cand = found[idx];
            const bool clear = std::all_of(kept.begin(), kept.end(), [&](const DetectedPeak& k) {
                return std::abs(k.apex_rt - cand.apex_rt) >= min_separation;
            });
            if (clear) kept.push_back(cand);
        }
        std::sort(kept.begin(), kept.end(), [](const DetectedPeak& a, const DetectedPeak& b) { return a.apex < b.apex; });
        found = std::move(kept);
    }
    return found;
}

PeakList to_peaklist(const std::vector<DetectedPeak>& peaks, std::string source_id) {
    PeakList out;
    out.source_id = std::move(source_id);
    for (const auto& p : peaks) out.peaks.push_back(Peak{p.apex_rt, std::max(0.0, p.height), std::nullopt});
    return out;
}

}  // namespace rtt
