#include <cmath>
#include <limits>

#include "rtt/library.hpp"
#include "rtt/matcher.hpp"
#include "rtt/preprocess.hpp"

namespace rtt {

namespace {

/// Stand-in for a peak the EMG fit rejected: a near-Gaussian with the
/// detected apex, height and a width taken from the peak's support.
EmgPeak gaussian_fallback(const Chromatogram& chrom, const DetectedPeak& p) {
    const double support = static_cast<double>(p.right - p.left) * chrom.dt;
    const double sigma = std::max(support / 6.0, 0.5 * chrom.dt);
    const double area = std::max(p.height, 0.0) * sigma * std::sqrt(2.0 * M_PI);
    return {area, p.apex_rt, sigma, 1e-3 * sigma};
}

}  // namespace

Chromatogram align_chromatogram(const Chromatogram& sample_chrom, const SamplePeaks& sample,
                                const MatchResult& result, const Rtt& reference, const Grid& grid,
                                const AlignOptions& options) {
    sample_chrom.validate();
    const auto detected = detect_peaks(sample_chrom, options.min_snr, options.min_separation);

    // (rt, compound) for every sample peak whose identity is known.
    std::vector<std::pair<double, CompoundId>> known;
    for (const auto& [id, rt] : sample.standards) known.emplace_back(rt, id);
    if (!result.empty()) {
        const auto& mapping = result.ranked.front().assignment.mapping;
        for (std::size_t j = 0; j < sample.unknowns.size() && j < mapping.size(); ++j) {
            if (mapping[j] != kInterferent) known.emplace_back(sample.unknowns[j], mapping[j]);
        }
    }

    std::vector<EmgPeak> shifted;
    shifted.reserve(detected.size());
    for (const auto& d : detected) {
        EmgPeak emg;
        try {
            emg = fit_emg(sample_chrom, d).peak;
        } catch (const FitError&) {
            emg = gaussian_fallback(sample_chrom, d);
        }
        CompoundId id = kInterferent;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [rt, cid] : known) {
            const double gap = std::abs(rt - d.apex_rt);
            if (gap <= options.match_tolerance && gap < best) {
                best = gap;
                id = cid;
            }
        }
        if (id != kInterferent) emg = emg.shifted(reference.rt(id) - emg.mode());
        shifted.push_back(emg);
    }
    return reconstruct(shifted, grid);
}

}  // namespace rtt
