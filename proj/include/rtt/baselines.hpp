#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "rtt/peaklist.hpp"
#include "rtt/preprocess.hpp"

namespace rtt {

// ---------------------------------------------------------------------------
// Internal-standard piecewise-linear warping

/// Piecewise-affine time map through (0,0) and one anchor per standard.
class LinearWarp {
public:
    /// Throws ValidationError unless both lists have the same non-zero
    /// length and are strictly increasing and positive.
    LinearWarp(const std::vector<double>& sample_stds, const std::vector<double>& ref_stds);

    /// Beyond the last standard the last segment's slope continues.
    [[nodiscard]] double operator()(double rt) const;
    [[nodiscard]] const std::vector<std::pair<double, double>>& anchors() const noexcept { return anchors_; }

private:
    std::vector<std::pair<double, double>> anchors_;  // (sample, reference)
};

std::vector<double> linear_warp(const std::vector<double>& rts, const std::vector<double>& sample_stds,
                                const std::vector<double>& ref_stds);

// ---------------------------------------------------------------------------
// Correlation optimized warping

struct CowConfig {
    std::size_t segment_length = 50;  // reference samples per segment
    std::size_t slack = 5;            // max boundary shift, samples
    int power = 1;                    // correlation power, >= 1

    /// Throws ValidationError unless segment_length > 2 * slack and power >= 1.
    void validate() const;
};

struct CowBoundary {
    std::size_t reference = 0;  // sample index on the reference grid
    std::size_t sample = 0;     // matching sample index on the sample grid
};

struct CowResult {
    Chromatogram warped;             // sample resampled onto the reference grid
    std::vector<CowBoundary> path;   // segment boundaries including both endpoints
    double benefit = 0.0;            // sum of per-segment correlation^power
};

/// Reference segment boundaries and the nominal (unshifted) sample boundary
/// for each, both including the endpoints.
struct CowLayout {
    std::vector<std::size_t> reference;
    std::vector<std::size_t> nominal;
};

CowLayout cow_layout(std::size_t reference_length, std::size_t sample_length, const CowConfig& cfg);

/// Benefit of warping sample[s0..s1] onto reference[r0..r1]: the Pearson
/// correlation of the reference segment with the linearly resampled sample
/// segment, raised to `power` with its sign kept. Two flat segments score 1,
/// one flat segment scores 0.
double cow_segment_benefit(const std::vector<double>& reference, std::size_t r0, std::size_t r1,
                           const std::vector<double>& sample, std::size_t s0, std::size_t s1, int power);

/// Resamples the sample trace along `path` onto the reference grid.
Chromatogram cow_apply(const Chromatogram& sample, const Chromatogram& reference,
                       const std::vector<CowBoundary>& path);

/// Maps a sample-time rt through the warp path into reference time.
double cow_map_time(const Chromatogram& sample, const Chromatogram& reference,
                    const std::vector<CowBoundary>& path, double rt);

/// Dynamic-programming COW. Throws ValidationError when the configuration is
/// invalid or the traces are too short for the segment/slack combination.
CowResult cow_align(const Chromatogram& sample, const Chromatogram& reference, const CowConfig& cfg);

// ---------------------------------------------------------------------------
// Identification by rt proximity after warping

struct Identification {
    double rt = 0.0;
    CompoundId label = kInterferent;
    bool ambiguous = false;  // two reference peaks within tolerance
};

/// Each warped rt takes the label of the single reference peak within
/// ±tol; none or several give INTERFERENT (several also set `ambiguous`).
std::vector<Identification> identify_after_warp(const std::vector<double>& warped_rts,
                                                const PeakList& reference_labeled, double tol);

/// Fraction of identifications whose label equals `truth`; ambiguous
/// identifications always count as wrong.
double identification_accuracy(const std::vector<Identification>& ids, const std::vector<CompoundId>& truth);

}  // namespace rtt
