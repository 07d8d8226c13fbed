#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "rtt/error.hpp"
#include "rtt/peaklist.hpp"

namespace rtt {

struct MatchResult;
struct Rtt;

/// Uniformly sampled detector trace.
struct Chromatogram {
    double t0 = 0.0;    // seconds
    double dt = 1.0;    // seconds, > 0
    std::vector<double> signal;

    [[nodiscard]] std::size_t size() const noexcept { return signal.size(); }
    [[nodiscard]] double time(std::size_t i) const noexcept { return t0 + dt * static_cast<double>(i); }
    [[nodiscard]] double t_end() const noexcept { return time(signal.empty() ? 0 : signal.size() - 1); }

    /// Throws ValidationError unless dt > 0, length >= 2 and values are finite.
    void validate() const;
};

struct Grid {
    double t0 = 0.0;
    double dt = 1.0;
    std::size_t n = 0;
};

/// Reads `t,signal` rows; sampling must be uniform within 1e-6 relative.
Chromatogram parse_chromatogram(std::istream& in);
void write_chromatogram(std::ostream& out, const Chromatogram& chrom);
Chromatogram load_chromatogram_file(const std::string& path);
void save_chromatogram_file(const Chromatogram& chrom, const std::string& path);

// ---------------------------------------------------------------------------
// Baseline removal (airPLS)

struct BaselineResult {
    Chromatogram corrected;         // signal minus baseline
    std::vector<double> baseline;
    int iterations = 0;
    bool converged = false;
};

/// Adaptive iteratively reweighted penalized least squares with a
/// second-difference penalty. `lambda` is in samples^4. When max_iter is
/// reached without convergence the last iterate is returned with
/// `converged == false`.
BaselineResult baseline_correct(const Chromatogram& chrom, double lambda = 1e5, int max_iter = 15);

// ---------------------------------------------------------------------------
// Smoothing

struct SmoothOptions {
    int degree = 2;             // local polynomial degree, 1 or 2
    int robust_iterations = 0;  // bisquare reweighting passes
};

/// LOESS smoothing on the chromatogram grid. `span` is the fraction of
/// points in each local fit; it must cover at least degree + 2 points.
Chromatogram smooth(const Chromatogram& chrom, double span, SmoothOptions options = {});

// ---------------------------------------------------------------------------
// Peak detection

struct DetectedPeak {
    double apex_rt = 0.0;       // parabola-refined
    double height = 0.0;
    std::size_t apex = 0;       // sample index of the local maximum
    std::size_t left = 0;       // nearest minimum on each side
    std::size_t right = 0;
};

/// Robust noise level: MAD of the first difference scaled to a Gaussian
/// sigma of the signal.
double estimate_noise(const Chromatogram& chrom);

/// Local maxima above min_snr * noise, at least `min_separation` seconds
/// apart (taller peaks win), in rt order.
std::vector<DetectedPeak> detect_peaks(const Chromatogram& chrom, double min_snr = 3.0,
                                       double min_separation = 0.0);

PeakList to_peaklist(const std::vector<DetectedPeak>& peaks, std::string source_id = {});

// ---------------------------------------------------------------------------
// Exponentially modified Gaussian

/// Area-normalised EMG: a Gaussian (mu, sigma) convolved with a one-sided
/// exponential of time constant tau, scaled to `area`.
struct EmgPeak {
    double area = 0.0;
    double mu = 0.0;
    double sigma = 1.0;
    double tau = 1.0;

    [[nodiscard]] double operator()(double t) const;
    /// Time of the maximum.
    [[nodiscard]] double mode() const;
    [[nodiscard]] EmgPeak shifted(double by) const { return {area, mu + by, sigma, tau}; }
};

struct EmgFit {
    EmgPeak peak;
    double rms = 0.0;           // residual RMS over the fitted region
    int iterations = 0;
};

class FitError : public Error {
public:
    FitError(const std::string& what, EmgFit best) : Error(what), best_(best) {}
    [[nodiscard]] const EmgFit& best() const noexcept { return best_; }

private:
    EmgFit best_;
};

/// Least-squares EMG fit over samples [peak.left, peak.right].
EmgFit fit_emg(const Chromatogram& chrom, const DetectedPeak& peak);

/// Pointwise sum of EMG peaks on a grid.
Chromatogram reconstruct(const std::vector<EmgPeak>& peaks, const Grid& grid);

struct AlignOptions {
    double min_snr = 3.0;
    double min_separation = 0.0;
    /// A detected apex is tied to a sample peak when within this many seconds.
    double match_tolerance = 1.0;
};

/// Shifts every identified peak's fitted EMG so its apex sits on the
/// reference rt of its compound; interferents and unmatched peaks stay put.
Chromatogram align_chromatogram(const Chromatogram& sample_chrom, const SamplePeaks& sample,
                                const MatchResult& result, const Rtt& reference, const Grid& grid,
                                const AlignOptions& options = {});

}  // namespace rtt
