#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "rtt/preprocess.hpp"

namespace rtt {

namespace {

double tricube(double u) {
    u = std::abs(u);
    if (u >= 1.0) return 0.0;
    const double v = 1.0 - u * u * u;
    return v * v * v;
}

double median(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

/// Weighted local polynomial fit evaluated at sample i. Coordinates are
/// sample offsets from i, so the grid spacing never enters the conditioning.
double local_fit(const std::vector<double>& y, const std::vector<double>& robust, std::size_t i,
                 std::size_t lo, std::size_t hi, int degree) {
    const double h = std::max(static_cast<double>(i - lo), static_cast<double>(hi - i)) + 1.0;
    const int p = degree + 1;
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (std::size_t k = lo; k <= hi; ++k) {
        const double x = static_cast<double>(k) - static_cast<double>(i);
        const double w = tricube(x / h) * robust[k];
        if (w == 0.0) continue;
        const double basis[3] = {1.0, x, x * x};
        for (int r = 0; r < p; ++r) {
            b[r] += w * basis[r] * y[k];
            for (int c = 0; c < p; ++c) a(r, c) += w * basis[r] * basis[c];
        }
    }
    const Eigen::MatrixXd block = a.topLeftCorner(p, p);
    const Eigen::VectorXd rhs = b.head(p);
    const Eigen::VectorXd coef = block.ldlt().solve(rhs);
    return coef[0];
}

}  // namespace

Chromatogram smooth(const Chromatogram& chrom, double span, SmoothOptions options) {
    chrom.validate();
    if (!(span > 0.0 && span <= 1.0)) throw ValidationError("smoothing span must be in (0, 1]");
    if (options.degree != 1 && options.degree != 2) throw ValidationError("LOESS degree must be 1 or 2");
    const std::size_t n = chrom.size();
    const auto q = std::min(n, static_cast<std::size_t>(std::floor(span * static_cast<double>(n))));
    if (q < 3 || q < static_cast<std::size_t>(options.degree + 1)) {
        throw ValidationError("smoothing span covers fewer than 3 points");
    }

    std::vector<double> robust(n, 1.0);
    Chromatogram out = chrom;
    for (int pass = 0; pass <= options.robust_iterations; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
            // q nearest neighbours on a uniform grid: a centred window
            // clamped at the edges.
            std::size_t lo = i >= (q - 1) / 2 ? i - (q - 1) / 2 : 0;
            if (lo + q > n) lo = n - q;
            out.signal[i] = local_fit(chrom.signal, robust, i, lo, lo + q - 1, options.degree);
        }
        if (pass == options.robust_iterations) break;
        std::vector<double> resid(n);
        for (std::size_t i = 0; i < n; ++i) resid[i] = std::abs(chrom.signal[i] - out.signal[i]);
        const double s = median(resid);
        if (s == 0.0) break;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = resid[i] / (6.0 * s);
            robust[i] = u >= 1.0 ? 0.0 : (1.0 - u * u) * (1.0 - u * u);
        }
    }
    return out;
}

}  // namespace rtt
