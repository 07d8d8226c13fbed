#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>

#include "rtt/preprocess.hpp"

namespace rtt {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrtPi = 1.77245385090551602730;

/// exp(z^2) * erfc(z) for z >= 0.
double erfcx_nonneg(double z) {
    if (z < 20.0) return std::exp(z * z) * std::erfc(z);
    const double inv = 1.0 / (z * z);
    return (1.0 - 0.5 * inv * (1.0 - 1.5 * inv * (1.0 - 2.5 * inv))) / (z * kSqrtPi);
}

}  // namespace

double EmgPeak::operator()(double t) const {
    const double u = t - mu;
    const double z = (sigma / tau - u / sigma) / kSqrt2;
    const double scale = area / (2.0 * tau);
    if (z < 0.0) {
        return scale * std::exp(0.5 * sigma * sigma / (tau * tau) - u / tau) * std::erfc(z);
    }
    return scale * std::exp(-0.5 * u * u / (sigma * sigma)) * erfcx_nonneg(z);
}

double EmgPeak::mode() const {
    // Log-concave, hence unimodal; the maximum lies between mu and mu + tau.
    const auto neg = [this](double t) { return -(*this)(t); };
    const auto r = boost::math::tools::brent_find_minima(neg, mu - sigma, mu + tau + sigma,
                                                         std::numeric_limits<double>::digits / 2 + 4);
    return r.first;
}

namespace {

using Params = Eigen::Vector4d;  // log area, mu, log sigma, log tau

EmgPeak unpack(const Params& p) { return {std::exp(p[0]), p[1], std::exp(p[2]), std::exp(p[3])}; }

struct Region {
    std::vector<double> t;
    std::vector<double> y;
};

/// Moment-based starting point; falls back to a half-width estimate when
/// the region is too skewed or too short for the moments to make sense.
Params initial_guess(const Region& r, double dt, const DetectedPeak& peak) {
    double area = 0.0, m1 = 0.0;
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        const double w = std::max(0.0, r.y[k]);
        area += w;
        m1 += w * r.t[k];
    }
    m1 /= area;
    double m2 = 0.0, m3 = 0.0;
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        const double w = std::max(0.0, r.y[k]);
        const double d = r.t[k] - m1;
        m2 += w * d * d;
        m3 += w * d * d * d;
    }
    m2 /= area;
    m3 /= area;
    area *= dt;

    double tau = m3 > 0.0 ? std::cbrt(0.5 * m3) : 0.0;
    double var = m2 - tau * tau;
    if (tau <= 0.05 * std::sqrt(m2) || var <= 0.0) {
        tau = 0.3 * std::sqrt(std::max(m2, dt * dt));
        var = std::max(m2 - tau * tau, 0.25 * m2);
    }
    double sigma = std::sqrt(std::max(var, 0.25 * dt * dt));
    double mu = m1 - tau;
    if (!std::isfinite(mu)) mu = peak.apex_rt;
    return {std::log(area), mu, std::log(sigma), std::log(tau)};
}

}  // namespace

EmgFit fit_emg(const Chromatogram& chrom, const DetectedPeak& peak) {
    chrom.validate();
    const std::size_t n = chrom.size();
    std::size_t lo = std::min(peak.left, peak.apex);
    std::size_t hi = std::max(peak.right, peak.apex);
    lo = std::min(lo, peak.apex >= 3 ? peak.apex - 3 : 0);
    hi = std::max(hi, std::min(n - 1, peak.apex + 3));

    Region r;
    double ymax = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) {
        r.t.push_back(chrom.time(k));
        r.y.push_back(chrom.signal[k]);
        ymax = std::max(ymax, chrom.signal[k]);
    }
    const double dt = chrom.dt;
    const double width = r.t.back() - r.t.front();

    if (!(ymax > 0.0)) {
        throw FitError("EMG fit did not converge: region has no positive signal", EmgFit{{0.0, peak.apex_rt, dt, dt}, 0.0, 0});
    }

    Params p = initial_guess(r, dt, peak);
    const double log_sigma_lo = std::log(1e-3 * dt), log_sigma_hi = std::log(std::max(width, dt));
    const double log_tau_lo = std::log(1e-4 * dt), log_tau_hi = std::log(10.0 * std::max(width, dt));
    auto clamp_params = [&](Params& q) {
        q[2] = std::clamp(q[2], log_sigma_lo, log_sigma_hi);
        q[3] = std::clamp(q[3], log_tau_lo, log_tau_hi);
    };
    clamp_params(p);

    const std::size_t m = r.t.size();
    auto residuals = [&](const Params& q) {
        Eigen::VectorXd res(static_cast<Eigen::Index>(m));
        const EmgPeak e = unpack(q);
        for (std::size_t k = 0; k < m; ++k) res[static_cast<Eigen::Index>(k)] = r.y[k] - e(r.t[k]);
        return res;
    };

    Eigen::VectorXd res = residuals(p);
    double c = res.squaredNorm();
    double lambda = 1e-3;
    int iter = 0;
    bool converged = false;
    constexpr int kMaxIter = 400;
    for (; iter < kMaxIter; ++iter) {
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(m), 4);
        for (int i = 0; i < 4; ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(p[i]));
            Params up = p, dn = p;
            up[i] += h;
            dn[i] -= h;
            // residual = y - f, so d(residual)/dp = -(f(up) - f(dn)) / 2h
            jac.col(i) = (residuals(up) - residuals(dn)) / (2.0 * h);
        }
        const Eigen::Matrix4d jtj = jac.transpose() * jac;
        const Eigen::Vector4d grad = jac.transpose() * res;
        if (grad.lpNorm<Eigen::Infinity>() <= 1e-14 * std::max(1.0, c) ||
            std::sqrt(c / static_cast<double>(m)) <= 1e-9 * ymax) {
            converged = true;
            break;
        }

        bool improved = false;
        for (int attempt = 0; attempt < 30; ++attempt) {
            Eigen::Matrix4d damped = jtj;
            for (int i = 0; i < 4; ++i) damped(i, i) += lambda * std::max(jtj(i, i), 1e-12);
            Params step = damped.ldlt().solve(-grad);
            Params trial = p + step;
            clamp_params(trial);
            const Eigen::VectorXd tres = residuals(trial);
            const double tc = tres.squaredNorm();
            if (std::isfinite(tc) && tc < c) {
                const double rel = (c - tc) / std::max(c, std::numeric_limits<double>::min());
                const double step_size = (trial - p).lpNorm<Eigen::Infinity>();
                p = trial;
                res = tres;
                c = tc;
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                if (rel < 1e-12 || step_size < 1e-12) converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!improved) {
            // No descent direction left: we are at a (local) minimum.
            converged = true;
            break;
        }
        if (converged) break;
    }

    EmgFit fit{unpack(p), std::sqrt(c / static_cast<double>(m)), iter};
    if (!std::isfinite(c) || !converged) throw FitError("EMG fit did not converge", fit);
    const double apex_error = std::abs(fit.peak.mode() - peak.apex_rt);
    if (apex_error > dt) {
        throw FitError("EMG fit apex is " + std::to_string(apex_error) + " s from the detected apex", fit);
    }
    return fit;
}

Chromatogram reconstruct(const std::vector<EmgPeak>& peaks, const Grid& grid) {
    if (!(grid.dt > 0.0)) throw ValidationError("grid dt must be > 0");
    Chromatogram out{grid.t0, grid.dt, std::vector<double>(grid.n, 0.0)};
    for (const auto& p : peaks) {
        for (std::size_t i = 0; i < grid.n; ++i) out.signal[i] += p(out.time(i));
    }
    return out;
}

}  // namespace rtt
