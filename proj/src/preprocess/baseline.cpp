#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>

#include "rtt/preprocess.hpp"

namespace rtt {

namespace {

/// lambda * D'D for the second-difference operator D, as a sparse
/// pentadiagonal matrix.
Eigen::SparseMatrix<double> second_difference_penalty(Eigen::Index n, double lambda) {
    Eigen::SparseMatrix<double> d(n - 2, n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(3 * (n - 2)));
    for (Eigen::Index i = 0; i + 2 < n; ++i) {
        trip.emplace_back(i, i, 1.0);
        trip.emplace_back(i, i + 1, -2.0);
        trip.emplace_back(i, i + 2, 1.0);
    }
    d.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseMatrix<double> h = lambda * (Eigen::SparseMatrix<double>(d.transpose()) * d);
    h.makeCompressed();
    return h;
}

}  // namespace

BaselineResult baseline_correct(const Chromatogram& chrom, double lambda, int max_iter) {
    chrom.validate();
    if (!(lambda > 0.0)) throw ValidationError("baseline lambda must be > 0");
    if (max_iter < 1) throw ValidationError("baseline max_iter must be >= 1");

    const auto n = static_cast<Eigen::Index>(chrom.size());
    const Eigen::Map<const Eigen::VectorXd> x(chrom.signal.data(), n);
    const double scale = x.cwiseAbs().sum();

    BaselineResult out;
    out.corrected = chrom;
    if (n < 3 || scale == 0.0) {
        out.baseline.assign(chrom.size(), 0.0);
        if (n < 3) out.baseline = chrom.signal;
        for (std::size_t i = 0; i < chrom.size(); ++i) out.corrected.signal[i] = chrom.signal[i] - out.baseline[i];
        out.converged = true;
        return out;
    }

    const Eigen::SparseMatrix<double> penalty = second_difference_penalty(n, lambda);
    Eigen::SparseMatrix<double> weights(n, n);
    weights.reserve(Eigen::VectorXi::Constant(n, 1));
    for (Eigen::Index i = 0; i < n; ++i) weights.insert(i, i) = 1.0;

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd z = x;
    bool analyzed = false;

    for (int iter = 1; iter <= max_iter; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) weights.coeffRef(i, i) = w[i];
        const Eigen::SparseMatrix<double> a = weights + penalty;
        if (!analyzed) {
            solver.analyzePattern(a);
            analyzed = true;
        }
        solver.factorize(a);
        if (solver.info() != Eigen::Success) break;
        z = solver.solve(w.cwiseProduct(x));
        out.iterations = iter;

        const Eigen::VectorXd d = x - z;
        double dssn = 0.0;
        double max_neg = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d[i] < 0.0) {
                dssn -= d[i];
                max_neg = std::max(max_neg, d[i]);
            }
        }
        if (dssn < 1e-3 * scale) {
            out.converged = true;
            break;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            w[i] = d[i] >= 0.0 ? 0.0 : std::exp(static_cast<double>(iter) * std::abs(d[i]) / dssn);
        }
        w[0] = std::exp(static_cast<double>(iter) * max_neg / dssn);
        w[n - 1] = w[0];
    }

    out.baseline.assign(z.data(), z.data() + n);
    for (std::size_t i = 0; i < chrom.size(); ++i) out.corrected.signal[i] = chrom.signal[i] - out.baseline[i];
    return out;
}

}  // namespace rtt
