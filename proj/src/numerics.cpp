#include "hbf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hbf {

SvdResult svd(const CMatrix& a)
{
    if (a.size() == 0) {
        throw DimensionError("svd: empty matrix");
    }
    Eigen::JacobiSVD<CMatrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

CMatrix right_singular_basis(const CMatrix& a)
{
    if (a.size() == 0) {
        throw DimensionError("right_singular_basis: empty matrix");
    }
    Eigen::JacobiSVD<CMatrix> solver(a, Eigen::ComputeFullV);
    return solver.matrixV();
}

EigResult herm_eig(const CMatrix& a)
{
    if (a.rows() != a.cols() || a.size() == 0) {
        throw DimensionError("herm_eig: matrix must be square and nonempty");
    }
    const double asym = (a - a.adjoint()).norm();
    if (asym > 1e-10 * std::max(1.0, a.norm())) {
        throw std::invalid_argument("herm_eig: matrix is not Hermitian");
    }
    const CMatrix sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
    const Index n = a.rows();
    EigResult out{RVector(n), CMatrix(n, n)};
    // Solver order is ascending; reverse it.
    for (Index k = 0; k < n; ++k) {
        out.values(k) = solver.eigenvalues()(n - 1 - k);
        out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
    }
    return out;
}

CMatrix inv_sqrt_psd(const CMatrix& q, std::optional<double> eigen_floor)
{
    const EigResult eig = herm_eig(q);
    const double top = eig.values.size() > 0 ? eig.values(0) : 0.0;
    double floor = eigen_floor.value_or(1e-12 * top);
    floor = std::max(floor, std::numeric_limits<double>::min());
    RVector scale(eig.values.size());
    for (Index k = 0; k < scale.size(); ++k) {
        scale(k) = 1.0 / std::sqrt(std::max(eig.values(k), floor));
    }
    return eig.vectors * scale.asDiagonal() * eig.vectors.adjoint();
}

WaterfillResult waterfill(const RVector& costs, const RVector& weights, double noise,
                          double budget)
{
    const Index n = costs.size();
    if (weights.size() != n) {
        throw DimensionError("waterfill: costs and weights differ in length");
    }
    if (n == 0) {
        throw DimensionError("waterfill: no channels");
    }
    for (Index k = 0; k < n; ++k) {
        if (!(costs(k) > 0.0) || !std::isfinite(costs(k))) {
            throw std::invalid_argument("waterfill: costs must be positive and finite");
        }
        if (!(weights(k) > 0.0) || !std::isfinite(weights(k))) {
            throw std::invalid_argument("waterfill: weights must be positive and finite");
        }
    }
    if (!(noise >= 0.0) || !(budget >= 0.0)) {
        throw std::invalid_argument("waterfill: noise and budget must be non-negative");
    }

    // mu = 1/lambda; channel k switches on once mu exceeds q_k * noise / beta_k.
    RVector threshold(n);
    for (Index k = 0; k < n; ++k) {
        threshold(k) = costs(k) * noise / weights(k);
    }

    WaterfillResult out;
    out.powers = RVector::Zero(n);
    if (budget == 0.0) {
        out.water_level = threshold.minCoeff();
        return out;
    }

    const auto filled = [&](double mu) {
        double total = 0.0;
        for (Index k = 0; k < n; ++k) {
            total += std::max(weights(k) * mu - costs(k) * noise, 0.0);
        }
        return total;
    };

    double lo = threshold.minCoeff();
    double hi = (budget + costs.sum() * noise) / weights.minCoeff();
    while (filled(hi) < budget) {
        hi *= 2.0;
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (filled(mid) < budget) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Closed-form level over the active set, repeated until the set is stable.
    std::vector<bool> active(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
        active[static_cast<std::size_t>(k)] = weights(k) * hi > costs(k) * noise;
    }
    double mu = hi;
    for (Index pass = 0; pass <= n; ++pass) {
        double weight_sum = 0.0;
        double offset = 0.0;
        for (Index k = 0; k < n; ++k) {
            if (active[static_cast<std::size_t>(k)]) {
                weight_sum += weights(k);
                offset += costs(k) * noise;
            }
        }
        mu = (budget + offset) / weight_sum;
        bool changed = false;
        for (Index k = 0; k < n; ++k) {
            const bool on = weights(k) * mu - costs(k) * noise > 0.0;
            if (on != active[static_cast<std::size_t>(k)]) {
                active[static_cast<std::size_t>(k)] = on;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
    }

    out.water_level = mu;
    for (Index k = 0; k < n; ++k) {
        if (active[static_cast<std::size_t>(k)]) {
            out.powers(k) = (weights(k) * mu - costs(k) * noise) / costs(k);
            out.active_set.push_back(k);
        }
    }
    return out;
}

CMatrix complex_gaussian(Rng& rng, Index rows, Index cols)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    CMatrix out(rows, cols);
    for (Index c = 0; c < cols; ++c) {
        for (Index r = 0; r < rows; ++r) {
            const double re = normal(rng);
            const double im = normal(rng);
            out(r, c) = Complex(re, im);
        }
    }
    return out;
}

std::uint64_t child_seed(std::uint64_t master, std::uint64_t index)
{
    // splitmix64 finalizer applied to a Weyl sequence.
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double log_det_eye_plus(const CMatrix& x)
{
    const CMatrix m = CMatrix::Identity(x.rows(), x.cols()) + 0.5 * (x + x.adjoint());
    Eigen::LLT<CMatrix> llt(m);
    if (llt.info() == Eigen::Success) {
        double acc = 0.0;
        for (Index k = 0; k < m.rows(); ++k) {
            acc += 2.0 * std::log(llt.matrixLLT()(k, k).real());
        }
        return acc;
    }
    const Complex det = m.partialPivLu().determinant();
    if (std::abs(det) == 0.0) {
        throw SingularMatrixError("log_det_eye_plus: singular argument");
    }
    return std::log(std::abs(det));
}

double relative_error(const CMatrix& a, const CMatrix& b)
{
    const double ref = b.norm();
    const double diff = (a - b).norm();
    return ref > 0.0 ? diff / ref : diff;
}

Index numerical_rank(const CMatrix& a, double rel_tol)
{
    const SvdResult s = svd(a);
    if (s.singular.size() == 0 || s.singular(0) == 0.0) {
        return 0;
    }
    Index r = 0;
    for (Index k = 0; k < s.singular.size(); ++k) {
        if (s.singular(k) > rel_tol * s.singular(0)) {
            ++r;
        }
    }
    return r;
}

}  // namespace hbf
