#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace hbf {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Seeded generator passed explicitly to every random draw.
using Rng = std::mt19937_64;

/// Raised when a matrix that must be inverted (or factored) is singular.
class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised on inconsistent operand shapes.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SvdResult {
    CMatrix left;        // m x p, p = min(m, n)
    RVector singular;    // descending, non-negative
    CMatrix right;       // n x p
};

struct EigResult {
    RVector values;      // descending
    CMatrix vectors;     // columns match `values`
};

/// Thin SVD, A = left * diag(singular) * right^H.
SvdResult svd(const CMatrix& a);

/// Full right singular basis (n x n), columns ordered by descending
/// singular value; columns past min(m, n) span the null space.
CMatrix right_singular_basis(const CMatrix& a);

/// Eigendecomposition of a Hermitian matrix. Throws std::invalid_argument when
/// ||A - A^H||_F exceeds 1e-10 * max(1, ||A||_F).
EigResult herm_eig(const CMatrix& a);

/// Inverse square root of a Hermitian PSD matrix. Eigenvalues below the floor
/// are clamped to it; the default floor is 1e-12 times the largest eigenvalue.
CMatrix inv_sqrt_psd(const CMatrix& q, std::optional<double> eigen_floor = std::nullopt);

struct WaterfillResult {
    RVector powers;                  // p_k >= 0, exactly 0 off the active set
    double water_level = 0.0;        // 1/lambda
    std::vector<Index> active_set;   // ascending indices with p_k > 0
};

/// Weighted water-filling:
///   p_k = max(beta_k * mu - q_k * noise, 0) / q_k  with  sum_k q_k p_k = budget,
/// where mu = 1/lambda is located by bisection and then polished in closed form
/// over the detected active set.
WaterfillResult waterfill(const RVector& costs, const RVector& weights, double noise,
                          double budget);

/// i.i.d. CN(0, 1) entries (real and imaginary parts each N(0, 1/2)).
CMatrix complex_gaussian(Rng& rng, Index rows, Index cols);

/// Bijective 64-bit mixer; distinct (master, index) pairs give distinct seeds.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t index);

/// Natural log of det(I + X) for Hermitian PSD X via Cholesky.
double log_det_eye_plus(const CMatrix& x);

/// ||A||_F relative to ||B||_F (absolute when B is zero).
double relative_error(const CMatrix& a, const CMatrix& b);

/// Numerical rank: count of singular values above rel_tol * s_max.
Index numerical_rank(const CMatrix& a, double rel_tol);

}  // namespace hbf
