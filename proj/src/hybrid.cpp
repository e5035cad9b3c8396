#include "hbf/hybrid.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hbf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

RVector weights_or_ones(const std::vector<double>& weights, Index users)
{
    if (weights.empty()) {
        return RVector::Ones(users);
    }
    if (static_cast<Index>(weights.size()) != users) {
        throw DimensionError("weights must have one entry per user");
    }
    return Eigen::Map<const RVector>(weights.data(), users);
}

// Cholesky of a Hermitian PSD matrix with a tiny ridge retry.
Eigen::LLT<CMatrix> factor_covariance(const CMatrix& c, double ridge)
{
    Eigen::LLT<CMatrix> llt(c);
    if (llt.info() == Eigen::Success) {
        return llt;
    }
    llt.compute(c + ridge * CMatrix::Identity(c.rows(), c.cols()));
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError("interference-plus-noise covariance is singular");
    }
    return llt;
}

// Columns of `target` realized with two phase shifters per column.
HybridPrecoder realize_columns(const CMatrix& target)
{
    const Index n = target.rows();
    const Index cols = target.cols();
    HybridPrecoder out{CMatrix(n, 2 * cols), CMatrix::Zero(2 * cols, cols)};
    for (Index k = 0; k < cols; ++k) {
        const double nu_max = target.col(k).cwiseAbs().maxCoeff();
        out.digital(2 * k, k) = nu_max;
        out.digital(2 * k + 1, k) = nu_max;
        for (Index i = 0; i < n; ++i) {
            const double nu = std::abs(target(i, k));
            const double phi = std::arg(target(i, k));
            const double spread = nu_max > 0.0 ? std::acos(nu / (2.0 * nu_max)) : 0.5 * std::numbers::pi;
            out.rf(i, 2 * k) = std::polar(1.0, phi - spread);
            out.rf(i, 2 * k + 1) = std::polar(1.0, phi + spread);
        }
    }
    return out;
}

}  // namespace

RVector SystemConfig::weight_vector() const
{
    return weights_or_ones(weights, users);
}

void SystemConfig::validate() const
{
    if (tx_antennas < 1) throw ConfigError("tx_antennas", "must be at least 1");
    if (rx_antennas < 1) throw ConfigError("rx_antennas", "must be at least 1");
    if (users < 1) throw ConfigError("users", "must be at least 1");
    if (streams_per_user < 1) throw ConfigError("streams_per_user", "must be at least 1");
    if (rf_chains_tx < total_streams()) {
        throw ConfigError("rf_chains_tx", "must be at least users * streams_per_user (" +
                                              std::to_string(total_streams()) + ")");
    }
    if (rf_chains_tx > tx_antennas) {
        throw ConfigError("rf_chains_tx", "must not exceed tx_antennas (" +
                                              std::to_string(tx_antennas) + ")");
    }
    if (rf_chains_rx < streams_per_user) {
        throw ConfigError("rf_chains_rx", "must be at least streams_per_user");
    }
    if (rf_chains_rx > rx_antennas) {
        throw ConfigError("rf_chains_rx", "must not exceed rx_antennas (" +
                                              std::to_string(rx_antennas) + ")");
    }
    if (!(power >= 0.0) || !std::isfinite(power)) throw ConfigError("power", "must be finite and >= 0");
    if (!(noise_power > 0.0) || !std::isfinite(noise_power)) {
        throw ConfigError("noise_power", "must be finite and > 0");
    }
    if (!weights.empty()) {
        if (static_cast<Index>(weights.size()) != users) {
            throw ConfigError("weights", "needs one entry per user");
        }
        for (double w : weights) {
            if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("weights", "entries must be > 0");
        }
    }
    if (phase_bits < 0 || phase_bits > 24) throw ConfigError("phase_bits", "must be in [0, 24]");
    if (paths < 1) throw ConfigError("paths", "must be at least 1");
    if (!(antenna_spacing > 0.0)) throw ConfigError("antenna_spacing", "must be > 0");
}

PhaseSet::PhaseSet(int bits) : bits_(bits), size_(0)
{
    if (bits < 1 || bits > 30) {
        throw std::invalid_argument("PhaseSet: bits must be in [1, 30]");
    }
    size_ = Index{1} << bits;
}

Complex PhaseSet::member(Index m) const
{
    m = ((m % size_) + size_) % size_;
    // Quarter turns are returned exactly.
    if ((4 * m) % size_ == 0) {
        switch ((4 * m) / size_) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    return std::polar(1.0, kTwoPi * static_cast<double>(m) / static_cast<double>(size_));
}

Index PhaseSet::nearest_index(Complex z) const
{
    if (z == Complex(0.0, 0.0)) {
        return 0;
    }
    double angle = std::arg(z);
    if (angle < 0.0) {
        angle += kTwoPi;
    }
    const double t = angle / (kTwoPi / static_cast<double>(size_));
    const double lo = std::floor(t);
    const double frac = t - lo;
    const Index below = static_cast<Index>(lo) % size_;
    const Index above = (below + 1) % size_;
    if (frac < 0.5) return below;
    if (frac > 0.5) return above;
    return std::min(below, above);
}

bool PhaseSet::contains(Complex z, double tol) const
{
    return std::abs(z - member(nearest_index(z))) <= tol;
}

bool is_unit_modulus(const CMatrix& m, double tol)
{
    for (Index c = 0; c < m.cols(); ++c) {
        for (Index r = 0; r < m.rows(); ++r) {
            if (std::abs(std::abs(m(r, c)) - 1.0) > tol) {
                return false;
            }
        }
    }
    return true;
}

RateResult rate_general(const std::vector<CMatrix>& channels, const HybridPrecoder& precoder,
                        const std::vector<HybridCombiner>& combiners, double noise,
                        const std::vector<double>& weights)
{
    const Index users = static_cast<Index>(channels.size());
    if (users == 0) {
        throw DimensionError("rate_general: no channels");
    }
    if (precoder.rf.cols() != precoder.digital.rows()) {
        throw DimensionError("rate_general: precoder factors do not chain");
    }
    const Index streams = precoder.digital.cols();
    if (streams % users != 0) {
        throw DimensionError("rate_general: streams not divisible by users");
    }
    if (!combiners.empty() && static_cast<Index>(combiners.size()) != users) {
        throw DimensionError("rate_general: one combiner per user required");
    }
    const Index d = streams / users;
    const RVector beta = weights_or_ones(weights, users);
    const CMatrix vt = precoder.total();

    RateResult out;
    for (Index k = 0; k < users; ++k) {
        const CMatrix& h = channels[static_cast<std::size_t>(k)];
        if (h.cols() != vt.rows()) {
            throw DimensionError("rate_general: channel width does not match precoder");
        }
        CMatrix w;
        if (combiners.empty()) {
            w = CMatrix::Identity(h.rows(), h.rows());
        } else {
            w = combiners[static_cast<std::size_t>(k)].total();
            if (w.rows() != h.rows()) {
                throw DimensionError("rate_general: combiner height does not match channel");
            }
        }
        const CMatrix received = w.adjoint() * (h * vt);  // r x Ns
        const CMatrix desired = received.middleCols(k * d, d);
        CMatrix cov = received * received.adjoint() - desired * desired.adjoint() +
                      noise * (w.adjoint() * w);
        const Eigen::LLT<CMatrix> llt = factor_covariance(cov, noise * 1e-12);
        const CMatrix whitened = llt.matrixL().solve(desired);
        const double rate = log_det_eye_plus(whitened.adjoint() * whitened) / std::log(2.0);
        out.per_user.push_back(std::max(rate, 0.0));
        out.weighted_sum += beta(k) * out.per_user.back();
    }
    return out;
}

double rate_p2p(const CMatrix& channel, const CMatrix& precoder, const CMatrix& combiner,
                double noise)
{
    if (channel.cols() != precoder.rows() || channel.rows() != combiner.rows()) {
        throw DimensionError("rate_p2p: shape mismatch");
    }
    Eigen::LLT<CMatrix> gram(combiner.adjoint() * combiner);
    if (gram.info() != Eigen::Success) {
        throw SingularMatrixError("rate_p2p: combiner Gram matrix is singular");
    }
    const CMatrix whitened = gram.matrixL().solve(combiner.adjoint() * channel * precoder);
    const double rate = log_det_eye_plus(whitened.adjoint() * whitened / noise) / std::log(2.0);
    return std::max(rate, 0.0);
}

RateResult rate_miso(const CMatrix& channel, const HybridPrecoder& precoder, double noise,
                     const std::vector<double>& weights)
{
    const Index users = channel.rows();
    const CMatrix gains = channel * precoder.total();
    if (gains.cols() != users) {
        throw DimensionError("rate_miso: expected one stream per user");
    }
    const RVector beta = weights_or_ones(weights, users);
    RateResult out;
    for (Index k = 0; k < users; ++k) {
        const double signal = std::norm(gains(k, k));
        const double interference = gains.row(k).squaredNorm() - signal;
        out.per_user.push_back(std::log2(1.0 + signal / (noise + std::max(interference, 0.0))));
        out.weighted_sum += beta(k) * out.per_user.back();
    }
    return out;
}

HybridPrecoder realize_fully_digital(const CMatrix& fully_digital, double rank_tol)
{
    if (fully_digital.size() == 0 || fully_digital.norm() == 0.0) {
        throw std::invalid_argument("realize_fully_digital: matrix is zero");
    }
    const SvdResult s = svd(fully_digital);
    Index rank = 0;
    for (Index k = 0; k < s.singular.size(); ++k) {
        if (s.singular(k) > rank_tol * s.singular(0)) ++rank;
    }
    if (rank == fully_digital.cols()) {
        return realize_columns(fully_digital);
    }
    // V_FD = A * B with A = U_r diag(s_r) full column rank.
    const CMatrix a = s.left.leftCols(rank) * s.singular.head(rank).asDiagonal();
    const CMatrix b = s.right.leftCols(rank).adjoint();
    HybridPrecoder out = realize_columns(a);
    out.digital = out.digital * b;
    return out;
}

Complex quantize_phase(Complex z, const PhaseSet& phases)
{
    return phases.member(phases.nearest_index(z));
}

CMatrix quantize_beamformer(const CMatrix& rf, const PhaseSet& phases)
{
    return rf.unaryExpr([&](const Complex& z) { return quantize_phase(z, phases); });
}

}  // namespace hbf
