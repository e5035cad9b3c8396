#include "hbf/miso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace hbf {

namespace {

Eigen::LLT<CMatrix> checked_llt(const CMatrix& gram, const char* what)
{
    Eigen::LLT<CMatrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError(what);
    }
    const RVector pivots = llt.matrixLLT().diagonal().real();
    const double hi = pivots.maxCoeff();
    const double lo = pivots.minCoeff();
    if (!(lo > 0.0) || (lo * lo) < 1e-14 * (hi * hi)) {
        throw SingularMatrixError(what);
    }
    return llt;
}

void check_powers(const CMatrix& channel, const RVector& powers)
{
    if (powers.size() != channel.rows()) {
        throw DimensionError("one power per user (channel row) required");
    }
    if ((powers.array() < 0.0).any()) {
        throw std::invalid_argument("powers must be non-negative");
    }
}

// Low-rank evaluation of the fhat split for one column j. With A = H Vbar Vbar^H H^H,
// M = A^{-1} H, B = M^H P M and D = H^H M, the quantities needed per entry reduce to
// K-vectors:  u = M v,  w = P u,  (B v)_i = m_i^H w,  (D v)_i = h_i^H u,
// v^H B v = u^H w  and  v^H D v = (H v)^H u.
class ColumnWorkspace {
public:
    ColumnWorkspace(const CMatrix& channel, const RVector& powers, const CMatrix& rf, Index col)
        : channel_(channel), powers_(powers), col_(col), v_(rf.col(col))
    {
        const Index users = channel.rows();
        CMatrix rest(rf.rows(), rf.cols() - 1);
        rest.leftCols(col) = rf.leftCols(col);
        rest.rightCols(rf.cols() - 1 - col) = rf.rightCols(rf.cols() - 1 - col);
        const CMatrix x = channel * rest;
        const Eigen::LLT<CMatrix> llt =
            checked_llt(x * x.adjoint(), "fhat decomposition: A_j is singular (need N_RF >= K + 1)");
        const CMatrix a_inv = llt.solve(CMatrix::Identity(users, users));
        trace_ = 0.0;
        for (Index k = 0; k < users; ++k) trace_ += powers(k) * a_inv(k, k).real();
        m_ = a_inv * channel;
        y_ = channel * v_;
        u_ = m_ * v_;
        w_ = powers.cast<Complex>().asDiagonal() * u_;
    }

    FhatDecomposition decompose(Index row) const
    {
        const auto m_i = m_.col(row);
        const auto h_i = channel_.col(row);
        const Complex vi = v_(row);
        double b_ii = 0.0;
        for (Index k = 0; k < m_.rows(); ++k) b_ii += powers_(k) * std::norm(m_i(k));
        const double d_ii = h_i.dot(m_i).real();

        FhatDecomposition out;
        out.scale = static_cast<double>(channel_.cols());
        out.trace_aj_inv = trace_;
        out.eta_b = m_i.dot(w_) - b_ii * vi;
        out.eta_d = h_i.dot(u_) - d_ii * vi;
        const double vbv = u_.dot(w_).real();
        const double vdv = y_.dot(u_).real();
        const double mag = std::norm(vi);
        out.zeta_b = b_ii + vbv - b_ii * mag - 2.0 * (std::conj(vi) * out.eta_b).real();
        out.zeta_d = d_ii + vdv - d_ii * mag - 2.0 * (std::conj(vi) * out.eta_d).real();
        return out;
    }

    void set(Index row, Complex value)
    {
        const Complex delta = value - v_(row);
        if (delta == Complex(0.0, 0.0)) return;
        v_(row) = value;
        y_ += channel_.col(row) * delta;
        u_ += m_.col(row) * delta;
        w_ = powers_.cast<Complex>().asDiagonal() * u_;
    }

private:
    const CMatrix& channel_;
    const RVector& powers_;
    Index col_;
    CVector v_;
    double trace_ = 0.0;
    CMatrix m_;
    CVector y_, u_, w_;
};

bool degenerate(const FhatDecomposition& dec, Complex c)
{
    const double size = std::abs(dec.eta_b) * (1.0 + dec.zeta_d) + std::abs(dec.zeta_b * dec.eta_d);
    return std::abs(c) == 0.0 || std::abs(c) <= 1e-14 * size;
}

void check_miso(const CMatrix& channel, const SystemConfig& cfg)
{
    cfg.validate();
    if (cfg.rx_antennas != 1 || cfg.streams_per_user != 1) {
        throw ConfigError("rx_antennas", "MU-MISO needs single-antenna users with one stream");
    }
    if (channel.rows() != cfg.users || channel.cols() != cfg.tx_antennas) {
        throw DimensionError("channel must be users x tx_antennas");
    }
}

}  // namespace

CMatrix zf_digital(const CMatrix& channel, const CMatrix& rf, const RVector& powers)
{
    check_powers(channel, powers);
    const CMatrix effective = channel * rf;
    const Eigen::LLT<CMatrix> llt =
        checked_llt(effective * effective.adjoint(), "zf_digital: effective channel Gram is singular");
    const CMatrix inv = llt.solve(CMatrix::Identity(channel.rows(), channel.rows()));
    return effective.adjoint() * inv * powers.cwiseSqrt().cast<Complex>().asDiagonal();
}

WaterfillResult power_alloc_zf(const CMatrix& channel, const CMatrix& rf, const RVector& weights,
                               double noise, double power)
{
    const Index users = channel.rows();
    const CMatrix unit = zf_digital(channel, rf, RVector::Ones(users));
    const CMatrix q = unit.adjoint() * (rf.adjoint() * rf) * unit;
    return waterfill(q.diagonal().real(), weights, noise, power);
}

double fhat(const CMatrix& scaled_channel, const CMatrix& rf)
{
    return fhat_weighted(scaled_channel, RVector::Ones(scaled_channel.rows()), rf);
}

double fhat_weighted(const CMatrix& channel, const RVector& powers, const CMatrix& rf)
{
    check_powers(channel, powers);
    const CMatrix x = channel * rf;
    const Eigen::LLT<CMatrix> llt = checked_llt(x * x.adjoint(), "fhat: Gram matrix is singular");
    const CMatrix inv = llt.solve(CMatrix::Identity(channel.rows(), channel.rows()));
    double acc = 0.0;
    for (Index k = 0; k < channel.rows(); ++k) acc += powers(k) * inv(k, k).real();
    return static_cast<double>(rf.rows()) * acc;
}

double FhatDecomposition::value(Complex entry) const
{
    const double num = zeta_b + 2.0 * (std::conj(entry) * eta_b).real();
    const double den = 1.0 + zeta_d + 2.0 * (std::conj(entry) * eta_d).real();
    return scale * (trace_aj_inv - num / den);
}

FhatDecomposition fhat_decompose(const CMatrix& scaled_channel, const CMatrix& rf, Index row,
                                 Index col)
{
    return fhat_decompose(scaled_channel, RVector::Ones(scaled_channel.rows()), rf, row, col);
}

FhatDecomposition fhat_decompose(const CMatrix& channel, const RVector& powers, const CMatrix& rf,
                                 Index row, Index col)
{
    check_powers(channel, powers);
    if (channel.cols() != rf.rows()) {
        throw DimensionError("fhat_decompose: channel width must equal rows(V_RF)");
    }
    if (rf.cols() <= channel.rows()) {
        throw std::invalid_argument("fhat_decompose: requires N_RF >= K + 1");
    }
    if (row < 0 || row >= rf.rows() || col < 0 || col >= rf.cols()) {
        throw std::out_of_range("fhat_decompose: entry index out of range");
    }
    return ColumnWorkspace(channel, powers, rf, col).decompose(row);
}

ThetaCandidates theta_candidates(const FhatDecomposition& dec)
{
    ThetaCandidates out;
    out.c = (1.0 + dec.zeta_d) * dec.eta_b - dec.zeta_b * dec.eta_d;
    out.z = (2.0 * std::conj(dec.eta_b) * dec.eta_d).imag();
    const double mag = std::abs(out.c);
    if (mag == 0.0) {
        throw std::domain_error("theta_candidates: c is zero");
    }
    double ratio = out.z / mag;
    if (std::abs(ratio) > 1.0 + 1e-9) {
        throw std::domain_error("theta_candidates: |z / c| exceeds 1");
    }
    ratio = std::clamp(ratio, -1.0, 1.0);
    const double s = std::asin(std::clamp(out.c.imag() / mag, -1.0, 1.0));
    out.phi = out.c.real() >= 0.0 ? s : std::numbers::pi - s;
    out.theta1 = -out.phi + std::asin(ratio);
    out.theta2 = std::numbers::pi - out.phi - std::asin(ratio);
    return out;
}

CMatrix miso_initial_rf(const CMatrix& channel, Index n_rf, const std::optional<PhaseSet>& phases)
{
    const Index n = channel.cols();
    const Index users = channel.rows();
    CMatrix rf(n, n_rf);
    const CMatrix matched = rf_channel_phase_match(channel);
    for (Index j = 0; j < n_rf; ++j) {
        if (j < users) {
            rf.col(j) = matched.col(j);
            continue;
        }
        const double t = static_cast<double>(j - users + 1);
        for (Index i = 0; i < n; ++i) {
            rf(i, j) = std::polar(1.0, 2.0 * std::numbers::pi * t * static_cast<double>(i) /
                                           static_cast<double>(n));
        }
    }
    return phases ? quantize_beamformer(rf, *phases) : rf;
}

MisoDescentResult rf_descent_miso(const CMatrix& channel, const RVector& powers, Index n_rf,
                                  const DescentOptions& opts, const std::optional<PhaseSet>& phases,
                                  const std::optional<CMatrix>& initial)
{
    check_powers(channel, powers);
    const Index n = channel.cols();
    if (n_rf <= channel.rows()) {
        throw std::invalid_argument("rf_descent_miso: requires N_RF >= K + 1");
    }
    if (opts.max_outer_iters < 1 || !(opts.rel_tol > 0.0)) {
        throw std::invalid_argument("rf_descent_miso: invalid options");
    }
    MisoDescentResult out;
    out.rf = initial ? *initial : miso_initial_rf(channel, n_rf, phases);
    if (out.rf.rows() != n || out.rf.cols() != n_rf) {
        throw DimensionError("rf_descent_miso: initial V_RF has the wrong shape");
    }
    double current = fhat_weighted(channel, powers, out.rf);
    out.fhat_trace.push_back(current);

    for (int sweep = 0; sweep < opts.max_outer_iters; ++sweep) {
        for (Index j = 0; j < n_rf; ++j) {
            ColumnWorkspace ws(channel, powers, out.rf, j);
            for (Index i = 0; i < n; ++i) {
                const FhatDecomposition dec = ws.decompose(i);
                const Complex old = out.rf(i, j);
                const double old_value = dec.value(old);
                Complex best = old;
                double best_value = old_value;
                if (phases) {
                    for (Index m = 0; m < phases->size(); ++m) {
                        const Complex x = phases->member(m);
                        const double val = dec.value(x);
                        if (val < best_value) {
                            best_value = val;
                            best = x;
                        }
                    }
                } else {
                    const Complex c = (1.0 + dec.zeta_d) * dec.eta_b - dec.zeta_b * dec.eta_d;
                    if (!degenerate(dec, c)) {
                        try {
                            const ThetaCandidates cand = theta_candidates(dec);
                            for (double theta : {cand.theta1, cand.theta2}) {
                                const Complex x = std::polar(1.0, -theta);
                                const double val = dec.value(x);
                                if (val < best_value) {
                                    best_value = val;
                                    best = x;
                                }
                            }
                        } catch (const std::domain_error&) {
                            // keep the current entry
                        }
                    }
                }
                if (best != old) {
                    ws.set(i, best);
                    out.rf(i, j) = best;
                }
                if (opts.on_update) {
                    opts.on_update(out.rf, i, j);
                }
            }
        }
        ++out.iterations;
        const double updated = fhat_weighted(channel, powers, out.rf);
        out.fhat_trace.push_back(updated);
        const double change = std::abs(updated - current);
        current = updated;
        if (change <= opts.rel_tol * std::abs(updated)) {
            break;
        }
    }
    return out;
}

DesignReport zf_design_for_rf(const CMatrix& channel, const SystemConfig& cfg, const CMatrix& rf)
{
    const RVector beta = cfg.weight_vector();
    const WaterfillResult wf = power_alloc_zf(channel, rf, beta, cfg.noise_power, cfg.power);
    DesignReport rep;
    rep.precoder = {rf, zf_digital(channel, rf, wf.powers)};
    const RateResult rates = rate_miso(channel, rep.precoder, cfg.noise_power, cfg.weights);
    rep.per_user_rates = rates.per_user;
    rep.weighted_sum_rate = rates.weighted_sum;
    return rep;
}

DesignReport design_hybrid_miso(const CMatrix& channel, const SystemConfig& cfg,
                                const MisoDesignOptions& opts)
{
    check_miso(channel, cfg);
    const Index users = cfg.users;
    const Index n_rf = cfg.rf_chains_tx;
    const std::optional<PhaseSet> phases =
        cfg.phase_bits > 0 ? std::optional<PhaseSet>(PhaseSet(cfg.phase_bits)) : std::nullopt;

    if (n_rf == users) {
        CMatrix rf = rf_channel_phase_match(channel);
        if (phases) rf = quantize_beamformer(rf, *phases);
        return zf_design_for_rf(channel, cfg, rf);
    }

    const bool aware = phases && opts.phase_mode == PhaseMode::kAware;
    const std::optional<PhaseSet> search = aware ? phases : std::nullopt;
    const RVector beta = cfg.weight_vector();
    RVector powers = RVector::Ones(users);
    CMatrix rf = miso_initial_rf(channel, n_rf, search);

    CMatrix best_rf = rf;
    double best_rate = -std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    int iterations = 0;
    double previous = 0.0;
    for (int outer = 0; outer < opts.max_outer_iters; ++outer) {
        rf = rf_descent_miso(channel, powers, n_rf, opts.inner, search, rf).rf;
        powers = power_alloc_zf(channel, rf, beta, cfg.noise_power, cfg.power).powers;
        double rate = 0.0;
        for (Index k = 0; k < users; ++k) rate += beta(k) * std::log2(1.0 + powers(k) / cfg.noise_power);
        trace.push_back(rate);
        ++iterations;
        if (rate > best_rate) {
            best_rate = rate;
            best_rf = rf;
        }
        if (outer > 0 && std::abs(rate - previous) <= opts.outer_rel_tol * std::abs(rate)) {
            break;
        }
        previous = rate;
    }

    if (phases && !aware) {
        best_rf = quantize_beamformer(best_rf, *phases);
    }
    DesignReport rep = zf_design_for_rf(channel, cfg, best_rf);
    rep.objective_trace = std::move(trace);
    rep.iterations = iterations;
    return rep;
}

CMatrix rf_channel_phase_match(const CMatrix& channel)
{
    CMatrix rf(channel.cols(), channel.rows());
    for (Index k = 0; k < channel.rows(); ++k) {
        for (Index i = 0; i < channel.cols(); ++i) {
            const Complex h = channel(k, i);
            rf(i, k) = h == Complex(0.0, 0.0) ? Complex(1.0, 0.0) : std::conj(h) / std::abs(h);
        }
    }
    return rf;
}

CMatrix rf_strongest_path(const std::vector<PathSet>& paths, const ArrayGeometry& tx,
                          const std::optional<PhaseSet>& phases)
{
    if (paths.empty()) {
        throw std::invalid_argument("rf_strongest_path: path sets unavailable");
    }
    CMatrix rf(tx.element_count, static_cast<Index>(paths.size()));
    for (std::size_t k = 0; k < paths.size(); ++k) {
        const Index col = static_cast<Index>(k);
        if (paths[k].size() == 0) {
            throw std::invalid_argument("rf_strongest_path: user has no paths");
        }
        std::vector<Index> order(static_cast<std::size_t>(paths[k].size()));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
            return std::abs(paths[k].gains(a)) > std::abs(paths[k].gains(b));
        });
        for (std::size_t r = 0; r < order.size(); ++r) {
            const CVector steer = ula_response(tx, paths[k].aod(order[r]));
            rf.col(col) = steer.unaryExpr([](const Complex& z) { return z / std::abs(z); });
            if (!phases) break;
            rf.col(col) = quantize_beamformer(rf.col(col), *phases);
            // Coarse phases can map two users onto the same beam; fall back to the next path.
            if (numerical_rank(rf.leftCols(col + 1), 1e-6) == col + 1) break;
            if (r + 1 == order.size()) {
                rf.col(col) = quantize_beamformer(ula_response(tx, paths[k].aod(order[0])), *phases);
            }
        }
    }
    return rf;
}

FullyDigitalZf fd_zf_baseline(const CMatrix& channel, const RVector& weights, double noise,
                              double power)
{
    const Index users = channel.rows();
    const Eigen::LLT<CMatrix> llt =
        checked_llt(channel * channel.adjoint(), "fd_zf_baseline: channel is rank deficient");
    const CMatrix inv = llt.solve(CMatrix::Identity(users, users));
    const WaterfillResult wf = waterfill(inv.diagonal().real(), weights, noise, power);
    FullyDigitalZf out;
    out.powers = wf.powers;
    out.precoder = channel.adjoint() * inv * wf.powers.cwiseSqrt().cast<Complex>().asDiagonal();
    for (Index k = 0; k < users; ++k) {
        out.per_user_rates.push_back(std::log2(1.0 + wf.powers(k) / noise));
        out.weighted_sum_rate += weights(k) * out.per_user_rates.back();
    }
    return out;
}

}  // namespace hbf
