#include "hbf/mimo.hpp"

#include <cmath>
#include <stdexcept>

namespace hbf {

namespace {

const double kLn2 = std::log(2.0);

CMatrix drop_column(const CMatrix& m, Index col)
{
    CMatrix out(m.rows(), m.cols() - 1);
    out.leftCols(col) = m.leftCols(col);
    out.rightCols(m.cols() - 1 - col) = m.rightCols(m.cols() - 1 - col);
    return out;
}

struct ColumnTerms {
    CMatrix g;
    double logdet_c = 0.0;
};

// C_j = I + s Vbar^H F Vbar,  G_j = s F - s^2 F Vbar C_j^{-1} Vbar^H F.
ColumnTerms column_terms(const CMatrix& f, const CMatrix& rf, Index col, double scale)
{
    ColumnTerms out;
    if (rf.cols() == 1) {
        out.g = scale * f;
        return out;
    }
    const CMatrix rest = drop_column(rf, col);
    const CMatrix f_rest = f * rest;
    const CMatrix c = CMatrix::Identity(rest.cols(), rest.cols()) + scale * (rest.adjoint() * f_rest);
    out.logdet_c = log_det_eye_plus(scale * (rest.adjoint() * f_rest)) / kLn2;
    const Eigen::LDLT<CMatrix> ldlt(c);
    out.g = scale * f - scale * scale * (f_rest * ldlt.solve(f_rest.adjoint()));
    return out;
}

CMatrix pad_columns(const CMatrix& rf, Index cols)
{
    CMatrix out = CMatrix::Ones(rf.rows(), cols);
    out.leftCols(rf.cols()) = rf;
    return out;
}

CMatrix pad_rows(const CMatrix& digital, Index rows)
{
    CMatrix out = CMatrix::Zero(rows, digital.cols());
    out.topRows(digital.rows()) = digital;
    return out;
}

std::optional<PhaseSet> phase_set_for(const SystemConfig& cfg)
{
    if (cfg.phase_bits > 0) return PhaseSet(cfg.phase_bits);
    return std::nullopt;
}

// Receive side for a fixed transmit precoder.
HybridCombiner design_receiver(const CMatrix& channel, const CMatrix& precoder,
                               const SystemConfig& cfg, const MimoDesignOptions& opts)
{
    const Index m = channel.rows();
    const Index streams = cfg.total_streams();
    const std::optional<PhaseSet> phases = phase_set_for(cfg);
    const CMatrix received = channel * precoder;

    if (!phases && opts.allow_exact_realization && cfg.rf_chains_rx >= 2 * streams &&
        received.norm() > 0.0) {
        // Any combiner spanning range(H V_t) is optimal; realize an orthonormal basis.
        const SvdResult s = svd(received);
        const HybridPrecoder exact = realize_fully_digital(s.left.leftCols(streams));
        return {pad_columns(exact.rf, cfg.rf_chains_rx), pad_rows(exact.digital, cfg.rf_chains_rx)};
    }

    const bool aware = phases && opts.phase_mode == PhaseMode::kAware;
    const CMatrix f2 = received * received.adjoint();
    const double scale = 1.0 / (static_cast<double>(m) * cfg.noise_power);
    CMatrix w_rf = rf_coordinate_descent(f2, scale, cfg.rf_chains_rx, opts.descent,
                                         aware ? phases : std::nullopt)
                       .rf;
    if (phases && !aware) {
        w_rf = quantize_beamformer(w_rf, *phases);
    }
    if (received.norm() == 0.0) {
        return {w_rf, CMatrix::Zero(cfg.rf_chains_rx, streams)};
    }
    try {
        return {w_rf, mmse_digital_combiner(channel, precoder, w_rf, cfg.noise_power)};
    } catch (const SingularMatrixError&) {
        // Rank-deficient F2 leaves repeated RF columns; take the minimum-norm solution.
        const CMatrix a = w_rf.adjoint() * received;
        const CMatrix j = a * a.adjoint() + cfg.noise_power * (w_rf.adjoint() * w_rf);
        return {w_rf, j.completeOrthogonalDecomposition().solve(a)};
    }
}

DesignReport finish_report(const CMatrix& channel, const SystemConfig& cfg, HybridPrecoder precoder,
                           HybridCombiner combiner)
{
    DesignReport rep;
    rep.precoder = std::move(precoder);
    rep.combiners.push_back(std::move(combiner));
    const RateResult rates =
        rate_general({channel}, rep.precoder, rep.combiners, cfg.noise_power, cfg.weights);
    rep.per_user_rates = rates.per_user;
    rep.weighted_sum_rate = rates.weighted_sum;
    return rep;
}

void check_single_user(const CMatrix& channel, const SystemConfig& cfg)
{
    cfg.validate();
    if (cfg.users != 1) {
        throw ConfigError("users", "point-to-point design needs exactly one user");
    }
    if (channel.rows() != cfg.rx_antennas || channel.cols() != cfg.tx_antennas) {
        throw DimensionError("channel shape does not match rx_antennas x tx_antennas");
    }
}

}  // namespace

double ObjectiveDecomposition::objective(Complex entry) const
{
    return logdet_cj + std::log2(1.0 + zeta + 2.0 * (std::conj(entry) * eta).real());
}

double rf_objective(const CMatrix& f, const CMatrix& rf, double scale)
{
    return log_det_eye_plus(scale * (rf.adjoint() * f * rf)) / kLn2;
}

ObjectiveDecomposition decompose_objective(const CMatrix& f, const CMatrix& rf, Index row,
                                           Index col, double scale)
{
    if (f.rows() != f.cols() || f.rows() != rf.rows()) {
        throw DimensionError("decompose_objective: F must be N x N with N = rows(V_RF)");
    }
    if (row < 0 || row >= rf.rows() || col < 0 || col >= rf.cols()) {
        throw std::out_of_range("decompose_objective: entry index out of range");
    }
    ColumnTerms terms = column_terms(f, rf, col, scale);
    const CVector v = rf.col(col);
    const CVector gv = terms.g * v;
    const Complex gii = terms.g(row, row);

    ObjectiveDecomposition out;
    out.logdet_cj = terms.logdet_c;
    out.eta = gv(row) - gii * v(row);
    const double quad = v.dot(gv).real();  // v^H G v
    out.zeta = gii.real() + quad - gii.real() * std::norm(v(row)) -
               2.0 * (std::conj(v(row)) * out.eta).real();
    out.g = std::move(terms.g);
    return out;
}

RfDescentResult rf_coordinate_descent(const CMatrix& f, double scale, Index n_rf,
                                      const DescentOptions& opts,
                                      const std::optional<PhaseSet>& phases)
{
    if (f.rows() != f.cols() || f.rows() == 0) {
        throw DimensionError("rf_coordinate_descent: F must be square and nonempty");
    }
    if (n_rf < 1) {
        throw std::invalid_argument("rf_coordinate_descent: need at least one RF chain");
    }
    if (opts.max_outer_iters < 1 || !(opts.rel_tol > 0.0)) {
        throw std::invalid_argument("rf_coordinate_descent: invalid options");
    }
    const Index n = f.rows();
    RfDescentResult out;
    out.rf = CMatrix::Ones(n, n_rf);
    double objective = rf_objective(f, out.rf, scale);
    out.objective_trace.push_back(objective);

    for (int sweep = 0; sweep < opts.max_outer_iters; ++sweep) {
        for (Index j = 0; j < n_rf; ++j) {
            const CMatrix g = column_terms(f, out.rf, j, scale).g;
            CVector gv = g * out.rf.col(j);
            for (Index i = 0; i < n; ++i) {
                const Complex old = out.rf(i, j);
                const Complex eta = gv(i) - g(i, i) * old;
                Complex next;
                if (phases) {
                    next = eta == Complex(0.0, 0.0) ? old : quantize_phase(eta, *phases);
                } else {
                    next = eta == Complex(0.0, 0.0) ? Complex(1.0, 0.0) : eta / std::abs(eta);
                }
                if (next != old) {
                    gv += g.col(i) * (next - old);
                    out.rf(i, j) = next;
                }
                if (opts.on_update) {
                    opts.on_update(out.rf, i, j);
                }
            }
        }
        ++out.iterations;
        const double updated = rf_objective(f, out.rf, scale);
        out.objective_trace.push_back(updated);
        const double change = std::abs(updated - objective);
        objective = updated;
        if (change <= opts.rel_tol * std::abs(updated)) {
            break;
        }
    }
    return out;
}

CMatrix digital_precoder_waterfill(const CMatrix& channel, const CMatrix& rf, double power,
                                   double noise, Index streams)
{
    const Index n_rf = rf.cols();
    if (streams > n_rf) {
        throw DimensionError("digital_precoder_waterfill: more streams than RF chains");
    }
    if (channel.cols() != rf.rows()) {
        throw DimensionError("digital_precoder_waterfill: channel width does not match V_RF");
    }
    CMatrix digital = CMatrix::Zero(n_rf, streams);
    if (power == 0.0) {
        return digital;
    }
    const CMatrix q_inv_sqrt = inv_sqrt_psd(rf.adjoint() * rf);
    const CMatrix effective = channel * rf * q_inv_sqrt;
    const SvdResult s = svd(effective);
    const CMatrix right = streams <= s.right.cols()
                              ? CMatrix(s.right.leftCols(streams))
                              : CMatrix(right_singular_basis(effective).leftCols(streams));

    std::vector<Index> usable;
    for (Index i = 0; i < std::min(streams, s.singular.size()); ++i) {
        if (s.singular(i) > 1e-12 * s.singular(0) && s.singular(i) > 0.0) usable.push_back(i);
    }
    if (usable.empty()) {
        return digital;
    }
    RVector costs(static_cast<Index>(usable.size()));
    for (std::size_t k = 0; k < usable.size(); ++k) {
        costs(static_cast<Index>(k)) = 1.0 / std::pow(s.singular(usable[k]), 2);
    }
    // Received-power parameterization: stream k transmits q_k * p_k.
    const WaterfillResult wf = waterfill(costs, RVector::Ones(costs.size()), noise, power);
    RVector amplitude = RVector::Zero(streams);
    for (std::size_t k = 0; k < usable.size(); ++k) {
        const Index kk = static_cast<Index>(k);
        amplitude(usable[k]) = std::sqrt(costs(kk) * wf.powers(kk));
    }
    digital = q_inv_sqrt * right * amplitude.cast<Complex>().asDiagonal();
    return digital;
}

CMatrix mmse_digital_combiner(const CMatrix& channel, const CMatrix& precoder,
                              const CMatrix& combiner_rf, double noise)
{
    const CMatrix a = combiner_rf.adjoint() * channel * precoder;
    const CMatrix j = a * a.adjoint() + noise * (combiner_rf.adjoint() * combiner_rf);
    const Eigen::LLT<CMatrix> llt(j);
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError("mmse_digital_combiner: J is singular");
    }
    return llt.solve(a);
}

FullyDigitalP2P fd_p2p_baseline(const CMatrix& channel, double power, double noise, Index streams)
{
    const Index n = channel.cols();
    const Index m = channel.rows();
    if (streams < 1 || streams > std::min(n, m)) {
        throw DimensionError("fd_p2p_baseline: streams must be in [1, min(N, M)]");
    }
    const SvdResult s = svd(channel);
    FullyDigitalP2P out;
    out.combiner = s.left.leftCols(streams);
    out.powers = RVector::Zero(streams);
    out.precoder = CMatrix::Zero(n, streams);
    if (power == 0.0 || s.singular(0) == 0.0) {
        return out;
    }
    std::vector<Index> usable;
    for (Index i = 0; i < streams; ++i) {
        if (s.singular(i) > 1e-12 * s.singular(0)) usable.push_back(i);
    }
    RVector costs(static_cast<Index>(usable.size()));
    for (std::size_t k = 0; k < usable.size(); ++k) {
        costs(static_cast<Index>(k)) = 1.0 / std::pow(s.singular(usable[k]), 2);
    }
    const WaterfillResult wf = waterfill(costs, RVector::Ones(costs.size()), noise, power);
    for (std::size_t k = 0; k < usable.size(); ++k) {
        const Index kk = static_cast<Index>(k);
        const Index i = usable[k];
        out.powers(i) = costs(kk) * wf.powers(kk);
        out.rate += std::log2(1.0 + out.powers(i) * s.singular(i) * s.singular(i) / noise);
        out.precoder.col(i) = std::sqrt(out.powers(i)) * s.right.col(i);
    }
    return out;
}

DesignReport design_hybrid_mimo(const CMatrix& channel, const SystemConfig& cfg,
                                const MimoDesignOptions& opts)
{
    check_single_user(channel, cfg);
    const Index n = cfg.tx_antennas;
    const Index streams = cfg.total_streams();
    const std::optional<PhaseSet> phases = phase_set_for(cfg);

    if (cfg.power == 0.0) {
        return finish_report(channel, cfg,
                             {CMatrix::Ones(n, cfg.rf_chains_tx), CMatrix::Zero(cfg.rf_chains_tx, streams)},
                             {CMatrix::Ones(cfg.rx_antennas, cfg.rf_chains_rx),
                              CMatrix::Zero(cfg.rf_chains_rx, streams)});
    }

    if (!phases && opts.allow_exact_realization && cfg.rf_chains_tx >= 2 * streams) {
        const FullyDigitalP2P fd = fd_p2p_baseline(channel, cfg.power, cfg.noise_power, streams);
        const HybridPrecoder exact = realize_fully_digital(fd.precoder);
        HybridPrecoder precoder{pad_columns(exact.rf, cfg.rf_chains_tx),
                                pad_rows(exact.digital, cfg.rf_chains_tx)};
        HybridCombiner combiner = design_receiver(channel, precoder.total(), cfg, opts);
        return finish_report(channel, cfg, std::move(precoder), std::move(combiner));
    }

    const bool aware = phases && opts.phase_mode == PhaseMode::kAware;
    const double gamma_sq = cfg.power / static_cast<double>(n * cfg.rf_chains_tx);
    const RfDescentResult tx = rf_coordinate_descent(channel.adjoint() * channel,
                                                     gamma_sq / cfg.noise_power, cfg.rf_chains_tx,
                                                     opts.descent, aware ? phases : std::nullopt);
    CMatrix rf = tx.rf;
    if (phases && !aware) {
        rf = quantize_beamformer(rf, *phases);
    }
    DesignReport rep = complete_mimo_design(channel, cfg, rf, opts);
    rep.objective_trace = tx.objective_trace;
    rep.iterations = tx.iterations;
    return rep;
}

DesignReport complete_mimo_design(const CMatrix& channel, const SystemConfig& cfg,
                                  const CMatrix& rf, const MimoDesignOptions& opts)
{
    check_single_user(channel, cfg);
    if (rf.rows() != cfg.tx_antennas) {
        throw DimensionError("complete_mimo_design: V_RF height must equal tx_antennas");
    }
    HybridPrecoder precoder{
        rf, digital_precoder_waterfill(channel, rf, cfg.power, cfg.noise_power, cfg.total_streams())};
    HybridCombiner combiner = design_receiver(channel, precoder.total(), cfg, opts);
    return finish_report(channel, cfg, std::move(precoder), std::move(combiner));
}

CMatrix exhaustive_rf_b1(const CMatrix& channel, double power, double noise, Index n_rf,
                         Index streams)
{
    const Index n = channel.cols();
    if (n * n_rf > 16) {
        throw std::invalid_argument("exhaustive_rf_b1: search limited to N * N_RF <= 16");
    }
    // Column sign flips are absorbed by the digital precoder, so row 0 stays +1.
    const Index free_bits = (n - 1) * n_rf;
    CMatrix best = CMatrix::Ones(n, n_rf);
    double best_rate = -1.0;
    CMatrix rf(n, n_rf);
    for (std::uint32_t pattern = 0; pattern < (1u << free_bits); ++pattern) {
        for (Index j = 0; j < n_rf; ++j) {
            rf(0, j) = 1.0;
            for (Index i = 1; i < n; ++i) {
                const Index bit = j * (n - 1) + (i - 1);
                rf(i, j) = ((pattern >> bit) & 1u) ? -1.0 : 1.0;
            }
        }
        const CMatrix digital = digital_precoder_waterfill(channel, rf, power, noise, streams);
        const CMatrix received = channel * rf * digital;
        const double rate = log_det_eye_plus(received.adjoint() * received / noise) / kLn2;
        if (rate > best_rate) {
            best_rate = rate;
            best = rf;
        }
    }
    return best;
}

}  // namespace hbf
