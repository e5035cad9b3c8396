#pragma once

#include <optional>
#include <vector>

#include "hbf/channel.hpp"
#include "hbf/hybrid.hpp"
#include "hbf/mimo.hpp"
#include "hbf/numerics.hpp"
#include "hbf/system.hpp"

namespace hbf {

// Channels in this module are K x N with row k equal to h_k^H.

/// V_D = V_RF^H H^H (H V_RF V_RF^H H^H)^{-1} diag(sqrt(p)).
/// Throws SingularMatrixError when the effective Gram matrix is singular.
CMatrix zf_digital(const CMatrix& channel, const CMatrix& rf, const RVector& powers);

/// Received powers p_k maximizing sum beta_k log2(1 + p_k / noise) subject to
/// sum q_kk p_k = P, where q_kk are the per-user transmit costs of the
/// unit-power ZF precoder through V_RF.
WaterfillResult power_alloc_zf(const CMatrix& channel, const CMatrix& rf, const RVector& weights,
                               double noise, double power);

/// N * Tr((Ht V V^H Ht^H)^{-1}).
double fhat(const CMatrix& scaled_channel, const CMatrix& rf);

/// Same objective written for unscaled H and per-user powers p:
/// N * Tr(diag(p) (H V V^H H^H)^{-1}), equal to fhat(diag(p)^{-1/2} H, V) when p > 0.
double fhat_weighted(const CMatrix& channel, const RVector& powers, const CMatrix& rf);

/// Rank-one split of fhat around entry (i, j):
///   fhat = N * (trace_aj_inv - (zeta_b + 2 Re{conj(x) eta_b}) / (1 + zeta_d + 2 Re{conj(x) eta_d}))
/// for x = V(i, j).
struct FhatDecomposition {
    double scale = 0.0;        // N
    double trace_aj_inv = 0.0;
    double zeta_b = 0.0;
    double zeta_d = 0.0;
    Complex eta_b{};
    Complex eta_d{};

    double value(Complex entry) const;
};

/// Thrown when the column-removed Gram A_j is singular (needs N_RF >= K + 1).
FhatDecomposition fhat_decompose(const CMatrix& scaled_channel, const CMatrix& rf, Index row,
                                 Index col);
FhatDecomposition fhat_decompose(const CMatrix& channel, const RVector& powers, const CMatrix& rf,
                                 Index row, Index col);

/// Stationary phases of fhat in theta for V(i, j) = exp(-j theta).
struct ThetaCandidates {
    double theta1 = 0.0;
    double theta2 = 0.0;
    Complex c{};
    double z = 0.0;
    double phi = 0.0;
};

/// Throws std::domain_error when c == 0 or |z / c| exceeds 1 by more than 1e-9.
ThetaCandidates theta_candidates(const FhatDecomposition& dec);

struct MisoDescentResult {
    CMatrix rf;
    std::vector<double> fhat_trace;  // initial value, then one per sweep
    int iterations = 0;
};

/// Entry-wise minimization of fhat_weighted over V_RF (N x n_rf, n_rf >= K + 1),
/// starting from `initial` (or the default start). With `phases`, each entry is
/// the best alphabet member.
MisoDescentResult rf_descent_miso(const CMatrix& channel, const RVector& powers, Index n_rf,
                                  const DescentOptions& opts = {},
                                  const std::optional<PhaseSet>& phases = std::nullopt,
                                  const std::optional<CMatrix>& initial = std::nullopt);

/// Start point for the MU-MISO descent: phase-matched columns for the first K
/// RF chains, DFT columns for the rest (quantized when `phases` is given).
CMatrix miso_initial_rf(const CMatrix& channel, Index n_rf,
                        const std::optional<PhaseSet>& phases = std::nullopt);

struct MisoDesignOptions {
    DescentOptions inner{50, 1e-6, {}};
    int max_outer_iters = 30;
    double outer_rel_tol = 1e-5;
    PhaseMode phase_mode = PhaseMode::kAware;
};

/// Alternates RF descent (fixed powers) and ZF water-filling (fixed RF) starting
/// from P = I, then returns the best iterate. With rf_chains_tx == K the RF
/// precoder falls back to channel phase matching.
DesignReport design_hybrid_miso(const CMatrix& channel, const SystemConfig& cfg,
                                const MisoDesignOptions& opts = {});

/// Hybrid precoder with the given RF matrix and a water-filled ZF digital stage.
DesignReport zf_design_for_rf(const CMatrix& channel, const SystemConfig& cfg, const CMatrix& rf);

/// V_RF(i, k) = exp(-j arg H(k, i)).
CMatrix rf_channel_phase_match(const CMatrix& channel);

/// Column k steers toward the departure angle of user k's strongest path.
/// With a phase set the columns are quantized, and a user whose quantized beam
/// duplicates an earlier one takes its next strongest path instead.
CMatrix rf_strongest_path(const std::vector<PathSet>& paths, const ArrayGeometry& tx,
                          const std::optional<PhaseSet>& phases = std::nullopt);

struct FullyDigitalZf {
    double weighted_sum_rate = 0.0;
    std::vector<double> per_user_rates;
    CMatrix precoder;  // N x K
    RVector powers;
};

/// Fully digital ZF with weighted water-filling. Throws SingularMatrixError on
/// a rank-deficient channel.
FullyDigitalZf fd_zf_baseline(const CMatrix& channel, const RVector& weights, double noise,
                              double power);

}  // namespace hbf
