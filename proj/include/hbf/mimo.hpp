#pragma once

#include <functional>
#include <optional>

#include "hbf/hybrid.hpp"
#include "hbf/numerics.hpp"
#include "hbf/system.hpp"

namespace hbf {

/// Contribution of one RF entry (i, j) to log2|I + scale * V^H F V|:
///   objective = logdet_cj + log2(1 + zeta + 2 Re{conj(V(i,j)) * eta}).
struct ObjectiveDecomposition {
    double logdet_cj = 0.0;  // log2|C_j|
    Complex eta{};
    double zeta = 0.0;
    CMatrix g;               // G_j

    double objective(Complex entry) const;
};

/// Called after every single-entry update with the matrix after the update.
using EntryObserver = std::function<void(const CMatrix& rf, Index row, Index col)>;

struct DescentOptions {
    int max_outer_iters = 100;
    double rel_tol = 1e-6;
    EntryObserver on_update;  // optional
};

struct RfDescentResult {
    CMatrix rf;
    std::vector<double> objective_trace;  // initial value, then one per sweep
    int iterations = 0;                   // sweeps performed
};

/// log2|I + scale * V^H F V|.
double rf_objective(const CMatrix& f, const CMatrix& rf, double scale);

ObjectiveDecomposition decompose_objective(const CMatrix& f, const CMatrix& rf, Index row,
                                           Index col, double scale);

/// Element-wise coordinate ascent on log2|I + scale * V^H F V| over
/// unit-modulus V (N x n_rf), starting from all ones and sweeping columns then
/// rows. With `phases`, each entry is restricted to the alphabet.
RfDescentResult rf_coordinate_descent(const CMatrix& f, double scale, Index n_rf,
                                      const DescentOptions& opts = {},
                                      const std::optional<PhaseSet>& phases = std::nullopt);

/// Water-filling digital precoder for a fixed RF precoder:
/// V_D = Q^{-1/2} U_e diag(sqrt(p)), Q = V_RF^H V_RF.
CMatrix digital_precoder_waterfill(const CMatrix& channel, const CMatrix& rf, double power,
                                   double noise, Index streams);

/// W_D = J^{-1} W_RF^H H V_t with J = W_RF^H H V_t V_t^H H^H W_RF + noise W_RF^H W_RF.
CMatrix mmse_digital_combiner(const CMatrix& channel, const CMatrix& precoder,
                              const CMatrix& combiner_rf, double noise);

struct FullyDigitalP2P {
    double rate = 0.0;
    CMatrix precoder;  // N x Ns, water-filled right singular vectors
    CMatrix combiner;  // M x Ns, left singular vectors
    RVector powers;
};

FullyDigitalP2P fd_p2p_baseline(const CMatrix& channel, double power, double noise, Index streams);

enum class PhaseMode {
    kAware,           // alphabet enforced inside the coordinate updates
    kQuantizeAfter,   // infinite-resolution design, then nearest-point rounding
};

struct MimoDesignOptions {
    DescentOptions descent;
    PhaseMode phase_mode = PhaseMode::kAware;
    /// Use the exact two-RF-chains-per-stream realization when enough chains exist
    /// (infinite resolution only).
    bool allow_exact_realization = true;
};

/// Point-to-point hybrid design: RF precoder by coordinate ascent with
/// gamma^2 = P / (N * N_RF), water-filled digital precoder, RF combiner by the
/// same ascent with scale 1 / (M sigma^2), and an MMSE digital combiner.
/// cfg.phase_bits > 0 selects finite-resolution phase shifters.
DesignReport design_hybrid_mimo(const CMatrix& channel, const SystemConfig& cfg,
                                const MimoDesignOptions& opts = {});

/// Transmit RF precoder with entries in {+1, -1} chosen by exhaustive search to
/// maximize the rate under an unconstrained receiver. Requires N * N_RF <= 16.
CMatrix exhaustive_rf_b1(const CMatrix& channel, double power, double noise, Index n_rf,
                         Index streams);

/// Rate of the hybrid design whose transmit RF precoder is `rf`; the receiver
/// uses the same combiner procedure as design_hybrid_mimo.
DesignReport complete_mimo_design(const CMatrix& channel, const SystemConfig& cfg,
                                  const CMatrix& rf, const MimoDesignOptions& opts = {});

}  // namespace hbf
