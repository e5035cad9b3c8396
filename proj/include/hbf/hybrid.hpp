#pragma once

#include <optional>
#include <vector>

#include "hbf/numerics.hpp"
#include "hbf/system.hpp"

namespace hbf {

/// Finite phase-shifter alphabet {w^m : m = 0..2^b - 1}, w = exp(j 2 pi / 2^b).
class PhaseSet {
public:
    explicit PhaseSet(int bits);

    int bits() const noexcept { return bits_; }
    Index size() const noexcept { return size_; }
    Complex member(Index m) const;

    /// Exponent of the alphabet member nearest in angle to z. Ties go to the
    /// smaller exponent; z == 0 maps to exponent 0.
    Index nearest_index(Complex z) const;

    bool contains(Complex z, double tol = 1e-12) const;

private:
    int bits_;
    Index size_;
};

/// x = rf * digital * s.
struct HybridPrecoder {
    CMatrix rf;       // N x N_RF, unit-modulus entries
    CMatrix digital;  // N_RF x Ns

    CMatrix total() const { return rf * digital; }
    double transmit_power() const { return total().squaredNorm(); }
};

/// Per-user receive side, W_t = rf * digital.
struct HybridCombiner {
    CMatrix rf;       // M x N_RF_rx
    CMatrix digital;  // N_RF_rx x d

    CMatrix total() const { return rf * digital; }
};

struct RateResult {
    std::vector<double> per_user;  // bps/Hz
    double weighted_sum = 0.0;
};

struct DesignReport {
    HybridPrecoder precoder;
    std::vector<HybridCombiner> combiners;  // empty when receivers are unconstrained
    std::vector<double> per_user_rates;
    double weighted_sum_rate = 0.0;
    std::vector<double> objective_trace;
    int iterations = 0;
};

bool is_unit_modulus(const CMatrix& m, double tol = 1e-12);

/// Per-user rates with interference-plus-noise covariance. An empty `combiners`
/// list means every user decodes with the identity (unconstrained receiver).
/// Streams are split evenly across users in column order of the digital precoder.
RateResult rate_general(const std::vector<CMatrix>& channels, const HybridPrecoder& precoder,
                        const std::vector<HybridCombiner>& combiners, double noise,
                        const std::vector<double>& weights = {});

/// Single-user rate with a (possibly rank-reduced) linear combiner:
/// log2|I + (1/noise) W (W^H W)^{-1} W^H H V V^H H^H|.
/// Throws SingularMatrixError when W^H W is singular.
double rate_p2p(const CMatrix& channel, const CMatrix& precoder, const CMatrix& combiner,
                double noise);

/// Single-antenna users. Row k of `channel` is h_k^H; column k of the digital
/// precoder serves user k.
RateResult rate_miso(const CMatrix& channel, const HybridPrecoder& precoder, double noise,
                     const std::vector<double>& weights = {});

/// Exact hybrid realization of a fully digital precoder with twice as many RF
/// chains as its numerical rank. Rank-deficient inputs are first factored as
/// A * B through the SVD and A is realized. Throws std::invalid_argument on a
/// zero matrix.
HybridPrecoder realize_fully_digital(const CMatrix& fully_digital, double rank_tol = 1e-10);

Complex quantize_phase(Complex z, const PhaseSet& phases);
CMatrix quantize_beamformer(const CMatrix& rf, const PhaseSet& phases);

}  // namespace hbf
