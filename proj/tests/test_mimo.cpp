#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hbf/channel.hpp"
#include "hbf/mimo.hpp"
#include "oracles.hpp"

using namespace hbf;

namespace {

SystemConfig p2p(Index n, Index m, Index ns, Index rf_tx, Index rf_rx, double power, int bits = 0)
{
    SystemConfig cfg;
    cfg.tx_antennas = n;
    cfg.rx_antennas = m;
    cfg.streams_per_user = ns;
    cfg.rf_chains_tx = rf_tx;
    cfg.rf_chains_rx = rf_rx;
    cfg.power = power;
    cfg.noise_power = 1.0;
    cfg.phase_bits = bits;
    cfg.paths = 8;
    return cfg;
}

CMatrix gram(std::mt19937_64& rng, Index n, Index rank)
{
    const CMatrix x = oracle::random_matrix(rng, rank, n);
    return x.adjoint() * x;
}

}  // namespace

TEST_CASE("rf_objective matches the LU determinant")
{
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
        const CMatrix f = gram(rng, 10, 4);
        const CMatrix v = oracle::random_unit_modulus(rng, 10, 3);
        CHECK(rf_objective(f, v, 0.3) == doctest::Approx(oracle::logdet_objective(f, v, 0.3)).epsilon(1e-11));
    }
}

TEST_CASE("decompose_objective reproduces the objective for any entry value")
{
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<Index> pick(0, 1000);
    for (int t = 0; t < 200; ++t) {
        const Index n = 4 + pick(rng) % 12;
        const Index n_rf = 1 + pick(rng) % 4;
        const double scale = 0.05 + 0.01 * static_cast<double>(pick(rng) % 100);
        const CMatrix f = gram(rng, n, 1 + pick(rng) % n);
        CMatrix v = oracle::random_unit_modulus(rng, n, n_rf);
        const Index i = pick(rng) % n, j = pick(rng) % n_rf;
        const ObjectiveDecomposition d = decompose_objective(f, v, i, j, scale);
        CHECK(d.objective(v(i, j)) ==
              doctest::Approx(oracle::logdet_objective(f, v, scale)).epsilon(1e-9));
        v(i, j) = oracle::random_phase(rng);
        CHECK(d.objective(v(i, j)) ==
              doctest::Approx(oracle::logdet_objective(f, v, scale)).epsilon(1e-9));
    }
}

TEST_CASE("rank-one F: coordinate ascent reaches the phase-aligned optimum")
{
    // log2(1 + s |a^H v|^2) is maximized by v_i = exp(j arg a_i), giving
    // log2(1 + s (sum |a_i|)^2).
    std::mt19937_64 rng(3);
    const CMatrix a = oracle::random_matrix(rng, 12, 1);
    const CMatrix f = a * a.adjoint();
    const double s = 0.2;
    const double best = std::log2(1.0 + s * std::pow(a.cwiseAbs().sum(), 2));
    DescentOptions opts;
    opts.rel_tol = 1e-14;
    const RfDescentResult r = rf_coordinate_descent(f, s, 1, opts);
    CHECK(r.objective_trace.back() == doctest::Approx(best).epsilon(1e-10));
    CHECK(is_unit_modulus(r.rf));
}

TEST_CASE("every coordinate update is non-decreasing")
{
    std::mt19937_64 rng(4);
    for (int bits : {0, 1, 2}) {
        const CMatrix f = gram(rng, 16, 5);
        const double scale = 0.5;
        double previous = oracle::logdet_objective(f, CMatrix::Ones(16, 3), scale);
        int violations = 0, updates = 0;
        DescentOptions opts;
        opts.on_update = [&](const CMatrix& rf, Index, Index) {
            const double now = oracle::logdet_objective(f, rf, scale);
            if (now < previous - 1e-12 * std::abs(previous)) ++violations;
            previous = now;
            ++updates;
        };
        const auto phases = bits > 0 ? std::optional<PhaseSet>(PhaseSet(bits)) : std::nullopt;
        const RfDescentResult r = rf_coordinate_descent(f, scale, 3, opts, phases);
        CHECK(violations == 0);
        CHECK(updates == 16 * 3 * r.iterations);
        for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
            CHECK(r.objective_trace[k] >= r.objective_trace[k - 1] - 1e-12);
        }
        if (phases) {
            for (Index e = 0; e < r.rf.size(); ++e) CHECK(phases->contains(r.rf(e)));
        }
    }
}

TEST_CASE("water-filled digital precoder meets the power budget")
{
    std::mt19937_64 rng(5);
    const CMatrix h = oracle::random_matrix(rng, 6, 12);
    const CMatrix rf = oracle::random_unit_modulus(rng, 12, 4);
    const CMatrix vd = digital_precoder_waterfill(h, rf, 7.0, 1.0, 3);
    CHECK((rf * vd).squaredNorm() == doctest::Approx(7.0).epsilon(1e-9));
    CHECK(digital_precoder_waterfill(h, rf, 0.0, 1.0, 3).isZero());
}

TEST_CASE("a full invertible RF stage attains the fully digital rate")
{
    // A DFT matrix is unit modulus and invertible, so the digital stage can
    // synthesize any precoder.
    std::mt19937_64 rng(6);
    const Index n = 6;
    CMatrix dft(n, n);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c) dft(r, c) = std::polar(1.0, 2.0 * std::numbers::pi * r * c / n);
    const CMatrix h = oracle::random_matrix(rng, 4, n);
    const FullyDigitalP2P fd = fd_p2p_baseline(h, 5.0, 1.0, 3);
    const CMatrix vd = digital_precoder_waterfill(h, dft, 5.0, 1.0, 3);
    CHECK(oracle::rate_unconstrained(h, dft * vd, 1.0) == doctest::Approx(fd.rate).epsilon(1e-10));
    CHECK(oracle::rate_unconstrained(h, fd.precoder, 1.0) == doctest::Approx(fd.rate).epsilon(1e-10));
    CHECK(fd.precoder.squaredNorm() == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("fully digital baseline dominates random precoders of equal power")
{
    std::mt19937_64 rng(7);
    const CMatrix h = oracle::random_matrix(rng, 4, 8);
    const double rate = fd_p2p_baseline(h, 3.0, 1.0, 2).rate;
    for (int t = 0; t < 50; ++t) {
        CMatrix v = oracle::random_matrix(rng, 8, 2);
        v *= std::sqrt(3.0) / v.norm();
        CHECK(oracle::rate_unconstrained(h, v, 1.0) <= rate + 1e-12);
    }
}

TEST_CASE("MMSE digital combiner preserves the RF-subspace rate")
{
    std::mt19937_64 rng(8);
    const CMatrix h = oracle::random_matrix(rng, 8, 10);
    const CMatrix v = oracle::random_matrix(rng, 10, 2);
    const CMatrix w_rf = oracle::random_unit_modulus(rng, 8, 3);
    const CMatrix w_d = mmse_digital_combiner(h, v, w_rf, 0.5);
    CHECK(w_d.rows() == 3);
    CHECK(w_d.cols() == 2);
    CHECK(rate_p2p(h, v, w_rf * w_d, 0.5) == doctest::Approx(rate_p2p(h, v, w_rf, 0.5)).epsilon(1e-10));
}

TEST_CASE("design_hybrid_mimo: bounded by the fully digital rate and feasible")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SystemConfig cfg = p2p(16, 8, 2, 3, 3, 10.0);
        const CMatrix h = draw_channel(cfg, seed).users[0].matrix;
        const DesignReport rep = design_hybrid_mimo(h, cfg);
        const double fd = fd_p2p_baseline(h, cfg.power, 1.0, 2).rate;
        CHECK(rep.weighted_sum_rate <= fd + 1e-9);
        CHECK(rep.weighted_sum_rate > 0.5 * fd);
        CHECK(rep.precoder.transmit_power() == doctest::Approx(cfg.power).epsilon(1e-9));
        CHECK(is_unit_modulus(rep.precoder.rf));
        REQUIRE(rep.combiners.size() == 1);
        CHECK(is_unit_modulus(rep.combiners[0].rf));
        const double direct = rate_p2p(h, rep.precoder.total(), rep.combiners[0].total(), 1.0);
        CHECK(rep.weighted_sum_rate == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("design_hybrid_mimo: twice the streams in RF chains is exactly optimal")
{
    const SystemConfig cfg = p2p(16, 8, 2, 4, 4, 3.0);
    const CMatrix h = draw_channel(cfg, 11).users[0].matrix;
    const DesignReport rep = design_hybrid_mimo(h, cfg);
    CHECK(rep.weighted_sum_rate == doctest::Approx(fd_p2p_baseline(h, 3.0, 1.0, 2).rate).epsilon(1e-9));
}

TEST_CASE("design_hybrid_mimo: finite resolution and zero power")
{
    const SystemConfig cfg = p2p(12, 6, 2, 3, 3, 5.0, 2);
    const CMatrix h = draw_channel(cfg, 3).users[0].matrix;
    const DesignReport aware = design_hybrid_mimo(h, cfg);
    const PhaseSet set(2);
    for (Index e = 0; e < aware.precoder.rf.size(); ++e) CHECK(set.contains(aware.precoder.rf(e)));
    for (Index e = 0; e < aware.combiners[0].rf.size(); ++e) CHECK(set.contains(aware.combiners[0].rf(e)));

    MimoDesignOptions after;
    after.phase_mode = PhaseMode::kQuantizeAfter;
    const DesignReport q = design_hybrid_mimo(h, cfg, after);
    for (Index e = 0; e < q.precoder.rf.size(); ++e) CHECK(set.contains(q.precoder.rf(e)));

    SystemConfig silent = cfg;
    silent.power = 0.0;
    CHECK(design_hybrid_mimo(h, silent).weighted_sum_rate == 0.0);

    SystemConfig wrong = cfg;
    wrong.rf_chains_tx = 13;
    CHECK_THROWS_AS(design_hybrid_mimo(h, wrong), ConfigError);
}

TEST_CASE("exhaustive_rf_b1 matches full enumeration including row 0")
{
    std::mt19937_64 rng(12);
    const CMatrix h = oracle::random_matrix(rng, 3, 4);
    const Index n_rf = 2, ns = 2;
    const CMatrix found = exhaustive_rf_b1(h, 4.0, 1.0, n_rf, ns);
    const auto rate_of = [&](const CMatrix& rf) {
        return oracle::rate_unconstrained(h, rf * digital_precoder_waterfill(h, rf, 4.0, 1.0, ns), 1.0);
    };
    double best = -1.0;
    for (unsigned pattern = 0; pattern < (1u << 8); ++pattern) {
        CMatrix rf(4, 2);
        for (Index e = 0; e < 8; ++e) rf(e) = ((pattern >> e) & 1u) ? -1.0 : 1.0;
        best = std::max(best, rate_of(rf));
    }
    CHECK(rate_of(found) == doctest::Approx(best).epsilon(1e-10));
    CHECK_THROWS_AS(exhaustive_rf_b1(oracle::random_matrix(rng, 2, 9), 1.0, 1.0, 2, 1),
                    std::invalid_argument);
}
