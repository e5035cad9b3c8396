#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hbf/hybrid.hpp"
#include "oracles.hpp"

using namespace hbf;

TEST_CASE("PhaseSet members and nearest point")
{
    const PhaseSet two(2);
    CHECK(two.size() == 4);
    CHECK(two.member(0) == Complex(1.0, 0.0));
    CHECK(two.member(1) == Complex(0.0, 1.0));
    CHECK(two.member(2) == Complex(-1.0, 0.0));
    CHECK(two.member(3) == Complex(0.0, -1.0));

    const PhaseSet one(1);
    // j is equidistant from +1 and -1; the smaller exponent wins.
    CHECK(one.nearest_index(Complex(0.0, 1.0)) == 0);
    CHECK(one.nearest_index(Complex(0.0, 0.0)) == 0);
    CHECK(one.nearest_index(Complex(-1.0, 0.1)) == 1);
    CHECK(two.nearest_index(std::polar(1.0, 0.8)) == 1);
    CHECK(two.nearest_index(std::polar(1.0, -0.2)) == 0);
    CHECK_THROWS_AS(PhaseSet(0), std::invalid_argument);
}

TEST_CASE("quantization lands in the alphabet within half a step")
{
    std::mt19937_64 rng(17);
    for (int bits = 1; bits <= 6; ++bits) {
        const PhaseSet set(bits);
        const CMatrix v = oracle::random_unit_modulus(rng, 16, 4);
        const CMatrix q = quantize_beamformer(v, set);
        CHECK(quantize_beamformer(q, set) == q);
        for (Index i = 0; i < q.size(); ++i) {
            CHECK(set.contains(q(i)));
            // brute force over the alphabet
            double best = 1e9;
            for (Index m = 0; m < set.size(); ++m) best = std::min(best, std::abs(v(i) - set.member(m)));
            CHECK(std::abs(v(i) - q(i)) <= best + 1e-12);
            CHECK(oracle::circular_distance(std::arg(v(i)), std::arg(q(i))) <=
                  std::numbers::pi / static_cast<double>(set.size()) + 1e-12);
        }
    }
}

TEST_CASE("realize_fully_digital: hand example")
{
    CMatrix fd(2, 1);
    fd << Complex(1.0, 0.0), Complex(0.0, 0.0);
    const HybridPrecoder hp = realize_fully_digital(fd);
    CHECK(hp.rf.cols() == 2);
    CHECK(is_unit_modulus(hp.rf));
    CHECK((hp.total() - fd).norm() < 1e-15);
}

TEST_CASE("realize_fully_digital: random full-rank precoders")
{
    std::mt19937_64 rng(101);
    for (int t = 0; t < 50; ++t) {
        const Index n = 4 + static_cast<Index>(t % 20);
        const Index ns = 1 + static_cast<Index>(t % 3);
        const CMatrix fd = oracle::random_matrix(rng, n, ns);
        const HybridPrecoder hp = realize_fully_digital(fd);
        CHECK(hp.rf.rows() == n);
        CHECK(hp.rf.cols() == 2 * ns);
        CHECK(is_unit_modulus(hp.rf));
        CHECK(relative_error(hp.total(), fd) < 1e-12);
    }
}

TEST_CASE("realize_fully_digital: rank-deficient input uses 2r chains")
{
    std::mt19937_64 rng(7);
    for (Index r : {1, 2}) {
        const CMatrix fd = oracle::random_matrix(rng, 32, r) * oracle::random_matrix(rng, r, 4);
        const HybridPrecoder hp = realize_fully_digital(fd);
        CHECK(hp.rf.cols() == 2 * r);
        CHECK(hp.digital.cols() == 4);
        CHECK(is_unit_modulus(hp.rf));
        CHECK(relative_error(hp.total(), fd) < 1e-12);
    }
    CHECK_THROWS_AS(realize_fully_digital(CMatrix::Zero(4, 2)), std::invalid_argument);
}

TEST_CASE("rate_p2p with identity combiner equals the unconstrained rate")
{
    std::mt19937_64 rng(3);
    const CMatrix h = oracle::random_matrix(rng, 6, 8);
    const CMatrix v = oracle::random_matrix(rng, 8, 3);
    const double expected = oracle::rate_unconstrained(h, v, 0.7);
    CHECK(rate_p2p(h, v, CMatrix::Identity(6, 6), 0.7) == doctest::Approx(expected).epsilon(1e-12));
    // Any invertible full-dimension combiner gives the same rate.
    const CMatrix w = oracle::random_matrix(rng, 6, 6);
    CHECK(rate_p2p(h, v, w, 0.7) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(rate_general({h}, {CMatrix::Identity(8, 8), v}, {}, 0.7).weighted_sum ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS(rate_p2p(h, v, CMatrix::Zero(6, 2), 0.7), SingularMatrixError);
}

TEST_CASE("rate_miso: interference-free precoder gives per-user SNR rates")
{
    std::mt19937_64 rng(5);
    const CMatrix h = oracle::random_matrix(rng, 3, 6);
    // ZF through an identity RF stage: H V = diag(1, 2, 3).
    const CMatrix v = h.adjoint() * (h * h.adjoint()).inverse() * RVector{{1.0, 2.0, 3.0}}.cast<Complex>().asDiagonal();
    const RateResult r = rate_miso(h, {CMatrix::Identity(6, 6), v}, 2.0, {1.0, 0.5, 2.0});
    CHECK(r.per_user[0] == doctest::Approx(std::log2(1.0 + 1.0 / 2.0)).epsilon(1e-12));
    CHECK(r.per_user[1] == doctest::Approx(std::log2(1.0 + 4.0 / 2.0)).epsilon(1e-12));
    CHECK(r.per_user[2] == doctest::Approx(std::log2(1.0 + 9.0 / 2.0)).epsilon(1e-12));
    CHECK(r.weighted_sum == doctest::Approx(r.per_user[0] + 0.5 * r.per_user[1] + 2.0 * r.per_user[2]));
}

TEST_CASE("rate_miso agrees with rate_general for single-antenna users")
{
    std::mt19937_64 rng(9);
    const CMatrix h = oracle::random_matrix(rng, 4, 8);
    const HybridPrecoder p{oracle::random_unit_modulus(rng, 8, 5), oracle::random_matrix(rng, 5, 4)};
    std::vector<CMatrix> rows;
    for (Index k = 0; k < 4; ++k) rows.push_back(h.row(k));
    const RateResult a = rate_miso(h, p, 1.3);
    const RateResult b = rate_general(rows, p, {}, 1.3);
    for (Index k = 0; k < 4; ++k) CHECK(a.per_user[k] == doctest::Approx(b.per_user[k]).epsilon(1e-10));
}

TEST_CASE("SystemConfig::validate names the offending field")
{
    SystemConfig cfg;
    cfg.tx_antennas = 8;
    cfg.rx_antennas = 4;
    cfg.streams_per_user = 2;
    cfg.rf_chains_tx = 4;
    cfg.rf_chains_rx = 2;
    CHECK_NOTHROW(cfg.validate());

    SystemConfig bad = cfg;
    bad.rf_chains_tx = 9;
    try {
        bad.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "rf_chains_tx");
    }
    bad = cfg;
    bad.rf_chains_rx = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.noise_power = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.weights = {1.0, 2.0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
