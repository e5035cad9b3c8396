#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hbf/channel.hpp"
#include "hbf/hybrid.hpp"
#include "oracles.hpp"

using namespace hbf;

namespace {

SystemConfig mimo_cfg(Index n, Index m, Index paths)
{
    SystemConfig cfg;
    cfg.tx_antennas = n;
    cfg.rx_antennas = m;
    cfg.paths = paths;
    return cfg;
}

std::filesystem::path temp_file(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("hbf_test_" + name);
}

}  // namespace

TEST_CASE("ula_response: hand-computed two-element vector")
{
    // sin(pi/6) = 1/2 with half-wavelength spacing gives a quarter-turn step.
    const CVector a = ula_response({2, 0.5}, std::numbers::pi / 6.0);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(a(0) - Complex(r, 0.0)) < 1e-15);
    CHECK(std::abs(a(1) - Complex(0.0, r)) < 1e-15);
}

TEST_CASE("ula_response has unit norm and constant modulus")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    for (int t = 0; t < 100; ++t) {
        const CVector a = ula_response({37, 0.5}, u(rng));
        CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(is_unit_modulus(a * std::sqrt(37.0), 1e-13));
    }
}

TEST_CASE("assemble_channel: single path is a scaled outer product")
{
    PathSet p;
    p.gains = CVector::Constant(1, Complex(0.5, -0.25));
    p.aoa = RVector::Constant(1, 0.3);
    p.aod = RVector::Constant(1, 1.1);
    const CMatrix h = assemble_channel(p, {4, 0.5}, {6, 0.5});
    CHECK(h.rows() == 4);
    CHECK(h.cols() == 6);
    const CMatrix expected = std::sqrt(24.0) * p.gains(0) * ula_response({4, 0.5}, 0.3) *
                             ula_response({6, 0.5}, 1.1).adjoint();
    CHECK((h - expected).norm() < 1e-14);
    const Eigen::JacobiSVD<CMatrix> svd(h);
    CHECK(svd.singularValues()(1) < 1e-12 * svd.singularValues()(0));
}

TEST_CASE("assemble_channel: rank is at most the path count")
{
    const ChannelRealization ch = draw_channel(mimo_cfg(32, 8, 3), 99);
    CHECK(numerical_rank(ch.users[0].matrix, 1e-9) == 3);
}

TEST_CASE("draw_channel: average power per entry is one")
{
    // E|H_ij|^2 = (N M / L) * L * (1 / (N M)) = 1.
    const SystemConfig cfg = mimo_cfg(16, 4, 15);
    double total = 0.0;
    const int draws = 400;
    for (int s = 0; s < draws; ++s) {
        total += draw_channel(cfg, static_cast<std::uint64_t>(s)).users[0].matrix.squaredNorm();
    }
    CHECK(total / (draws * 64.0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("draw_channel is deterministic per seed and covers every user")
{
    SystemConfig cfg = mimo_cfg(8, 1, 4);
    cfg.users = 3;
    cfg.rf_chains_tx = 3;
    const ChannelRealization a = draw_channel(cfg, 5);
    const ChannelRealization b = draw_channel(cfg, 5);
    const ChannelRealization c = draw_channel(cfg, 6);
    CHECK(a == b);
    CHECK(!(a == c));
    REQUIRE(a.users.size() == 3);
    CHECK(a.stacked_rows().rows() == 3);
    CHECK(a.stacked_rows().row(2) == a.users[2].matrix.row(0));
    for (const auto& u : a.users) {
        CHECK((u.paths.aod.array() >= 0.0).all());
        CHECK((u.paths.aod.array() < 2.0 * std::numbers::pi).all());
        CHECK((assemble_channel(u.paths, {1, 0.5}, {8, 0.5}) - u.matrix).norm() == 0.0);
    }
}

TEST_CASE("dataset round trip is bit exact")
{
    SystemConfig cfg = mimo_cfg(6, 2, 3);
    std::vector<ChannelRealization> data;
    for (std::uint64_t s = 0; s < 4; ++s) data.push_back(draw_channel(cfg, 1000 + s));
    const auto path = temp_file("roundtrip.bin");
    save_dataset(path, data);
    const auto back = load_dataset(path);
    CHECK(back == data);
    std::filesystem::remove(path);
}

TEST_CASE("dataset loader rejects damaged files")
{
    const auto path = temp_file("damaged.bin");
    save_dataset(path, {draw_channel(mimo_cfg(4, 2, 2), 1)});
    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    auto write = [&](const std::string& b) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << b;
    };

    write(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(load_dataset(path), DatasetError);
    write(bytes + "x");
    CHECK_THROWS_AS(load_dataset(path), DatasetError);
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    write(bad_magic);
    CHECK_THROWS_AS(load_dataset(path), DatasetError);
    write(bytes.substr(0, 12));
    CHECK_THROWS_AS(load_dataset(path), DatasetError);
    CHECK_THROWS_AS(load_dataset(temp_file("does_not_exist.bin")), DatasetError);
    std::filesystem::remove(path);
}
