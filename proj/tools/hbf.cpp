// hbf: sweep runner, channel dataset generator and realization checker.
#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hbf/channel.hpp"
#include "hbf/hybrid.hpp"
#include "hbf/numerics.hpp"
#include "hbf/sim.hpp"

namespace {

int run_sweep_cmd(const std::string& config, const std::string& out, const std::string& chart,
                  std::optional<std::uint64_t> seed, const std::string& channels, int jobs)
{
    hbf::SweepSpec spec = hbf::load_config(config);
    if (seed) spec.master_seed = *seed;
    if (!channels.empty()) spec.channel_source = channels;

    const auto start = std::chrono::steady_clock::now();
    const hbf::SweepResult result = hbf::run_sweep(spec, {jobs});
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (out.empty() || out == "-") {
        std::cout << hbf::format_csv(result);
    } else {
        hbf::write_csv(result, out);
    }
    if (!chart.empty()) hbf::render_chart(result, chart);
    std::fprintf(stderr, "sweep: %zu rows, %d trials, seed %llu, config %016llx, %.1f s\n",
                 result.rows.size(), spec.trials, static_cast<unsigned long long>(spec.master_seed),
                 static_cast<unsigned long long>(result.provenance.config_hash), secs);
    return 0;
}

int gen_channels_cmd(const std::string& config, const std::string& out,
                     std::optional<std::uint64_t> seed)
{
    hbf::SweepSpec spec = hbf::load_config(config);
    if (seed) spec.master_seed = *seed;
    spec.channel_source = "generate";
    const auto data = hbf::sweep_channels(spec);
    hbf::save_dataset(out, data);
    std::fprintf(stderr, "wrote %zu realizations to %s\n", data.size(), out.c_str());
    return 0;
}

int realize_check_cmd(long n, long ns, std::uint64_t seed, int trials)
{
    if (n < 1 || ns < 1 || 2 * ns > n) {
        std::fprintf(stderr, "realize-check: need 1 <= ns and 2 * ns <= n\n");
        return 2;
    }
    hbf::Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const hbf::CMatrix fd = hbf::complex_gaussian(rng, n, ns);
        const hbf::HybridPrecoder hp = hbf::realize_fully_digital(fd);
        const double err = hbf::relative_error(hp.total(), fd);
        if (!hbf::is_unit_modulus(hp.rf)) worst = std::max(worst, 1.0);
        worst = std::max(worst, err);
    }
    const bool ok = worst < 1e-10;
    std::printf("realize-check n=%ld ns=%ld trials=%d worst_rel_error=%.3e %s\n", n, ns, trials, worst,
                ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid digital/analog beamforming simulations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(hbf::kToolkitVersion));

    std::string config, out, chart, channels;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "Run a Monte Carlo sweep and write a CSV table");
    sweep->add_option("--config", config, "JSON sweep config")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out, "CSV output path (stdout when omitted)");
    sweep->add_option("--chart", chart, "SVG chart output path");
    sweep->add_option("--seed", seed, "Override the config's master_seed");
    sweep->add_option("--channels", channels, "Read channels from a dataset instead of generating");
    sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::string gen_config, gen_out;
    std::optional<std::uint64_t> gen_seed;
    auto* gen = app.add_subcommand("gen-channels", "Write the sweep's channel realizations to a dataset");
    gen->add_option("--config", gen_config, "JSON sweep config")->required()->check(CLI::ExistingFile);
    gen->add_option("--out", gen_out, "Dataset output path")->required();
    gen->add_option("--seed", gen_seed, "Override the config's master_seed");

    long n = 64, ns = 4;
    std::uint64_t check_seed = 1;
    int check_trials = 100;
    auto* check = app.add_subcommand("realize-check",
                                     "Realize random fully digital precoders with 2 * ns RF chains");
    check->add_option("--n", n, "Transmit antennas");
    check->add_option("--ns", ns, "Streams");
    check->add_option("--seed", check_seed, "Generator seed");
    check->add_option("--trials", check_trials, "Random precoders to check")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) return run_sweep_cmd(config, out, chart, seed, channels, jobs);
        if (*gen) return gen_channels_cmd(gen_config, gen_out, gen_seed);
        if (*check) return realize_check_cmd(n, ns, check_seed, check_trials);
    } catch (const hbf::ConfigError& e) {
        std::fprintf(stderr, "hbf: config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "hbf: %s\n", e.what());
        return 1;
    }
    return 1;
}
