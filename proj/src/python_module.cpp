#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hbf/channel.hpp"
#include "hbf/hybrid.hpp"
#include "hbf/mimo.hpp"
#include "hbf/miso.hpp"
#include "hbf/numerics.hpp"
#include "hbf/sim.hpp"

namespace py = pybind11;
using namespace hbf;

namespace {

SystemConfig make_config(Index tx, Index rx, Index users, Index streams, Index rf_tx, Index rf_rx,
                         double power, double noise, std::vector<double> weights, int bits)
{
    SystemConfig cfg;
    cfg.tx_antennas = tx;
    cfg.rx_antennas = rx;
    cfg.users = users;
    cfg.streams_per_user = streams;
    cfg.rf_chains_tx = rf_tx;
    cfg.rf_chains_rx = rf_rx;
    cfg.power = power;
    cfg.noise_power = noise;
    cfg.weights = std::move(weights);
    cfg.phase_bits = bits;
    return cfg;
}

PhaseMode phase_mode(const std::string& mode)
{
    if (mode == "aware") return PhaseMode::kAware;
    if (mode == "quantize_after") return PhaseMode::kQuantizeAfter;
    throw std::invalid_argument("phase_mode must be 'aware' or 'quantize_after'");
}

py::dict report_dict(const DesignReport& rep)
{
    py::dict d;
    d["rf"] = rep.precoder.rf;
    d["digital"] = rep.precoder.digital;
    d["rate"] = rep.weighted_sum_rate;
    d["per_user_rates"] = rep.per_user_rates;
    d["objective_trace"] = rep.objective_trace;
    d["iterations"] = rep.iterations;
    if (!rep.combiners.empty()) {
        d["combiner_rf"] = rep.combiners.front().rf;
        d["combiner_digital"] = rep.combiners.front().digital;
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Hybrid digital/analog beamforming design";
    m.attr("__version__") = kToolkitVersion;

    py::register_exception<SingularMatrixError>(m, "SingularMatrixError", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DatasetError>(m, "DatasetError", PyExc_IOError);

    m.def("ula_response",
          [](Index n, double phi, double spacing) { return ula_response({n, spacing}, phi); },
          py::arg("n"), py::arg("phi"), py::arg("spacing") = 0.5);

    m.def(
        "draw_channel",
        [](Index tx, Index rx, Index users, Index paths, std::uint64_t seed, double spacing) {
            SystemConfig cfg;
            cfg.tx_antennas = tx;
            cfg.rx_antennas = rx;
            cfg.users = users;
            cfg.paths = paths;
            cfg.antenna_spacing = spacing;
            return draw_channel(cfg, seed).matrices();
        },
        py::arg("tx_antennas"), py::arg("rx_antennas"), py::arg("users") = 1, py::arg("paths") = 15,
        py::arg("seed") = 0, py::arg("spacing") = 0.5,
        "One M x N matrix per user from the clustered ULA channel model.");

    m.def(
        "realize_fully_digital",
        [](const CMatrix& fd) {
            const HybridPrecoder hp = realize_fully_digital(fd);
            return py::make_tuple(hp.rf, hp.digital);
        },
        py::arg("fully_digital"), "Returns (V_RF, V_D) with V_RF * V_D equal to the input.");

    m.def(
        "waterfill",
        [](const RVector& costs, const RVector& weights, double noise, double budget) {
            const WaterfillResult r = waterfill(costs, weights, noise, budget);
            return py::make_tuple(r.powers, r.water_level);
        },
        py::arg("costs"), py::arg("weights"), py::arg("noise"), py::arg("budget"));

    m.def("quantize_beamformer",
          [](const CMatrix& rf, int bits) { return quantize_beamformer(rf, PhaseSet(bits)); },
          py::arg("rf"), py::arg("bits"));

    m.def(
        "design_hybrid_mimo",
        [](const CMatrix& h, Index streams, Index rf_tx, Index rf_rx, double power, double noise,
           int bits, const std::string& mode) {
            const SystemConfig cfg =
                make_config(h.cols(), h.rows(), 1, streams, rf_tx, rf_rx, power, noise, {}, bits);
            MimoDesignOptions opts;
            opts.phase_mode = phase_mode(mode);
            return report_dict(design_hybrid_mimo(h, cfg, opts));
        },
        py::arg("channel"), py::arg("streams"), py::arg("rf_chains_tx"), py::arg("rf_chains_rx"),
        py::arg("power"), py::arg("noise") = 1.0, py::arg("phase_bits") = 0,
        py::arg("phase_mode") = "aware");

    m.def(
        "design_hybrid_miso",
        [](const CMatrix& h, Index rf_tx, double power, double noise, std::vector<double> weights,
           int bits, const std::string& mode) {
            const SystemConfig cfg = make_config(h.cols(), 1, h.rows(), 1, rf_tx, 1, power, noise,
                                                 std::move(weights), bits);
            MisoDesignOptions opts;
            opts.phase_mode = phase_mode(mode);
            return report_dict(design_hybrid_miso(h, cfg, opts));
        },
        py::arg("channel"), py::arg("rf_chains_tx"), py::arg("power"), py::arg("noise") = 1.0,
        py::arg("weights") = std::vector<double>{}, py::arg("phase_bits") = 0,
        py::arg("phase_mode") = "aware",
        "Channel rows are h_k^H (K x N).");

    m.def(
        "fd_p2p_rate",
        [](const CMatrix& h, double power, double noise, Index streams) {
            return fd_p2p_baseline(h, power, noise, streams).rate;
        },
        py::arg("channel"), py::arg("power"), py::arg("noise"), py::arg("streams"));

    m.def(
        "fd_zf_rate",
        [](const CMatrix& h, const RVector& weights, double noise, double power) {
            return fd_zf_baseline(h, weights, noise, power).weighted_sum_rate;
        },
        py::arg("channel"), py::arg("weights"), py::arg("noise"), py::arg("power"));

    m.def("rf_channel_phase_match", &rf_channel_phase_match, py::arg("channel"));

    m.def(
        "rate_p2p", &rate_p2p, py::arg("channel"), py::arg("precoder"), py::arg("combiner"),
        py::arg("noise"));

    m.def(
        "rate_miso",
        [](const CMatrix& h, const CMatrix& rf, const CMatrix& digital, double noise,
           std::vector<double> weights) {
            return rate_miso(h, {rf, digital}, noise, weights).weighted_sum;
        },
        py::arg("channel"), py::arg("rf"), py::arg("digital"), py::arg("noise"),
        py::arg("weights") = std::vector<double>{});

    m.def(
        "run_sweep",
        [](const std::string& config_json, int jobs) {
            const SweepSpec spec = parse_config(config_json);
            SweepResult result;
            {
                py::gil_scoped_release release;
                result = run_sweep(spec, {jobs});
            }
            return format_csv(result);
        },
        py::arg("config_json"), py::arg("jobs") = 1, "Runs a sweep and returns the CSV text.");

    m.def("canonical_config", [](const std::string& text) { return canonical_config(parse_config(text)); },
          py::arg("config_json"));
}
