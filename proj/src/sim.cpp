#include "hbf/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "hbf/hybrid.hpp"
#include "hbf/mimo.hpp"
#include "hbf/miso.hpp"

namespace hbf {

namespace {

using nlohmann::json;

struct MethodId {
    std::string base;
    int bits = 0;  // 0 when the identifier has no _b<k> suffix
};

const std::vector<std::string>& p2p_plain()
{
    static const std::vector<std::string> v{"fd_optimal", "hybrid_proposed", "exact_realization_2ns",
                                            "exhaustive_b1"};
    return v;
}
const std::vector<std::string>& p2p_suffixed()
{
    static const std::vector<std::string> v{"hybrid_proposed_quantized", "hybrid_finite_res"};
    return v;
}
const std::vector<std::string>& miso_plain()
{
    static const std::vector<std::string> v{"fd_zf", "hybrid_proposed", "phase_match_zf",
                                            "strongest_path_zf", "exact_realization_2ns"};
    return v;
}
const std::vector<std::string>& miso_suffixed()
{
    static const std::vector<std::string> v{"hybrid_proposed_quantized", "hybrid_finite_res",
                                            "phase_match_zf_quantized", "strongest_path_zf_quantized"};
    return v;
}

bool contains(const std::vector<std::string>& v, const std::string& s)
{
    return std::find(v.begin(), v.end(), s) != v.end();
}

std::optional<MethodId> parse_method(Scenario s, const std::string& name)
{
    const bool p2p = s == Scenario::kP2pMimo;
    if (contains(p2p ? p2p_plain() : miso_plain(), name)) {
        return MethodId{name, 0};
    }
    const auto pos = name.rfind("_b");
    if (pos == std::string::npos || pos + 2 >= name.size()) return std::nullopt;
    const std::string digits = name.substr(pos + 2);
    if (digits.size() > 2 || !std::all_of(digits.begin(), digits.end(), [](char c) {
            return c >= '0' && c <= '9';
        }) || digits.front() == '0') {
        return std::nullopt;
    }
    const int bits = std::stoi(digits);
    const std::string base = name.substr(0, pos);
    if (bits < 1 || bits > 24 || !contains(p2p ? p2p_suffixed() : miso_suffixed(), base)) {
        return std::nullopt;
    }
    return MethodId{base, bits};
}

[[noreturn]] void bad(const std::string& field, const std::string& what)
{
    throw ConfigError(field, what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed)
{
    if (!obj.is_object()) bad(where.empty() ? "config" : where, "expected a JSON object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) {
            bad(where.empty() ? key : where + "." + key, "unknown key");
        }
    }
}

std::int64_t get_int(const json& obj, const std::string& key, const std::string& field,
                     std::optional<std::int64_t> fallback)
{
    if (!obj.contains(key)) {
        if (!fallback) bad(field, "required");
        return *fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) bad(field, "expected an integer");
    return v.get<std::int64_t>();
}

double get_number(const json& v, const std::string& field)
{
    if (!v.is_number()) bad(field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad(field, "must be finite");
    return d;
}

std::vector<double> parse_snr(const json& v)
{
    std::vector<double> out;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.push_back(get_number(v[i], "snr_db[" + std::to_string(i) + "]"));
        }
    } else if (v.is_object()) {
        check_keys(v, "snr_db", {"start", "stop", "step"});
        for (const char* k : {"start", "stop", "step"}) {
            if (!v.contains(k)) bad(std::string("snr_db.") + k, "required");
        }
        const double start = get_number(v.at("start"), "snr_db.start");
        const double stop = get_number(v.at("stop"), "snr_db.stop");
        const double step = get_number(v.at("step"), "snr_db.step");
        if (!(step > 0.0)) bad("snr_db.step", "must be positive");
        if (stop < start) bad("snr_db.stop", "must not be below start");
        const double count = std::floor((stop - start) / step + 1e-9);
        if (count > 10000) bad("snr_db", "grid too large");
        for (int i = 0; i <= static_cast<int>(count); ++i) out.push_back(start + i * step);
    } else {
        bad("snr_db", "expected a list of numbers or {start, stop, step}");
    }
    if (out.empty()) bad("snr_db", "grid must not be empty");
    return out;
}

SystemConfig parse_system(const json& sys, Scenario scenario)
{
    check_keys(sys, "system",
               {"tx_antennas", "rx_antennas", "users", "streams_per_user", "rf_chains_tx",
                "rf_chains_rx", "weights", "phase_bits", "paths", "antenna_spacing"});
    const bool p2p = scenario == Scenario::kP2pMimo;
    SystemConfig cfg;
    cfg.tx_antennas = get_int(sys, "tx_antennas", "system.tx_antennas", std::nullopt);
    cfg.rx_antennas = get_int(sys, "rx_antennas", "system.rx_antennas", 1);
    cfg.users = get_int(sys, "users", "system.users", 1);
    cfg.streams_per_user = get_int(sys, "streams_per_user", "system.streams_per_user", 1);
    cfg.rf_chains_tx = get_int(sys, "rf_chains_tx", "system.rf_chains_tx", std::nullopt);
    cfg.rf_chains_rx =
        get_int(sys, "rf_chains_rx", "system.rf_chains_rx",
                p2p ? std::min(cfg.rf_chains_tx, cfg.rx_antennas) : 1);
    cfg.phase_bits = static_cast<int>(get_int(sys, "phase_bits", "system.phase_bits", 0));
    cfg.paths = get_int(sys, "paths", "system.paths", 15);
    if (sys.contains("antenna_spacing")) {
        cfg.antenna_spacing = get_number(sys.at("antenna_spacing"), "system.antenna_spacing");
    }
    if (sys.contains("weights")) {
        const json& w = sys.at("weights");
        if (!w.is_array()) bad("system.weights", "expected a list of numbers");
        for (std::size_t i = 0; i < w.size(); ++i) {
            cfg.weights.push_back(get_number(w[i], "system.weights[" + std::to_string(i) + "]"));
        }
    }
    cfg.power = 1.0;
    cfg.noise_power = 1.0;
    if (p2p && cfg.users != 1) bad("system.users", "p2p_mimo has exactly one user");
    if (!p2p && cfg.rx_antennas != 1) bad("system.rx_antennas", "mu_miso users have one antenna");
    if (!p2p && cfg.streams_per_user != 1) bad("system.streams_per_user", "mu_miso sends one stream per user");
    cfg.validate();
    return cfg;
}

json to_json(const SweepSpec& spec)
{
    const SystemConfig& c = spec.cfg;
    json sys = {{"tx_antennas", c.tx_antennas},     {"rx_antennas", c.rx_antennas},
                {"users", c.users},                 {"streams_per_user", c.streams_per_user},
                {"rf_chains_tx", c.rf_chains_tx},   {"rf_chains_rx", c.rf_chains_rx},
                {"weights", c.weights},             {"phase_bits", c.phase_bits},
                {"paths", c.paths},                 {"antenna_spacing", c.antenna_spacing}};
    return json{{"scenario", scenario_name(spec.scenario)},
                {"system", sys},
                {"snr_db", spec.snr_grid_db},
                {"methods", spec.methods},
                {"trials", spec.trials},
                {"master_seed", spec.master_seed},
                {"channels", spec.channel_source}};
}

SystemConfig at_snr(SystemConfig cfg, double snr_db)
{
    cfg.noise_power = 1.0;
    cfg.power = std::pow(10.0, snr_db / 10.0);
    return cfg;
}

double mimo_rate(const DesignReport& rep) { return rep.weighted_sum_rate; }

double eval_p2p(const MethodId& m, const ChannelRealization& ch, const SystemConfig& base)
{
    const CMatrix& h = ch.users.at(0).matrix;
    const Index streams = base.total_streams();
    if (m.base == "fd_optimal") {
        return fd_p2p_baseline(h, base.power, base.noise_power, streams).rate;
    }
    if (m.base == "exact_realization_2ns") {
        const FullyDigitalP2P fd = fd_p2p_baseline(h, base.power, base.noise_power, streams);
        const HybridPrecoder hp = realize_fully_digital(fd.precoder);
        return rate_p2p(h, hp.total(), fd.combiner, base.noise_power);
    }
    SystemConfig cfg = base;
    MimoDesignOptions opts;
    if (m.base == "hybrid_proposed") {
        return mimo_rate(design_hybrid_mimo(h, cfg, opts));
    }
    if (m.base == "hybrid_finite_res") {
        cfg.phase_bits = m.bits;
        return mimo_rate(design_hybrid_mimo(h, cfg, opts));
    }
    if (m.base == "hybrid_proposed_quantized") {
        cfg.phase_bits = m.bits;
        opts.phase_mode = PhaseMode::kQuantizeAfter;
        return mimo_rate(design_hybrid_mimo(h, cfg, opts));
    }
    if (m.base == "exhaustive_b1") {
        cfg.phase_bits = 1;
        const CMatrix rf = exhaustive_rf_b1(h, cfg.power, cfg.noise_power, cfg.rf_chains_tx, streams);
        return mimo_rate(complete_mimo_design(h, cfg, rf, opts));
    }
    throw std::logic_error("unhandled method " + m.base);
}

double eval_miso(const MethodId& m, const ChannelRealization& ch, const SystemConfig& base)
{
    const CMatrix h = ch.stacked_rows();
    const RVector beta = base.weight_vector();
    if (m.base == "fd_zf") {
        return fd_zf_baseline(h, beta, base.noise_power, base.power).weighted_sum_rate;
    }
    if (m.base == "exact_realization_2ns") {
        const FullyDigitalZf fd = fd_zf_baseline(h, beta, base.noise_power, base.power);
        const HybridPrecoder hp = realize_fully_digital(fd.precoder);
        return rate_miso(h, hp, base.noise_power, base.weights).weighted_sum;
    }
    SystemConfig cfg = base;
    MisoDesignOptions opts;
    if (m.base == "hybrid_proposed") {
        return design_hybrid_miso(h, cfg, opts).weighted_sum_rate;
    }
    if (m.base == "hybrid_finite_res") {
        cfg.phase_bits = m.bits;
        return design_hybrid_miso(h, cfg, opts).weighted_sum_rate;
    }
    if (m.base == "hybrid_proposed_quantized") {
        cfg.phase_bits = m.bits;
        opts.phase_mode = PhaseMode::kQuantizeAfter;
        return design_hybrid_miso(h, cfg, opts).weighted_sum_rate;
    }
    // Baselines always use one RF chain per user.
    cfg.rf_chains_tx = cfg.users;
    CMatrix rf;
    if (m.base == "phase_match_zf" || m.base == "phase_match_zf_quantized") {
        rf = rf_channel_phase_match(h);
    } else if (m.base == "strongest_path_zf" || m.base == "strongest_path_zf_quantized") {
        std::vector<PathSet> paths;
        for (const auto& u : ch.users) paths.push_back(u.paths);
        rf = rf_strongest_path(paths, {cfg.tx_antennas, cfg.antenna_spacing},
                               m.bits > 0 ? std::optional<PhaseSet>(PhaseSet(m.bits)) : std::nullopt);
    } else {
        throw std::logic_error("unhandled method " + m.base);
    }
    if (m.bits > 0) {
        rf = quantize_beamformer(rf, PhaseSet(m.bits));
    }
    return zf_design_for_rf(h, cfg, rf).weighted_sum_rate;
}

void check_realization(const ChannelRealization& ch, const SystemConfig& cfg, std::size_t index)
{
    const std::string where = "realization " + std::to_string(index);
    if (static_cast<Index>(ch.users.size()) != cfg.users) {
        throw DatasetError(where + ": user count does not match the config");
    }
    for (const auto& u : ch.users) {
        if (u.matrix.rows() != cfg.rx_antennas || u.matrix.cols() != cfg.tx_antennas) {
            throw DatasetError(where + ": channel dimensions do not match the config");
        }
    }
}

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out.flush()) {
        throw std::runtime_error("write to '" + path.string() + "' failed");
    }
}

}  // namespace

std::string scenario_name(Scenario s)
{
    return s == Scenario::kP2pMimo ? "p2p_mimo" : "mu_miso";
}

SweepSpec parse_config(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("JSON syntax error: ") + e.what());
    }
    check_keys(doc, "", {"scenario", "system", "snr_db", "methods", "trials", "master_seed", "channels"});

    SweepSpec spec;
    if (!doc.contains("scenario") || !doc.at("scenario").is_string()) {
        bad("scenario", "required string (p2p_mimo or mu_miso)");
    }
    const std::string scenario = doc.at("scenario").get<std::string>();
    if (scenario == "p2p_mimo") {
        spec.scenario = Scenario::kP2pMimo;
    } else if (scenario == "mu_miso") {
        spec.scenario = Scenario::kMuMiso;
    } else {
        bad("scenario", "must be p2p_mimo or mu_miso");
    }

    if (!doc.contains("system")) bad("system", "required");
    spec.cfg = parse_system(doc.at("system"), spec.scenario);

    if (!doc.contains("snr_db")) bad("snr_db", "required");
    spec.snr_grid_db = parse_snr(doc.at("snr_db"));

    if (!doc.contains("methods") || !doc.at("methods").is_array() || doc.at("methods").empty()) {
        bad("methods", "required non-empty list of method identifiers");
    }
    for (const auto& m : doc.at("methods")) {
        if (!m.is_string()) bad("methods", "entries must be strings");
        const std::string name = m.get<std::string>();
        if (!is_registered_method(spec.scenario, name)) {
            bad("methods", "unknown method '" + name + "' for " + scenario);
        }
        if (contains(spec.methods, name)) bad("methods", "duplicate method '" + name + "'");
        spec.methods.push_back(name);
    }

    const std::int64_t trials = get_int(doc, "trials", "trials", 100);
    if (trials < 1 || trials > 100000000) bad("trials", "must be at least 1");
    spec.trials = static_cast<int>(trials);

    if (doc.contains("master_seed")) {
        const json& s = doc.at("master_seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
            bad("master_seed", "expected a non-negative integer");
        }
        spec.master_seed = s.get<std::uint64_t>();
    }
    if (doc.contains("channels")) {
        if (!doc.at("channels").is_string() || doc.at("channels").get<std::string>().empty()) {
            bad("channels", "expected \"generate\" or a dataset path");
        }
        spec.channel_source = doc.at("channels").get<std::string>();
    }

    if (contains(spec.methods, "exhaustive_b1") &&
        spec.cfg.tx_antennas * spec.cfg.rf_chains_tx > 16) {
        bad("methods", "exhaustive_b1 needs tx_antennas * rf_chains_tx <= 16");
    }
    if (spec.scenario == Scenario::kMuMiso && contains(spec.methods, "hybrid_proposed") &&
        spec.cfg.rf_chains_tx < spec.cfg.users) {
        bad("system.rf_chains_tx", "must be at least users");
    }
    return spec;
}

SweepSpec load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", "cannot open '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string canonical_config(const SweepSpec& spec)
{
    return to_json(spec).dump(2) + "\n";
}

std::uint64_t config_hash(const SweepSpec& spec)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_config(spec)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> registered_methods(Scenario s)
{
    const bool p2p = s == Scenario::kP2pMimo;
    std::vector<std::string> out = p2p ? p2p_plain() : miso_plain();
    for (const auto& base : p2p ? p2p_suffixed() : miso_suffixed()) out.push_back(base + "_b<k>");
    return out;
}

bool is_registered_method(Scenario s, const std::string& method)
{
    return parse_method(s, method).has_value();
}

double evaluate_method(Scenario s, const std::string& method, const ChannelRealization& channel,
                       const SystemConfig& cfg)
{
    const auto id = parse_method(s, method);
    if (!id) {
        throw std::invalid_argument("unknown method '" + method + "'");
    }
    return s == Scenario::kP2pMimo ? eval_p2p(*id, channel, cfg) : eval_miso(*id, channel, cfg);
}

const SweepRow& SweepResult::row(double snr_db, const std::string& method) const
{
    for (const auto& r : rows) {
        if (r.snr_db == snr_db && r.method == method) return r;
    }
    throw std::out_of_range("no row for " + method + " at " + fmt("%g", snr_db) + " dB");
}

std::vector<ChannelRealization> sweep_channels(const SweepSpec& spec)
{
    std::vector<ChannelRealization> out;
    if (spec.channel_source == "generate") {
        out.reserve(static_cast<std::size_t>(spec.trials));
        for (int t = 0; t < spec.trials; ++t) {
            out.push_back(draw_channel(spec.cfg, child_seed(spec.master_seed, static_cast<std::uint64_t>(t))));
        }
        return out;
    }
    out = load_dataset(spec.channel_source);
    if (out.size() < static_cast<std::size_t>(spec.trials)) {
        throw DatasetError("dataset holds " + std::to_string(out.size()) + " realizations but " +
                           std::to_string(spec.trials) + " trials were requested");
    }
    out.resize(static_cast<std::size_t>(spec.trials));
    for (std::size_t t = 0; t < out.size(); ++t) check_realization(out[t], spec.cfg, t);
    return out;
}

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& opts)
{
    const std::size_t n_snr = spec.snr_grid_db.size();
    const std::size_t n_methods = spec.methods.size();
    const std::size_t trials = static_cast<std::size_t>(spec.trials);
    const bool from_file = spec.channel_source != "generate";
    const std::vector<ChannelRealization> dataset = from_file ? sweep_channels(spec)
                                                              : std::vector<ChannelRealization>{};

    // rates[t][s * n_methods + m]; NaN marks a failed design.
    std::vector<std::vector<double>> rates(trials);
    std::vector<std::string> errors(trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < trials; t = next++) {
            std::vector<double>& out = rates[t];
            out.assign(n_snr * n_methods, std::numeric_limits<double>::quiet_NaN());
            const ChannelRealization ch =
                from_file ? dataset[t] : draw_channel(spec.cfg, child_seed(spec.master_seed, t));
            for (std::size_t s = 0; s < n_snr; ++s) {
                const SystemConfig cfg = at_snr(spec.cfg, spec.snr_grid_db[s]);
                for (std::size_t m = 0; m < n_methods; ++m) {
                    try {
                        out[s * n_methods + m] = evaluate_method(spec.scenario, spec.methods[m], ch, cfg);
                    } catch (const std::exception& e) {
                        if (errors[t].empty()) errors[t] = spec.methods[m] + ": " + e.what();
                    }
                }
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(trials)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SweepResult result;
    result.provenance = {config_hash(spec), spec.master_seed, kToolkitVersion};
    for (std::size_t s = 0; s < n_snr; ++s) {
        for (std::size_t m = 0; m < n_methods; ++m) {
            SweepRow row;
            row.snr_db = spec.snr_grid_db[s];
            row.method = spec.methods[m];
            double sum = 0.0;
            std::string first_error;
            for (std::size_t t = 0; t < trials; ++t) {
                const double r = rates[t][s * n_methods + m];
                if (std::isfinite(r)) {
                    sum += r;
                    ++row.trials;
                } else {
                    ++row.failures;
                    if (first_error.empty()) first_error = errors[t];
                }
            }
            if (row.failures * 100 > spec.trials) {
                throw SweepAborted(std::to_string(row.failures) + " of " + std::to_string(trials) +
                                   " trials failed for " + row.method + " at " +
                                   fmt("%g", row.snr_db) + " dB (first error: " + first_error + ")");
            }
            row.mean_rate = row.trials > 0 ? sum / row.trials : 0.0;
            double sq = 0.0;
            for (std::size_t t = 0; t < trials; ++t) {
                const double r = rates[t][s * n_methods + m];
                if (std::isfinite(r)) sq += (r - row.mean_rate) * (r - row.mean_rate);
            }
            row.std_rate = row.trials > 1 ? std::sqrt(sq / (row.trials - 1)) : 0.0;
            result.rows.push_back(row);
        }
    }
    return result;
}

std::string format_csv(const SweepResult& result)
{
    std::string out = "snr_db,method,mean_rate,std_rate,trials,failures\n";
    for (const auto& r : result.rows) {
        out += fmt("%.6g", r.snr_db) + "," + r.method + "," + fmt("%.6g", r.mean_rate) + "," +
               fmt("%.6g", r.std_rate) + "," + std::to_string(r.trials) + "," +
               std::to_string(r.failures) + "\n";
    }
    return out;
}

void write_csv(const SweepResult& result, const std::filesystem::path& path)
{
    write_text(path, format_csv(result));
}

std::string format_svg(const SweepResult& result)
{
    constexpr double width = 720, height = 480;
    constexpr double left = 70, right = 190, top = 30, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    std::vector<std::string> methods;
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_max = 0.0;
    for (const auto& r : result.rows) {
        if (!contains(methods, r.method)) methods.push_back(r.method);
        x_min = std::min(x_min, r.snr_db);
        x_max = std::max(x_max, r.snr_db);
        y_max = std::max(y_max, r.mean_rate);
    }
    if (result.rows.empty()) {
        x_min = 0.0;
        x_max = 1.0;
    }
    if (x_max == x_min) {
        x_min -= 1.0;
        x_max += 1.0;
    }
    y_max = y_max > 0.0 ? y_max * 1.05 : 1.0;
    auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return top + plot_h - y / y_max * plot_h; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(result.provenance.config_hash));
    svg << "<desc>hbf " << xml_escape(result.provenance.version) << " config_hash=" << hash
        << " master_seed=" << result.provenance.master_seed << "</desc>\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";
    svg << "<g stroke=\"black\" fill=\"none\">\n"
        << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
        << plot_h << "\"/>\n</g>\n";

    svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = x_min + (x_max - x_min) * i / 5.0;
        const double y = y_max * i / 5.0;
        svg << "<text x=\"" << fmt("%.2f", px(x)) << "\" y=\"" << fmt("%.2f", top + plot_h + 16)
            << "\" text-anchor=\"middle\">" << fmt("%.3g", x) << "</text>\n";
        svg << "<text x=\"" << fmt("%.2f", left - 6) << "\" y=\"" << fmt("%.2f", py(y) + 4)
            << "\" text-anchor=\"end\">" << fmt("%.3g", y) << "</text>\n";
    }
    svg << "<text x=\"" << fmt("%.2f", left + plot_w / 2) << "\" y=\"" << fmt("%.2f", height - 18)
        << "\" text-anchor=\"middle\" font-size=\"13\">SNR (dB)</text>\n";
    svg << "<text transform=\"translate(18 " << fmt("%.2f", top + plot_h / 2)
        << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">Spectral efficiency (bps/Hz)</text>\n";
    svg << "</g>\n";

    for (std::size_t k = 0; k < methods.size(); ++k) {
        const char* color = palette[k % std::size(palette)];
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : result.rows) {
            if (r.method == methods[k]) pts.emplace_back(r.snr_db, r.mean_rate);
        }
        std::sort(pts.begin(), pts.end());
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" data-method=\""
            << xml_escape(methods[k]) << "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            svg << (i ? " " : "") << fmt("%.2f", px(pts[i].first)) << "," << fmt("%.2f", py(pts[i].second));
        }
        svg << "\"/>\n";
        const double ly = top + 14 + 18 * static_cast<double>(k);
        svg << "<line x1=\"" << fmt("%.2f", left + plot_w + 12) << "\" y1=\"" << fmt("%.2f", ly - 4)
            << "\" x2=\"" << fmt("%.2f", left + plot_w + 32) << "\" y2=\"" << fmt("%.2f", ly - 4)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << fmt("%.2f", left + plot_w + 36) << "\" y=\"" << fmt("%.2f", ly)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(methods[k]) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void render_chart(const SweepResult& result, const std::filesystem::path& path)
{
    write_text(path, format_svg(result));
}

}  // namespace hbf
