#include "hbf/channel.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

#include <nlohmann/json.hpp>

namespace hbf {

namespace {

constexpr std::array<char, 8> kMagic{'H', 'B', 'F', 'C', 'H', 'A', 'N', '\0'};
constexpr int kFormatVersion = 1;

void put_u64(std::string& out, std::uint64_t v)
{
    for (int b = 0; b < 8; ++b) {
        out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
    }
}

void put_f64(std::string& out, double v)
{
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
public:
    Reader(const std::string& bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
        }
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    Complex c128()
    {
        const double re = f64();
        return {re, f64()};
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const
    {
        if (pos_ + n > bytes_.size()) {
            throw DatasetError("channel dataset is truncated");
        }
    }

    const std::string& bytes_;
    std::size_t pos_;
};

}  // namespace

std::vector<CMatrix> ChannelRealization::matrices() const
{
    std::vector<CMatrix> out;
    out.reserve(users.size());
    for (const auto& u : users) out.push_back(u.matrix);
    return out;
}

CMatrix ChannelRealization::stacked_rows() const
{
    if (users.empty()) return {};
    CMatrix out(static_cast<Index>(users.size()), users.front().matrix.cols());
    for (std::size_t k = 0; k < users.size(); ++k) {
        if (users[k].matrix.rows() != 1) {
            throw DimensionError("stacked_rows: users must have a single antenna");
        }
        out.row(static_cast<Index>(k)) = users[k].matrix.row(0);
    }
    return out;
}

CVector ula_response(const ArrayGeometry& geom, double phi)
{
    const Index n = geom.element_count;
    const double step = 2.0 * std::numbers::pi * geom.spacing_over_wavelength * std::sin(phi);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    CVector out(n);
    for (Index i = 0; i < n; ++i) {
        out(i) = std::polar(norm, step * static_cast<double>(i));
    }
    return out;
}

CMatrix assemble_channel(const PathSet& paths, const ArrayGeometry& rx, const ArrayGeometry& tx)
{
    const Index count = paths.size();
    if (count < 1 || paths.aoa.size() != count || paths.aod.size() != count) {
        throw DimensionError("assemble_channel: path vectors must share a nonzero length");
    }
    CMatrix h = CMatrix::Zero(rx.element_count, tx.element_count);
    for (Index l = 0; l < count; ++l) {
        h += paths.gains(l) * ula_response(rx, paths.aoa(l)) *
             ula_response(tx, paths.aod(l)).adjoint();
    }
    const double scale = std::sqrt(static_cast<double>(rx.element_count * tx.element_count) /
                                   static_cast<double>(count));
    return scale * h;
}

ChannelRealization draw_channel(const SystemConfig& cfg, std::uint64_t seed)
{
    if (cfg.paths < 1) {
        throw ConfigError("paths", "must be at least 1");
    }
    Rng rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const ArrayGeometry rx{cfg.rx_antennas, cfg.antenna_spacing};
    const ArrayGeometry tx{cfg.tx_antennas, cfg.antenna_spacing};

    ChannelRealization out;
    out.seed = seed;
    for (Index k = 0; k < cfg.users; ++k) {
        PathSet paths;
        paths.gains = complex_gaussian(rng, cfg.paths, 1).col(0);
        paths.aoa.resize(cfg.paths);
        paths.aod.resize(cfg.paths);
        for (Index l = 0; l < cfg.paths; ++l) paths.aoa(l) = angle(rng);
        for (Index l = 0; l < cfg.paths; ++l) paths.aod(l) = angle(rng);
        CMatrix h = assemble_channel(paths, rx, tx);
        out.users.push_back({std::move(h), std::move(paths)});
    }
    return out;
}

void save_dataset(const std::filesystem::path& path, const std::vector<ChannelRealization>& data)
{
    Index users = 0, rows = 0, cols = 0, paths = 0;
    if (!data.empty() && !data.front().users.empty()) {
        const UserChannel& first = data.front().users.front();
        users = static_cast<Index>(data.front().users.size());
        rows = first.matrix.rows();
        cols = first.matrix.cols();
        paths = first.paths.size();
    }
    nlohmann::json header;
    header["format"] = "hbf-channels";
    header["version"] = kFormatVersion;
    header["realizations"] = data.size();
    header["users"] = users;
    header["rx_antennas"] = rows;
    header["tx_antennas"] = cols;
    header["paths"] = paths;
    header["seeds"] = nlohmann::json::array();
    for (const auto& r : data) {
        header["seeds"].push_back(r.seed);
    }

    std::string payload;
    for (const auto& r : data) {
        if (static_cast<Index>(r.users.size()) != users) {
            throw DimensionError("save_dataset: realizations differ in user count");
        }
        for (const auto& u : r.users) {
            if (u.matrix.rows() != rows || u.matrix.cols() != cols || u.paths.size() != paths ||
                u.paths.aoa.size() != paths || u.paths.aod.size() != paths) {
                throw DimensionError("save_dataset: realizations differ in dimensions");
            }
            for (Index i = 0; i < rows; ++i) {
                for (Index j = 0; j < cols; ++j) {
                    put_f64(payload, u.matrix(i, j).real());
                    put_f64(payload, u.matrix(i, j).imag());
                }
            }
            for (Index l = 0; l < paths; ++l) {
                put_f64(payload, u.paths.gains(l).real());
                put_f64(payload, u.paths.gains(l).imag());
            }
            for (Index l = 0; l < paths; ++l) put_f64(payload, u.paths.aoa(l));
            for (Index l = 0; l < paths; ++l) put_f64(payload, u.paths.aod(l));
        }
    }

    const std::string text = header.dump();
    std::string bytes(kMagic.begin(), kMagic.end());
    put_u64(bytes, text.size());
    bytes += text;
    bytes += payload;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DatasetError("cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw DatasetError("write to '" + path.string() + "' failed");
    }
}

std::vector<ChannelRealization> load_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DatasetError("cannot open '" + path.string() + "'");
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
        throw DatasetError("not a channel dataset (bad magic)");
    }
    Reader reader(bytes, kMagic.size());
    const std::uint64_t header_len = reader.u64();
    const std::size_t header_start = kMagic.size() + 8;
    if (header_len > bytes.size() - header_start) {
        throw DatasetError("channel dataset is truncated");
    }

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(header_start, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(std::string("malformed dataset header: ") + e.what());
    }

    std::uint64_t count = 0;
    Index users = 0, rows = 0, cols = 0, paths = 0;
    std::vector<std::uint64_t> seeds;
    try {
        if (header.at("format").get<std::string>() != "hbf-channels" ||
            header.at("version").get<int>() != kFormatVersion) {
            throw DatasetError("unsupported dataset format or version");
        }
        count = header.at("realizations").get<std::uint64_t>();
        users = header.at("users").get<Index>();
        rows = header.at("rx_antennas").get<Index>();
        cols = header.at("tx_antennas").get<Index>();
        paths = header.at("paths").get<Index>();
        seeds = header.at("seeds").get<std::vector<std::uint64_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(std::string("malformed dataset header: ") + e.what());
    }
    if (seeds.size() != count || users < 0 || rows < 0 || cols < 0 || paths < 0) {
        throw DatasetError("inconsistent dataset header");
    }

    Reader body(bytes, header_start + header_len);
    const std::uint64_t per_user = static_cast<std::uint64_t>(2 * rows * cols + 4 * paths) * 8;
    const std::uint64_t expected = count * static_cast<std::uint64_t>(users) * per_user;
    if (body.remaining() != expected) {
        throw DatasetError(body.remaining() < expected ? "channel dataset is truncated"
                                                       : "channel dataset has trailing bytes");
    }

    std::vector<ChannelRealization> out(count);
    for (std::uint64_t r = 0; r < count; ++r) {
        out[r].seed = seeds[r];
        for (Index k = 0; k < users; ++k) {
            UserChannel u;
            u.matrix.resize(rows, cols);
            for (Index i = 0; i < rows; ++i) {
                for (Index j = 0; j < cols; ++j) u.matrix(i, j) = body.c128();
            }
            u.paths.gains.resize(paths);
            u.paths.aoa.resize(paths);
            u.paths.aod.resize(paths);
            for (Index l = 0; l < paths; ++l) u.paths.gains(l) = body.c128();
            for (Index l = 0; l < paths; ++l) u.paths.aoa(l) = body.f64();
            for (Index l = 0; l < paths; ++l) u.paths.aod(l) = body.f64();
            out[r].users.push_back(std::move(u));
        }
    }
    return out;
}

}  // namespace hbf
