#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "hbf/numerics.hpp"
#include "hbf/system.hpp"

namespace hbf {

/// Uniform linear array.
struct ArrayGeometry {
    Index element_count = 1;
    double spacing_over_wavelength = 0.5;
};

/// Propagation paths of one user link. All three vectors share length L.
struct PathSet {
    CVector gains;  // alpha_l
    RVector aoa;    // arrival angles, rad
    RVector aod;    // departure angles, rad

    Index size() const { return gains.size(); }
    bool operator==(const PathSet& o) const
    {
        return gains == o.gains && aoa == o.aoa && aod == o.aod;
    }
};

struct UserChannel {
    CMatrix matrix;  // M x N
    PathSet paths;

    bool operator==(const UserChannel& o) const { return matrix == o.matrix && paths == o.paths; }
};

struct ChannelRealization {
    std::vector<UserChannel> users;
    std::uint64_t seed = 0;

    std::vector<CMatrix> matrices() const;
    /// Rows h_k^H stacked into K x N (single-antenna users).
    CMatrix stacked_rows() const;

    bool operator==(const ChannelRealization&) const = default;
};

/// Unit-norm steering vector; entry n is exp(j 2 pi (d/lambda) n sin(phi)) / sqrt(count).
CVector ula_response(const ArrayGeometry& geom, double phi);

/// Sum of path outer products scaled by sqrt(N M / L).
CMatrix assemble_channel(const PathSet& paths, const ArrayGeometry& rx, const ArrayGeometry& tx);

/// Draws every user's L paths (gains CN(0,1), angles uniform on [0, 2pi)) from a
/// generator seeded with `seed`, then assembles each channel.
ChannelRealization draw_channel(const SystemConfig& cfg, std::uint64_t seed);

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary layout: 8-byte magic "HBFCHAN\0", little-endian u64 header length,
/// JSON header, then little-endian f64 payload. Complex values are stored as
/// interleaved (re, im); matrices row-major. Per realization and user: channel
/// matrix, gains, aoa, aod.
void save_dataset(const std::filesystem::path& path, const std::vector<ChannelRealization>& data);
std::vector<ChannelRealization> load_dataset(const std::filesystem::path& path);

}  // namespace hbf
