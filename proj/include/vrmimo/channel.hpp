#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "vrmimo/model.hpp"

namespace vrmimo {

// Counter-based substream: draws depend only on (master_seed, trial, user), never on the
// order in which trials are executed.
struct RngStream {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    static RngStream for_user(std::uint64_t master_seed, std::uint64_t trial, std::uint64_t user);
    // Streams for auxiliary draws (symbols, placements) live in a separate domain.
    static RngStream for_purpose(std::uint64_t master_seed, std::uint64_t purpose, std::uint64_t index);

    std::mt19937_64 engine() const;
};

std::uint64_t splitmix64(std::uint64_t x);

// h = sqrt(M) * theta_sqrt * z with z ~ CN(0, I / M).
VectorXcd draw_user_channel(const MatrixXcd& theta_sqrt, const RngStream& stream);

struct ChannelRealization {
    MatrixXcd H; // M x K, column k is user k
    std::int64_t trial = 0;
};

// Caches theta^{1/2} per user; diagonal covariances are kept as vectors.
class ChannelSampler {
public:
    ChannelSampler(std::span<const NonStationaryCovariance> thetas, std::uint64_t master_seed);

    int antennas() const { return M_; }
    int users() const { return static_cast<int>(factors_.size()); }
    std::uint64_t seed() const { return seed_; }

    ChannelRealization draw(std::int64_t trial) const;

private:
    struct Factor {
        bool diagonal = false;
        VectorXd diag;
        MatrixXcd dense;
    };
    int M_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<Factor> factors_;
};

// Same draws as a ChannelSampler over identity covariances, without building M x M matrices.
ChannelRealization draw_iid_channel(int M, int K, std::uint64_t master_seed, std::int64_t trial);

ChannelRealization draw_channel_matrix(const SystemConfig& config,
                                       std::span<const NonStationaryCovariance> thetas,
                                       std::int64_t trial);

} // namespace vrmimo
