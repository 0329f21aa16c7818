#include "vrmimo/channel.hpp"

#include <cmath>

namespace vrmimo {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

constexpr std::uint64_t kChannelDomain = 0x43484e4cULL; // "CHNL"
constexpr std::uint64_t kAuxDomain = 0x41555831ULL;     // "AUX1"

std::uint64_t derive(std::uint64_t seed, std::uint64_t domain, std::uint64_t a, std::uint64_t b)
{
    std::uint64_t h = splitmix64(seed ^ splitmix64(domain));
    h = splitmix64(h ^ a);
    return splitmix64(h ^ (b * 0xd1b54a32d192ed03ULL));
}

VectorXcd draw_z(int M, const RngStream& stream)
{
    auto eng = stream.engine();
    std::normal_distribution<double> normal(0.0, std::sqrt(1.0 / (2.0 * M)));
    VectorXcd z(M);
    for (int m = 0; m < M; ++m) {
        const double re = normal(eng);
        const double im = normal(eng);
        z[m] = cplx(re, im);
    }
    return z;
}

bool is_diagonal(const MatrixXcd& A)
{
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            if (i != j && A(i, j) != cplx(0.0, 0.0))
                return false;
    return true;
}

} // namespace

RngStream RngStream::for_user(std::uint64_t master_seed, std::uint64_t trial, std::uint64_t user)
{
    return {master_seed, derive(master_seed, kChannelDomain, trial, user)};
}

RngStream RngStream::for_purpose(std::uint64_t master_seed, std::uint64_t purpose, std::uint64_t index)
{
    return {master_seed, derive(master_seed, kAuxDomain, purpose, index)};
}

std::mt19937_64 RngStream::engine() const
{
    // stream_id already folds in the master seed.
    return std::mt19937_64(stream_id);
}

VectorXcd draw_user_channel(const MatrixXcd& theta_sqrt, const RngStream& stream)
{
    if (theta_sqrt.rows() != theta_sqrt.cols())
        throw ShapeError("theta_sqrt must be square");
    const int M = static_cast<int>(theta_sqrt.rows());
    const VectorXcd w = std::sqrt(static_cast<double>(M)) * draw_z(M, stream);
    return theta_sqrt * w;
}

ChannelSampler::ChannelSampler(std::span<const NonStationaryCovariance> thetas, std::uint64_t master_seed)
    : seed_(master_seed)
{
    if (thetas.empty())
        throw InvalidParam("sampler needs at least one user");
    M_ = thetas.front().size();
    factors_.reserve(thetas.size());
    for (const auto& t : thetas) {
        if (t.size() != M_)
            throw ShapeError("all covariances must share the antenna count");
        Factor f;
        const MatrixXcd root = hermitian_sqrt(t.theta);
        if (is_diagonal(root)) {
            f.diagonal = true;
            f.diag = root.diagonal().real();
        } else {
            f.dense = root;
        }
        factors_.push_back(std::move(f));
    }
}

ChannelRealization ChannelSampler::draw(std::int64_t trial) const
{
    ChannelRealization out;
    out.trial = trial;
    out.H.resize(M_, users());
    const double scale = std::sqrt(static_cast<double>(M_));
    for (int k = 0; k < users(); ++k) {
        const auto stream = RngStream::for_user(seed_, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(k));
        const VectorXcd w = scale * draw_z(M_, stream);
        const Factor& f = factors_[k];
        if (f.diagonal)
            out.H.col(k) = f.diag.cast<cplx>().cwiseProduct(w);
        else
            out.H.col(k) = f.dense * w;
    }
    return out;
}

ChannelRealization draw_iid_channel(int M, int K, std::uint64_t master_seed, std::int64_t trial)
{
    if (M < 1 || K < 1)
        throw InvalidParam("channel dimensions must be positive");
    ChannelRealization out;
    out.trial = trial;
    out.H.resize(M, K);
    const double scale = std::sqrt(static_cast<double>(M));
    for (int k = 0; k < K; ++k) {
        const auto stream = RngStream::for_user(master_seed, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(k));
        out.H.col(k) = scale * draw_z(M, stream);
    }
    return out;
}

ChannelRealization draw_channel_matrix(const SystemConfig& config,
                                       std::span<const NonStationaryCovariance> thetas,
                                       std::int64_t trial)
{
    if (static_cast<int>(thetas.size()) != config.K)
        throw ShapeError("expected one covariance per user");
    if (thetas.front().size() != config.M)
        throw ShapeError("covariance size differs from M");
    return ChannelSampler(thetas, config.master_seed).draw(trial);
}

} // namespace vrmimo
