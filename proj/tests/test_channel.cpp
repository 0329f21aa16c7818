#include <doctest.h>

#include <cmath>

#include "vrmimo/channel.hpp"
#include "vrmimo/parallel.hpp"

using namespace vrmimo;

namespace {

std::shared_ptr<const CorrelationProfile> identity_ptr(int M)
{
    return std::make_shared<const CorrelationProfile>(identity_correlation(M));
}

} // namespace

TEST_CASE("zero covariance gives a zero channel")
{
    const VectorXcd h = draw_user_channel(MatrixXcd::Zero(6, 6), RngStream::for_user(1, 0, 0));
    CHECK(h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample covariance of identity draws converges")
{
    const int M = 8, T = 50000;
    const MatrixXcd I = MatrixXcd::Identity(M, M);
    MatrixXcd acc = MatrixXcd::Zero(M, M);
    for (int t = 0; t < T; ++t) {
        const VectorXcd h = draw_user_channel(I, RngStream::for_user(3, t, 0));
        acc += h * h.adjoint();
    }
    acc /= T;
    CHECK((acc - I).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("sample covariance converges to a correlated theta")
{
    const int M = 12, T = 20000;
    const auto corr = std::make_shared<const CorrelationProfile>(exponential_correlation(M, 0.6));
    std::vector<VisibilityRegion> vr{VisibilityRegion({1, 2, 3, 4, 5, 6, 7, 8}, Normalization::TraceM)};
    const auto thetas = build_thetas(vr, corr);
    const ChannelSampler sampler(thetas, 17);
    MatrixXcd acc = MatrixXcd::Zero(M, M);
    for (int t = 0; t < T; ++t) {
        const VectorXcd h = sampler.draw(t).H.col(0);
        acc += h * h.adjoint();
    }
    acc /= T;
    // Entries of theta reach 1.5, so the per-entry scale is larger than for R = I.
    CHECK((acc - thetas[0].theta).cwiseAbs().maxCoeff() < 5.0 * 1.5 / std::sqrt(double(T)));
}

TEST_CASE("masked entries are exactly zero")
{
    const int M = 8;
    std::vector<VisibilityRegion> vr{VisibilityRegion({0, 1, 2, 3}, Normalization::TraceM)};
    const auto thetas = build_thetas(vr, identity_ptr(M));
    const MatrixXcd root = hermitian_sqrt(thetas[0].theta);
    const VectorXcd h = draw_user_channel(root, RngStream::for_user(9, 4, 0));
    for (int m = 4; m < M; ++m)
        CHECK(h[m] == cplx(0.0, 0.0));
    CHECK(h.head(4).cwiseAbs().minCoeff() > 0.0);

    const auto corr = std::make_shared<const CorrelationProfile>(exponential_correlation(M, 0.8));
    const auto sampler = ChannelSampler(build_thetas(vr, corr), 9);
    const MatrixXcd H = sampler.draw(2).H;
    for (int m = 4; m < M; ++m)
        CHECK(H(m, 0) == cplx(0.0, 0.0));
}

TEST_CASE("same seed and trial reproduce the channel bit for bit")
{
    const auto cfg = SystemConfig::from_snr_db(16, 4, 10.0, 1, 42);
    std::vector<VisibilityRegion> vr(4, VisibilityRegion::block(2, 9, 16, Normalization::TraceM));
    const auto thetas = build_thetas(vr, identity_ptr(16));
    const MatrixXcd a = draw_channel_matrix(cfg, thetas, 5).H;
    const MatrixXcd b = draw_channel_matrix(cfg, thetas, 5).H;
    CHECK(a == b);
    CHECK(!(a == draw_channel_matrix(cfg, thetas, 6).H));
    auto other = cfg;
    other.master_seed = 43;
    CHECK(!(a == draw_channel_matrix(other, thetas, 5).H));
}

TEST_CASE("draws do not depend on execution order or worker count")
{
    const int M = 10, K = 3, T = 64;
    std::vector<VisibilityRegion> vr(K, VisibilityRegion::full(M, Normalization::TraceM));
    const ChannelSampler sampler(build_thetas(vr, identity_ptr(M)), 99);

    std::vector<MatrixXcd> forward(T), threaded(T);
    for (int t = 0; t < T; ++t)
        forward[t] = sampler.draw(t).H;
    parallel_for(T, 4, [&](std::int64_t t) { threaded[T - 1 - t] = sampler.draw(T - 1 - t).H; });
    for (int t = 0; t < T; ++t)
        CHECK(forward[t] == threaded[t]);

    // The diagonal fast path and the i.i.d. generator share their streams.
    for (int t = 0; t < 4; ++t)
        CHECK(draw_iid_channel(M, K, 99, t).H == forward[t]);
}

TEST_CASE("mean channel energy equals the trace of theta")
{
    const int M = 16, T = 20000;
    std::vector<VisibilityRegion> vr{VisibilityRegion::block(3, 4, M, Normalization::TraceM)};
    const auto thetas = build_thetas(vr, identity_ptr(M));
    const ChannelSampler sampler(thetas, 8);
    double energy = 0.0;
    for (int t = 0; t < T; ++t)
        energy += sampler.draw(t).H.col(0).squaredNorm();
    CHECK(std::abs(energy / T - M) / M < 0.02);
}

TEST_CASE("disjoint regions give orthogonal columns")
{
    const int M = 12;
    std::vector<VisibilityRegion> vr{VisibilityRegion::block(0, 6, M, Normalization::TraceM),
                                     VisibilityRegion::block(6, 6, M, Normalization::TraceM)};
    const auto corr = std::make_shared<const CorrelationProfile>(exponential_correlation(M, 0.4));
    const MatrixXcd H = ChannelSampler(build_thetas(vr, corr), 3).draw(0).H;
    CHECK(H.col(0).dot(H.col(1)) == cplx(0.0, 0.0));
}

TEST_CASE("real and imaginary parts have variance 1/(2M) before scaling")
{
    const int M = 4, T = 40000;
    double re2 = 0.0, im2 = 0.0, cross = 0.0;
    const MatrixXcd I = MatrixXcd::Identity(M, M);
    for (int t = 0; t < T; ++t) {
        // h = sqrt(M) z, so Var(Re h) = 1/2.
        const VectorXcd h = draw_user_channel(I, RngStream::for_user(21, t, 0));
        re2 += h.real().squaredNorm();
        im2 += h.imag().squaredNorm();
        cross += h.real().dot(h.imag());
    }
    CHECK(re2 / (T * M) == doctest::Approx(0.5).epsilon(0.03));
    CHECK(im2 / (T * M) == doctest::Approx(0.5).epsilon(0.03));
    CHECK(std::abs(cross / (T * M)) < 0.02);
}

TEST_CASE("stream ids separate users, trials and purposes")
{
    const auto a = RngStream::for_user(1, 0, 1);
    const auto b = RngStream::for_user(1, 1, 0);
    const auto c = RngStream::for_purpose(1, 0, 1);
    CHECK(a.stream_id != b.stream_id);
    CHECK(a.stream_id != c.stream_id);
    CHECK(a.stream_id == RngStream::for_user(1, 0, 1).stream_id);
}
