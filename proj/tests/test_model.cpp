#include <doctest.h>

#include <random>

#include "vrmimo/model.hpp"

using namespace vrmimo;

namespace {

double max_abs(const MatrixXcd& A)
{
    return A.cwiseAbs().maxCoeff();
}

MatrixXcd random_psd(int M, int rank, std::mt19937_64& g)
{
    std::normal_distribution<double> n;
    MatrixXcd X(M, rank);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < rank; ++j)
            X(i, j) = cplx(n(g), n(g));
    return X * X.adjoint();
}

} // namespace

TEST_CASE("mask entries under both normalizations")
{
    const auto full = build_mask(VisibilityRegion::full(60, Normalization::TraceM), 60);
    CHECK(full.d.isApprox(VectorXd::Ones(60)));

    std::vector<int> half(30);
    for (int i = 0; i < 30; ++i)
        half[i] = i;
    const auto m = build_mask(VisibilityRegion(half, Normalization::TraceM), 60);
    for (int i = 0; i < 60; ++i)
        CHECK(m.d[i] == (i < 30 ? 2.0 : 0.0));
    CHECK(m.active_count() == 30);

    const auto d = build_mask(VisibilityRegion(half, Normalization::TraceD), 60);
    for (int i = 0; i < 60; ++i)
        CHECK(d.d[i] == (i < 30 ? 1.0 : 0.0));
}

TEST_CASE("invalid visibility regions are rejected")
{
    CHECK_THROWS_AS(build_mask(VisibilityRegion({}, Normalization::TraceM), 8), InvalidVR);
    CHECK_THROWS_AS(build_mask(VisibilityRegion({0, 8}, Normalization::TraceM), 8), InvalidVR);
    CHECK_THROWS_AS(build_mask(VisibilityRegion({-1}, Normalization::TraceD), 8), InvalidVR);
    CHECK_THROWS_AS(build_mask(VisibilityRegion({2, 2}, Normalization::TraceD), 8), InvalidVR);
}

TEST_CASE("block regions wrap around the array")
{
    const auto vr = VisibilityRegion::block(6, 4, 8, Normalization::TraceD);
    CHECK(vr.active == std::vector<int>{0, 1, 6, 7});
}

TEST_CASE("theta is the masked correlation")
{
    const auto I60 = identity_correlation(60);
    const auto theta_full = build_theta(I60, build_mask(VisibilityRegion::full(60, Normalization::TraceM), 60));
    CHECK(max_abs(theta_full.theta - MatrixXcd::Identity(60, 60)) == 0.0);

    const auto t = build_theta(I60, build_mask(VisibilityRegion::block(0, 30, 60, Normalization::TraceM), 60));
    MatrixXcd expect = MatrixXcd::Zero(60, 60);
    expect.topLeftCorner(30, 30) = 2.0 * MatrixXcd::Identity(30, 30);
    CHECK(max_abs(t.theta - expect) < 1e-14);

    // Exponential R with a TraceD mask keeps the leading block of R verbatim.
    const auto R = exponential_correlation(8, 0.5);
    const auto te = build_theta(R, build_mask(VisibilityRegion::block(0, 4, 8, Normalization::TraceD), 8));
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            const cplx want = (i < 4 && j < 4) ? R.R(i, j) : cplx(0.0);
            CHECK(std::abs(te.theta(i, j) - want) < 1e-15);
        }
}

TEST_CASE("theta trace matches the normalization target")
{
    const int M = 48;
    const auto R = exponential_correlation(M, 0.7);
    for (int D : {1, 5, 12, 47, 48}) {
        const auto vr_m = VisibilityRegion::block(7, D, M, Normalization::TraceM);
        const auto vr_d = VisibilityRegion::block(7, D, M, Normalization::TraceD);
        const double tm = build_theta(R, build_mask(vr_m, M)).theta.trace().real();
        const double td = build_theta(R, build_mask(vr_d, M)).theta.trace().real();
        CHECK(std::abs(tm - M) / M < 1e-10);
        CHECK(std::abs(td - D) / D < 1e-10);
    }
}

TEST_CASE("theta ignores correlation entries outside the region")
{
    std::mt19937_64 g(5);
    const int M = 10;
    MatrixXcd A = random_psd(M, M, g);
    const auto mask = build_mask(VisibilityRegion({1, 2, 5}, Normalization::TraceM), M);
    // Swap two inactive indices of R; theta must not change.
    MatrixXcd B = A;
    B.row(7).swap(B.row(9));
    B.col(7).swap(B.col(9));
    const auto ta = build_theta(custom_correlation(A), mask).theta;
    const auto tb = build_theta(custom_correlation(B), mask).theta;
    CHECK(max_abs(ta - tb) == 0.0);
    for (int i : {0, 3, 4, 6, 7, 8, 9}) {
        CHECK(ta.row(i).cwiseAbs().maxCoeff() == 0.0);
        CHECK(ta.col(i).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("build_theta rejects mismatched sizes")
{
    CHECK_THROWS_AS(build_theta(identity_correlation(4), build_mask(VisibilityRegion::full(5, Normalization::TraceD), 5)),
                    ShapeError);
}

TEST_CASE("exponential correlation")
{
    CHECK(exponential_correlation(3, 0.0).R.isApprox(MatrixXcd::Identity(3, 3)));
    const auto R2 = exponential_correlation(2, 0.5).R;
    CHECK(R2(0, 0) == cplx(1.0));
    CHECK(R2(0, 1) == cplx(0.5));
    CHECK(R2(1, 0) == cplx(0.5));
    CHECK(R2(1, 1) == cplx(1.0));

    const auto R4 = exponential_correlation(4, 0.9).R;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(R4);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK(R4.trace().real() == doctest::Approx(4.0).epsilon(1e-12));

    CHECK_THROWS_AS(exponential_correlation(4, 1.0), InvalidParam);
    CHECK_THROWS_AS(exponential_correlation(4, -0.1), InvalidParam);
}

TEST_CASE("custom correlation validation")
{
    MatrixXcd notherm = MatrixXcd::Identity(3, 3);
    notherm(0, 1) = cplx(0.2, 0.0);
    CHECK_THROWS(custom_correlation(notherm));
    MatrixXcd indefinite = MatrixXcd::Identity(2, 2);
    indefinite(0, 1) = indefinite(1, 0) = 2.0;
    CHECK_THROWS_AS(custom_correlation(indefinite), NotPSD);
}

TEST_CASE("hermitian square root")
{
    CHECK(max_abs(hermitian_sqrt(MatrixXcd::Identity(5, 5)) - MatrixXcd::Identity(5, 5)) < 1e-15);
    CHECK(max_abs(hermitian_sqrt(4.0 * MatrixXcd::Identity(5, 5)) - 2.0 * MatrixXcd::Identity(5, 5)) < 1e-15);

    const MatrixXcd A = exponential_correlation(4, 0.5).R;
    const MatrixXcd S = hermitian_sqrt(A);
    CHECK(max_abs(S * S - A) < 1e-10);
    CHECK(max_abs(S - S.adjoint()) < 1e-12);

    MatrixXcd bad = MatrixXcd::Identity(2, 2);
    bad(1, 1) = -0.5;
    CHECK_THROWS_AS(hermitian_sqrt(bad), NotPSD);
}

TEST_CASE("hermitian square root multiplies back on random PSD matrices")
{
    std::mt19937_64 g(11);
    std::uniform_int_distribution<int> dim(1, 64);
    for (int trial = 0; trial < 200; ++trial) {
        const int M = dim(g);
        const int rank = std::uniform_int_distribution<int>(1, M)(g);
        const MatrixXcd A = random_psd(M, rank, g);
        const MatrixXcd S = hermitian_sqrt(A);
        CHECK(max_abs(S * S - A) <= 1e-8 * spectral_norm(A));
    }
}

TEST_CASE("square root keeps masked rows exactly zero")
{
    const auto R = exponential_correlation(8, 0.6);
    const auto t = build_theta(R, build_mask(VisibilityRegion({2, 3, 4, 5}, Normalization::TraceM), 8));
    const MatrixXcd S = hermitian_sqrt(t.theta);
    for (int i : {0, 1, 6, 7})
        CHECK(S.row(i).cwiseAbs().maxCoeff() == 0.0);
    CHECK(max_abs(S * S - t.theta) < 1e-10);
}

TEST_CASE("assumption report")
{
    const int M = 60, K = 30;
    std::vector<VisibilityRegion> full(K, VisibilityRegion::full(M, Normalization::TraceM));
    const auto corr = std::make_shared<const CorrelationProfile>(identity_correlation(M));
    const auto power = PowerAllocation::equal(1.0, K);
    const auto rep = assumption_report(build_thetas(full, corr), power);
    CHECK(rep.max_spectral_norm == doctest::Approx(1.0));
    CHECK(rep.max_scaled_power == doctest::Approx(1.0));
    CHECK(rep.min_vr_size == M);

    std::vector<VisibilityRegion> half(K, VisibilityRegion::block(0, M / 2, M, Normalization::TraceM));
    const auto rep2 = assumption_report(build_thetas(half, corr), power);
    CHECK(rep2.max_spectral_norm == doctest::Approx(2.0));
    CHECK(rep2.min_vr_size == M / 2);
}

TEST_CASE("system config invariants")
{
    const auto cfg = SystemConfig::from_snr_db(60, 30, 10.0, 100, 7);
    CHECK(cfg.rho() == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(cfg.power.p.isApprox(VectorXd::Constant(30, 1.0 / 30)));
    CHECK_THROWS_AS(SystemConfig::make(10, 11, 1.0, 1.0, 1, 0), InvalidParam);
    CHECK_THROWS_AS(SystemConfig::make(10, 5, 0.0, 1.0, 1, 0), InvalidParam);
    CHECK_THROWS_AS(SystemConfig::make(10, 5, 1.0, 0.0, 1, 0), InvalidParam);
    CHECK_THROWS_AS(SystemConfig::make(10, 5, 1.0, 1.0, 0, 0), InvalidParam);
}

TEST_CASE("normalization names round-trip")
{
    for (auto n : {Normalization::TraceM, Normalization::TraceD})
        CHECK(parse_normalization(to_string(n)) == n);
    CHECK_THROWS(parse_normalization("trace-x"));
}
