#include <doctest.h>

#include <cmath>
#include <random>

#include "vrmimo/asymptotics.hpp"
#include "vrmimo/channel.hpp"
#include "vrmimo/scenarios.hpp"

using namespace vrmimo;

namespace {

std::vector<NonStationaryCovariance> thetas_for(const std::vector<VisibilityRegion>& regions, int M)
{
    return build_thetas(regions, std::make_shared<const CorrelationProfile>(identity_correlation(M)));
}

std::vector<NonStationaryCovariance> stationary(int M, int K)
{
    return thetas_for(std::vector<VisibilityRegion>(K, VisibilityRegion::full(M, Normalization::TraceM)), M);
}

// The deterministic equivalents written out with explicit matrix products.
double cb_oracle(const std::vector<NonStationaryCovariance>& th, const VectorXd& p, double rho, int k)
{
    double interference = 0.0, noise = 0.0;
    for (std::size_t j = 0; j < th.size(); ++j) {
        noise += p[j] * th[j].theta.trace().real();
        if (static_cast<int>(j) != k)
            interference += p[j] * (th[k].theta * th[j].theta).trace().real();
    }
    const double tk = th[k].theta.trace().real();
    return p[k] * rho * tk * tk / (rho * interference + noise);
}

double zf_oracle(const std::vector<NonStationaryCovariance>& th, const VectorXd& p, double rho, int k)
{
    double denom = 0.0;
    for (std::size_t i = 0; i < th.size(); ++i) {
        double t = th[i].theta.trace().real();
        for (std::size_t j = 0; j < th.size(); ++j)
            if (j != i)
                t -= (th[i].theta * th[j].theta).trace().real() / th[j].theta.trace().real();
        denom += p[i] / t;
    }
    return p[k] * rho / denom;
}

} // namespace

TEST_CASE("stationary deterministic equivalents")
{
    const auto th = stationary(60, 30);
    const auto power = PowerAllocation::equal(1.0, 30);
    const auto cb = cb_det_equiv(th, power, 10.0);
    const auto zf = zf_det_equiv_approx(th, power, 10.0);
    for (int k = 0; k < 30; ++k) {
        CHECK(std::abs(cb.gamma_bar[k] - 600.0 / 320.0) <= 1e-12 * 1.875);
        CHECK(std::abs(zf.gamma_bar[k] - 10.0 * 31.0 / 30.0) <= 1e-12 * 10.0);
        CHECK(zf.t[k] == doctest::Approx(31.0));
    }
    CHECK(zf.valid);
    CHECK(10.0 * std::log10(cb.gamma_bar[0]) == doctest::Approx(2.73).epsilon(0.005));
    CHECK(10.0 * std::log10(zf.gamma_bar[0]) == doctest::Approx(10.14).epsilon(0.001));
}

TEST_CASE("single user equivalents reduce to rho tr(theta)")
{
    for (int D : {4, 16}) {
        const auto th = thetas_for({VisibilityRegion::block(3, D, 16, Normalization::TraceD)}, 16);
        const auto power = PowerAllocation::equal(1.0, 1);
        CHECK(cb_det_equiv(th, power, 7.0).gamma_bar[0] == doctest::Approx(7.0 * D));
        CHECK(zf_det_equiv_approx(th, power, 7.0).gamma_bar[0] == doctest::Approx(7.0 * D));
    }
}

TEST_CASE("worst-case equivalents")
{
    const auto power = PowerAllocation::equal(1.0, 30);
    const auto th30 = thetas_for(place_worst(60, 30, 30, Normalization::TraceM), 60);
    CHECK(cb_det_equiv(th30, power, 10.0).gamma_bar[0] == doctest::Approx(600.0 / 610.0).epsilon(1e-12));
    const auto zf = zf_det_equiv_approx(th30, power, 10.0);
    CHECK(zf.t[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(zf.gamma_bar[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(zf.valid);

    // D = 20: t_i = 60 - 3 * 29 = -27; the raw value is kept and flagged.
    const auto th20 = thetas_for(place_worst(60, 30, 20, Normalization::TraceM), 60);
    const auto bad = zf_det_equiv_approx(th20, power, 10.0);
    CHECK_FALSE(bad.valid);
    for (int k = 0; k < 30; ++k) {
        CHECK(bad.t[k] == doctest::Approx(-27.0).epsilon(1e-12));
        CHECK_FALSE(bad.positive[k]);
    }
    CHECK(bad.gamma_bar[0] < 0.0);
}

TEST_CASE("equivalents match explicit trace products on correlated scenarios")
{
    std::mt19937_64 g(12);
    for (int trial = 0; trial < 20; ++trial) {
        const int K = std::uniform_int_distribution<int>(2, 6)(g);
        const int M = std::uniform_int_distribution<int>(4 * K, 40)(g);
        const double r = std::uniform_real_distribution<double>(0.0, 0.7)(g);
        const int D = std::uniform_int_distribution<int>(M / 2, M)(g);
        const auto regions = place_random(M, K, D, g(), Normalization::TraceM);
        const auto th = build_thetas(regions, std::make_shared<const CorrelationProfile>(exponential_correlation(M, r)));
        VectorXd p = VectorXd::LinSpaced(K, 1.0, 2.0);
        p /= p.sum();
        const auto power = PowerAllocation::custom(p);
        const auto cb = cb_det_equiv(th, power, 5.0);
        const auto zf = zf_det_equiv_approx(th, power, 5.0);
        for (int k = 0; k < K; ++k) {
            CHECK(cb.gamma_bar[k] == doctest::Approx(cb_oracle(th, p, 5.0, k)).epsilon(1e-10));
            if (zf.valid)
                CHECK(zf.gamma_bar[k] == doctest::Approx(zf_oracle(th, p, 5.0, k)).epsilon(1e-10));
        }
    }
}

TEST_CASE("diagonal approximation is exact for orthogonal interferers")
{
    // Interferers on disjoint antennas; user 0 spans everything.
    const int M = 8;
    std::mt19937_64 g(13);
    std::normal_distribution<double> n;
    MatrixXcd H = MatrixXcd::Zero(M, 3);
    for (int m = 0; m < M; ++m)
        H(m, 0) = cplx(n(g), n(g));
    for (int m = 0; m < 4; ++m)
        H(m, 1) = cplx(n(g), n(g));
    for (int m = 4; m < M; ++m)
        H(m, 2) = cplx(n(g), n(g));
    const auto e = diagonal_approx_error(H, 0);
    CHECK(e.epsilon < 1e-12 * e.exact);
    CHECK(e.exact == doctest::Approx(e.approx));
}

TEST_CASE("two users: the Gram matrix is a scalar")
{
    const auto H = draw_iid_channel(16, 2, 5, 0).H;
    for (int i = 0; i < 2; ++i) {
        const auto e = diagonal_approx_error(H, i);
        const VectorXcd other = H.col(1 - i);
        const double want = std::norm(other.dot(H.col(i))) / other.squaredNorm();
        CHECK(e.exact == doctest::Approx(want).epsilon(1e-12));
        CHECK(e.epsilon < 1e-12 * want);
    }
}

TEST_CASE("diagonal approximation matches an explicit inverse")
{
    const auto H = draw_iid_channel(40, 6, 3, 1).H;
    for (int i = 0; i < 6; ++i) {
        MatrixXcd others(40, 5);
        for (int j = 0, c = 0; j < 6; ++j)
            if (j != i)
                others.col(c++) = H.col(j);
        const MatrixXcd gram = others.adjoint() * others;
        const VectorXcd b = others.adjoint() * H.col(i);
        const double exact = (b.adjoint() * gram.inverse() * b)(0, 0).real();
        double approx = 0.0;
        for (int j = 0; j < 5; ++j)
            approx += std::norm(b[j]) / gram(j, j).real();
        const auto e = diagonal_approx_error(H, i);
        CHECK(e.exact == doctest::Approx(exact).epsilon(1e-10));
        CHECK(e.approx == doctest::Approx(approx).epsilon(1e-12));
        CHECK(e.epsilon == std::abs(e.exact - e.approx));
    }
}

TEST_CASE("singular interferers are rejected")
{
    MatrixXcd H = draw_iid_channel(10, 4, 1, 0).H;
    H.col(3) = H.col(1) * cplx(0.0, 2.0);
    CHECK_THROWS_AS(diagonal_approx_error(H, 0), SingularChannel);
    // Removing one of the dependent pair restores full rank.
    CHECK_NOTHROW(diagonal_approx_error(H, 3));
}

TEST_CASE("approximation error decays with M")
{
    auto mean_eps = [](int M) {
        double s = 0.0;
        for (int t = 0; t < 200; ++t)
            s += diagonal_approx_report(draw_iid_channel(M, 8, 77, t).H).mean_epsilon();
        return s / 200;
    };
    CHECK(mean_eps(256) < mean_eps(64));
}

TEST_CASE("epsilon study preconditions")
{
    const std::vector<int> single{64};
    CHECK_THROWS_AS(epsilon_scaling_study(8, single, 10, 1), InvalidParam);
    const std::vector<int> narrow{64, 128, 256};
    CHECK_THROWS_AS(epsilon_scaling_study(8, narrow, 10, 1), InvalidParam);
    const std::vector<int> small{16, 128};
    CHECK_THROWS_AS(epsilon_scaling_study(8, small, 10, 1), InvalidParam);
    const std::vector<int> ok{32, 256};
    CHECK_THROWS_AS(epsilon_scaling_study(8, ok, 0, 1), InvalidParam);
    CHECK_THROWS_AS(epsilon_scaling_study(1, ok, 10, 1), InvalidParam);
    const auto study = epsilon_scaling_study(8, ok, 20, 1);
    CHECK(study.mean_epsilon.size() == 2);
    CHECK(study.mean_epsilon[1] < study.mean_epsilon[0]);
}

TEST_CASE("epsilon study is independent of the worker count")
{
    const std::vector<int> grid{32, 64, 256};
    const auto a = epsilon_scaling_study(8, grid, 30, 4, 1);
    const auto b = epsilon_scaling_study(8, grid, 30, 4, 3);
    CHECK(a.mean_epsilon == b.mean_epsilon);
    CHECK(a.slope == b.slope);
}

TEST_CASE("log-log slope")
{
    const std::vector<double> x{1, 2, 4, 8};
    std::vector<double> y;
    for (double v : x)
        y.push_back(3.0 / std::sqrt(v));
    CHECK(loglog_slope(x, y) == doctest::Approx(-0.5).epsilon(1e-12));
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(loglog_slope(one, one), InvalidParam);
}

TEST_CASE("nonnegativity certificate")
{
    const auto cert = nonnegativity_certificate(stationary(60, 30));
    CHECK(cert.holds);
    CHECK(cert.sufficient_holds);
    CHECK(cert.margin[0] == doctest::Approx(31.0));

    const auto worst = nonnegativity_certificate(thetas_for(place_worst(60, 30, 20, Normalization::TraceM), 60));
    CHECK_FALSE(worst.holds);
    CHECK_FALSE(worst.sufficient_holds);
    CHECK(worst.margin[5] == doctest::Approx(-27.0));
    CHECK(worst.lambda_max[0] == doctest::Approx(3.0));

    const auto one = nonnegativity_certificate(thetas_for({VisibilityRegion::block(0, 2, 9, Normalization::TraceD)}, 9));
    CHECK(one.holds);
    CHECK(one.sufficient_holds);
}

TEST_CASE("sufficient condition implies the certificate")
{
    std::mt19937_64 g(14);
    for (int trial = 0; trial < 50; ++trial) {
        const int K = std::uniform_int_distribution<int>(2, 8)(g);
        const int M = std::uniform_int_distribution<int>(4 * K, 64)(g);
        const double r = std::uniform_real_distribution<double>(0.0, 0.9)(g);
        const int D = std::uniform_int_distribution<int>(1, M)(g);
        const auto th = build_thetas(place_random(M, K, D, g(), Normalization::TraceM),
                                     std::make_shared<const CorrelationProfile>(exponential_correlation(M, r)));
        const auto cert = nonnegativity_certificate(th);
        if (cert.sufficient_holds)
            CHECK(cert.holds);
    }
}
