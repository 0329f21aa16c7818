#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "vrmimo/channel.hpp"
#include "vrmimo/experiment.hpp"

namespace vrmimo {

namespace {

constexpr std::uint64_t kValidatePurpose = 0x56414c44ULL; // "VALD"

struct Instance {
    MatrixXcd H;
    PowerAllocation power;
    double total_power = 1.0;
    double noise_power = 1.0;
};

// Random (M, K) <= (32, 16) instance with heterogeneous column scales and powers.
Instance random_instance(std::uint64_t seed, int index)
{
    auto eng = RngStream::for_purpose(seed, kValidatePurpose, static_cast<std::uint64_t>(index)).engine();
    std::uniform_int_distribution<int> kdist(1, 16);
    const int K = kdist(eng);
    std::uniform_int_distribution<int> mdist(K, 32);
    const int M = mdist(eng);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    std::uniform_real_distribution<double> scale(0.2, 5.0);
    Instance inst;
    inst.H.resize(M, K);
    VectorXd p(K);
    for (int k = 0; k < K; ++k) {
        const double s = scale(eng);
        for (int m = 0; m < M; ++m) {
            const double re = normal(eng);
            const double im = normal(eng);
            inst.H(m, k) = s * cplx(re, im);
        }
        p[k] = scale(eng);
    }
    inst.total_power = scale(eng);
    p *= inst.total_power / p.sum();
    inst.power = PowerAllocation::custom(p);
    inst.noise_power = scale(eng) / 10.0;
    return inst;
}

void record(SuiteResult& suite, double error)
{
    ++suite.cases;
    suite.max_error = std::max(suite.max_error, error);
    if (!(error <= suite.tolerance))
        ++suite.failures;
}

double max_rel(const VectorXd& a, const VectorXd& b)
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-300));
    return worst;
}

MatrixXcd random_psd(std::mt19937_64& eng, int M)
{
    std::uniform_int_distribution<int> rank(1, M);
    std::normal_distribution<double> normal;
    const int r = rank(eng);
    MatrixXcd X(M, r);
    for (int j = 0; j < r; ++j)
        for (int i = 0; i < M; ++i) {
            const double re = normal(eng);
            const double im = normal(eng);
            X(i, j) = cplx(re, im);
        }
    MatrixXcd A = X * X.adjoint();
    return (A + A.adjoint()) / 2.0;
}

} // namespace

bool ValidationReport::passed() const
{
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed(); });
}

ValidationReport run_validate(const ValidateOptions& options)
{
    SuiteResult power{"power-constraint", 0, 0, 0.0, 1e-10};
    SuiteResult ortho{"zf-orthogonality", 0, 0, 0.0, 1e-8};
    SuiteResult cb_route{"cb-route-equivalence", 0, 0, 0.0, 1e-8};
    SuiteResult zf_route{"zf-route-equivalence", 0, 0, 0.0, 1e-8};
    SuiteResult sqrt_suite{"hermitian-sqrt", 0, 0, 0.0, 1e-8};
    SuiteResult trace_suite{"mask-trace", 0, 0, 0.0, 1e-10};
    SuiteResult table{"table-oracle-equivalence", 0, 0, 0.0, 1e-9};
    SuiteResult determinism{"sampler-determinism", 0, 0, 0.0, 0.0};
    SuiteResult certificate{"nonnegativity-certificate", 0, 0, 0.0, 0.0};

    for (int i = 0; i < options.instances; ++i) {
        const Instance inst = random_instance(options.seed, i);
        const MatrixXcd& H = inst.H;
        const double rho = inst.total_power / inst.noise_power;

        for (auto make : {&cb_precoder, &zf_precoder}) {
            PrecodingMatrix G = make(H, inst.power, inst.total_power);
            const double beta = G.beta * (1.0 + options.beta_perturbation);
            const MatrixXcd scaled = G.G * (beta / G.beta);
            const double used = (inst.power.p.array() * scaled.colwise().squaredNorm().transpose().array()).sum();
            record(power, std::abs(used - inst.total_power) / inst.total_power);
        }

        const PrecodingMatrix zf = zf_precoder(H, inst.power, inst.total_power);
        const MatrixXcd eff = H.adjoint() * zf.G - zf.beta * MatrixXcd::Identity(H.cols(), H.cols());
        record(ortho, eff.cwiseAbs().maxCoeff() / zf.beta);

        const PrecodingMatrix cb = cb_precoder(H, inst.power, inst.total_power);
        record(cb_route, max_rel(sinr_general(H, cb, inst.power, inst.noise_power).gamma,
                                 sinr_cb_closed(H, inst.power, rho).gamma));
        record(zf_route, max_rel(sinr_general(H, zf, inst.power, inst.noise_power).gamma,
                                 sinr_zf_closed(H, inst.power, rho).gamma));

        auto eng = RngStream::for_purpose(options.seed, kValidatePurpose + 1, static_cast<std::uint64_t>(i)).engine();
        const int M = std::uniform_int_distribution<int>(1, 64)(eng);
        const MatrixXcd A = random_psd(eng, M);
        const MatrixXcd S = hermitian_sqrt(A);
        record(sqrt_suite, (S * S - A).cwiseAbs().maxCoeff() / spectral_norm(A));

        const int Mt = std::uniform_int_distribution<int>(1, 64)(eng);
        const int D = std::uniform_int_distribution<int>(1, Mt)(eng);
        const int first = std::uniform_int_distribution<int>(0, Mt - 1)(eng);
        const double r = std::uniform_real_distribution<double>(0.0, 0.95)(eng);
        const Normalization n = (i % 2 == 0) ? Normalization::TraceM : Normalization::TraceD;
        const auto theta = build_theta(exponential_correlation(Mt, r), build_mask(VisibilityRegion::block(first, D, Mt, n), Mt));
        const double target = n == Normalization::TraceM ? Mt : D;
        record(trace_suite, std::abs(theta.theta.trace().real() - target) / target);
    }

    const double rho = 10.0;
    for (auto [M, K, D] : {std::tuple{60, 30, 30}, std::tuple{60, 30, 4}, std::tuple{60, 2, 30}}) {
        const auto corr = std::make_shared<const CorrelationProfile>(identity_correlation(M));
        const PowerAllocation p = PowerAllocation::equal(1.0, K);
        for (Normalization n : {Normalization::TraceM, Normalization::TraceD}) {
            for (auto [which, regions] : {std::pair{TableCase::Worst, place_worst(M, K, D, n)},
                                          std::pair{TableCase::Best, place_best(M, K, D, n)}}) {
                const auto thetas = build_thetas(regions, corr);
                const double cb_de = cb_det_equiv(thetas, p, rho).gamma_bar[0];
                const double zf_de = zf_det_equiv_approx(thetas, p, rho).gamma_bar[0];
                const double cb_cf = closed_form_sinr(PrecoderKind::CB, which, n, M, K, D, rho).value;
                const double zf_cf = closed_form_sinr(PrecoderKind::ZF, which, n, M, K, D, rho).value;
                record(table, std::abs(cb_de - cb_cf) / std::abs(cb_cf));
                record(table, std::abs(zf_de - zf_cf) / std::abs(zf_cf));
            }
        }
    }

    {
        const auto corr = std::make_shared<const CorrelationProfile>(exponential_correlation(16, 0.6));
        const auto regions = place_random(16, 4, 9, options.seed, Normalization::TraceM);
        const auto thetas = build_thetas(regions, corr);
        const ChannelSampler sampler(thetas, options.seed);
        std::vector<MatrixXcd> forward;
        for (int t = 0; t < 32; ++t)
            forward.push_back(sampler.draw(t).H);
        for (int t = 31; t >= 0; --t)
            record(determinism, (sampler.draw(t).H - forward[t]).cwiseAbs().maxCoeff());
    }

    {
        const auto corr = std::make_shared<const CorrelationProfile>(identity_correlation(60));
        const auto identity = build_thetas(place_worst(60, 30, 60, Normalization::TraceM), corr);
        const auto worst = build_thetas(place_worst(60, 30, 20, Normalization::TraceM), corr);
        record(certificate, nonnegativity_certificate(identity).holds ? 0.0 : 1.0);
        record(certificate, nonnegativity_certificate(worst).holds ? 1.0 : 0.0);
    }

    return {{power, ortho, cb_route, zf_route, sqrt_suite, trace_suite, table, determinism, certificate}};
}

void print_report(std::ostream& os, const ValidationReport& report)
{
    for (const auto& s : report.suites) {
        os << (s.passed() ? "PASS " : "FAIL ") << std::left << std::setw(28) << s.name << std::right
           << " cases=" << s.cases << " failures=" << s.failures << " max_error=" << std::scientific
           << std::setprecision(3) << s.max_error << " tol=" << s.tolerance << std::defaultfloat << '\n';
    }
    os << (report.passed() ? "validate: all suites passed" : "validate: FAILED") << '\n';
}

} // namespace vrmimo
