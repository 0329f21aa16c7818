#include "vrmimo/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vrmimo/channel.hpp"
#include "vrmimo/parallel.hpp"

namespace vrmimo {

namespace {

void check_power(const TraceMoments& m, const PowerAllocation& power)
{
    if (m.users() == 0)
        throw InvalidParam("need at least one user");
    if (power.users() != m.users())
        throw ShapeError("power allocation does not match the number of users");
    if ((m.trace.array() <= 0.0).any())
        throw InvalidParam("deterministic equivalents need positive traces");
}

// tr(A B) for Hermitian A, B is sum_{m,n} A(m,n) conj(B(m,n)).
double trace_product(const MatrixXcd& A, const MatrixXcd& B)
{
    return A.cwiseProduct(B.conjugate()).sum().real();
}

VectorXd zf_margins(const TraceMoments& m)
{
    const int K = m.users();
    VectorXd t(K);
    for (int i = 0; i < K; ++i) {
        double sum = 0.0;
        for (int j = 0; j < K; ++j)
            if (j != i)
                sum += m.cross(i, j) / m.trace[j];
        t[i] = m.trace[i] - sum;
    }
    return t;
}

MatrixXcd drop_column(const MatrixXcd& H, int i)
{
    const Eigen::Index K = H.cols();
    MatrixXcd out(H.rows(), K - 1);
    out.leftCols(i) = H.leftCols(i);
    out.rightCols(K - 1 - i) = H.rightCols(K - 1 - i);
    return out;
}

DiagApproxEntry quadratic_forms(const MatrixXcd& H, int i)
{
    DiagApproxEntry e;
    if (H.cols() == 1)
        return e;
    const MatrixXcd others = drop_column(H, i);
    const VectorXcd b = others.adjoint() * H.col(i);
    const MatrixXcd gram = others.adjoint() * others;
    Eigen::LLT<MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw SingularChannel("interfering channels have a singular Gram matrix");
    const VectorXcd w = llt.matrixL().solve(b);
    e.exact = w.squaredNorm();
    for (Eigen::Index j = 0; j < b.size(); ++j)
        e.approx += std::norm(b[j]) / gram(j, j).real();
    e.epsilon = std::abs(e.exact - e.approx);
    return e;
}

} // namespace

TraceMoments trace_moments(std::span<const NonStationaryCovariance> thetas)
{
    const auto K = static_cast<Eigen::Index>(thetas.size());
    TraceMoments m{VectorXd(K), Eigen::MatrixXd(K, K)};
    for (Eigen::Index i = 0; i < K; ++i) {
        if (thetas[i].size() != thetas.front().size())
            throw ShapeError("covariances must share the antenna count");
        m.trace[i] = thetas[i].theta.trace().real();
    }
    for (Eigen::Index i = 0; i < K; ++i)
        for (Eigen::Index j = i; j < K; ++j)
            m.cross(i, j) = m.cross(j, i) = trace_product(thetas[i].theta, thetas[j].theta);
    return m;
}

DetEquivReport cb_det_equiv(const TraceMoments& m, const PowerAllocation& power, double rho)
{
    check_power(m, power);
    const int K = m.users();
    const double noise_term = power.p.dot(m.trace);
    DetEquivReport rep;
    rep.gamma_bar.resize(K);
    for (int k = 0; k < K; ++k) {
        double interference = 0.0;
        for (int j = 0; j < K; ++j)
            if (j != k)
                interference += power.p[j] * m.cross(k, j);
        rep.gamma_bar[k] = power.p[k] * rho * m.trace[k] * m.trace[k] / (rho * interference + noise_term);
    }
    return rep;
}

DetEquivReport cb_det_equiv(std::span<const NonStationaryCovariance> thetas, const PowerAllocation& power, double rho)
{
    return cb_det_equiv(trace_moments(thetas), power, rho);
}

DetEquivReport zf_det_equiv_approx(const TraceMoments& m, const PowerAllocation& power, double rho)
{
    check_power(m, power);
    const int K = m.users();
    DetEquivReport rep;
    rep.t = zf_margins(m);
    rep.positive.resize(K);
    double denom = 0.0;
    for (int i = 0; i < K; ++i) {
        rep.positive[i] = rep.t[i] > 0.0;
        rep.valid = rep.valid && rep.positive[i];
        denom += power.p[i] / rep.t[i];
    }
    rep.gamma_bar = power.p * (rho / denom);
    return rep;
}

DetEquivReport zf_det_equiv_approx(std::span<const NonStationaryCovariance> thetas, const PowerAllocation& power,
                                   double rho)
{
    return zf_det_equiv_approx(trace_moments(thetas), power, rho);
}

double DiagApproxReport::mean_epsilon() const
{
    if (users.empty())
        return 0.0;
    double s = 0.0;
    for (const auto& u : users)
        s += u.epsilon;
    return s / static_cast<double>(users.size());
}

DiagApproxEntry diagonal_approx_error(const MatrixXcd& H, int i)
{
    if (i < 0 || i >= H.cols())
        throw InvalidParam("user index out of range");
    if (H.cols() > 1 && !has_full_column_rank(drop_column(H, i)))
        throw SingularChannel("interfering channels are rank deficient");
    return quadratic_forms(H, i);
}

DiagApproxReport diagonal_approx_report(const MatrixXcd& H)
{
    DiagApproxReport rep;
    rep.M = static_cast<int>(H.rows());
    rep.K = static_cast<int>(H.cols());
    // Dropping a column can only raise the singular value ratio, so one test covers all users.
    const bool full = has_full_column_rank(H);
    rep.users.reserve(H.cols());
    for (int i = 0; i < rep.K; ++i)
        rep.users.push_back(full ? quadratic_forms(H, i) : diagonal_approx_error(H, i));
    return rep;
}

double loglog_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw InvalidParam("slope needs at least two matching points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx <= 0.0)
        throw InvalidParam("slope needs distinct abscissae");
    return sxy / sxx;
}

EpsilonStudy epsilon_scaling_study(int K, std::span<const int> M_grid, int trials, std::uint64_t seed, int threads)
{
    if (K < 2)
        throw InvalidParam("epsilon study needs K >= 2");
    if (trials < 1)
        throw InvalidParam("epsilon study needs at least one trial");
    if (M_grid.size() < 2)
        throw InvalidParam("epsilon study needs at least two antenna counts");
    const auto [lo, hi] = std::minmax_element(M_grid.begin(), M_grid.end());
    if (*lo < 4 * K)
        throw InvalidParam("every M in the grid must be at least 4K = " + std::to_string(4 * K));
    if (*hi < 8 * *lo)
        throw InvalidParam("antenna grid must span at least three octaves");

    EpsilonStudy study;
    study.K = K;
    study.trials = trials;
    study.seed = seed;
    study.M_grid.assign(M_grid.begin(), M_grid.end());

    for (int M : study.M_grid) {
        const std::uint64_t cell_seed = splitmix64(seed ^ (static_cast<std::uint64_t>(M) << 24) ^ static_cast<std::uint64_t>(K));
        std::vector<double> per_trial(trials);
        parallel_for(trials, threads, [&](std::int64_t t) {
            const auto H = draw_iid_channel(M, K, cell_seed, t).H;
            per_trial[t] = diagonal_approx_report(H).mean_epsilon();
        });
        const double mean = std::accumulate(per_trial.begin(), per_trial.end(), 0.0) / trials;
        double var = 0.0;
        for (double v : per_trial)
            var += (v - mean) * (v - mean);
        var = trials > 1 ? var / (trials - 1) : 0.0;
        study.mean_epsilon.push_back(mean);
        study.stderr_epsilon.push_back(std::sqrt(var / trials));
    }
    std::vector<double> xs(study.M_grid.begin(), study.M_grid.end());
    study.slope = loglog_slope(xs, study.mean_epsilon);
    return study;
}

NonnegativityCertificate nonnegativity_certificate(std::span<const NonStationaryCovariance> thetas)
{
    if (thetas.empty())
        throw InvalidParam("certificate needs at least one user");
    const TraceMoments m = trace_moments(thetas);
    if ((m.trace.array() <= 0.0).any())
        throw InvalidParam("certificate needs positive traces");
    const int K = m.users();
    NonnegativityCertificate cert;
    cert.margin = zf_margins(m);
    cert.lambda_max.resize(K);
    cert.sufficient.resize(K);
    for (int i = 0; i < K; ++i) {
        cert.holds = cert.holds && cert.margin[i] >= 0.0;
        cert.lambda_max[i] = spectral_norm(thetas[i].theta);
        cert.sufficient[i] = m.trace[i] >= (K - 1) * cert.lambda_max[i];
        cert.sufficient_holds = cert.sufficient_holds && cert.sufficient[i];
    }
    return cert;
}

} // namespace vrmimo
