#include "vrmimo/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vrmimo {

std::string_view to_string(Normalization n)
{
    return n == Normalization::TraceM ? "trace-m" : "trace-d";
}

Normalization parse_normalization(std::string_view text)
{
    if (text == "trace-m")
        return Normalization::TraceM;
    if (text == "trace-d")
        return Normalization::TraceD;
    throw InvalidParam("unknown normalization '" + std::string(text) + "' (expected trace-m or trace-d)");
}

PowerAllocation PowerAllocation::equal(double total_power, int users)
{
    if (users < 1)
        throw InvalidParam("power allocation needs at least one user");
    if (!(total_power > 0.0))
        throw InvalidParam("total power must be positive");
    return {VectorXd::Constant(users, total_power / users)};
}

PowerAllocation PowerAllocation::custom(VectorXd p)
{
    if (p.size() == 0)
        throw InvalidParam("power allocation needs at least one user");
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        if (!(p[k] >= 0.0) || !std::isfinite(p[k]))
            throw InvalidParam("per-user powers must be finite and nonnegative");
    }
    return {std::move(p)};
}

SystemConfig SystemConfig::make(int M, int K, double total_power, double noise_power, int trials,
                                std::uint64_t master_seed)
{
    if (K < 1 || M < K)
        throw InvalidParam("require M >= K >= 1, got M=" + std::to_string(M) + " K=" + std::to_string(K));
    if (!(total_power > 0.0) || !(noise_power > 0.0))
        throw InvalidParam("total power and noise power must be positive");
    if (trials < 1)
        throw InvalidParam("trials must be positive");
    SystemConfig cfg;
    cfg.M = M;
    cfg.K = K;
    cfg.total_power = total_power;
    cfg.noise_power = noise_power;
    cfg.power = PowerAllocation::equal(total_power, K);
    cfg.trials = trials;
    cfg.master_seed = master_seed;
    return cfg;
}

SystemConfig SystemConfig::from_snr_db(int M, int K, double snr_db, int trials, std::uint64_t master_seed)
{
    if (!std::isfinite(snr_db))
        throw InvalidParam("SNR must be finite");
    return make(M, K, 1.0, 1.0 / std::pow(10.0, snr_db / 10.0), trials, master_seed);
}

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kProfilePsdTol = 1e-10;
constexpr double kSqrtClamp = 1e-12;
constexpr double kSqrtReject = 1e-8;

double hermitian_defect(const MatrixXcd& A)
{
    return (A - A.adjoint()).cwiseAbs().maxCoeff();
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

CorrelationProfile identity_correlation(int M)
{
    if (M < 1)
        throw InvalidParam("correlation size must be positive");
    return {MatrixXcd::Identity(M, M), CorrelationKind::Identity, 0.0};
}

CorrelationProfile exponential_correlation(int M, double r)
{
    if (M < 1)
        throw InvalidParam("correlation size must be positive");
    if (!(r >= 0.0 && r < 1.0))
        throw InvalidParam("exponential correlation requires 0 <= r < 1");
    MatrixXcd R(M, M);
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < M; ++n)
            R(m, n) = std::pow(r, std::abs(m - n));
    return {std::move(R), CorrelationKind::Exponential, r};
}

CorrelationProfile custom_correlation(MatrixXcd R)
{
    if (R.rows() == 0 || R.rows() != R.cols())
        throw ShapeError("correlation matrix must be square and nonempty");
    if (hermitian_defect(R) > kHermitianTol)
        throw InvalidParam("correlation matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(R, Eigen::EigenvaluesOnly);
    const VectorXd& ev = eig.eigenvalues();
    if (ev.minCoeff() < -kProfilePsdTol * std::max(ev.maxCoeff(), 0.0))
        throw NotPSD("correlation matrix is not positive semidefinite");
    return {std::move(R), CorrelationKind::Custom, 0.0};
}

VisibilityRegion::VisibilityRegion(std::vector<int> indices, Normalization n)
    : active(std::move(indices)), normalization(n)
{
    std::sort(active.begin(), active.end());
}

VisibilityRegion VisibilityRegion::full(int M, Normalization n)
{
    return block(0, M, M, n);
}

VisibilityRegion VisibilityRegion::block(int first, int length, int M, Normalization n)
{
    if (M < 1 || length < 1 || length > M)
        throw InvalidVR("block length must be in [1, M]");
    std::vector<int> idx(length);
    for (int i = 0; i < length; ++i)
        idx[i] = ((first + i) % M + M) % M;
    return VisibilityRegion(std::move(idx), n);
}

int MaskMatrix::active_count() const
{
    return static_cast<int>((d.array() > 0.0).count());
}

MaskMatrix build_mask(const VisibilityRegion& vr, int M)
{
    if (M < 1)
        throw InvalidParam("antenna count must be positive");
    if (vr.active.empty())
        throw InvalidVR("visibility region is empty");
    std::vector<int> idx = vr.active;
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
        throw InvalidVR("visibility region has duplicate indices");
    if (idx.front() < 0 || idx.back() >= M)
        throw InvalidVR("visibility region index out of range [0, " + std::to_string(M) + ")");

    const double gain = vr.normalization == Normalization::TraceM
                            ? static_cast<double>(M) / static_cast<double>(idx.size())
                            : 1.0;
    MaskMatrix mask{VectorXd::Zero(M)};
    for (int m : idx)
        mask.d[m] = gain;
    return mask;
}

NonStationaryCovariance build_theta(std::shared_ptr<const CorrelationProfile> corr, const MaskMatrix& mask)
{
    if (!corr)
        throw InvalidParam("missing correlation profile");
    const MatrixXcd& R = corr->R;
    if (R.rows() != R.cols() || R.rows() != mask.d.size())
        throw ShapeError("correlation is " + std::to_string(R.rows()) + "x" + std::to_string(R.cols()) +
                         " but mask has length " + std::to_string(mask.d.size()));
    const VectorXd s = mask.d.cwiseSqrt();
    MatrixXcd theta = s.asDiagonal() * R * s.asDiagonal();
    return {std::move(theta), mask, std::move(corr)};
}

NonStationaryCovariance build_theta(const CorrelationProfile& corr, const MaskMatrix& mask)
{
    return build_theta(std::make_shared<const CorrelationProfile>(corr), mask);
}

MatrixXcd hermitian_sqrt(const MatrixXcd& A)
{
    if (A.rows() != A.cols())
        throw ShapeError("hermitian_sqrt needs a square matrix");
    const Eigen::Index n = A.rows();
    if (n == 0)
        return A;
    const double scale = std::max(A.cwiseAbs().maxCoeff(), 1.0);
    if (hermitian_defect(A) > 1e-10 * scale)
        throw InvalidParam("hermitian_sqrt needs a Hermitian matrix");

    if (is_diagonal(A)) {
        const VectorXd diag = A.diagonal().real();
        const double top = diag.maxCoeff();
        if (diag.minCoeff() < -kSqrtReject * std::max(top, 0.0))
            throw NotPSD("matrix has a negative eigenvalue");
        MatrixXcd S = MatrixXcd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            S(i, i) = diag[i] > kSqrtClamp * top ? std::sqrt(diag[i]) : 0.0;
        return S;
    }

    // Root only the block spanned by rows that are not identically zero.
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < n; ++i)
        if ((A.row(i).array() != cplx(0.0, 0.0)).any())
            support.push_back(i);
    const auto m = static_cast<Eigen::Index>(support.size());
    MatrixXcd sub(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            sub(i, j) = A(support[i], support[j]);

    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(sub);
    VectorXd ev = eig.eigenvalues();
    const double top = ev.maxCoeff();
    if (ev.minCoeff() < -kSqrtReject * std::max(top, 0.0))
        throw NotPSD("matrix has a negative eigenvalue");
    for (Eigen::Index i = 0; i < m; ++i)
        ev[i] = ev[i] > kSqrtClamp * top ? std::sqrt(ev[i]) : 0.0;
    const MatrixXcd& U = eig.eigenvectors();
    MatrixXcd root = U * ev.asDiagonal() * U.adjoint();

    MatrixXcd S = MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            S(support[i], support[j]) = root(i, j);
    return S;
}

double spectral_norm(const MatrixXcd& A)
{
    if (A.size() == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(A, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

AssumptionReport assumption_report(std::span<const NonStationaryCovariance> thetas,
                                   const PowerAllocation& power)
{
    if (thetas.empty())
        throw InvalidParam("assumption report needs at least one user");
    AssumptionReport rep;
    rep.min_vr_size = thetas.front().mask.active_count();
    for (const auto& t : thetas) {
        rep.max_spectral_norm = std::max(rep.max_spectral_norm, spectral_norm(t.theta));
        rep.min_vr_size = std::min(rep.min_vr_size, t.mask.active_count());
    }
    if (power.users() > 0)
        rep.max_scaled_power = power.p.maxCoeff() * power.users();
    return rep;
}

std::vector<NonStationaryCovariance> build_thetas(std::span<const VisibilityRegion> regions,
                                                  std::shared_ptr<const CorrelationProfile> corr)
{
    std::vector<NonStationaryCovariance> out;
    out.reserve(regions.size());
    for (const auto& vr : regions)
        out.push_back(build_theta(corr, build_mask(vr, corr->size())));
    return out;
}

} // namespace vrmimo
