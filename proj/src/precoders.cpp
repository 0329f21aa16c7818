#include "vrmimo/precoders.hpp"

#include <cmath>
#include <random>
#include <string>

#include "vrmimo/channel.hpp"

namespace vrmimo {

namespace {

constexpr double kRankRatio = 1e-10;

void check_shapes(const MatrixXcd& H, const PowerAllocation& power)
{
    if (H.cols() == 0 || H.rows() < H.cols())
        throw ShapeError("channel must be M x K with M >= K >= 1");
    if (power.users() != H.cols())
        throw ShapeError("power allocation has " + std::to_string(power.users()) + " entries for " +
                         std::to_string(H.cols()) + " users");
}

// Thin QR of H. R is the Cholesky factor of the Gram matrix H^* H, so
// H (H^* H)^{-1} = Q R^{-*} and diag((H^* H)^{-1}) holds the squared column norms of R^{-*}.
struct GramFactor {
    MatrixXcd Q;        // M x K, orthonormal columns
    MatrixXcd r_inv_adj; // R^{-*}, K x K lower triangular
};

GramFactor factor_gram(const MatrixXcd& H)
{
    const Eigen::Index M = H.rows(), K = H.cols();
    Eigen::HouseholderQR<MatrixXcd> qr(H);
    const MatrixXcd R = qr.matrixQR().topRows(K).triangularView<Eigen::Upper>();
    GramFactor f;
    f.r_inv_adj = R.adjoint().triangularView<Eigen::Lower>().solve(MatrixXcd::Identity(K, K));
    // s_min / s_max >= 1 / (|R|_F |R^{-1}|_F); the SVD only runs when that bound is inconclusive.
    const double bound = 1.0 / (R.norm() * f.r_inv_adj.norm());
    if (!(bound > kRankRatio)) {
        Eigen::JacobiSVD<MatrixXcd> svd(R);
        const VectorXd& s = svd.singularValues();
        const double ratio = s[0] > 0.0 ? s[K - 1] / s[0] : 0.0;
        if (!(ratio > kRankRatio))
            throw SingularChannel("channel matrix is rank deficient (singular value ratio " + std::to_string(ratio) +
                                  ")");
    }
    f.Q = qr.householderQ() * MatrixXcd::Identity(M, K);
    return f;
}

} // namespace

std::string_view to_string(PrecoderKind k)
{
    return k == PrecoderKind::CB ? "CB" : "ZF";
}

std::string_view to_string(SinrSource s)
{
    switch (s) {
    case SinrSource::MonteCarlo:
        return "monte-carlo";
    case SinrSource::DeterministicEquivalent:
        return "det-equiv";
    case SinrSource::ClosedForm:
        return "closed-form";
    case SinrSource::LinkLevel:
        return "link-level";
    }
    return "unknown";
}

double column_rank_ratio(const MatrixXcd& H)
{
    if (H.size() == 0)
        return 0.0;
    Eigen::JacobiSVD<MatrixXcd, Eigen::ColPivHouseholderQRPreconditioner> svd(H);
    const VectorXd& s = svd.singularValues();
    if (s[0] <= 0.0)
        return 0.0;
    return s[s.size() - 1] / s[0];
}

bool has_full_column_rank(const MatrixXcd& H)
{
    return H.rows() >= H.cols() && column_rank_ratio(H) > kRankRatio;
}

PrecodingMatrix cb_precoder(const MatrixXcd& H, const PowerAllocation& power, double total_power)
{
    check_shapes(H, power);
    const double weighted = (power.p.array() * H.colwise().squaredNorm().transpose().array()).sum();
    if (!(weighted > 0.0))
        throw DegenerateChannel("CB precoder needs a nonzero channel");
    const double beta = std::sqrt(total_power / weighted);
    return {beta * H, beta, PrecoderKind::CB};
}

PrecodingMatrix zf_precoder(const MatrixXcd& H, const PowerAllocation& power, double total_power)
{
    check_shapes(H, power);
    const GramFactor f = factor_gram(H);
    const VectorXd inv_diag = f.r_inv_adj.colwise().squaredNorm().transpose();
    const double weighted = power.p.dot(inv_diag);
    if (!(weighted > 0.0))
        throw DegenerateChannel("ZF precoder needs positive power on some user");
    const double beta = std::sqrt(total_power / weighted);
    return {beta * (f.Q * f.r_inv_adj), beta, PrecoderKind::ZF};
}

SinrVector sinr_general(const MatrixXcd& H, const PrecodingMatrix& G, const PowerAllocation& power,
                        double noise_power)
{
    check_shapes(H, power);
    if (G.G.rows() != H.rows() || G.G.cols() != H.cols())
        throw ShapeError("precoder and channel shapes differ");
    const Eigen::Index K = H.cols();
    const Eigen::MatrixXd gains = (H.adjoint() * G.G).cwiseAbs2(); // |h_k^* g_j|^2
    SinrVector out{VectorXd(K), SinrSource::MonteCarlo};
    for (Eigen::Index k = 0; k < K; ++k) {
        double interference = 0.0;
        for (Eigen::Index j = 0; j < K; ++j)
            if (j != k)
                interference += power.p[j] * gains(k, j);
        out.gamma[k] = power.p[k] * gains(k, k) / (interference + noise_power);
    }
    return out;
}

SinrVector sinr_cb_closed(const MatrixXcd& H, const PowerAllocation& power, double rho)
{
    check_shapes(H, power);
    const Eigen::Index K = H.cols();
    const MatrixXcd gram = H.adjoint() * H;
    const VectorXd norms = gram.diagonal().real();
    const double weighted = power.p.dot(norms);
    if (!(weighted > 0.0))
        throw DegenerateChannel("CB SINR needs a nonzero channel");
    SinrVector out{VectorXd(K), SinrSource::ClosedForm};
    for (Eigen::Index k = 0; k < K; ++k) {
        double interference = 0.0;
        for (Eigen::Index j = 0; j < K; ++j)
            if (j != k)
                interference += power.p[j] * std::norm(gram(k, j));
        out.gamma[k] = power.p[k] * rho * norms[k] * norms[k] / (rho * interference + weighted);
    }
    return out;
}

SinrVector sinr_zf_closed(const MatrixXcd& H, const PowerAllocation& power, double rho)
{
    check_shapes(H, power);
    const GramFactor f = factor_gram(H);
    const double weighted = power.p.dot(f.r_inv_adj.colwise().squaredNorm().transpose());
    return {power.p * (rho / weighted), SinrSource::ClosedForm};
}

LinkLevelReport link_level_validate(const MatrixXcd& H, const PrecodingMatrix& G, const PowerAllocation& power,
                                    double noise_power, int n_symbols, std::uint64_t seed)
{
    check_shapes(H, power);
    if (n_symbols < 1000)
        throw InvalidParam("link-level validation needs at least 1000 symbols");
    if (!(noise_power >= 0.0))
        throw InvalidParam("noise power must be nonnegative");
    const Eigen::Index K = H.cols();

    auto eng = RngStream::for_purpose(seed, 0x4c494e4bULL, 0).engine();
    std::normal_distribution<double> unit(0.0, std::sqrt(0.5));
    auto cn = [&](double scale) {
        const double re = unit(eng);
        const double im = unit(eng);
        return scale * cplx(re, im);
    };

    // Effective gains a_kj = sqrt(p_j) h_k^* g_j.
    MatrixXcd a = H.adjoint() * G.G;
    for (Eigen::Index j = 0; j < K; ++j)
        a.col(j) *= std::sqrt(power.p[j]);

    const double noise_sd = std::sqrt(noise_power);
    VectorXd sig = VectorXd::Zero(K), intf = VectorXd::Zero(K), noise = VectorXd::Zero(K),
             residual = VectorXd::Zero(K);
    VectorXcd s(K);
    for (int t = 0; t < n_symbols; ++t) {
        for (Eigen::Index j = 0; j < K; ++j)
            s[j] = cn(1.0);
        const VectorXcd x = G.G * (power.p.cwiseSqrt().cast<cplx>().cwiseProduct(s));
        for (Eigen::Index k = 0; k < K; ++k) {
            const cplx n = cn(noise_sd);
            const cplx y = H.col(k).dot(x) + n; // dot conjugates its left operand
            const cplx desired = a(k, k) * s[k];
            const cplx leak = y - desired - n;
            sig[k] += std::norm(desired);
            intf[k] += std::norm(leak);
            noise[k] += std::norm(n);
            residual[k] += std::norm(y - desired);
        }
    }
    LinkLevelReport rep;
    rep.signal_power = sig / n_symbols;
    rep.interference_power = intf / n_symbols;
    rep.noise_power = noise / n_symbols;
    rep.sinr.source = SinrSource::LinkLevel;
    rep.sinr.gamma = sig.cwiseQuotient(residual);
    return rep;
}

} // namespace vrmimo
