#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vrmimo/model.hpp"
#include "vrmimo/precoders.hpp"

namespace vrmimo {

// Traces of theta_i and of every product theta_i theta_j.
struct TraceMoments {
    VectorXd trace;
    Eigen::MatrixXd cross;

    int users() const { return static_cast<int>(trace.size()); }
};

TraceMoments trace_moments(std::span<const NonStationaryCovariance> thetas);

struct DetEquivReport {
    VectorXd gamma_bar;
    // ZF only: t_i = tr(theta_i) - sum_{j != i} tr(theta_i theta_j) / tr(theta_j).
    VectorXd t;
    // ZF only: t_i > 0. Empty for CB.
    std::vector<bool> positive;
    // False when any t_i <= 0. gamma_bar is then the raw (possibly negative) evaluation.
    bool valid = true;
};

// Deterministic equivalent of the CB SINR:
//   p_k rho tr(theta_k)^2 / (rho sum_{j != k} p_j tr(theta_k theta_j) + sum_j p_j tr(theta_j)).
DetEquivReport cb_det_equiv(std::span<const NonStationaryCovariance> thetas, const PowerAllocation& power, double rho);
DetEquivReport cb_det_equiv(const TraceMoments& moments, const PowerAllocation& power, double rho);

// Closed-form approximate deterministic equivalent of the ZF SINR, p_k rho / sum_i p_i / t_i.
DetEquivReport zf_det_equiv_approx(std::span<const NonStationaryCovariance> thetas, const PowerAllocation& power,
                                   double rho);
DetEquivReport zf_det_equiv_approx(const TraceMoments& moments, const PowerAllocation& power, double rho);

// Quadratic form h_i^* Hb (Hb^* Hb)^{-1} Hb^* h_i (Hb = H without column i) against its
// diagonal approximation with V = diag(Hb^* Hb).
struct DiagApproxEntry {
    double exact = 0.0;
    double approx = 0.0;
    double epsilon = 0.0;
};

struct DiagApproxReport {
    int M = 0;
    int K = 0;
    std::vector<DiagApproxEntry> users;

    double mean_epsilon() const;
};

// Throws SingularChannel when H without column i is rank deficient.
DiagApproxEntry diagonal_approx_error(const MatrixXcd& H, int i);
DiagApproxReport diagonal_approx_report(const MatrixXcd& H);

struct EpsilonStudy {
    int K = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    std::vector<int> M_grid;
    std::vector<double> mean_epsilon;
    std::vector<double> stderr_epsilon;
    double slope = 0.0; // least-squares slope of log(mean eps) against log(M)
};

// i.i.d. channels (theta = I). Requires at least two grid points, every M >= 4K and
// max(M) / min(M) >= 8; violations raise InvalidParam.
EpsilonStudy epsilon_scaling_study(int K, std::span<const int> M_grid, int trials, std::uint64_t seed,
                                   int threads = 0);

struct NonnegativityCertificate {
    bool holds = true;               // every t_i >= 0
    VectorXd margin;                 // t_i
    VectorXd lambda_max;             // largest eigenvalue of theta_i
    std::vector<bool> sufficient;    // tr(theta_i) >= (K - 1) lambda_max(theta_i)
    bool sufficient_holds = true;
};

NonnegativityCertificate nonnegativity_certificate(std::span<const NonStationaryCovariance> thetas);

double loglog_slope(std::span<const double> x, std::span<const double> y);

} // namespace vrmimo
