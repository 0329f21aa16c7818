#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vrmimo/errors.hpp"

namespace vrmimo {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Channel normalization for a visibility region.
//   TraceM: trace(theta) = M, the channel has the same norm as the stationary one.
//   TraceD: trace(theta) = |VR|, energy proportional to the region size.
enum class Normalization { TraceM, TraceD };

std::string_view to_string(Normalization n);
Normalization parse_normalization(std::string_view text);

struct PowerAllocation {
    VectorXd p;

    // p_k = total_power / K for every user.
    static PowerAllocation equal(double total_power, int users);
    static PowerAllocation custom(VectorXd p);

    int users() const { return static_cast<int>(p.size()); }
    double total() const { return p.sum(); }
};

struct SystemConfig {
    int M = 0;
    int K = 0;
    double total_power = 1.0;
    double noise_power = 1.0;
    PowerAllocation power;
    int trials = 1;
    std::uint64_t master_seed = 0;

    double rho() const { return total_power / noise_power; }

    // Equal power allocation; throws InvalidParam when M >= K >= 1, P > 0, sigma^2 > 0 or
    // trials >= 1 is violated.
    static SystemConfig make(int M, int K, double total_power, double noise_power, int trials,
                             std::uint64_t master_seed);
    // Total power 1 and noise power chosen so that rho matches snr_db.
    static SystemConfig from_snr_db(int M, int K, double snr_db, int trials, std::uint64_t master_seed);
};

enum class CorrelationKind { Identity, Exponential, Custom };

struct CorrelationProfile {
    MatrixXcd R;
    CorrelationKind kind = CorrelationKind::Custom;
    double r = 0.0; // exponent of the exponential model, zero otherwise

    int size() const { return static_cast<int>(R.rows()); }
};

CorrelationProfile identity_correlation(int M);

// R[m, n] = r^{|m - n|}, 0 <= r < 1.
CorrelationProfile exponential_correlation(int M, double r);

// Accepts any Hermitian PSD matrix (Hermitian to 1e-12, eigenvalues >= -1e-10 * lambda_max).
CorrelationProfile custom_correlation(MatrixXcd R);

// Set of antennas (0-based) that carry a user's energy.
struct VisibilityRegion {
    std::vector<int> active;
    Normalization normalization = Normalization::TraceM;

    VisibilityRegion() = default;
    VisibilityRegion(std::vector<int> indices, Normalization n);

    int size() const { return static_cast<int>(active.size()); }
    static VisibilityRegion full(int M, Normalization n);
    // Contiguous block [first, first + length) wrapping around M.
    static VisibilityRegion block(int first, int length, int M, Normalization n);
};

// Diagonal of D_k.
struct MaskMatrix {
    VectorXd d;

    int size() const { return static_cast<int>(d.size()); }
    int active_count() const;
};

struct NonStationaryCovariance {
    MatrixXcd theta;
    MaskMatrix mask;
    std::shared_ptr<const CorrelationProfile> corr;

    int size() const { return static_cast<int>(theta.rows()); }
};

MaskMatrix build_mask(const VisibilityRegion& vr, int M);

// theta = D^{1/2} R D^{1/2}; rows and columns outside the mask support are exactly zero.
NonStationaryCovariance build_theta(std::shared_ptr<const CorrelationProfile> corr, const MaskMatrix& mask);
NonStationaryCovariance build_theta(const CorrelationProfile& corr, const MaskMatrix& mask);

// Principal square root of a Hermitian PSD matrix. Eigenvalues below 1e-12 * lambda_max are
// clamped to zero; anything below -1e-8 * lambda_max raises NotPSD. Rows/columns of A that are
// exactly zero stay exactly zero in the result, and diagonal inputs are rooted entrywise.
MatrixXcd hermitian_sqrt(const MatrixXcd& A);

double spectral_norm(const MatrixXcd& A);

struct AssumptionReport {
    double max_spectral_norm = 0.0; // max_k ||theta_k||
    double max_scaled_power = 0.0;  // max_k p_k * K
    int min_vr_size = 0;
};

AssumptionReport assumption_report(std::span<const NonStationaryCovariance> thetas,
                                   const PowerAllocation& power);

// Convenience: build one theta per region over a shared correlation profile.
std::vector<NonStationaryCovariance> build_thetas(std::span<const VisibilityRegion> regions,
                                                  std::shared_ptr<const CorrelationProfile> corr);

} // namespace vrmimo
