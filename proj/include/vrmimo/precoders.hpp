#pragma once

#include <cstdint>
#include <string_view>

#include "vrmimo/model.hpp"

namespace vrmimo {

enum class PrecoderKind { CB, ZF };

std::string_view to_string(PrecoderKind k);

struct PrecodingMatrix {
    MatrixXcd G;
    double beta = 0.0;
    PrecoderKind kind = PrecoderKind::CB;
};

enum class SinrSource { MonteCarlo, DeterministicEquivalent, ClosedForm, LinkLevel };

std::string_view to_string(SinrSource s);

struct SinrVector {
    VectorXd gamma; // linear, one per user
    SinrSource source = SinrSource::MonteCarlo;
};

// Smallest over largest singular value of H; 0 for an all-zero matrix.
double column_rank_ratio(const MatrixXcd& H);

// Ratio above 1e-10.
bool has_full_column_rank(const MatrixXcd& H);

// G = beta * H with beta = sqrt(P / trace(P H^* H)). Throws DegenerateChannel when the
// weighted trace vanishes.
PrecodingMatrix cb_precoder(const MatrixXcd& H, const PowerAllocation& power, double total_power);

// G = beta * H (H^* H)^{-1} with beta = sqrt(P / trace(P (H^* H)^{-1})). Throws
// SingularChannel when H lacks full column rank.
PrecodingMatrix zf_precoder(const MatrixXcd& H, const PowerAllocation& power, double total_power);

// gamma_k = p_k |h_k^* g_k|^2 / (sum_{j != k} p_j |h_k^* g_j|^2 + sigma^2)
SinrVector sinr_general(const MatrixXcd& H, const PrecodingMatrix& G, const PowerAllocation& power,
                        double noise_power);

// Conjugate beamforming SINR written directly in terms of H and rho = P / sigma^2.
SinrVector sinr_cb_closed(const MatrixXcd& H, const PowerAllocation& power, double rho);

// gamma_k = p_k rho / trace(P (H^* H)^{-1}).
SinrVector sinr_zf_closed(const MatrixXcd& H, const PowerAllocation& power, double rho);

struct LinkLevelReport {
    SinrVector sinr;
    VectorXd signal_power;
    VectorXd interference_power;
    VectorXd noise_power;
};

// Transmits n_symbols i.i.d. CN(0, 1) symbols per user through y_k = h_k^* x + n_k and measures
// the per-user SINR from sample powers. n_symbols must be at least 1000.
LinkLevelReport link_level_validate(const MatrixXcd& H, const PrecodingMatrix& G, const PowerAllocation& power,
                                    double noise_power, int n_symbols, std::uint64_t seed);

} // namespace vrmimo
