#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "vrmimo/model.hpp"
#include "vrmimo/precoders.hpp"

namespace vrmimo {

enum class Placement { Stationary, WorstOverlap, BestTiling, RandomBlocks };

std::string_view to_string(Placement p); // "stationary", "worst", "best", "random"
Placement parse_placement(std::string_view text);

struct ScenarioSpec {
    Placement placement = Placement::Stationary;
    Normalization normalization = Normalization::TraceM;
    int D = 0;
    int M = 0;
    int K = 0;
    std::uint64_t seed = 0; // only used by RandomBlocks

    // Throws InvalidScenario unless 1 <= D <= M, K >= 1 and Stationary has D = M.
    void validate() const;
};

// Every user sees antennas {0, ..., D-1}.
std::vector<VisibilityRegion> place_worst(int M, int K, int D, Normalization n = Normalization::TraceM);

// Cyclic tiling: user k occupies D antennas starting at (k D) mod M, wrapping around the array.
// Requires D | M and either K D <= M (pairwise disjoint) or M | K D (every user fully overlaps
// exactly K D / M - 1 others). Violations raise InvalidScenario.
std::vector<VisibilityRegion> place_best(int M, int K, int D, Normalization n = Normalization::TraceM);

// The same cyclic tiling without the divisibility requirements. Whenever M | K D the array is
// covered exactly K D / M times, so the interference energy matches the clean tiling even
// though overlaps are partial.
std::vector<VisibilityRegion> place_cyclic(int M, int K, int D, Normalization n = Normalization::TraceM);

// Contiguous blocks with uniformly random starts (wrap-around allowed), deterministic per seed.
std::vector<VisibilityRegion> place_random(int M, int K, int D, std::uint64_t seed,
                                           Normalization n = Normalization::TraceM);

// True when place_best accepts (M, K, D).
bool clean_tiling(int M, int K, int D);

struct Placed {
    std::vector<VisibilityRegion> regions;
    bool ragged = false; // BestTiling fell back to place_cyclic
};

// Dispatches on the spec; BestTiling uses place_cyclic when clean_tiling() is false.
Placed place(const ScenarioSpec& spec);

int overlap(const VisibilityRegion& a, const VisibilityRegion& b);

// Per user, the number of other users whose regions intersect its own.
std::vector<int> interferer_counts(const std::vector<VisibilityRegion>& regions);

enum class TableCase { Stationary, Worst, Best };

struct ClosedFormSinr {
    double value = 0.0;    // linear
    bool feasible = true;  // false for nonpositive ZF values (rank-deficient regime)
};

// Best/worst/stationary SINR for R = I and equal power. Stationary ignores normalization and D.
// The best case assumes K D / M - 1 full-overlap interferers, or none when K D <= M.
ClosedFormSinr closed_form_sinr(PrecoderKind precoder, TableCase which, Normalization n, int M, int K, int D,
                                double rho);

} // namespace vrmimo
