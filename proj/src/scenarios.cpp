#include "vrmimo/scenarios.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "vrmimo/channel.hpp"

namespace vrmimo {

namespace {

constexpr std::uint64_t kPlacementPurpose = 0x504c4345ULL; // "PLCE"

void check_dims(int M, int K, int D)
{
    if (M < 1 || K < 1)
        throw InvalidScenario("M and K must be positive");
    if (D < 1 || D > M)
        throw InvalidScenario("D must lie in [1, M], got D=" + std::to_string(D));
}

} // namespace

std::string_view to_string(Placement p)
{
    switch (p) {
    case Placement::Stationary:
        return "stationary";
    case Placement::WorstOverlap:
        return "worst";
    case Placement::BestTiling:
        return "best";
    case Placement::RandomBlocks:
        return "random";
    }
    return "unknown";
}

Placement parse_placement(std::string_view text)
{
    if (text == "stationary")
        return Placement::Stationary;
    if (text == "worst")
        return Placement::WorstOverlap;
    if (text == "best")
        return Placement::BestTiling;
    if (text == "random")
        return Placement::RandomBlocks;
    throw InvalidParam("unknown scenario '" + std::string(text) + "' (expected stationary, worst, best or random)");
}

void ScenarioSpec::validate() const
{
    check_dims(M, K, D);
    if (placement == Placement::Stationary && D != M)
        throw InvalidScenario("stationary scenario requires D = M");
}

std::vector<VisibilityRegion> place_worst(int M, int K, int D, Normalization n)
{
    check_dims(M, K, D);
    return std::vector<VisibilityRegion>(K, VisibilityRegion::block(0, D, M, n));
}

bool clean_tiling(int M, int K, int D)
{
    if (M < 1 || K < 1 || D < 1 || D > M || M % D != 0)
        return false;
    const long long covered = static_cast<long long>(K) * D;
    return covered <= M || covered % M == 0;
}

std::vector<VisibilityRegion> place_cyclic(int M, int K, int D, Normalization n)
{
    check_dims(M, K, D);
    std::vector<VisibilityRegion> out;
    out.reserve(K);
    for (int k = 0; k < K; ++k)
        out.push_back(VisibilityRegion::block(static_cast<int>((static_cast<long long>(k) * D) % M), D, M, n));
    return out;
}

std::vector<VisibilityRegion> place_best(int M, int K, int D, Normalization n)
{
    check_dims(M, K, D);
    if (!clean_tiling(M, K, D))
        throw InvalidScenario("best-case tiling needs D | M and (K D <= M or M | K D); got M=" + std::to_string(M) +
                              " K=" + std::to_string(K) + " D=" + std::to_string(D));
    return place_cyclic(M, K, D, n);
}

std::vector<VisibilityRegion> place_random(int M, int K, int D, std::uint64_t seed, Normalization n)
{
    check_dims(M, K, D);
    auto eng = RngStream::for_purpose(seed, kPlacementPurpose, 0).engine();
    std::uniform_int_distribution<int> start(0, M - 1);
    std::vector<VisibilityRegion> out;
    out.reserve(K);
    for (int k = 0; k < K; ++k)
        out.push_back(VisibilityRegion::block(start(eng), D, M, n));
    return out;
}

Placed place(const ScenarioSpec& spec)
{
    spec.validate();
    switch (spec.placement) {
    case Placement::Stationary:
        return {std::vector<VisibilityRegion>(spec.K, VisibilityRegion::full(spec.M, spec.normalization)), false};
    case Placement::WorstOverlap:
        return {place_worst(spec.M, spec.K, spec.D, spec.normalization), false};
    case Placement::BestTiling:
        if (clean_tiling(spec.M, spec.K, spec.D))
            return {place_best(spec.M, spec.K, spec.D, spec.normalization), false};
        return {place_cyclic(spec.M, spec.K, spec.D, spec.normalization), true};
    case Placement::RandomBlocks:
        return {place_random(spec.M, spec.K, spec.D, spec.seed, spec.normalization), false};
    }
    throw InvalidScenario("unknown placement");
}

int overlap(const VisibilityRegion& a, const VisibilityRegion& b)
{
    std::vector<int> common;
    std::set_intersection(a.active.begin(), a.active.end(), b.active.begin(), b.active.end(),
                          std::back_inserter(common));
    return static_cast<int>(common.size());
}

std::vector<int> interferer_counts(const std::vector<VisibilityRegion>& regions)
{
    std::vector<int> counts(regions.size(), 0);
    for (std::size_t i = 0; i < regions.size(); ++i)
        for (std::size_t j = 0; j < regions.size(); ++j)
            if (i != j && overlap(regions[i], regions[j]) > 0)
                ++counts[i];
    return counts;
}

ClosedFormSinr closed_form_sinr(PrecoderKind precoder, TableCase which, Normalization n, int M, int K, int D,
                                double rho)
{
    if (M < 1 || K < 1 || D < 1 || D > M)
        throw InvalidParam("closed form needs M, K >= 1 and 1 <= D <= M");
    if (!(rho > 0.0))
        throw InvalidParam("closed form needs rho > 0");
    const double m = M, k = K, d = D;
    const bool trace_m = n == Normalization::TraceM;
    // Best case with K D <= M: disjoint regions, no interferers at all.
    const bool disjoint = which == TableCase::Best && K * D <= M;

    double v = 0.0;
    if (precoder == PrecoderKind::CB) {
        switch (which) {
        case TableCase::Stationary:
            v = rho * m / (rho * (k - 1) + k);
            break;
        case TableCase::Worst:
            v = trace_m ? rho * m / (rho * (m / d) * (k - 1) + k) : rho * d / (rho * (k - 1) + k);
            break;
        case TableCase::Best:
            if (disjoint)
                v = trace_m ? rho * m / k : rho * d / k;
            else
                v = trace_m ? rho * m / (rho * (k - m / d) + k) : rho * d / (rho * (k * d / m - 1) + k);
            break;
        }
    } else {
        switch (which) {
        case TableCase::Stationary:
            v = rho * (m - k + 1) / k;
            break;
        case TableCase::Worst:
            v = trace_m ? rho * (m - (m / d) * (k - 1)) / k : rho * (d - k + 1) / k;
            break;
        case TableCase::Best:
            if (disjoint)
                v = trace_m ? rho * m / k : rho * d / k;
            else
                v = trace_m ? rho * (m - k + m / d) / k : rho * (d - k * d / m + 1) / k;
            break;
        }
    }
    return {v, v > 0.0};
}

} // namespace vrmimo
