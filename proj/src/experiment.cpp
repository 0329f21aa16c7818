#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

#include "vrmimo/channel.hpp"
#include "vrmimo/experiment.hpp"
#include "vrmimo/parallel.hpp"

namespace vrmimo {

double to_db(double linear)
{
    return 10.0 * std::log10(linear);
}

namespace {

struct Sample {
    double mean = 0.0;
    double stderr_ = 0.0;
};

Sample summarize(const std::vector<double>& values)
{
    Sample s;
    const auto n = static_cast<double>(values.size());
    if (values.empty())
        return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double var = 0.0;
        for (double v : values)
            var += (v - s.mean) * (v - s.mean);
        s.stderr_ = std::sqrt(var / (n - 1) / n);
    }
    return s;
}

// Standard error of the linear mean mapped through the dB conversion.
double stderr_db(const Sample& s)
{
    return 10.0 / std::log(10.0) * s.stderr_ / s.mean;
}

std::string fmt(double v, const char* spec)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

TableCase table_case(Placement p)
{
    switch (p) {
    case Placement::Stationary:
        return TableCase::Stationary;
    case Placement::WorstOverlap:
        return TableCase::Worst;
    default:
        return TableCase::Best;
    }
}

struct PrecoderResult {
    bool singular = false;
    std::optional<Sample> monte_carlo;
    std::optional<Sample> link_level;
    std::optional<DetEquivReport> det_equiv;
    std::optional<ClosedFormSinr> closed_form;
};

} // namespace

std::vector<ResultRow> evaluate_cell(const ExperimentConfig& cfg, Placement placement, Normalization n, int D)
{
    cfg.validate();
    ScenarioSpec spec{placement, n, placement == Placement::Stationary ? cfg.M : D, cfg.M, cfg.K,
                      splitmix64(cfg.seed + static_cast<std::uint64_t>(D))};
    const Placed placed = place(spec);
    const auto thetas = build_thetas(placed.regions, cfg.correlation_profile());
    const PowerAllocation power = cfg.power();
    const double rho = cfg.rho();
    const double sigma2 = cfg.noise_power();
    const int T = cfg.trials;

    PrecoderResult cb, zf;
    const ChannelSampler sampler(thetas, cfg.seed);

    if (cfg.estimators.monte_carlo) {
        std::vector<double> cb_vals(T), zf_vals(T);
        // One singular draw voids the whole ZF cell, so later trials skip ZF once it is seen.
        std::atomic<bool> singular{false};
        parallel_for(T, cfg.threads, [&](std::int64_t t) {
            const MatrixXcd H = sampler.draw(t).H;
            cb_vals[t] = sinr_general(H, cb_precoder(H, power, cfg.total_power), power, sigma2).gamma.mean();
            if (singular.load(std::memory_order_relaxed))
                return;
            try {
                zf_vals[t] = sinr_general(H, zf_precoder(H, power, cfg.total_power), power, sigma2).gamma.mean();
            } catch (const SingularChannel&) {
                singular = true;
            }
        });
        cb.monte_carlo = summarize(cb_vals);
        zf.singular = singular;
        if (!zf.singular)
            zf.monte_carlo = summarize(zf_vals);
    } else {
        zf.singular = !has_full_column_rank(sampler.draw(0).H);
    }

    if (cfg.estimators.link_level) {
        const int L = std::min(cfg.link_trials, T);
        std::vector<double> cb_vals(L), zf_vals(L);
        parallel_for(L, cfg.threads, [&](std::int64_t t) {
            const MatrixXcd H = sampler.draw(t).H;
            const std::uint64_t sym_seed = splitmix64(cfg.seed ^ static_cast<std::uint64_t>(t));
            cb_vals[t] = link_level_validate(H, cb_precoder(H, power, cfg.total_power), power, sigma2,
                                             cfg.link_symbols, sym_seed)
                             .sinr.gamma.mean();
            if (!zf.singular)
                zf_vals[t] = link_level_validate(H, zf_precoder(H, power, cfg.total_power), power, sigma2,
                                                 cfg.link_symbols, sym_seed)
                                 .sinr.gamma.mean();
        });
        cb.link_level = summarize(cb_vals);
        if (!zf.singular)
            zf.link_level = summarize(zf_vals);
    }

    if (cfg.estimators.det_equiv) {
        const TraceMoments moments = trace_moments(thetas);
        cb.det_equiv = cb_det_equiv(moments, power, rho);
        zf.det_equiv = zf_det_equiv_approx(moments, power, rho);
    }

    // Table values assume R = I; random placements have no closed form.
    const bool has_table = cfg.correlation == CorrelationKind::Identity && placement != Placement::RandomBlocks;
    if (cfg.estimators.closed_form && has_table) {
        cb.closed_form = closed_form_sinr(PrecoderKind::CB, table_case(placement), n, cfg.M, cfg.K, spec.D, rho);
        zf.closed_form = closed_form_sinr(PrecoderKind::ZF, table_case(placement), n, cfg.M, cfg.K, spec.D, rho);
    }

    std::vector<ResultRow> rows;
    for (PrecoderKind kind : {PrecoderKind::CB, PrecoderKind::ZF}) {
        const PrecoderResult& res = kind == PrecoderKind::CB ? cb : zf;
        auto base = [&](SinrSource source) {
            ResultRow r;
            r.scenario = std::string(to_string(placement));
            r.precoder = std::string(to_string(kind));
            r.normalization = std::string(to_string(n));
            r.M = cfg.M;
            r.K = cfg.K;
            r.D = spec.D;
            r.rho_db = cfg.snr_db;
            r.estimator = std::string(to_string(source));
            r.seed = cfg.seed;
            if (placed.ragged)
                r.flags.emplace_back("ragged");
            if (res.singular)
                r.flags.emplace_back("singular");
            return r;
        };
        auto sampled = [&](SinrSource source, const std::optional<Sample>& s, int trials) {
            ResultRow r = base(source);
            r.trials = trials;
            if (s && !res.singular) {
                r.sinr_linear = s->mean;
                r.sinr_db = to_db(s->mean);
                r.sinr_db_stderr = stderr_db(*s);
            }
            rows.push_back(std::move(r));
        };
        auto analytic = [&](SinrSource source, double value, bool feasible) {
            ResultRow r = base(source);
            r.sinr_linear = value;
            if (!feasible)
                r.flags.emplace_back("infeasible");
            if (feasible && !res.singular)
                r.sinr_db = to_db(value);
            rows.push_back(std::move(r));
        };

        if (cfg.estimators.monte_carlo)
            sampled(SinrSource::MonteCarlo, res.monte_carlo, T);
        if (res.det_equiv) {
            const double mean = res.det_equiv->gamma_bar.mean();
            analytic(SinrSource::DeterministicEquivalent, mean, res.det_equiv->valid && mean > 0.0);
        }
        if (res.closed_form)
            analytic(SinrSource::ClosedForm, res.closed_form->value, res.closed_form->feasible);
        if (cfg.estimators.link_level)
            sampled(SinrSource::LinkLevel, res.link_level, std::min(cfg.link_trials, T));
    }
    return rows;
}

std::vector<ResultRow> sweep_d(const ExperimentConfig& cfg)
{
    cfg.validate();
    const auto grid = cfg.effective_d_grid();
    std::vector<ResultRow> rows;
    for (Normalization n : cfg.normalizations) {
        auto stationary = evaluate_cell(cfg, Placement::Stationary, n, cfg.M);
        rows.insert(rows.end(), stationary.begin(), stationary.end());
        for (Placement p : cfg.scenarios) {
            std::vector<std::vector<ResultRow>> cells;
            cells.reserve(grid.size());
            for (int D : grid)
                cells.push_back(evaluate_cell(cfg, p, n, D));
            for (std::string_view prec : {"CB", "ZF"})
                for (const auto& cell : cells)
                    for (const auto& r : cell)
                        if (r.precoder == prec)
                            rows.push_back(r);
        }
    }
    return rows;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows)
{
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        std::string flags;
        for (const auto& f : r.flags)
            flags += (flags.empty() ? "" : ";") + f;
        os << r.scenario << ',' << r.precoder << ',' << r.normalization << ',' << r.M << ',' << r.K << ',' << r.D
           << ',' << fmt(r.rho_db, "%g") << ',' << r.estimator << ','
           << (r.sinr_db ? fmt(*r.sinr_db, "%.6f") : "") << ','
           << (r.sinr_db_stderr ? fmt(*r.sinr_db_stderr, "%.6f") : "") << ',' << r.trials << ',' << r.seed << ','
           << flags << '\n';
    }
}

void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IOError("cannot open '" + path + "' for writing");
    write_csv(out, rows);
    out.flush();
    if (!out)
        throw IOError("failed while writing '" + path + "'");
}

std::vector<ResultRow> run_sweep_d(const ExperimentConfig& cfg)
{
    cfg.validate();
    {
        std::ofstream probe(cfg.out, std::ios::binary);
        if (!probe)
            throw IOError("cannot open '" + cfg.out + "' for writing");
    }
    auto rows = sweep_d(cfg);
    write_csv_file(cfg.out, rows);
    return rows;
}

std::vector<ResultRow> run_single(const ExperimentConfig& cfg)
{
    cfg.validate();
    if (cfg.d < 1 || cfg.d > cfg.M)
        throw ConfigError("key 'd': must lie in [1, M]");
    std::vector<ResultRow> rows;
    for (Normalization n : cfg.normalizations) {
        auto cell = evaluate_cell(cfg, cfg.scenario, n, cfg.scenario == Placement::Stationary ? cfg.M : cfg.d);
        rows.insert(rows.end(), cell.begin(), cell.end());
    }
    return rows;
}

EpsilonStudy run_epsilon_study(const ExperimentConfig& cfg)
{
    if (cfg.epsilon_trials < 1)
        throw ConfigError("key 'epsilon_trials': must be positive");
    if (cfg.epsilon_k < 2)
        throw ConfigError("key 'epsilon_k': must be at least 2");
    try {
        return epsilon_scaling_study(cfg.epsilon_k, cfg.epsilon_m_grid, cfg.epsilon_trials, cfg.seed, cfg.threads);
    } catch (const InvalidParam& e) {
        throw ConfigError(std::string("key 'epsilon_m_grid': ") + e.what());
    }
}

void write_epsilon_csv(std::ostream& os, const EpsilonStudy& study)
{
    os << "K,M,trials,seed,mean_epsilon,epsilon_stderr\n";
    for (std::size_t i = 0; i < study.M_grid.size(); ++i)
        os << study.K << ',' << study.M_grid[i] << ',' << study.trials << ',' << study.seed << ','
           << fmt(study.mean_epsilon[i], "%.8g") << ',' << fmt(study.stderr_epsilon[i], "%.8g") << '\n';
    os << study.K << ",slope," << study.trials << ',' << study.seed << ',' << fmt(study.slope, "%.6f") << ",\n";
}

} // namespace vrmimo
