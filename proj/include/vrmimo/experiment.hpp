#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vrmimo/asymptotics.hpp"
#include "vrmimo/model.hpp"
#include "vrmimo/precoders.hpp"
#include "vrmimo/scenarios.hpp"

namespace vrmimo {

struct EstimatorSet {
    bool monte_carlo = true;
    bool det_equiv = true;
    bool closed_form = true;
    bool link_level = false;
};

// Everything a run needs. Defaults reproduce the M = 60, K = 30, 10 dB sweep.
struct ExperimentConfig {
    int M = 60;
    int K = 30;
    double snr_db = 10.0;
    double total_power = 1.0;
    int trials = 2000;
    std::uint64_t seed = 1;
    std::vector<Normalization> normalizations{Normalization::TraceM, Normalization::TraceD};
    std::vector<Placement> scenarios{Placement::WorstOverlap, Placement::BestTiling};
    std::vector<int> d_grid; // empty means 2, 4, ..., M
    EstimatorSet estimators;
    CorrelationKind correlation = CorrelationKind::Identity;
    double correlation_r = 0.0;
    int link_symbols = 10000;
    int link_trials = 20;
    std::string out = "sweep.csv";
    int epsilon_k = 8;
    std::vector<int> epsilon_m_grid{64, 128, 256, 512, 1024};
    int epsilon_trials = 200;
    int threads = 0;
    // Cell evaluated by the `single` subcommand.
    Placement scenario = Placement::WorstOverlap;
    int d = 30;

    double rho() const;
    double noise_power() const;
    PowerAllocation power() const;
    std::vector<int> effective_d_grid() const;
    std::shared_ptr<const CorrelationProfile> correlation_profile() const;

    // Throws ConfigError naming the offending key.
    void validate() const;
};

// Applies one key/value pair using the config file syntax. Unknown keys raise ConfigError.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

// Flat "key = value" lines; '#' starts a comment. Errors carry origin:line.
ExperimentConfig parse_config(std::string_view text, std::string_view origin = "<config>");
ExperimentConfig load_config(const std::string& path);

std::vector<std::string_view> config_keys();

struct ResultRow {
    std::string scenario;
    std::string precoder;
    std::string normalization;
    int M = 0;
    int K = 0;
    int D = 0;
    double rho_db = 0.0;
    std::string estimator;
    std::optional<double> sinr_db;
    std::optional<double> sinr_db_stderr;
    int trials = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> flags;

    // Linear mean behind sinr_db; not serialized.
    double sinr_linear = 0.0;
};

inline constexpr std::string_view kCsvHeader =
    "scenario,precoder,normalization,M,K,D,rho_db,estimator,sinr_db,sinr_db_stderr,trials,seed,flags";

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows);

// One (placement, normalization, D) cell: rows for CB then ZF, one per enabled estimator.
std::vector<ResultRow> evaluate_cell(const ExperimentConfig& cfg, Placement placement, Normalization n, int D);

// Stationary baselines followed by every D x scenario x precoder cell, per normalization.
std::vector<ResultRow> sweep_d(const ExperimentConfig& cfg);

// sweep_d written to cfg.out. Throws IOError when the file cannot be written.
std::vector<ResultRow> run_sweep_d(const ExperimentConfig& cfg);

std::vector<ResultRow> run_single(const ExperimentConfig& cfg);

EpsilonStudy run_epsilon_study(const ExperimentConfig& cfg);
void write_epsilon_csv(std::ostream& os, const EpsilonStudy& study);

struct SuiteResult {
    std::string name;
    int cases = 0;
    int failures = 0;
    double max_error = 0.0;
    double tolerance = 0.0;

    bool passed() const { return failures == 0; }
};

struct ValidationReport {
    std::vector<SuiteResult> suites;

    bool passed() const;
};

struct ValidateOptions {
    std::uint64_t seed = 1;
    int instances = 1000;
    // Test hook: multiplies every beta in the power-constraint suite by (1 + beta_perturbation).
    double beta_perturbation = 0.0;
};

ValidationReport run_validate(const ValidateOptions& options);
void print_report(std::ostream& os, const ValidationReport& report);

double to_db(double linear);

} // namespace vrmimo
