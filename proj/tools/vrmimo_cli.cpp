// vrmimo: sweeps, single cells, the epsilon scaling study and the validation suite for
// visibility-region massive MIMO precoding.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vrmimo/experiment.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::string> out;
    std::optional<std::string> normalization;
    std::optional<double> snr_db;
    std::optional<int> threads;
    std::vector<std::string> settings;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config_path, "Key/value config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--trials", o.trials, "Monte Carlo trials per cell");
    cmd->add_option("--out", o.out, "Output path");
    cmd->add_option("--normalization", o.normalization, "trace-m, trace-d or both");
    cmd->add_option("--snr-db", o.snr_db, "SNR rho in dB");
    cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)");
    cmd->add_option("--set", o.settings, "Override any config key: --set key=value (repeatable)");
}

vrmimo::ExperimentConfig resolve(const CommonOptions& o)
{
    vrmimo::ExperimentConfig cfg = o.config_path.empty() ? vrmimo::ExperimentConfig{} : vrmimo::load_config(o.config_path);
    for (const auto& s : o.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw vrmimo::ConfigError("--set expects key=value, got '" + s + "'");
        vrmimo::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (o.seed)
        cfg.seed = *o.seed;
    if (o.trials)
        vrmimo::apply_setting(cfg, "trials", std::to_string(*o.trials));
    if (o.out)
        cfg.out = *o.out;
    if (o.normalization)
        vrmimo::apply_setting(cfg, "normalization", *o.normalization);
    if (o.snr_db)
        cfg.snr_db = *o.snr_db;
    if (o.threads)
        cfg.threads = *o.threads;
    return cfg;
}

void emit_rows(const std::vector<vrmimo::ResultRow>& rows, const std::optional<std::string>& out)
{
    if (out)
        vrmimo::write_csv_file(*out, rows);
    else
        vrmimo::write_csv(std::cout, rows);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Visibility-region massive MIMO precoding simulator"};
    app.require_subcommand(1);

    CommonOptions sweep_opts, single_opts, eps_opts;

    auto* sweep = app.add_subcommand("sweep-d", "SINR versus VR size D for worst/best placements, CB and ZF");
    add_common(sweep, sweep_opts);

    auto* single = app.add_subcommand("single", "Evaluate one scenario cell and print its rows");
    add_common(single, single_opts);
    std::optional<std::string> scenario;
    std::optional<int> single_d;
    single->add_option("--scenario", scenario, "stationary, worst, best or random");
    single->add_option("--d", single_d, "Active antennas per user");

    auto* eps = app.add_subcommand("epsilon-study", "Diagonal-approximation error versus M (log-log slope)");
    add_common(eps, eps_opts);

    auto* validate = app.add_subcommand("validate", "Run the property suites; nonzero exit on failure");
    vrmimo::ValidateOptions vopts;
    validate->add_option("--seed", vopts.seed, "Seed for the random instances");
    validate->add_option("--instances", vopts.instances, "Random instances per suite")->check(CLI::PositiveNumber);
    validate->add_option("--inject-beta-error", vopts.beta_perturbation, "Test hook: relative error added to beta")
        ->group("");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) {
            const auto cfg = resolve(sweep_opts);
            const auto rows = vrmimo::run_sweep_d(cfg);
            std::cout << "wrote " << rows.size() << " rows to " << cfg.out << '\n';
        } else if (*single) {
            auto cfg = resolve(single_opts);
            if (scenario)
                vrmimo::apply_setting(cfg, "scenario", *scenario);
            if (single_d)
                cfg.d = *single_d;
            emit_rows(vrmimo::run_single(cfg), single_opts.out);
        } else if (*eps) {
            const auto cfg = resolve(eps_opts);
            const auto study = vrmimo::run_epsilon_study(cfg);
            if (eps_opts.out) {
                std::ofstream out(*eps_opts.out, std::ios::binary);
                if (!out)
                    throw vrmimo::IOError("cannot open '" + *eps_opts.out + "' for writing");
                vrmimo::write_epsilon_csv(out, study);
            } else {
                vrmimo::write_epsilon_csv(std::cout, study);
            }
            std::cerr << "slope of log(mean eps) vs log(M): " << study.slope << '\n';
        } else if (*validate) {
            const auto report = vrmimo::run_validate(vopts);
            vrmimo::print_report(std::cout, report);
            return report.passed() ? 0 : 1;
        }
    } catch (const vrmimo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const vrmimo::IOError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const vrmimo::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
