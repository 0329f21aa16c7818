#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vrmimo/experiment.hpp"

namespace vrmimo {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    while (true) {
        const auto pos = s.find(sep);
        parts.push_back(trim(s.substr(0, pos)));
        if (pos == std::string_view::npos)
            break;
        s.remove_prefix(pos + 1);
    }
    return parts;
}

template <class T>
T parse_number(std::string_view key, std::string_view value)
{
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || value.empty())
        throw ConfigError("key '" + std::string(key) + "': cannot parse '" + std::string(value) + "'");
    return out;
}

std::vector<int> parse_int_list(std::string_view key, std::string_view value)
{
    std::vector<int> out;
    const auto range = split(value, ':');
    if (range.size() == 3) {
        const int start = parse_number<int>(key, range[0]);
        const int step = parse_number<int>(key, range[1]);
        const int stop = parse_number<int>(key, range[2]);
        if (step <= 0 || stop < start)
            throw ConfigError("key '" + std::string(key) + "': range needs start <= stop and step > 0");
        for (int v = start; v <= stop; v += step)
            out.push_back(v);
        return out;
    }
    if (range.size() != 1)
        throw ConfigError("key '" + std::string(key) + "': expected start:step:stop or a comma list");
    for (auto part : split(value, ','))
        out.push_back(parse_number<int>(key, part));
    return out;
}

template <class Fn>
auto rethrow_as_config(std::string_view key, Fn&& fn)
{
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("key '" + std::string(key) + "': " + e.what());
    }
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters()
{
    static const std::map<std::string, Setter, std::less<>> table = {
        {"M", [](auto& c, auto k, auto v) { c.M = parse_number<int>(k, v); }},
        {"K", [](auto& c, auto k, auto v) { c.K = parse_number<int>(k, v); }},
        {"snr_db", [](auto& c, auto k, auto v) { c.snr_db = parse_number<double>(k, v); }},
        {"total_power", [](auto& c, auto k, auto v) { c.total_power = parse_number<double>(k, v); }},
        {"trials", [](auto& c, auto k, auto v) { c.trials = parse_number<int>(k, v); }},
        {"seed", [](auto& c, auto k, auto v) { c.seed = parse_number<std::uint64_t>(k, v); }},
        {"normalization",
         [](auto& c, auto k, auto v) {
             if (v == "both")
                 c.normalizations = {Normalization::TraceM, Normalization::TraceD};
             else
                 c.normalizations = {rethrow_as_config(k, [&] { return parse_normalization(v); })};
         }},
        {"scenarios",
         [](auto& c, auto k, auto v) {
             c.scenarios.clear();
             for (auto part : split(v, ','))
                 c.scenarios.push_back(rethrow_as_config(k, [&] { return parse_placement(part); }));
         }},
        {"d_grid", [](auto& c, auto k, auto v) { c.d_grid = parse_int_list(k, v); }},
        {"estimators",
         [](auto& c, auto k, auto v) {
             EstimatorSet set{false, false, false, false};
             for (auto part : split(v, ',')) {
                 if (part == "monte-carlo")
                     set.monte_carlo = true;
                 else if (part == "det-equiv")
                     set.det_equiv = true;
                 else if (part == "closed-form")
                     set.closed_form = true;
                 else if (part == "link-level")
                     set.link_level = true;
                 else
                     throw ConfigError("key '" + std::string(k) + "': unknown estimator '" + std::string(part) + "'");
             }
             c.estimators = set;
         }},
        {"correlation",
         [](auto& c, auto k, auto v) {
             if (v == "identity")
                 c.correlation = CorrelationKind::Identity;
             else if (v == "exponential")
                 c.correlation = CorrelationKind::Exponential;
             else
                 throw ConfigError("key '" + std::string(k) + "': expected identity or exponential");
         }},
        {"correlation_r", [](auto& c, auto k, auto v) { c.correlation_r = parse_number<double>(k, v); }},
        {"link_symbols", [](auto& c, auto k, auto v) { c.link_symbols = parse_number<int>(k, v); }},
        {"link_trials", [](auto& c, auto k, auto v) { c.link_trials = parse_number<int>(k, v); }},
        {"out", [](auto& c, auto, auto v) { c.out = std::string(v); }},
        {"epsilon_k", [](auto& c, auto k, auto v) { c.epsilon_k = parse_number<int>(k, v); }},
        {"epsilon_m_grid", [](auto& c, auto k, auto v) { c.epsilon_m_grid = parse_int_list(k, v); }},
        {"epsilon_trials", [](auto& c, auto k, auto v) { c.epsilon_trials = parse_number<int>(k, v); }},
        {"threads", [](auto& c, auto k, auto v) { c.threads = parse_number<int>(k, v); }},
        {"scenario",
         [](auto& c, auto k, auto v) { c.scenario = rethrow_as_config(k, [&] { return parse_placement(v); }); }},
        {"d", [](auto& c, auto k, auto v) { c.d = parse_number<int>(k, v); }},
    };
    return table;
}

} // namespace

std::vector<std::string_view> config_keys()
{
    std::vector<std::string_view> keys;
    for (const auto& [k, _] : setters())
        keys.push_back(k);
    return keys;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value)
{
    const auto it = setters().find(key);
    if (it == setters().end())
        throw ConfigError("unknown key '" + std::string(key) + "'");
    it->second(cfg, key, trim(value));
}

ExperimentConfig parse_config(std::string_view text, std::string_view origin)
{
    ExperimentConfig cfg;
    std::map<std::string, int, std::less<>> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::string where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(where + "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (auto prev = seen.find(key); prev != seen.end())
            throw ConfigError(where + "duplicate key '" + std::string(key) + "' (first set on line " +
                              std::to_string(prev->second) + ")");
        seen.emplace(std::string(key), line_no);
        try {
            apply_setting(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IOError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

double ExperimentConfig::rho() const
{
    return total_power / noise_power();
}

double ExperimentConfig::noise_power() const
{
    return total_power / std::pow(10.0, snr_db / 10.0);
}

PowerAllocation ExperimentConfig::power() const
{
    return PowerAllocation::equal(total_power, K);
}

std::vector<int> ExperimentConfig::effective_d_grid() const
{
    if (!d_grid.empty())
        return d_grid;
    std::vector<int> grid;
    for (int v = 2; v <= M; v += 2)
        grid.push_back(v);
    if (grid.empty())
        grid.push_back(M);
    return grid;
}

std::shared_ptr<const CorrelationProfile> ExperimentConfig::correlation_profile() const
{
    if (correlation == CorrelationKind::Exponential)
        return std::make_shared<const CorrelationProfile>(exponential_correlation(M, correlation_r));
    return std::make_shared<const CorrelationProfile>(identity_correlation(M));
}

void ExperimentConfig::validate() const
{
    auto fail = [](const std::string& key, const std::string& what) {
        throw ConfigError("key '" + key + "': " + what);
    };
    if (K < 1)
        fail("K", "must be at least 1");
    if (M < K)
        fail("M", "must be at least K");
    if (!std::isfinite(snr_db))
        fail("snr_db", "must be finite");
    if (!(total_power > 0.0) || !std::isfinite(total_power))
        fail("total_power", "must be positive");
    if (trials < 1)
        fail("trials", "must be positive");
    if (normalizations.empty())
        fail("normalization", "must name at least one normalization");
    if (scenarios.empty())
        fail("scenarios", "must name at least one scenario");
    for (Placement p : scenarios)
        if (p == Placement::Stationary)
            fail("scenarios", "stationary baselines are always emitted; list only worst, best or random");
    for (int D : d_grid)
        if (D < 1 || D > M)
            fail("d_grid", "entry " + std::to_string(D) + " outside [1, M]");
    if (!(correlation_r >= 0.0 && correlation_r < 1.0))
        fail("correlation_r", "must lie in [0, 1)");
    if (link_symbols < 1000)
        fail("link_symbols", "must be at least 1000");
    if (link_trials < 1)
        fail("link_trials", "must be positive");
    if (epsilon_k < 2)
        fail("epsilon_k", "must be at least 2");
    if (epsilon_trials < 1)
        fail("epsilon_trials", "must be positive");
    if (threads < 0)
        fail("threads", "must be nonnegative");
}

} // namespace vrmimo
