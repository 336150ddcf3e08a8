#include "ebm/config.hpp"

#include <cstdlib>
#include <sstream>

#include "ebm/io.hpp"

namespace ebm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        raise(ErrorCode::ConfigError, "key '" + key + "': not a number: '" + v + "'");
    return x;
}

long parse_long(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        raise(ErrorCode::ConfigError, "key '" + key + "': not an integer: '" + v + "'");
    return x;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            raise(ErrorCode::ConfigError, "key '" + key + "': empty list entry");
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) raise(ErrorCode::ConfigError, "key '" + key + "': empty list");
    return out;
}

void apply_ramp(CoalbedoRamp& r, const std::string& key, const std::string& v,
                const std::string& section) {
    if (key == "beta_minus")
        r.beta_minus = parse_double(key, v);
    else if (key == "beta_plus")
        r.beta_plus = parse_double(key, v);
    else if (key == "t_minus")
        r.t_minus = parse_double(key, v);
    else if (key == "t_plus")
        r.t_plus = parse_double(key, v);
    else
        raise(ErrorCode::ConfigError, "unknown key '" + key + "' in section [" + section + "]");
}

} // namespace

ScenarioConfig parse_config_text(const std::string& text) {
    ScenarioConfig cfg;
    std::string section = "model";

    std::stringstream lines(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(lines, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                raise(ErrorCode::ConfigError,
                      "line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            const bool known =
                section == "model" || section == "coalbedo_s" || section == "coalbedo_a" ||
                section == "integrator" || section == "simulate" || section == "sweep" ||
                section == "jump" || section == "hysteresis" || section == "basins" ||
                section == "blowup" || section == "convexity";
            if (!known)
                raise(ErrorCode::ConfigError, "unknown section [" + section + "]");
            if (section == "coalbedo_a" && !cfg.params.coalbedo_a)
                cfg.params.coalbedo_a = CoalbedoRamp{};
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            raise(ErrorCode::ConfigError,
                  "line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            raise(ErrorCode::ConfigError,
                  "line " + std::to_string(lineno) + ": empty key or value");

        if (section == "model") {
            if (key == "gamma_a")
                cfg.params.gamma_a = parse_double(key, value);
            else if (key == "gamma_s")
                cfg.params.gamma_s = parse_double(key, value);
            else if (key == "lambda")
                cfg.params.lambda = parse_double(key, value);
            else if (key == "epsilon_a")
                cfg.params.epsilon_a = parse_double(key, value);
            else if (key == "sigma_b")
                cfg.params.sigma_b = parse_double(key, value);
            else if (key == "q")
                cfg.params.q = parse_double(key, value);
            else
                raise(ErrorCode::ConfigError, "unknown key '" + key + "' in section [model]");
        } else if (section == "coalbedo_s") {
            apply_ramp(cfg.params.coalbedo_s, key, value, section);
        } else if (section == "coalbedo_a") {
            apply_ramp(*cfg.params.coalbedo_a, key, value, section);
        } else if (section == "integrator") {
            if (key == "rel_tol")
                cfg.integrator.rel_tol = parse_double(key, value);
            else if (key == "abs_tol")
                cfg.integrator.abs_tol = parse_double(key, value);
            else if (key == "t_max_years")
                cfg.integrator.t_max = parse_double(key, value) * kSecondsPerYear;
            else if (key == "convergence_tol")
                cfg.integrator.convergence_tol = parse_double(key, value);
            else if (key == "blowup_threshold")
                cfg.integrator.blowup_threshold = parse_double(key, value);
            else if (key == "max_steps")
                cfg.integrator.max_steps = parse_long(key, value);
            else
                raise(ErrorCode::ConfigError, "unknown key '" + key + "' in section [integrator]");
        } else if (section == "simulate") {
            if (key == "t_a0")
                cfg.initial.t_a = parse_double(key, value);
            else if (key == "t_s0")
                cfg.initial.t_s = parse_double(key, value);
            else
                raise(ErrorCode::ConfigError, "unknown key '" + key + "' in section [simulate]");
        } else if (section == "sweep") {
            if (key == "param") {
                if (value == "epsilon_a")
                    cfg.sweep_param = SweepParam::EpsilonA;
                else if (value == "lambda")
                    cfg.sweep_param = SweepParam::Lambda;
                else
                    raise(ErrorCode::ConfigError,
                          "key 'param': expected epsilon_a or lambda, got '" + value + "'");
            } else if (key == "from")
                cfg.sweep_from = parse_double(key, value);
            else if (key == "to")
                cfg.sweep_to = parse_double(key, value);
            else if (key == "steps")
                cfg.sweep_steps = static_cast<int>(parse_long(key, value));
            else
                raise(ErrorCode::ConfigError, "unknown key '" + key + "' in section [sweep]");
        } else if (section == "jump") {
            if (key == "eps_star")
                cfg.jump_eps_star = parse_double(key, value);
            else if (key == "eps_plus")
                cfg.jump_eps_plus = parse_double(key, value);
            else
                raise(ErrorCode::ConfigError, "unknown key '" + key + "' in section [jump]");
        } else if (section == "hysteresis") {
            if (key == "path")
                cfg.hysteresis_path = parse_list(key, value);
            else
                raise(ErrorCode::ConfigError, "unknown key '" + key + "' in section [hysteresis]");
        } else if (section == "basins") {
            if (key == "nx")
                cfg.basins_nx = static_cast<int>(parse_long(key, value));
            else if (key == "ny")
                cfg.basins_ny = static_cast<int>(parse_long(key, value));
            else if (key == "threshold_tol")
                cfg.threshold_tol = parse_double(key, value);
            else if (key == "separatrix_points")
                cfg.separatrix_points = static_cast<int>(parse_long(key, value));
            else
                raise(ErrorCode::ConfigError, "unknown key '" + key + "' in section [basins]");
        } else if (section == "blowup") {
            if (key == "t_a0")
                cfg.blowup_initial.t_a = parse_double(key, value);
            else if (key == "t_s0")
                cfg.blowup_initial.t_s = parse_double(key, value);
            else
                raise(ErrorCode::ConfigError, "unknown key '" + key + "' in section [blowup]");
        } else if (section == "convexity") {
            if (key == "tol")
                cfg.convexity_tol = parse_double(key, value);
            else
                raise(ErrorCode::ConfigError, "unknown key '" + key + "' in section [convexity]");
        }
    }

    try {
        cfg.params.validate();
        cfg.integrator.validate();
    } catch (const Error& e) {
        raise(ErrorCode::ConfigError, e.what());
    }
    if (!std::isfinite(cfg.initial.t_a) || !std::isfinite(cfg.initial.t_s))
        raise(ErrorCode::ConfigError, "initial state must be finite");
    if (cfg.sweep_steps < 1) raise(ErrorCode::ConfigError, "sweep steps must be >= 1");
    if (cfg.basins_nx < 2 || cfg.basins_ny < 2)
        raise(ErrorCode::ConfigError, "basin grid must be at least 2x2");
    if (!(cfg.threshold_tol > 0.0))
        raise(ErrorCode::ConfigError, "threshold_tol must be positive");
    if (cfg.separatrix_points < 2)
        raise(ErrorCode::ConfigError, "separatrix_points must be >= 2");
    if (!(cfg.convexity_tol > 0.0))
        raise(ErrorCode::ConfigError, "convexity tol must be positive");
    return cfg;
}

ScenarioConfig parse_config_file(const std::filesystem::path& path) {
    return parse_config_text(io::read_text(path));
}

} // namespace ebm
