#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dyadrl/errors.hpp"
#include "dyadrl/experiments.hpp"

namespace dyadrl {

/// Full engine configuration as read from one config file.
struct EngineConfig {
    TestbedConfig testbed;                       // [population], [environment], [calibration]
    std::vector<double> ste_targets{0.15, 0.3, 0.5};
    int trial_n_dyads = 25;
    int trial_n_runs = 200;                      // CI-speed default; full study uses 1000
    std::vector<Algorithm> algorithms{Algorithm::SingleAgent, Algorithm::MultiAgent,
                                      Algorithm::MultiAgentSurrogate};
    TestbedVariant variant;                      // [variant]
    int collaborate_n_dyads = 1000;
    int sweep_n_dyads = 400;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + value);
    }
}

inline int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for '" + key + "': " + value);
    }
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline Algorithm parse_algorithm(const std::string& name) {
    if (name == "single" || name == "single_agent") return Algorithm::SingleAgent;
    if (name == "multi" || name == "multi_agent") return Algorithm::MultiAgent;
    if (name == "multi_surrogate" || name == "multi_agent_surrogate")
        return Algorithm::MultiAgentSurrogate;
    if (name == "uniform_random" || name == "random") return Algorithm::UniformRandom;
    if (name == "optimal" || name == "optimal_approx") return Algorithm::OptimalApprox;
    throw ConfigError("config: unknown algorithm '" + name + "'");
}

inline VariantKind parse_variant(const std::string& name) {
    if (name == "vanilla") return VariantKind::Vanilla;
    if (name == "no_mediator") return VariantKind::NoMediator;
    if (name == "direct_distress") return VariantKind::DirectDistressEffect;
    if (name == "random_mediator") return VariantKind::RandomMediator;
    throw ConfigError("config: unknown variant '" + name + "'");
}

}  // namespace detail

/// Parse the key-value config text. Sections: [population], [environment],
/// [calibration], [trial], [variant], [collaborate]. Unknown sections or
/// keys are errors.
inline EngineConfig parse_config(std::istream& in) {
    EngineConfig cfg;
    PopulationConfig& pop = cfg.testbed.population;

    std::map<std::string, CoeffSpec*> coeffs{
        {"adherence_b0", &pop.adherence_b0},       {"adherence_b1", &pop.adherence_b1},
        {"adherence_b2", &pop.adherence_b2},       {"adherence_b3", &pop.adherence_b3},
        {"distress_b0", &pop.distress_b0},         {"distress_b1", &pop.distress_b1},
        {"distress_b2", &pop.distress_b2},         {"distress_b3", &pop.distress_b3},
        {"relationship_b0", &pop.relationship_b0}, {"relationship_b1", &pop.relationship_b1},
        {"relationship_b2", &pop.relationship_b2}, {"relationship_b3", &pop.relationship_b3},
        {"burden_aya_th0", &pop.burden_aya_th0},   {"burden_aya_th1", &pop.burden_aya_th1},
        {"burden_aya_th2", &pop.burden_aya_th2},   {"burden_aya_th3", &pop.burden_aya_th3},
        {"burden_care_th0", &pop.burden_care_th0}, {"burden_care_th1", &pop.burden_care_th1},
        {"burden_care_th2", &pop.burden_care_th2}, {"burden_care_th3", &pop.burden_care_th3},
    };

    std::string section;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section at line " + std::to_string(line_no));
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "population" && section != "environment" && section != "calibration" &&
                section != "trial" && section != "variant" && section != "collaborate")
                throw ConfigError("config: unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(line_no));
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: empty key or value at line " + std::to_string(line_no));

        if (section == "population") {
            bool matched = false;
            for (auto& [name, spec] : coeffs) {
                if (key == name + "_mean") {
                    spec->mean = detail::parse_double(key, value);
                    matched = true;
                } else if (key == name + "_sd") {
                    spec->sd = detail::parse_double(key, value);
                    matched = true;
                }
                if (matched) break;
            }
            if (matched) continue;
            if (key == "n")
                cfg.testbed.population_size = detail::parse_int(key, value);
            else if (key == "distress_noise_sd")
                pop.distress_noise_sd = detail::parse_double(key, value);
            else if (key == "burden_aya_noise_sd")
                pop.burden_aya_noise_sd = detail::parse_double(key, value);
            else if (key == "burden_care_noise_sd")
                pop.burden_care_noise_sd = detail::parse_double(key, value);
            else if (key == "mediator_multiplier")
                pop.mediator_multiplier = detail::parse_double(key, value);
            else
                throw ConfigError("config: unknown key '" + key + "' in [population]");
        } else if (section == "environment") {
            if (key == "mediator_gamma")
                cfg.testbed.env.mediator_gamma = detail::parse_double(key, value);
            else if (key == "burn_in_steps")
                cfg.testbed.env.burn_in_steps = detail::parse_int(key, value);
            else
                throw ConfigError("config: unknown key '" + key + "' in [environment]");
        } else if (section == "calibration") {
            if (key == "targets") {
                cfg.ste_targets.clear();
                for (const auto& t : detail::split_list(value))
                    cfg.ste_targets.push_back(detail::parse_double(key, t));
            } else if (key == "tolerance")
                cfg.testbed.tolerance = detail::parse_double(key, value);
            else if (key == "n_eval")
                cfg.testbed.n_eval = detail::parse_int(key, value);
            else if (key == "opt_trajectories")
                cfg.testbed.opt.n_trajectories = detail::parse_int(key, value);
            else if (key == "opt_discount")
                cfg.testbed.opt.discount = detail::parse_double(key, value);
            else
                throw ConfigError("config: unknown key '" + key + "' in [calibration]");
        } else if (section == "trial") {
            if (key == "n_dyads")
                cfg.trial_n_dyads = detail::parse_int(key, value);
            else if (key == "n_runs")
                cfg.trial_n_runs = detail::parse_int(key, value);
            else if (key == "algorithms") {
                cfg.algorithms.clear();
                for (const auto& a : detail::split_list(value))
                    cfg.algorithms.push_back(detail::parse_algorithm(a));
            } else if (key == "ste_targets") {
                cfg.ste_targets.clear();
                for (const auto& t : detail::split_list(value))
                    cfg.ste_targets.push_back(detail::parse_double(key, t));
            } else
                throw ConfigError("config: unknown key '" + key + "' in [trial]");
        } else if (section == "variant") {
            if (key == "kind")
                cfg.variant.kind = detail::parse_variant(value);
            else if (key == "mediator_sd")
                cfg.variant.mediator_sd = detail::parse_double(key, value);
            else
                throw ConfigError("config: unknown key '" + key + "' in [variant]");
        } else if (section == "collaborate") {
            if (key == "n_dyads")
                cfg.collaborate_n_dyads = detail::parse_int(key, value);
            else if (key == "sweep_n_dyads")
                cfg.sweep_n_dyads = detail::parse_int(key, value);
            else
                throw ConfigError("config: unknown key '" + key + "' in [collaborate]");
        } else {
            throw ConfigError("config: key '" + key + "' outside any section");
        }
    }
    cfg.testbed.population.validate();
    if (cfg.testbed.population_size < 2)
        throw ConfigError("config: population n must be >= 2");
    return cfg;
}

inline EngineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read " + path);
    return parse_config(in);
}

}  // namespace dyadrl
