#include "xlsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace xlsim {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
    }
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
}

CorrelationMode parse_correlation(const std::string& key, const std::string& v) {
    if (v == "uncorrelated") return CorrelationMode::Uncorrelated;
    if (v == "local-scattering") return CorrelationMode::LocalScattering;
    throw ConfigError("config: key '" + key + "' has unknown correlation mode '" + v + "'");
}

SelectionStrategy parse_selection(const std::string& key, const std::string& v) {
    if (v == "random") return SelectionStrategy::Random;
    if (v == "lsf") return SelectionStrategy::Lsf;
    if (v == "sinr") return SelectionStrategy::Sinr;
    throw ConfigError("config: key '" + key + "' has unknown selection strategy '" + v + "'");
}

WeightingStrategy parse_weighting(const std::string& key, const std::string& v) {
    if (v == "optimal") return WeightingStrategy::Optimal;
    if (v == "lsf") return WeightingStrategy::Lsf;
    if (v == "equal") return WeightingStrategy::Equal;
    throw ConfigError("config: key '" + key + "' has unknown weighting strategy '" + v + "'");
}

AllocationKind parse_allocation(const std::string& key, const std::string& v) {
    if (v == "fixed") return AllocationKind::Fixed;
    if (v == "nmse") return AllocationKind::Nmse;
    if (v == "sinr") return AllocationKind::Sinr;
    if (v == "sinr-num") return AllocationKind::SinrNumeric;
    if (v == "random") return AllocationKind::RandomBaseline;
    if (v == "greedy-book") return AllocationKind::GreedyBook;
    if (v == "exhaustive") return AllocationKind::Exhaustive;
    throw ConfigError("config: key '" + key + "' has unknown allocation '" + v + "'");
}

void parse_tau(const std::string& key, const std::string& v, TauRule& rule, int& value) {
    if (v == "U") {
        rule = TauRule::EqualU;
    } else if (v == "U/2") {
        rule = TauRule::HalfU;
    } else {
        rule = TauRule::Fixed;
        value = parse_int(key, v);
    }
}

}  // namespace

std::string to_string(CorrelationMode m) {
    return m == CorrelationMode::Uncorrelated ? "uncorrelated" : "local-scattering";
}
std::string to_string(SelectionStrategy s) {
    switch (s) {
        case SelectionStrategy::Random: return "random";
        case SelectionStrategy::Lsf: return "lsf";
        default: return "sinr";
    }
}
std::string to_string(WeightingStrategy w) {
    switch (w) {
        case WeightingStrategy::Optimal: return "optimal";
        case WeightingStrategy::Lsf: return "lsf";
        default: return "equal";
    }
}
std::string to_string(OperationMode m) { return m == OperationMode::Centralized ? "cent" : "dist"; }
std::string to_string(PilotScheme p) { return p == PilotScheme::Random ? "random" : "orthogonal"; }
std::string to_string(AllocationKind a) {
    switch (a) {
        case AllocationKind::Fixed: return "fixed";
        case AllocationKind::Nmse: return "nmse";
        case AllocationKind::Sinr: return "sinr";
        case AllocationKind::SinrNumeric: return "sinr-num";
        case AllocationKind::RandomBaseline: return "random";
        case AllocationKind::GreedyBook: return "greedy-book";
        default: return "exhaustive";
    }
}
std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::M: return "M";
        case SweepAxis::U: return "U";
        case SweepAxis::Lk: return "L_k";
        default: return "tau_c";
    }
}

ScenarioConfig parse_config(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config: line " + std::to_string(lineno) + " has an empty key or value");
        // repeated keys are allowed; the last assignment wins (presets layer
        // a common block under scenario-specific overrides)

        if (key == "subarrays") cfg.num_subarrays = parse_int(key, val);
        else if (key == "antennas_per_subarray") cfg.antennas_per_subarray = parse_int(key, val);
        else if (key == "ues") cfg.num_ues = parse_int(key, val);
        else if (key == "area_width_m") cfg.area_width_m = parse_real(key, val);
        else if (key == "area_depth_m") cfg.area_depth_m = parse_real(key, val);
        else if (key == "subarray_spacing_m") cfg.subarray_spacing_m = parse_real(key, val);
        else if (key == "array_height_m") cfg.array_height_m = parse_real(key, val);
        else if (key == "ue_height_m") cfg.ue_height_m = parse_real(key, val);
        else if (key == "carrier_frequency_hz") cfg.carrier_frequency_hz = parse_real(key, val);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(val));
        else if (key == "correlation") {
            cfg.correlation.clear();
            for (const auto& v : split_list(val)) cfg.correlation.push_back(parse_correlation(key, v));
        } else if (key == "asd_azimuth_deg") cfg.asd_azimuth_deg = parse_real(key, val);
        else if (key == "asd_elevation_deg") cfg.asd_elevation_deg = parse_real(key, val);
        else if (key == "los") {
            if (val == "always") cfg.los_mode = LosMode::Always;
            else if (val == "radius") cfg.los_mode = LosMode::Radius;
            else if (val == "probabilistic") cfg.los_mode = LosMode::Probabilistic;
            else if (val == "never") cfg.los_mode = LosMode::Never;
            else throw ConfigError("config: key 'los' has unknown mode '" + val + "'");
        } else if (key == "visibility_radius_m") cfg.visibility_radius_m = parse_real(key, val);
        else if (key == "tx_power_dbm") cfg.tx_power_dbm = parse_real(key, val);
        else if (key == "noise_power_dbm") cfg.noise_power_dbm = parse_real(key, val);
        else if (key == "mode") {
            cfg.modes.clear();
            for (const auto& v : split_list(val)) {
                if (v == "centralized") cfg.modes.push_back(OperationMode::Centralized);
                else if (v == "distributed") cfg.modes.push_back(OperationMode::Distributed);
                else if (v == "both") {
                    cfg.modes.push_back(OperationMode::Centralized);
                    cfg.modes.push_back(OperationMode::Distributed);
                } else throw ConfigError("config: key 'mode' has unknown mode '" + v + "'");
            }
        } else if (key == "selection") {
            cfg.selections.clear();
            for (const auto& v : split_list(val)) cfg.selections.push_back(parse_selection(key, v));
        } else if (key == "weighting") {
            cfg.weightings.clear();
            for (const auto& v : split_list(val)) cfg.weightings.push_back(parse_weighting(key, v));
        } else if (key == "l_serving") {
            cfg.l_serving.clear();
            for (const auto& v : split_list(val)) cfg.l_serving.push_back(parse_int(key, v));
        } else if (key == "allocation") {
            cfg.allocations.clear();
            for (const auto& v : split_list(val)) cfg.allocations.push_back(parse_allocation(key, v));
        } else if (key == "pilot_scheme") {
            cfg.pilot_schemes.clear();
            for (const auto& v : split_list(val)) {
                if (v == "random") cfg.pilot_schemes.push_back(PilotScheme::Random);
                else if (v == "orthogonal") cfg.pilot_schemes.push_back(PilotScheme::Orthogonal);
                else throw ConfigError("config: key 'pilot_scheme' has unknown scheme '" + v + "'");
            }
        } else if (key == "tau_p") parse_tau(key, val, cfg.tau_p_rule, cfg.tau_p);
        else if (key == "tau_c") parse_tau(key, val, cfg.tau_c_rule, cfg.tau_c);
        else if (key == "scheduled") {
            if (val == "K") cfg.scheduled_ues = -1;
            else cfg.scheduled_ues = parse_int(key, val);
        } else if (key == "gamma_th") cfg.gamma_th = parse_real(key, val);
        else if (key == "eta_th") cfg.eta_th = parse_real(key, val);
        else if (key == "u_switch") {
            if (val == "auto") cfg.u_switch_override.reset();
            else cfg.u_switch_override = parse_int(key, val);
        } else if (key == "numeric_alloc_trials") cfg.numeric_alloc_trials = parse_int(key, val);
        else if (key == "approximations") {
            if (val == "none") cfg.approximations = ApproxSet::None;
            else if (val == "ergodic") cfg.approximations = ApproxSet::Ergodic;
            else if (val == "asymptotic") cfg.approximations = ApproxSet::Asymptotic;
            else if (val == "both") cfg.approximations = ApproxSet::Both;
            else if (val == "switch") cfg.approximations = ApproxSet::Switch;
            else throw ConfigError("config: key 'approximations' has unknown value '" + val + "'");
        } else if (key == "trials") cfg.trials = parse_int(key, val);
        else if (key == "drops") cfg.drops = parse_int(key, val);
        else if (key == "sweep") {
            if (val == "M") cfg.sweep = SweepAxis::M;
            else if (val == "U") cfg.sweep = SweepAxis::U;
            else if (val == "L_k") cfg.sweep = SweepAxis::Lk;
            else if (val == "tau_c") cfg.sweep = SweepAxis::TauC;
            else throw ConfigError("config: key 'sweep' has unknown axis '" + val + "'");
        } else if (key == "sweep_values") {
            cfg.sweep_values.clear();
            for (const auto& v : split_list(val)) cfg.sweep_values.push_back(parse_int(key, v));
        } else if (key == "output") cfg.output_path = val;
        else if (key == "format") {
            if (val == "csv") cfg.format = OutputFormat::Csv;
            else if (val == "json") cfg.format = OutputFormat::Json;
            else throw ConfigError("config: key 'format' must be csv or json");
        } else if (key == "report") cfg.report_path = val;
        else throw ConfigError("config: unknown key '" + key + "'");
    }
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate_config(const ScenarioConfig& cfg) {
    if (cfg.num_subarrays < 1) throw ConfigError("config: subarrays must be >= 1");
    if (cfg.num_ues < 1) throw ConfigError("config: ues must be >= 1");
    if (cfg.antennas_per_subarray < 1) throw ConfigError("config: antennas_per_subarray must be >= 1");
    if (cfg.area_width_m <= 0 || cfg.area_depth_m <= 0) throw ConfigError("config: area dimensions must be positive");
    if (cfg.subarray_spacing_m <= 0) throw ConfigError("config: subarray_spacing_m must be positive");
    if (cfg.carrier_frequency_hz <= 0) throw ConfigError("config: carrier_frequency_hz must be positive");
    if (cfg.correlation.empty()) throw ConfigError("config: correlation list is empty");
    if (cfg.modes.empty()) throw ConfigError("config: mode list is empty");
    if (cfg.selections.empty()) throw ConfigError("config: selection list is empty");
    if (cfg.weightings.empty()) throw ConfigError("config: weighting list is empty");
    if (cfg.l_serving.empty()) throw ConfigError("config: l_serving list is empty");
    if (cfg.allocations.empty()) throw ConfigError("config: allocation list is empty");
    if (cfg.pilot_schemes.empty()) throw ConfigError("config: pilot_scheme list is empty");
    if (cfg.tau_p_rule == TauRule::Fixed && cfg.tau_p < 1) throw ConfigError("config: tau_p must be >= 1");
    if (cfg.tau_c_rule == TauRule::Fixed && cfg.tau_c < 1) throw ConfigError("config: tau_c must be >= 1");
    if (cfg.trials < 1) throw ConfigError("config: trials must be >= 1");
    if (cfg.drops < 1) throw ConfigError("config: drops must be >= 1");
    if (cfg.sweep_values.empty()) throw ConfigError("config: sweep_values is empty");
    if (cfg.gamma_th < 0) throw ConfigError("config: gamma_th must be nonnegative");
    if (cfg.eta_th < 0) throw ConfigError("config: eta_th must be nonnegative");
    if (cfg.numeric_alloc_trials < 1) throw ConfigError("config: numeric_alloc_trials must be >= 1");
    for (int v : cfg.sweep_values)
        if (v < 1) throw ConfigError("config: sweep values must be positive");
}

}  // namespace xlsim
