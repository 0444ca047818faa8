#ifndef XLSIM_EXPERIMENTS_HPP
#define XLSIM_EXPERIMENTS_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "xlsim/allocation.hpp"
#include "xlsim/config.hpp"

namespace xlsim {

struct MetricsRow {
    double sweep = 0.0;
    std::string metric;
    double mean = 0.0;
    double stderr_ = 0.0;
    long trials = 0;
};

struct MetricsTable {
    std::vector<MetricsRow> rows;

    bool operator==(const MetricsTable& other) const;
};

/// Mean normalized absolute error between a truth series and its estimate.
/// Nonpositive-truth samples are dropped; their count lands in `dropped`
/// when provided. Throws if nothing survives the filter.
double mnae(const std::vector<double>& truth, const std::vector<double>& estimate, long* dropped = nullptr);

struct RunOptions {
    int threads = 0;           // 0: library default; 1: serial reference path
    std::ostream* diag = nullptr;  // progress and wall-clock notes; defaults to stderr
};

MetricsTable run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {});

void emit(const MetricsTable& table, OutputFormat format, const std::string& path);
std::string emit_string(const MetricsTable& table, OutputFormat format);
MetricsTable read_metrics_csv(const std::string& text);
MetricsTable read_metrics_json(const std::string& text);

/// Named figure-replica scenarios, each a complete config document.
const std::map<std::string, std::string>& presets();

}  // namespace xlsim

#endif
