#ifndef XLSIM_CONFIG_HPP
#define XLSIM_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xlsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CorrelationMode { Uncorrelated, LocalScattering };
enum class LosMode { Always, Radius, Probabilistic, Never };
enum class SelectionStrategy { Random, Lsf, Sinr };
enum class WeightingStrategy { Optimal, Lsf, Equal };
enum class OperationMode { Centralized, Distributed };
enum class PilotScheme { Random, Orthogonal };
enum class AllocationKind { Fixed, Nmse, Sinr, SinrNumeric, RandomBaseline, GreedyBook, Exhaustive };
enum class SweepAxis { M, U, Lk, TauC };
enum class ApproxSet { None, Ergodic, Asymptotic, Both, Switch };
enum class OutputFormat { Csv, Json };

/// Dynamic pilot-length rules used by sweeps over the scheduled count.
enum class TauRule { Fixed, EqualU, HalfU };

/// One flat key=value scenario description. Lists (comma separated) are
/// allowed on the axes that define comparison variants.
struct ScenarioConfig {
    // geometry
    int num_subarrays = 16;           // L
    int antennas_per_subarray = 16;   // M, perfect square
    int num_ues = 16;                 // K
    double area_width_m = 100.0;
    double area_depth_m = 50.0;
    double subarray_spacing_m = 6.0;
    double array_height_m = 3.0;
    double ue_height_m = 1.5;
    double carrier_frequency_hz = 6e9;
    std::uint64_t seed = 1;

    // long-term statistics
    std::vector<CorrelationMode> correlation = {CorrelationMode::LocalScattering};
    double asd_azimuth_deg = 15.0;
    double asd_elevation_deg = 15.0;
    LosMode los_mode = LosMode::Radius;
    double visibility_radius_m = 60.0;
    double tx_power_dbm = 20.0;
    double noise_power_dbm = -96.0;

    // operation
    std::vector<OperationMode> modes = {OperationMode::Distributed};
    std::vector<SelectionStrategy> selections = {SelectionStrategy::Lsf};
    std::vector<WeightingStrategy> weightings = {WeightingStrategy::Optimal};
    std::vector<int> l_serving = {4};  // L_k

    // pilots / allocation
    std::vector<AllocationKind> allocations = {AllocationKind::Fixed};
    std::vector<PilotScheme> pilot_schemes = {PilotScheme::Random};
    TauRule tau_p_rule = TauRule::Fixed;
    int tau_p = 8;
    TauRule tau_c_rule = TauRule::Fixed;
    int tau_c = 16;
    int scheduled_ues = -1;  // U; -1 means all K
    double gamma_th = 0.1;
    double eta_th = 0.0;
    std::optional<int> u_switch_override;
    int numeric_alloc_trials = 50;  // per-candidate trials of the mean-SINR allocator

    // evaluation
    ApproxSet approximations = ApproxSet::None;
    int trials = 500;
    int drops = 1;
    SweepAxis sweep = SweepAxis::U;
    std::vector<int> sweep_values = {16};

    // output
    std::string output_path = "metrics.csv";
    OutputFormat format = OutputFormat::Csv;
    std::string report_path;  // optional allocation report
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);

/// Throws ConfigError with a message naming the offending key.
void validate_config(const ScenarioConfig& cfg);

std::string to_string(CorrelationMode m);
std::string to_string(SelectionStrategy s);
std::string to_string(WeightingStrategy w);
std::string to_string(OperationMode m);
std::string to_string(PilotScheme p);
std::string to_string(AllocationKind a);
std::string to_string(SweepAxis a);

}  // namespace xlsim

#endif
