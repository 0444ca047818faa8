#ifndef XLSIM_ALLOCATION_HPP
#define XLSIM_ALLOCATION_HPP

#include <optional>
#include <string>
#include <vector>

#include "xlsim/combining.hpp"
#include "xlsim/deterministic.hpp"

namespace xlsim {

struct TraceEntry {
    int ue = -1;
    int pilot = -1;        // 0-based chosen pilot
    double metric = 0.0;   // max-NMSE or min-SE achieved by the chosen pilot
    bool admitted = false;
    int tau_p_after = 0;
};

struct AllocationState {
    std::vector<int> scheduled;  // admission order (descending average gain)
    PilotConfig pilots;
    WeightVector weights;        // distributed schedulers only
    std::vector<TraceEntry> trace;
    std::vector<char> served;    // per UE; greedy baseline may leave some unserved
};

struct AllocationOptions {
    // Recompute only the UEs whose error covariance a candidate pilot can
    // touch; bitwise-identical to the literal full recomputation.
    bool incremental = false;
};

/// Greedy admission by descending average gain; each candidate UE takes the
/// pilot minimizing the maximum serving-set NMSE across the candidate set,
/// and is admitted while that maximum stays within gamma_th.
AllocationState schedule_nmse(const ChannelStatistics& stats, const SelectionMatrixSet& sel, double gamma_th,
                              int tau_c, const AllocationOptions& opt = {});

/// Same skeleton, but candidates maximize the minimum per-UE SE computed
/// from the deterministic SINR approximations; the switch rule picks the
/// approximation per load. Admission requires min-SE >= eta_th.
AllocationState schedule_sinr_centralized(const ChannelStatistics& stats, const SelectionMatrixSet& sel,
                                          double eta_th, int tau_c, const SwitchRule& rule,
                                          const AllocationOptions& opt = {});

AllocationState schedule_sinr_distributed(const ChannelStatistics& stats, const SelectionMatrixSet& sel,
                                          double eta_th, int tau_c, const SwitchRule& rule,
                                          const AllocationOptions& opt = {});

/// Benchmark variant of the SE-threshold schedulers that scores candidate
/// pilots by the Monte Carlo mean SINR instead of the deterministic
/// approximations.
AllocationState schedule_sinr_numeric(const ChannelStatistics& stats, const SelectionMatrixSet& sel, double eta_th,
                                      int tau_c, OperationMode mode, int trials, std::uint64_t seed);

/// Top-U UEs by average gain, uniformly random pilots in {1..tau_p}.
AllocationState baseline_random(const ChannelStatistics& stats, int tau_p, int tau_c, rng::Stream& stream,
                                int num_scheduled = -1);

/// Three-stage contamination-minimizing baseline: orthogonal seed UEs,
/// greedy assignment by NLoS gain at the strongest subarray, then per
/// (subarray, pilot) retention of the strongest UE.
AllocationState baseline_greedy_book(const ChannelStatistics& stats, const SelectionMatrixSet& sel, int tau_p,
                                     int tau_c, rng::Stream& stream);

enum class ExhaustiveMetric { MonteCarloMinSe, DeterministicMinSe };

struct ExhaustiveOptions {
    ExhaustiveMetric metric = ExhaustiveMetric::MonteCarloMinSe;
    int trials = 150;
    std::uint64_t seed = 1;
    std::optional<int> u_switch_override;  // deterministic metric only
};

struct ExhaustiveResult {
    AllocationState state;
    double best_min_se = 0.0;
};

/// Enumerates every pilot assignment of the scheduled set up to relabeling
/// (restricted-growth strings) and returns the min-SE maximizer.
ExhaustiveResult exhaustive_search(const ChannelStatistics& stats, const SelectionMatrixSet& sel, int num_ues,
                                   int tau_p_max, int tau_c, OperationMode mode, const ExhaustiveOptions& opt = {});

/// Evaluate one assignment with the exhaustive-search metric (shared RNG
/// streams, so values are comparable across assignments).
double evaluate_min_se(const ChannelStatistics& stats, const SelectionMatrixSet& sel, const PilotConfig& pilots,
                       OperationMode mode, const ExhaustiveOptions& opt);

std::string serialize_report(const AllocationState& state);

}  // namespace xlsim

#endif
