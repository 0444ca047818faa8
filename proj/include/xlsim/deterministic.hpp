#ifndef XLSIM_DETERMINISTIC_HPP
#define XLSIM_DETERMINISTIC_HPP

#include <cstdint>
#include <vector>

#include "xlsim/channel.hpp"
#include "xlsim/system_model.hpp"

namespace xlsim {

enum class ApproxKind { Ergodic, Asymptotic };

struct DeterministicSinr {
    ApproxKind kind = ApproxKind::Ergodic;
    OperationMode mode = OperationMode::Centralized;
    double value = 0.0;                 // centralized: the global SINR
    std::vector<double> per_subarray;   // distributed: one value per serving subarray
    std::uint64_t multiplications = 0;  // instrumented real-multiplication count
};

enum class SwitchProvenance { Table, ConfigOverride };

struct SwitchRule {
    int u_switch = 0;
    SwitchProvenance provenance = SwitchProvenance::Table;
};

struct DeterministicDiagnostics {
    long negative_numerator_clamps = 0;
    long zero_trace_skips = 0;
};

/// Statistics-only SINR approximations. The estimation model supplies the
/// error covariances of the live pilot assignment; SINRs are evaluated for
/// scheduled UEs against scheduled interferers only.
DeterministicSinr ergodic_sinr_centralized(const ChannelStatistics& stats, const EstimationModel& model,
                                           const PilotConfig& pilots, const SelectionMatrixSet& sel, int k,
                                           la::MultCounter* mc = nullptr);

DeterministicSinr ergodic_sinr_distributed(const ChannelStatistics& stats, const EstimationModel& model,
                                           const PilotConfig& pilots, const SelectionMatrixSet& sel, int k,
                                           la::MultCounter* mc = nullptr);

DeterministicSinr asymptotic_sinr_centralized(const ChannelStatistics& stats, const EstimationModel& model,
                                              const PilotConfig& pilots, const SelectionMatrixSet& sel, int k,
                                              la::MultCounter* mc = nullptr,
                                              DeterministicDiagnostics* diag = nullptr);

DeterministicSinr asymptotic_sinr_distributed(const ChannelStatistics& stats, const EstimationModel& model,
                                              const PilotConfig& pilots, const SelectionMatrixSet& sel, int k,
                                              la::MultCounter* mc = nullptr,
                                              DeterministicDiagnostics* diag = nullptr);

/// Convenience overloads that build the estimation model on the fly.
DeterministicSinr ergodic_sinr_centralized(const ChannelStatistics& stats, const PilotConfig& pilots,
                                           const SelectionMatrixSet& sel, int k);
DeterministicSinr ergodic_sinr_distributed(const ChannelStatistics& stats, const PilotConfig& pilots,
                                           const SelectionMatrixSet& sel, int k);
DeterministicSinr asymptotic_sinr_centralized(const ChannelStatistics& stats, const PilotConfig& pilots,
                                              const SelectionMatrixSet& sel, int k);
DeterministicSinr asymptotic_sinr_distributed(const ChannelStatistics& stats, const PilotConfig& pilots,
                                              const SelectionMatrixSet& sel, int k);

/// Load threshold separating the asymptotic regime (U <= threshold) from the
/// ergodic one, reproducing the calibrated table; integer floor applied.
SwitchRule u_switch(bool correlated, bool pilot_reuse, OperationMode mode, int m, int l_serving);

ApproxKind select_approximation(int num_scheduled, const SwitchRule& rule);

/// Closed-form real-multiplication counts of the four approximation paths.
std::uint64_t complexity_count(ApproxKind kind, OperationMode mode, int m, int l_serving, int num_scheduled);

}  // namespace xlsim

#endif
