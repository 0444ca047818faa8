#ifndef XLSIM_CHANNEL_HPP
#define XLSIM_CHANNEL_HPP

#include <memory>
#include <vector>

#include "xlsim/linalg.hpp"
#include "xlsim/rng.hpp"
#include "xlsim/system_model.hpp"

namespace xlsim {

/// Pilot bookkeeping for the scheduled set. Pilot indices are 0-based and
/// dense in {0..tau_p-1}; unscheduled UEs carry -1.
struct PilotConfig {
    int tau_p = 0;
    int tau_c = 0;
    std::vector<int> pilot_of;               // per UE, -1 when unscheduled
    std::vector<int> scheduled;              // admission order
    std::vector<std::vector<int>> sharers;   // UE ids per pilot

    static PilotConfig orthogonal(const std::vector<int>& scheduled, int num_ues, int tau_c);
    /// tau_p < 0 derives the pilot length from the largest assigned index;
    /// an explicit value may exceed it (idle pilots still cost symbols).
    static PilotConfig from_assignment(const std::vector<int>& scheduled, const std::vector<int>& pilot_of,
                                       int num_ues, int tau_c, int tau_p = -1);
    void rebuild_sharers(int num_ues);
    bool has_reuse() const;
};

struct ChannelRealization {
    std::vector<std::vector<la::CVec>> h;  // [k][l], filled for scheduled UEs
};

/// Everything that depends only on (statistics, pilots): despreading-matrix
/// factors, estimator gains, error covariances and their traces. Shared
/// read-only across trials.
struct EstimationModel {
    int tau_p = 0;
    std::vector<char> is_scheduled;                      // [k]
    std::vector<std::vector<la::LdlFactor>> psi_factor;  // [t][l]
    std::vector<std::vector<la::CMat>> psi;              // [t][l]
    std::vector<std::vector<la::CMat>> est_gain;         // [k][l]: sqrt(p_k) R Psi^{-1}
    std::vector<std::vector<la::CMat>> err_cov;          // [k][l]: C
    std::vector<std::vector<la::CMat>> est_corr;         // [k][l]: Q - C
    std::vector<std::vector<la::CVec>> obs_mean;         // [t][l]: deterministic part of y
    std::vector<std::vector<double>> tr_err_cov;         // [k][l]
    std::vector<std::vector<double>> tr_est_corr;        // [k][l]
    std::vector<la::CMat> err_cov_power_sum;             // [l]: sum_i p_i C_il over scheduled
};

struct ChannelEstimate {
    std::vector<std::vector<la::CVec>> hhat;  // [k][l]
    std::shared_ptr<const EstimationModel> model;

    const la::CMat& err_cov(int k, int l) const { return model->err_cov[k][l]; }
};

struct NmseReport {
    std::vector<std::vector<double>> per_subarray;  // [k][l]
    std::vector<double> global;                     // [k]
};

/// Hermitian PSD square roots of the NLoS covariances, cached per scenario.
class ChannelSampler {
public:
    explicit ChannelSampler(const ChannelStatistics& stats);
    ChannelRealization sample(rng::Stream& stream) const;
    void sample_into(ChannelRealization& out, rng::Stream& stream) const;

private:
    const ChannelStatistics* stats_;
    std::vector<std::vector<la::CMat>> sqrt_cov_;
};

ChannelRealization sample_channel(const ChannelSampler& sampler, rng::Stream& stream);

la::CMat pilot_matrix(const ChannelStatistics& stats, const PilotConfig& pilots, int t, int l);

/// `with_gains = false` skips the estimator-gain matrices; enough for the
/// deterministic SINR paths, which only consume covariances and traces.
std::shared_ptr<const EstimationModel> build_estimation_model(const ChannelStatistics& stats,
                                                              const PilotConfig& pilots, bool with_gains = true);

ChannelEstimate mmse_estimate(const ChannelRealization& real, const ChannelStatistics& stats,
                              const PilotConfig& pilots, rng::Stream& stream,
                              std::shared_ptr<const EstimationModel> model = nullptr);

/// Reuses preallocated buffers; the hot path of the Monte Carlo engine.
void mmse_estimate_into(ChannelEstimate& out, const ChannelRealization& real, const ChannelStatistics& stats,
                        const PilotConfig& pilots, rng::Stream& stream);

enum class NmseScope { PerSubarray, Global };

NmseReport nmse(const ChannelEstimate& est, const ChannelStatistics& stats, NmseScope scope);

}  // namespace xlsim

#endif
