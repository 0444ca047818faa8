#ifndef XLSIM_COMBINING_HPP
#define XLSIM_COMBINING_HPP

#include <vector>

#include "xlsim/channel.hpp"
#include "xlsim/system_model.hpp"

namespace xlsim {

/// Aggregation weights for distributed operation; zero outside each UE's
/// serving set and unit sum across it.
struct WeightVector {
    std::vector<std::vector<double>> mu;  // [k][l]
};

struct SinrReport {
    double inst = 0.0;                 // centralized instantaneous SINR
    std::vector<double> local;         // per serving subarray (distributed)
    double global_exact = 0.0;         // distributed, exact aggregation
    double global_approx = 0.0;        // distributed, harmonic-form approximation
    double se = 0.0;                   // bit/s/Hz
};

/// Collective MMSE combiner for UE k, returned on the full M*L grid with
/// zeros outside the serving blocks.
la::CVec centralized_combiner(const ChannelEstimate& est, const SelectionMatrixSet& sel,
                              const ChannelStatistics& stats, int k);

double centralized_sinr(const ChannelEstimate& est, const SelectionMatrixSet& sel, const ChannelStatistics& stats,
                        int k);

la::CVec local_combiner(const ChannelEstimate& est, const ChannelStatistics& stats, int k, int l);

double local_sinr(const ChannelEstimate& est, const ChannelStatistics& stats, int k, int l);

/// Weights over the serving set. Falls back to equal weighting when every
/// local SINR is zero (the optimal rule is undefined there); the fallback is
/// counted in `diag` when provided.
struct CombiningDiagnostics {
    long weight_fallbacks = 0;
};

std::vector<double> compute_weights(WeightingStrategy strategy, const std::vector<double>& local_sinrs,
                                    const ChannelStatistics& stats, const SelectionMatrixSet& sel, int k,
                                    CombiningDiagnostics* diag = nullptr);

/// Exact distributed global SINR from committed local combiners.
double global_sinr_exact(const ChannelEstimate& est, const ChannelStatistics& stats, const SelectionMatrixSet& sel,
                         const std::vector<double>& weights, const std::vector<la::CVec>& combiners, int k);

double global_sinr_approx(const std::vector<double>& local_sinrs, const std::vector<double>& weights);

double se_map(double sinr, int tau_p, int tau_c);

double se_map_componentwise(const std::vector<double>& local_sinrs, const std::vector<double>& weights, int tau_p,
                            int tau_c);

/// Batched per-trial SINRs for all scheduled UEs; the per-UE Gram matrix is
/// assembled from shared block sums and factored once. Matches the
/// per-operation functions above to solver precision.
std::vector<double> centralized_sinrs_fast(const ChannelEstimate& est, const SelectionMatrixSet& sel,
                                           const ChannelStatistics& stats);

/// Distributed fast path: one Gram factorization per subarray per trial,
/// solves shared across the UEs it serves. Instances are reusable across
/// trials; not thread-safe, use one per worker.
class DistributedTrial {
public:
    DistributedTrial(const ChannelStatistics& stats, const SelectionMatrixSet& sel);

    void evaluate(const ChannelEstimate& est);

    /// local SINRs of UE k, ordered like sel.serving[k]
    const std::vector<double>& local_sinrs(int k) const { return local_[k]; }

    double global_exact(int k, const std::vector<double>& weights) const;
    double global_approx(int k, const std::vector<double>& weights) const;

private:
    const ChannelStatistics* stats_;
    const SelectionMatrixSet* sel_;
    std::vector<int> used_;                       // subarrays serving anyone
    std::vector<int> used_slot_;                  // subarray -> slot in used_, -1 otherwise
    std::vector<int> scheduled_;                  // from the last evaluate()
    std::vector<std::vector<la::CVec>> solved_;   // [used slot][scheduled idx]: G^{-1} hhat
    std::vector<std::vector<double>> local_;      // [k][serving idx]
    std::vector<std::vector<double>> err_quad_;   // [k][serving idx]: p^2 u^H CS u
    std::vector<std::vector<double>> comb_norm_;  // [k][serving idx]: p^2 ||u||^2
    const ChannelEstimate* est_ = nullptr;
};

}  // namespace xlsim

#endif
