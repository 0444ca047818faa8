#ifndef XLSIM_SYSTEM_MODEL_HPP
#define XLSIM_SYSTEM_MODEL_HPP

#include <vector>

#include "xlsim/config.hpp"
#include "xlsim/linalg.hpp"
#include "xlsim/rng.hpp"

namespace xlsim {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

struct SystemGeometry {
    int num_subarrays = 0;          // L
    int antennas_per_subarray = 0;  // M
    int num_ues = 0;                // K
    std::vector<Vec3> subarray_positions;            // size L
    std::vector<std::vector<Vec3>> antenna_offsets;  // per subarray, size M
    std::vector<Vec3> ue_positions;                  // size K
    double carrier_wavelength = 0.0;
    double area_width_m = 0.0;
    double area_depth_m = 0.0;
};

/// Long-term statistics per (UE, subarray): LoS mean, NLoS covariance,
/// correlation matrix, gains. Immutable after construction.
struct ChannelStatistics {
    int num_subarrays = 0;
    int antennas_per_subarray = 0;
    int num_ues = 0;

    // indexed [k][l]
    std::vector<std::vector<la::CVec>> los_mean;   // h-bar, zero when no LoS
    std::vector<std::vector<la::CMat>> nlos_cov;   // R
    std::vector<std::vector<la::CMat>> corr;       // Q = mean mean^H + R
    std::vector<std::vector<double>> gain;         // beta = tr(Q)/M
    std::vector<std::vector<double>> gain_nlos;    // tr(R)/M
    std::vector<std::vector<int>> has_los;         // 0/1
    std::vector<double> gain_avg;                  // mean over subarrays
    std::vector<double> tx_power;                  // watts, per UE
    double noise_power = 0.0;                      // watts
    bool spatially_correlated = false;             // generation mode, drives the switch rule
};

/// Per-UE serving subarray subsets; the implied block-selection matrix keeps
/// identity blocks on serving subarrays and zeros elsewhere.
struct SelectionMatrixSet {
    std::vector<std::vector<int>> serving;  // sorted subarray indices per UE

    int l_serving(int k) const { return static_cast<int>(serving[k].size()); }
};

/// Deterministic per-(UE, subarray) local SINR values backing the SINR-based
/// selection strategy.
struct SinrContext {
    std::vector<std::vector<double>> local_sinr;  // [k][l]
};

SystemGeometry build_geometry(const ScenarioConfig& cfg);

ChannelStatistics compute_channel_statistics(const SystemGeometry& geom, const ScenarioConfig& cfg,
                                             CorrelationMode correlation);

double average_gain(const ChannelStatistics& stats, int k);

SelectionMatrixSet select_subarrays(SelectionStrategy strategy, const ChannelStatistics& stats, int l_serving,
                                    const SinrContext* ctx = nullptr, rng::Stream* stream = nullptr);

}  // namespace xlsim

#endif
