#include "xlsim/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xlsim {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kPi = 3.14159265358979323846;

// log-distance path loss, 3-D distance in meters
double pathloss_db(double dist_m) { return -30.5 - 36.7 * std::log10(dist_m); }

// distance-decaying Rician factor
double rician_factor(double dist_m) { return std::pow(10.0, 1.3 - 0.003 * dist_m); }

double los_probability(double dist_m) {
    const double d = std::max(dist_m, 1e-9);
    return std::min(18.0 / d, 1.0) * (1.0 - std::exp(-d / 36.0)) + std::exp(-d / 36.0);
}

// UPA grid: vertical rows x horizontal columns, as square as M allows
// (square when M is a perfect square, otherwise the nearest divisor split)
std::pair<int, int> upa_shape(int m) {
    int rows = 1;
    for (int r = 1; r * r <= m; ++r)
        if (m % r == 0) rows = r;
    return {rows, m / rows};
}

// characteristic-function Toeplitz factor for one UPA axis: mean direction
// cosine `mu`, direction-cosine variance `var`
la::CMat axis_correlation(int n, double mu, double var) {
    la::CMat f(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double delta = kPi * (i - j);
            const double damp = std::exp(-0.5 * delta * delta * var);
            f(i, j) = std::polar(damp, delta * mu);
        }
    }
    return f;
}

}  // namespace

SystemGeometry build_geometry(const ScenarioConfig& cfg) {
    const int L = cfg.num_subarrays;
    const int M = cfg.antennas_per_subarray;
    const int K = cfg.num_ues;
    if (L < 1 || M < 1) throw ModelError("build_geometry: L and M must be positive");
    if (K < 1) throw ModelError("build_geometry: K must be positive");
    const auto [rows, cols] = upa_shape(M);
    if (cfg.area_width_m <= 0.0 || cfg.area_depth_m <= 0.0 || cfg.subarray_spacing_m <= 0.0)
        throw ModelError("build_geometry: nonpositive dimension");

    SystemGeometry g;
    g.num_subarrays = L;
    g.antennas_per_subarray = M;
    g.num_ues = K;
    g.carrier_wavelength = kSpeedOfLight / cfg.carrier_frequency_hz;
    g.area_width_m = cfg.area_width_m;
    g.area_depth_m = cfg.area_depth_m;

    // subarrays on a line along the x axis, centered on the origin, mounted
    // at array height; the served area lies at y > 0
    g.subarray_positions.resize(L);
    for (int l = 0; l < L; ++l) {
        g.subarray_positions[l] = {(l - 0.5 * (L - 1)) * cfg.subarray_spacing_m, 0.0, cfg.array_height_m};
    }

    const double d_elem = 0.5 * g.carrier_wavelength;
    std::vector<Vec3> offsets(M);
    for (int b = 0; b < rows; ++b) {
        for (int a = 0; a < cols; ++a) {
            offsets[b * cols + a] = {(a - 0.5 * (cols - 1)) * d_elem, 0.0, (b - 0.5 * (rows - 1)) * d_elem};
        }
    }
    g.antenna_offsets.assign(L, offsets);

    rng::Stream stream = rng::derive_stream(cfg.seed, rng::salt::kUePlacement);
    g.ue_positions.resize(K);
    for (int k = 0; k < K; ++k) {
        const double x = (stream.uniform() - 0.5) * cfg.area_width_m;
        const double y = stream.uniform() * cfg.area_depth_m;
        g.ue_positions[k] = {x, y, cfg.ue_height_m};
    }
    return g;
}

ChannelStatistics compute_channel_statistics(const SystemGeometry& geom, const ScenarioConfig& cfg,
                                             CorrelationMode correlation) {
    const int L = geom.num_subarrays;
    const int M = geom.antennas_per_subarray;
    const int K = geom.num_ues;
    const auto [rows, cols] = upa_shape(M);

    ChannelStatistics st;
    st.num_subarrays = L;
    st.antennas_per_subarray = M;
    st.num_ues = K;
    st.spatially_correlated = (correlation == CorrelationMode::LocalScattering);
    st.noise_power = std::pow(10.0, (cfg.noise_power_dbm - 30.0) / 10.0);
    st.tx_power.assign(K, std::pow(10.0, (cfg.tx_power_dbm - 30.0) / 10.0));

    st.los_mean.assign(K, std::vector<la::CVec>(L));
    st.nlos_cov.assign(K, std::vector<la::CMat>(L));
    st.corr.assign(K, std::vector<la::CMat>(L));
    st.gain.assign(K, std::vector<double>(L, 0.0));
    st.gain_nlos.assign(K, std::vector<double>(L, 0.0));
    st.has_los.assign(K, std::vector<int>(L, 0));
    st.gain_avg.assign(K, 0.0);

    const double sigma_az = cfg.asd_azimuth_deg * kPi / 180.0;
    const double sigma_el = cfg.asd_elevation_deg * kPi / 180.0;

    rng::Stream los_stream = rng::derive_stream(cfg.seed, rng::salt::kLosDraw);

    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            const Vec3& ue = geom.ue_positions[k];
            const Vec3& sub = geom.subarray_positions[l];
            const double dx = ue.x - sub.x, dy = ue.y - sub.y, dz = ue.z - sub.z;
            const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (dist < 1e-6) throw ModelError("compute_channel_statistics: UE coincides with a subarray center");

            const double beta = std::pow(10.0, pathloss_db(dist) / 10.0);

            int los = 0;
            switch (cfg.los_mode) {
                case LosMode::Always: los = 1; break;
                case LosMode::Never: los = 0; break;
                case LosMode::Radius: los = (dist <= cfg.visibility_radius_m) ? 1 : 0; break;
                case LosMode::Probabilistic:
                    los = (los_stream.uniform() < los_probability(dist)) ? 1 : 0;
                    break;
            }

            const double kappa = rician_factor(dist);
            if (kappa < 0.0) throw ModelError("compute_channel_statistics: negative Rician factor");
            const double beta_nlos = los ? beta / (1.0 + kappa) : beta;
            const double beta_los = beta - beta_nlos;

            // direction cosines along the UPA axes (x horizontal, z vertical)
            const double ux = dx / dist;
            const double uz = dz / dist;

            la::CMat cov;
            if (correlation == CorrelationMode::Uncorrelated) {
                cov = la::CMat(M, M);
                for (int i = 0; i < M; ++i) cov(i, i) = beta_nlos;
            } else {
                const double az = std::atan2(ux, dy / dist);
                const double el = std::asin(std::clamp(uz, -1.0, 1.0));
                const double var_x = std::pow(std::cos(az) * std::cos(el) * sigma_az, 2) +
                                     std::pow(std::sin(az) * std::sin(el) * sigma_el, 2);
                const double var_z = std::pow(std::cos(el) * sigma_el, 2);
                const la::CMat fx = axis_correlation(cols, ux, var_x);
                const la::CMat fz = axis_correlation(rows, uz, var_z);
                cov = la::CMat(M, M);
                for (int b2 = 0; b2 < rows; ++b2)
                    for (int a2 = 0; a2 < cols; ++a2)
                        for (int b1 = 0; b1 < rows; ++b1)
                            for (int a1 = 0; a1 < cols; ++a1)
                                cov(b1 * cols + a1, b2 * cols + a2) = beta_nlos * fz(b1, b2) * fx(a1, a2);
            }

            la::CVec mean(M);
            if (los) {
                const double amp = std::sqrt(beta_los);
                const double dist_phase = -2.0 * kPi * dist / geom.carrier_wavelength;
                for (int b = 0; b < rows; ++b) {
                    for (int a = 0; a < cols; ++a) {
                        const double phase = kPi * (a - 0.5 * (cols - 1)) * ux +
                                             kPi * (b - 0.5 * (rows - 1)) * uz + dist_phase;
                        mean[b * cols + a] = std::polar(amp, phase);
                    }
                }
            }

            la::CMat q = cov;
            la::rank1_update(q, 1.0, mean.data());

            st.los_mean[k][l] = std::move(mean);
            st.nlos_cov[k][l] = std::move(cov);
            st.corr[k][l] = std::move(q);
            st.gain[k][l] = beta;
            st.gain_nlos[k][l] = beta_nlos;
            st.has_los[k][l] = los;
        }
        st.gain_avg[k] = average_gain(st, k);
    }
    return st;
}

double average_gain(const ChannelStatistics& stats, int k) {
    if (k < 0 || k >= stats.num_ues) throw ModelError("average_gain: UE index out of range");
    double acc = 0.0;
    for (int l = 0; l < stats.num_subarrays; ++l) acc += stats.gain[k][l];
    return acc / stats.num_subarrays;
}

SelectionMatrixSet select_subarrays(SelectionStrategy strategy, const ChannelStatistics& stats, int l_serving,
                                    const SinrContext* ctx, rng::Stream* stream) {
    const int L = stats.num_subarrays;
    const int K = stats.num_ues;
    if (l_serving < 1 || l_serving > L) throw ModelError("select_subarrays: L_k out of range");
    if (strategy == SelectionStrategy::Sinr && ctx == nullptr)
        throw ModelError("select_subarrays: SINR strategy needs a SinrContext");
    if (strategy == SelectionStrategy::Random && stream == nullptr)
        throw ModelError("select_subarrays: random strategy needs an RNG stream");

    SelectionMatrixSet sel;
    sel.serving.assign(K, {});
    for (int k = 0; k < K; ++k) {
        std::vector<int> chosen;
        if (strategy == SelectionStrategy::Random) {
            std::vector<int> pool(L);
            std::iota(pool.begin(), pool.end(), 0);
            for (int i = 0; i < l_serving; ++i) {
                const int j = i + stream->uniform_int(L - i);
                std::swap(pool[i], pool[j]);
            }
            chosen.assign(pool.begin(), pool.begin() + l_serving);
        } else {
            const std::vector<double>& metric =
                (strategy == SelectionStrategy::Lsf) ? stats.gain[k] : ctx->local_sinr[k];
            std::vector<int> order(L);
            std::iota(order.begin(), order.end(), 0);
            // stable sort keeps ties at the lower index
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return metric[a] > metric[b]; });
            chosen.assign(order.begin(), order.begin() + l_serving);
        }
        std::sort(chosen.begin(), chosen.end());
        sel.serving[k] = std::move(chosen);
    }
    return sel;
}

}  // namespace xlsim
