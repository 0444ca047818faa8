#include "xlsim/channel.hpp"

#include <algorithm>
#include <cmath>

namespace xlsim {

PilotConfig PilotConfig::orthogonal(const std::vector<int>& scheduled, int num_ues, int tau_c) {
    PilotConfig pc;
    pc.tau_c = tau_c;
    pc.tau_p = static_cast<int>(scheduled.size());
    pc.scheduled = scheduled;
    pc.pilot_of.assign(num_ues, -1);
    for (size_t i = 0; i < scheduled.size(); ++i) pc.pilot_of[scheduled[i]] = static_cast<int>(i);
    pc.rebuild_sharers(num_ues);
    return pc;
}

PilotConfig PilotConfig::from_assignment(const std::vector<int>& scheduled, const std::vector<int>& pilot_of,
                                         int num_ues, int tau_c, int tau_p) {
    PilotConfig pc;
    pc.tau_c = tau_c;
    pc.scheduled = scheduled;
    pc.pilot_of = pilot_of;
    pc.tau_p = tau_p;
    if (pc.tau_p < 0) {
        pc.tau_p = 0;
        for (int k : scheduled) pc.tau_p = std::max(pc.tau_p, pilot_of[k] + 1);
    }
    pc.rebuild_sharers(num_ues);
    return pc;
}

void PilotConfig::rebuild_sharers(int num_ues) {
    sharers.assign(tau_p, {});
    for (int k = 0; k < num_ues; ++k) {
        const int t = pilot_of[k];
        if (t >= 0) sharers[t].push_back(k);
    }
}

bool PilotConfig::has_reuse() const {
    for (const auto& s : sharers)
        if (s.size() > 1) return true;
    return false;
}

ChannelSampler::ChannelSampler(const ChannelStatistics& stats) : stats_(&stats) {
    const int K = stats.num_ues, L = stats.num_subarrays;
    sqrt_cov_.assign(K, std::vector<la::CMat>(L));
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < L; ++l) sqrt_cov_[k][l] = la::psd_sqrt(stats.nlos_cov[k][l]);
}

ChannelRealization ChannelSampler::sample(rng::Stream& stream) const {
    ChannelRealization out;
    sample_into(out, stream);
    return out;
}

void ChannelSampler::sample_into(ChannelRealization& out, rng::Stream& stream) const {
    const int K = stats_->num_ues, L = stats_->num_subarrays, M = stats_->antennas_per_subarray;
    if (out.h.empty()) out.h.assign(K, std::vector<la::CVec>(L, la::CVec(M)));
    la::CVec w(M);
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            for (int i = 0; i < M; ++i) w[i] = stream.cnormal();
            la::CVec& h = out.h[k][l];
            if (stats_->has_los[k][l]) {
                std::copy(stats_->los_mean[k][l].begin(), stats_->los_mean[k][l].end(), h.begin());
            } else {
                std::fill(h.begin(), h.end(), la::cd{});
            }
            la::gemv(1.0, sqrt_cov_[k][l], w.data(), 1.0, h.data());
        }
    }
}

ChannelRealization sample_channel(const ChannelSampler& sampler, rng::Stream& stream) {
    return sampler.sample(stream);
}

la::CMat pilot_matrix(const ChannelStatistics& stats, const PilotConfig& pilots, int t, int l) {
    if (pilots.scheduled.empty()) throw ModelError("pilot_matrix: empty scheduled set");
    const int M = stats.antennas_per_subarray;
    la::CMat psi(M, M);
    for (int i = 0; i < M; ++i) psi(i, i) = stats.noise_power;
    for (int k : pilots.sharers[t]) {
        const double w = stats.tx_power[k] * pilots.tau_p;
        const la::CMat& cov = stats.nlos_cov[k][l];
        for (int j = 0; j < M; ++j)
            for (int i = 0; i < M; ++i) psi(i, j) += w * cov(i, j);
    }
    return psi;
}

std::shared_ptr<const EstimationModel> build_estimation_model(const ChannelStatistics& stats,
                                                              const PilotConfig& pilots, bool with_gains) {
    if (pilots.scheduled.empty()) throw ModelError("build_estimation_model: empty scheduled set");
    if (pilots.tau_p < 1 || pilots.tau_p > pilots.tau_c)
        throw ModelError("build_estimation_model: pilot length out of range");
    for (int k : pilots.scheduled)
        if (pilots.pilot_of[k] < 0) throw ModelError("build_estimation_model: scheduled UE without pilot");

    const int K = stats.num_ues, L = stats.num_subarrays, M = stats.antennas_per_subarray;
    const int T = pilots.tau_p;
    auto model = std::make_shared<EstimationModel>();
    model->tau_p = T;
    model->is_scheduled.assign(K, 0);
    for (int k : pilots.scheduled) model->is_scheduled[k] = 1;
    model->psi_factor.assign(T, std::vector<la::LdlFactor>(L));
    model->psi.assign(T, std::vector<la::CMat>(L));
    model->obs_mean.assign(T, std::vector<la::CVec>(L, la::CVec(M)));
    model->est_gain.assign(K, std::vector<la::CMat>(L));
    model->err_cov.assign(K, std::vector<la::CMat>(L));
    model->est_corr.assign(K, std::vector<la::CMat>(L));
    model->tr_err_cov.assign(K, std::vector<double>(L, 0.0));
    model->tr_est_corr.assign(K, std::vector<double>(L, 0.0));
    model->err_cov_power_sum.assign(L, la::CMat(M, M));

    for (int t = 0; t < T; ++t) {
        for (int l = 0; l < L; ++l) {
            la::CMat psi = pilot_matrix(stats, pilots, t, l);
            model->psi_factor[t][l] = la::ldl_factor(psi);
            model->psi[t][l] = std::move(psi);
            la::CVec& mean = model->obs_mean[t][l];
            for (int k : pilots.sharers[t]) {
                if (!stats.has_los[k][l]) continue;
                const double w = std::sqrt(stats.tx_power[k]) * pilots.tau_p;
                const la::CVec& hb = stats.los_mean[k][l];
                for (int i = 0; i < M; ++i) mean[i] += w * hb[i];
            }
        }
    }

    la::CVec col(M);
    for (int k : pilots.scheduled) {
        const int t = pilots.pilot_of[k];
        const double pk = stats.tx_power[k];
        const double sp = std::sqrt(pk);
        for (int l = 0; l < L; ++l) {
            const la::CMat& cov = stats.nlos_cov[k][l];
            const la::LdlFactor& f = model->psi_factor[t][l];

            la::CMat solved(M, M);  // Psi^{-1} R
            for (int j = 0; j < M; ++j) {
                std::copy(cov.col(j), cov.col(j) + M, col.begin());
                la::ldl_solve_in_place(f, col.data());
                std::copy(col.begin(), col.end(), solved.col(j));
            }

            // C = R - p tau R Psi^{-1} R, symmetrized against round-off
            la::CMat err = cov;
            const la::CMat rpr = la::matmul(cov, solved);
            const double w = pk * pilots.tau_p;
            for (int j = 0; j < M; ++j)
                for (int i = 0; i < M; ++i) err(i, j) -= w * rpr(i, j);
            for (int j = 0; j < M; ++j) {
                for (int i = 0; i < j; ++i) {
                    const la::cd avg = 0.5 * (err(i, j) + std::conj(err(j, i)));
                    err(i, j) = avg;
                    err(j, i) = std::conj(avg);
                }
                err(j, j) = la::cd(err(j, j).real(), 0.0);
            }

            la::CMat xc = stats.corr[k][l];
            for (int j = 0; j < M; ++j)
                for (int i = 0; i < M; ++i) xc(i, j) -= err(i, j);

            model->tr_err_cov[k][l] = la::trace_real(err);
            model->tr_est_corr[k][l] = la::trace_real(xc);

            la::CMat& acc = model->err_cov_power_sum[l];
            for (int j = 0; j < M; ++j)
                for (int i = 0; i < M; ++i) acc(i, j) += pk * err(i, j);

            if (with_gains) {
                // gain = sqrt(p) R Psi^{-1} = sqrt(p) (Psi^{-1} R)^H
                la::CMat gain(M, M);
                for (int j = 0; j < M; ++j)
                    for (int i = 0; i < M; ++i) gain(i, j) = sp * std::conj(solved(j, i));
                model->est_gain[k][l] = std::move(gain);
            }
            model->err_cov[k][l] = std::move(err);
            model->est_corr[k][l] = std::move(xc);
        }
    }
    return model;
}

ChannelEstimate mmse_estimate(const ChannelRealization& real, const ChannelStatistics& stats,
                              const PilotConfig& pilots, rng::Stream& stream,
                              std::shared_ptr<const EstimationModel> model) {
    ChannelEstimate est;
    est.model = model ? std::move(model) : build_estimation_model(stats, pilots);
    mmse_estimate_into(est, real, stats, pilots, stream);
    return est;
}

void mmse_estimate_into(ChannelEstimate& out, const ChannelRealization& real, const ChannelStatistics& stats,
                        const PilotConfig& pilots, rng::Stream& stream) {
    const int K = stats.num_ues, L = stats.num_subarrays, M = stats.antennas_per_subarray;
    const EstimationModel& model = *out.model;
    if (out.hhat.empty()) out.hhat.assign(K, std::vector<la::CVec>(L, la::CVec(M)));

    // despread pilot observation per (pilot, subarray), noise covariance
    // tau_p sigma^2 I
    const double noise_amp = std::sqrt(pilots.tau_p * stats.noise_power);
    la::CVec y(M);
    for (int t = 0; t < pilots.tau_p; ++t) {
        for (int l = 0; l < L; ++l) {
            for (int i = 0; i < M; ++i) y[i] = noise_amp * stream.cnormal();
            for (int k : pilots.sharers[t]) {
                const double w = std::sqrt(stats.tx_power[k]) * pilots.tau_p;
                const la::CVec& h = real.h[k][l];
                for (int i = 0; i < M; ++i) y[i] += w * h[i];
            }
            const la::CVec& mean = model.obs_mean[t][l];
            for (int i = 0; i < M; ++i) y[i] -= mean[i];
            for (int k : pilots.sharers[t]) {
                la::CVec& hh = out.hhat[k][l];
                if (stats.has_los[k][l]) {
                    std::copy(stats.los_mean[k][l].begin(), stats.los_mean[k][l].end(), hh.begin());
                } else {
                    std::fill(hh.begin(), hh.end(), la::cd{});
                }
                la::gemv(1.0, model.est_gain[k][l], y.data(), 1.0, hh.data());
            }
        }
    }
}

NmseReport nmse(const ChannelEstimate& est, const ChannelStatistics& stats, NmseScope scope) {
    const EstimationModel& model = *est.model;
    const int K = stats.num_ues, L = stats.num_subarrays;
    NmseReport rep;
    rep.per_subarray.assign(K, std::vector<double>(L, 0.0));
    rep.global.assign(K, 0.0);
    for (int k = 0; k < K; ++k) {
        if (!model.is_scheduled[k]) continue;
        double tr_err = 0.0, tr_corr = 0.0;
        for (int l = 0; l < L; ++l) {
            const double tq = la::trace_real(stats.corr[k][l]);
            if (scope == NmseScope::PerSubarray) {
                if (tq <= 0.0) throw ModelError("nmse: zero-gain UE");
                rep.per_subarray[k][l] = model.tr_err_cov[k][l] / tq;
            }
            tr_err += model.tr_err_cov[k][l];
            tr_corr += tq;
        }
        if (tr_corr <= 0.0) throw ModelError("nmse: zero-gain UE");
        rep.global[k] = tr_err / tr_corr;
    }
    return rep;
}

}  // namespace xlsim
