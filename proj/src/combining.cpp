#include "xlsim/combining.hpp"

#include <algorithm>
#include <cmath>

namespace xlsim {

namespace {

bool is_scheduled(const ChannelEstimate& est, int i) { return est.model->is_scheduled[i] != 0; }

// Stack the serving-subarray blocks of per-subarray vectors into one reduced
// vector of length M * L_k.
la::CVec stack_serving(const std::vector<la::CVec>& per_subarray, const std::vector<int>& serving, int m) {
    la::CVec out(static_cast<size_t>(m) * serving.size());
    size_t at = 0;
    for (int l : serving) {
        std::copy(per_subarray[l].begin(), per_subarray[l].end(), out.begin() + at);
        at += m;
    }
    return out;
}

// sigma^2 I + sum_i p_i (a_i a_i^H + C_i) over the scheduled set, on the
// reduced coordinates of UE k's serving subarrays.
la::CMat reduced_gram(const ChannelEstimate& est, const SelectionMatrixSet& sel, const ChannelStatistics& stats,
                      int k) {
    const int m = stats.antennas_per_subarray;
    const std::vector<int>& serving = sel.serving[k];
    const int n = m * static_cast<int>(serving.size());
    la::CMat w(n, n);
    for (int i = 0; i < n; ++i) w(i, i) = stats.noise_power;
    for (size_t bi = 0; bi < serving.size(); ++bi) {
        const la::CMat& cs = est.model->err_cov_power_sum[serving[bi]];
        const int off = static_cast<int>(bi) * m;
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) w(off + i, off + j) += cs(i, j);
    }
    for (int i = 0; i < stats.num_ues; ++i) {
        if (!is_scheduled(est, i)) continue;
        const la::CVec ai = stack_serving(est.hhat[i], serving, m);
        la::rank1_update(w, stats.tx_power[i], ai.data());
    }
    return w;
}

la::CMat local_gram(const ChannelEstimate& est, const ChannelStatistics& stats, int l) {
    const int m = stats.antennas_per_subarray;
    la::CMat w(m, m);
    for (int i = 0; i < m; ++i) w(i, i) = stats.noise_power;
    const la::CMat& cs = est.model->err_cov_power_sum[l];
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) w(i, j) += cs(i, j);
    for (int i = 0; i < stats.num_ues; ++i) {
        if (!is_scheduled(est, i)) continue;
        la::rank1_update(w, stats.tx_power[i], est.hhat[i][l].data());
    }
    return w;
}

}  // namespace

la::CVec centralized_combiner(const ChannelEstimate& est, const SelectionMatrixSet& sel,
                              const ChannelStatistics& stats, int k) {
    const int m = stats.antennas_per_subarray;
    const std::vector<int>& serving = sel.serving[k];
    la::CMat w = reduced_gram(est, sel, stats, k);
    la::CVec x = stack_serving(est.hhat[k], serving, m);
    la::LdlFactor f = la::ldl_factor(w);
    la::ldl_solve_in_place(f, x.data());
    for (auto& v : x) v *= stats.tx_power[k];

    la::CVec full(static_cast<size_t>(m) * stats.num_subarrays);
    for (size_t bi = 0; bi < serving.size(); ++bi)
        std::copy(x.begin() + bi * m, x.begin() + (bi + 1) * m,
                  full.begin() + static_cast<size_t>(serving[bi]) * m);
    return full;
}

double centralized_sinr(const ChannelEstimate& est, const SelectionMatrixSet& sel, const ChannelStatistics& stats,
                        int k) {
    const int m = stats.antennas_per_subarray;
    la::CMat w = reduced_gram(est, sel, stats, k);
    la::CVec target = stack_serving(est.hhat[k], sel.serving[k], m);
    // subtract the target UE's own rank-1 term: interference-plus-noise
    // matrix, then the quadratic form
    la::rank1_update(w, -stats.tx_power[k], target.data());
    la::LdlFactor f = la::ldl_factor(w);
    return stats.tx_power[k] * la::ldl_quad_form_inv(f, target.data());
}

la::CVec local_combiner(const ChannelEstimate& est, const ChannelStatistics& stats, int k, int l) {
    la::CMat w = local_gram(est, stats, l);
    la::CVec v = est.hhat[k][l];
    la::LdlFactor f = la::ldl_factor(w);
    la::ldl_solve_in_place(f, v.data());
    for (auto& c : v) c *= stats.tx_power[k];
    return v;
}

double local_sinr(const ChannelEstimate& est, const ChannelStatistics& stats, int k, int l) {
    la::CMat w = local_gram(est, stats, l);
    la::rank1_update(w, -stats.tx_power[k], est.hhat[k][l].data());
    la::LdlFactor f = la::ldl_factor(w);
    return stats.tx_power[k] * la::ldl_quad_form_inv(f, est.hhat[k][l].data());
}

std::vector<double> compute_weights(WeightingStrategy strategy, const std::vector<double>& local_sinrs,
                                    const ChannelStatistics& stats, const SelectionMatrixSet& sel, int k,
                                    CombiningDiagnostics* diag) {
    const std::vector<int>& serving = sel.serving[k];
    const size_t n = serving.size();
    std::vector<double> mu(n, 0.0);
    switch (strategy) {
        case WeightingStrategy::Equal:
            std::fill(mu.begin(), mu.end(), 1.0 / static_cast<double>(n));
            break;
        case WeightingStrategy::Lsf: {
            double acc = 0.0;
            for (size_t i = 0; i < n; ++i) acc += stats.gain[k][serving[i]];
            for (size_t i = 0; i < n; ++i) mu[i] = stats.gain[k][serving[i]] / acc;
            break;
        }
        case WeightingStrategy::Optimal: {
            double acc = 0.0;
            for (double g : local_sinrs) acc += g;
            if (acc <= 0.0) {
                if (diag) ++diag->weight_fallbacks;
                std::fill(mu.begin(), mu.end(), 1.0 / static_cast<double>(n));
            } else {
                for (size_t i = 0; i < n; ++i) mu[i] = local_sinrs[i] / acc;
            }
            break;
        }
    }
    return mu;
}

double global_sinr_exact(const ChannelEstimate& est, const ChannelStatistics& stats, const SelectionMatrixSet& sel,
                         const std::vector<double>& weights, const std::vector<la::CVec>& combiners, int k) {
    const std::vector<int>& serving = sel.serving[k];
    const int m = stats.antennas_per_subarray;

    la::cd signal{};
    double err_term = 0.0;
    double noise_term = 0.0;
    la::CVec tmp(m);
    for (size_t bi = 0; bi < serving.size(); ++bi) {
        const int l = serving[bi];
        const double mu = weights[bi];
        signal += mu * la::dot_conj(combiners[bi].data(), est.hhat[k][l].data(), m);
        noise_term += mu * mu * la::norm2(combiners[bi].data(), m);
        // sum_i p_i v^H C_il v collapses against the precomputed power sum
        la::gemv(1.0, est.model->err_cov_power_sum[l], combiners[bi].data(), 0.0, tmp.data());
        err_term += mu * mu * la::dot_conj(combiners[bi].data(), tmp.data(), m).real();
    }
    noise_term *= stats.noise_power;

    double interference = 0.0;
    for (int i = 0; i < stats.num_ues; ++i) {
        if (i == k || !is_scheduled(est, i)) continue;
        la::cd cross{};
        for (size_t bi = 0; bi < serving.size(); ++bi)
            cross += weights[bi] * la::dot_conj(combiners[bi].data(), est.hhat[i][serving[bi]].data(), m);
        interference += stats.tx_power[i] * std::norm(cross);
    }

    const double num = stats.tx_power[k] * std::norm(signal);
    const double den = interference + err_term + noise_term;
    return num / den;
}

double global_sinr_approx(const std::vector<double>& local_sinrs, const std::vector<double>& weights) {
    double acc = 0.0;
    for (size_t i = 0; i < local_sinrs.size(); ++i) {
        if (weights[i] == 0.0) continue;
        if (local_sinrs[i] <= 0.0) return 0.0;
        acc += weights[i] * weights[i] / local_sinrs[i];
    }
    return acc > 0.0 ? 1.0 / acc : 0.0;
}

double se_map(double sinr, int tau_p, int tau_c) {
    if (tau_p > tau_c) throw ModelError("se_map: pilot length exceeds coherence block");
    return (1.0 - static_cast<double>(tau_p) / tau_c) * std::log2(1.0 + sinr);
}

double se_map_componentwise(const std::vector<double>& local_sinrs, const std::vector<double>& weights, int tau_p,
                            int tau_c) {
    return se_map(global_sinr_approx(local_sinrs, weights), tau_p, tau_c);
}

namespace {

// q = p a^H W^{-1} a with W containing the target term; the
// interference-only form follows from the rank-1 downdate
inline double sinr_from_quad(double q) {
    const double safe = std::min(q, 1.0 - 1e-15);
    return safe / (1.0 - safe);
}

}  // namespace

std::vector<double> centralized_sinrs_fast(const ChannelEstimate& est, const SelectionMatrixSet& sel,
                                           const ChannelStatistics& stats) {
    const int m = stats.antennas_per_subarray;
    std::vector<double> out(stats.num_ues, 0.0);
    for (int k = 0; k < stats.num_ues; ++k) {
        if (!is_scheduled(est, k)) continue;
        if (sel.serving[k].empty()) continue;
        la::CMat w = reduced_gram(est, sel, stats, k);
        la::CVec target = stack_serving(est.hhat[k], sel.serving[k], m);
        la::LdlFactor f = la::ldl_factor(w);
        const double q = stats.tx_power[k] * la::ldl_quad_form_inv(f, target.data());
        out[k] = sinr_from_quad(q);
    }
    return out;
}

DistributedTrial::DistributedTrial(const ChannelStatistics& stats, const SelectionMatrixSet& sel)
    : stats_(&stats), sel_(&sel) {
    used_slot_.assign(stats.num_subarrays, -1);
    for (const auto& serving : sel.serving)
        for (int l : serving)
            if (used_slot_[l] < 0) {
                used_slot_[l] = 0;
                used_.push_back(l);
            }
    std::sort(used_.begin(), used_.end());
    for (size_t i = 0; i < used_.size(); ++i) used_slot_[used_[i]] = static_cast<int>(i);
    local_.assign(stats.num_ues, {});
    err_quad_.assign(stats.num_ues, {});
    comb_norm_.assign(stats.num_ues, {});
}

void DistributedTrial::evaluate(const ChannelEstimate& est) {
    const ChannelStatistics& stats = *stats_;
    const int m = stats.antennas_per_subarray;
    est_ = &est;
    scheduled_.clear();
    for (int i = 0; i < stats.num_ues; ++i)
        if (is_scheduled(est, i)) scheduled_.push_back(i);

    solved_.assign(used_.size(), std::vector<la::CVec>(scheduled_.size()));
    la::CVec tmp(m);
    for (size_t slot = 0; slot < used_.size(); ++slot) {
        const int l = used_[slot];
        la::CMat w(m, m);
        for (int i = 0; i < m; ++i) w(i, i) = stats.noise_power;
        const la::CMat& cs = est.model->err_cov_power_sum[l];
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) w(i, j) += cs(i, j);
        for (int i : scheduled_) la::rank1_update(w, stats.tx_power[i], est.hhat[i][l].data());
        const la::LdlFactor f = la::ldl_factor(w);
        for (size_t si = 0; si < scheduled_.size(); ++si) {
            la::CVec u = est.hhat[scheduled_[si]][l];
            la::ldl_solve_in_place(f, u.data());
            solved_[slot][si] = std::move(u);
        }
    }

    for (int k = 0; k < stats.num_ues; ++k) {
        local_[k].clear();
        err_quad_[k].clear();
        comb_norm_[k].clear();
        if (!is_scheduled(est, k)) continue;
        const double pk = stats.tx_power[k];
        const size_t sk = std::find(scheduled_.begin(), scheduled_.end(), k) - scheduled_.begin();
        for (int l : sel_->serving[k]) {
            const int slot = used_slot_[l];
            const la::CVec& u = solved_[slot][sk];
            const double q = pk * la::dot_conj(est.hhat[k][l].data(), u.data(), m).real();
            local_[k].push_back(sinr_from_quad(q));
            la::gemv(1.0, est.model->err_cov_power_sum[l], u.data(), 0.0, tmp.data());
            err_quad_[k].push_back(pk * pk * la::dot_conj(u.data(), tmp.data(), m).real());
            comb_norm_[k].push_back(pk * pk * la::norm2(u.data(), m));
        }
    }
}

double DistributedTrial::global_exact(int k, const std::vector<double>& weights) const {
    const ChannelStatistics& stats = *stats_;
    const int m = stats.antennas_per_subarray;
    const std::vector<int>& serving = sel_->serving[k];
    const double pk = stats.tx_power[k];
    const size_t sk = std::find(scheduled_.begin(), scheduled_.end(), k) - scheduled_.begin();

    la::cd signal{};
    double err_term = 0.0, noise_term = 0.0;
    for (size_t bi = 0; bi < serving.size(); ++bi) {
        const int slot = used_slot_[serving[bi]];
        const la::CVec& u = solved_[slot][sk];
        signal += weights[bi] * pk * la::dot_conj(u.data(), est_->hhat[k][serving[bi]].data(), m);
        err_term += weights[bi] * weights[bi] * err_quad_[k][bi];
        noise_term += weights[bi] * weights[bi] * comb_norm_[k][bi];
    }
    noise_term *= stats.noise_power;

    double interference = 0.0;
    for (size_t si = 0; si < scheduled_.size(); ++si) {
        const int i = scheduled_[si];
        if (i == k) continue;
        la::cd cross{};
        for (size_t bi = 0; bi < serving.size(); ++bi) {
            const int slot = used_slot_[serving[bi]];
            cross += weights[bi] * pk * la::dot_conj(solved_[slot][sk].data(), est_->hhat[i][serving[bi]].data(), m);
        }
        interference += stats.tx_power[i] * std::norm(cross);
    }
    return pk * std::norm(signal) / (interference + err_term + noise_term);
}

double DistributedTrial::global_approx(int k, const std::vector<double>& weights) const {
    return global_sinr_approx(local_[k], weights);
}

}  // namespace xlsim
