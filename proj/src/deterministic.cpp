#include "xlsim/deterministic.hpp"

#include <algorithm>
#include <cmath>

namespace xlsim {

namespace {

la::CVec stack_mean(const std::vector<la::CVec>& per_subarray, const std::vector<int>& serving, int m) {
    la::CVec out(static_cast<size_t>(m) * serving.size());
    size_t at = 0;
    for (int l : serving) {
        if (!per_subarray[l].empty()) std::copy(per_subarray[l].begin(), per_subarray[l].end(), out.begin() + at);
        at += m;
    }
    return out;
}

// E{hhat hhat^H} of UE u on the reduced coordinates of `serving`: the
// per-subarray blocks plus the LoS-mean cross blocks.
la::CMat reduced_est_corr(const ChannelStatistics& stats, const EstimationModel& model,
                          const std::vector<int>& serving, int u) {
    const int m = stats.antennas_per_subarray;
    const int lk = static_cast<int>(serving.size());
    la::CMat x(m * lk, m * lk);
    for (int bi = 0; bi < lk; ++bi) {
        const int l = serving[bi];
        const int off = bi * m;
        const la::CMat& xc = model.est_corr[u][l];
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) x(off + i, off + j) = xc(i, j);
    }
    la::CVec mean = stack_mean(stats.los_mean[u], serving, m);
    la::rank1_update(x, 1.0, mean.data());
    // the per-subarray blocks already carry their own mean outer products
    for (int bi = 0; bi < lk; ++bi) {
        const int l = serving[bi];
        if (!stats.has_los[u][l]) continue;
        const int off = bi * m;
        const la::CVec& hb = stats.los_mean[u][l];
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) x(off + i, off + j) -= hb[i] * std::conj(hb[j]);
    }
    return x;
}

}  // namespace

DeterministicSinr ergodic_sinr_centralized(const ChannelStatistics& stats, const EstimationModel& model,
                                           const PilotConfig& pilots, const SelectionMatrixSet& sel, int k,
                                           la::MultCounter* mc) {
    const std::uint64_t mark = mc ? mc->real_total() : 0;
    const int m = stats.antennas_per_subarray;
    const std::vector<int>& serving = sel.serving[k];
    const int n = m * static_cast<int>(serving.size());

    // expected interference-plus-noise matrix on the reduced coordinates:
    // sum_{i != k} p_i Q_i + p_k C_k + sigma^2 I
    la::CMat zbar(n, n);
    for (int i = 0; i < n; ++i) zbar(i, i) = stats.noise_power;
    for (size_t bi = 0; bi < serving.size(); ++bi) {
        const int l = serving[bi];
        const int off = static_cast<int>(bi) * m;
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < m; ++i) {
                la::cd acc{};
                for (int u : pilots.scheduled) {
                    if (u == k) continue;
                    acc += stats.tx_power[u] * stats.nlos_cov[u][l](i, j);
                }
                acc += stats.tx_power[k] * model.err_cov[k][l](i, j);
                zbar(off + i, off + j) += acc;
            }
        }
    }
    for (int u : pilots.scheduled) {
        if (u == k) continue;
        la::CVec mean = stack_mean(stats.los_mean[u], serving, m);
        la::rank1_update(zbar, stats.tx_power[u], mean.data());
    }

    const la::CMat target = reduced_est_corr(stats, model, serving, k);
    la::LdlFactor f = la::ldl_factor(zbar, mc);
    const double tr = la::ldl_trace_solve(f, target, mc);

    DeterministicSinr out;
    out.kind = ApproxKind::Ergodic;
    out.mode = OperationMode::Centralized;
    out.value = std::max(stats.tx_power[k] * tr, 0.0);
    if (mc) out.multiplications = mc->real_total() - mark;
    return out;
}

DeterministicSinr ergodic_sinr_distributed(const ChannelStatistics& stats, const EstimationModel& model,
                                           const PilotConfig& pilots, const SelectionMatrixSet& sel, int k,
                                           la::MultCounter* mc) {
    const std::uint64_t mark = mc ? mc->real_total() : 0;
    const int m = stats.antennas_per_subarray;
    DeterministicSinr out;
    out.kind = ApproxKind::Ergodic;
    out.mode = OperationMode::Distributed;
    for (int l : sel.serving[k]) {
        la::CMat zbar(m, m);
        for (int i = 0; i < m; ++i) zbar(i, i) = stats.noise_power;
        for (int u : pilots.scheduled) {
            if (u == k) continue;
            const la::CMat& q = stats.corr[u][l];
            const double pu = stats.tx_power[u];
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i) zbar(i, j) += pu * q(i, j);
        }
        {
            const la::CMat& c = model.err_cov[k][l];
            const double pk = stats.tx_power[k];
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i) zbar(i, j) += pk * c(i, j);
        }
        la::LdlFactor f = la::ldl_factor(zbar, mc);
        const double tr = la::ldl_trace_solve(f, model.est_corr[k][l], mc);
        out.per_subarray.push_back(std::max(stats.tx_power[k] * tr, 0.0));
    }
    if (mc) out.multiplications = mc->real_total() - mark;
    return out;
}

DeterministicSinr asymptotic_sinr_centralized(const ChannelStatistics& stats, const EstimationModel& model,
                                              const PilotConfig& pilots, const SelectionMatrixSet& sel, int k,
                                              la::MultCounter* mc, DeterministicDiagnostics* diag) {
    const std::uint64_t mark = mc ? mc->real_total() : 0;
    const int m = stats.antennas_per_subarray;
    const std::vector<int>& serving = sel.serving[k];
    const int n = m * static_cast<int>(serving.size());

    const la::CMat xk = reduced_est_corr(stats, model, serving, k);
    double numerator = la::trace_real(xk);
    double err_trace_sum = 0.0;
    for (int u : pilots.scheduled) {
        double tc = 0.0;
        for (int l : serving) tc += model.tr_err_cov[u][l];
        err_trace_sum += stats.tx_power[u] * tc;
        if (u == k) continue;
        const la::CMat xi = reduced_est_corr(stats, model, serving, u);
        const double tx = la::trace_real(xi);
        if (tx <= 0.0) {
            if (diag) ++diag->zero_trace_skips;
            continue;
        }
        numerator -= la::trace_of_product(xi, xk, mc) / tx;
    }
    if (numerator < 0.0) {
        if (diag) ++diag->negative_numerator_clamps;
        numerator = 0.0;
    }

    DeterministicSinr out;
    out.kind = ApproxKind::Asymptotic;
    out.mode = OperationMode::Centralized;
    out.value = stats.tx_power[k] * numerator / (err_trace_sum / static_cast<double>(n) + stats.noise_power);
    if (mc) out.multiplications = mc->real_total() - mark;
    return out;
}

DeterministicSinr asymptotic_sinr_distributed(const ChannelStatistics& stats, const EstimationModel& model,
                                              const PilotConfig& pilots, const SelectionMatrixSet& sel, int k,
                                              la::MultCounter* mc, DeterministicDiagnostics* diag) {
    const std::uint64_t mark = mc ? mc->real_total() : 0;
    const int m = stats.antennas_per_subarray;
    const double pk = stats.tx_power[k];
    DeterministicSinr out;
    out.kind = ApproxKind::Asymptotic;
    out.mode = OperationMode::Distributed;
    for (int l : sel.serving[k]) {
        const la::CMat& xk = model.est_corr[k][l];
        double numerator = la::trace_real(xk);
        double err_trace_sum = 0.0;
        for (int u : pilots.scheduled) {
            err_trace_sum += stats.tx_power[u] * model.tr_err_cov[u][l];
            if (u == k) continue;
            const double tx = model.tr_est_corr[u][l];
            if (tx <= 0.0) {
                if (diag) ++diag->zero_trace_skips;
                continue;
            }
            numerator -= la::trace_of_product(model.est_corr[u][l], xk, mc) / tx;
        }
        if (numerator < 0.0) {
            if (diag) ++diag->negative_numerator_clamps;
            numerator = 0.0;
        }
        const double denom = err_trace_sum / static_cast<double>(m) + stats.noise_power;
        out.per_subarray.push_back(pk * numerator / denom);
    }
    if (mc) out.multiplications = mc->real_total() - mark;
    return out;
}

DeterministicSinr ergodic_sinr_centralized(const ChannelStatistics& stats, const PilotConfig& pilots,
                                           const SelectionMatrixSet& sel, int k) {
    auto model = build_estimation_model(stats, pilots);
    return ergodic_sinr_centralized(stats, *model, pilots, sel, k);
}
DeterministicSinr ergodic_sinr_distributed(const ChannelStatistics& stats, const PilotConfig& pilots,
                                           const SelectionMatrixSet& sel, int k) {
    auto model = build_estimation_model(stats, pilots);
    return ergodic_sinr_distributed(stats, *model, pilots, sel, k);
}
DeterministicSinr asymptotic_sinr_centralized(const ChannelStatistics& stats, const PilotConfig& pilots,
                                              const SelectionMatrixSet& sel, int k) {
    auto model = build_estimation_model(stats, pilots);
    return asymptotic_sinr_centralized(stats, *model, pilots, sel, k);
}
DeterministicSinr asymptotic_sinr_distributed(const ChannelStatistics& stats, const PilotConfig& pilots,
                                              const SelectionMatrixSet& sel, int k) {
    auto model = build_estimation_model(stats, pilots);
    return asymptotic_sinr_distributed(stats, *model, pilots, sel, k);
}

SwitchRule u_switch(bool correlated, bool pilot_reuse, OperationMode mode, int m, int l_serving) {
    const int dim = (mode == OperationMode::Centralized) ? m * l_serving : m;
    SwitchRule rule;
    rule.provenance = SwitchProvenance::Table;
    if (correlated && pilot_reuse) {
        rule.u_switch = 0;
    } else if (!correlated && !pilot_reuse) {
        rule.u_switch = dim / 2;
    } else {
        rule.u_switch = dim / 4;
    }
    return rule;
}

ApproxKind select_approximation(int num_scheduled, const SwitchRule& rule) {
    return num_scheduled <= rule.u_switch ? ApproxKind::Asymptotic : ApproxKind::Ergodic;
}

std::uint64_t complexity_count(ApproxKind kind, OperationMode mode, int m, int l_serving, int num_scheduled) {
    const std::uint64_t M = static_cast<std::uint64_t>(m);
    const std::uint64_t L = static_cast<std::uint64_t>(l_serving);
    const std::uint64_t U = static_cast<std::uint64_t>(num_scheduled);
    if (kind == ApproxKind::Asymptotic) {
        const std::uint64_t interferers = U > 0 ? U - 1 : 0;
        if (mode == OperationMode::Centralized) return 3 * interferers * M * M * L * L;
        return 3 * interferers * M * M * L;
    }
    // the halves are exact: 6(ML)^3 + (ML)^2 - 3ML is always even
    if (mode == OperationMode::Centralized) {
        const std::uint64_t ml = M * L;
        return (6 * ml * ml * ml + ml * ml - 3 * ml) / 2;
    }
    return (6 * M * M * M * L + M * M * L - 3 * M * L) / 2;
}

}  // namespace xlsim
