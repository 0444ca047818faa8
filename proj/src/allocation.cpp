#include "xlsim/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "xlsim/textio.hpp"

namespace xlsim {

namespace {

std::vector<int> descending_gain_order(const ChannelStatistics& stats) {
    std::vector<int> order(stats.num_ues);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return stats.gain_avg[a] > stats.gain_avg[b]; });
    return order;
}

// Serving-set NMSE of each UE in `subset` under `pilots`: the error-trace
// sum over its serving subarrays against the correlation-trace sum.
std::vector<double> serving_nmse_for(const ChannelStatistics& stats, const PilotConfig& pilots,
                                     const SelectionMatrixSet& sel, const std::vector<int>& subset) {
    const int m = stats.antennas_per_subarray;
    std::map<std::pair<int, int>, la::LdlFactor> factors;  // (pilot, subarray)
    la::CVec col(m);
    std::vector<double> out;
    out.reserve(subset.size());
    for (int i : subset) {
        const int t = pilots.pilot_of[i];
        const double w = stats.tx_power[i] * pilots.tau_p;
        double num = 0.0, den = 0.0;
        for (int l : sel.serving[i]) {
            auto key = std::make_pair(t, l);
            auto it = factors.find(key);
            if (it == factors.end())
                it = factors.emplace(key, la::ldl_factor(pilot_matrix(stats, pilots, t, l))).first;
            const la::CMat& cov = stats.nlos_cov[i][l];
            // tr(R Psi^{-1} R) column by column
            double tr_rpr = 0.0;
            for (int j = 0; j < m; ++j) {
                std::copy(cov.col(j), cov.col(j) + m, col.begin());
                la::ldl_solve_in_place(it->second, col.data());
                tr_rpr += la::dot_conj(cov.col(j), col.data(), m).real();
            }
            num += la::trace_real(cov) - w * tr_rpr;
            den += la::trace_real(stats.corr[i][l]);
        }
        if (den <= 0.0) throw ModelError("serving_nmse_for: zero-gain UE");
        out.push_back(num / den);
    }
    return out;
}

struct GreedyContext {
    const ChannelStatistics& stats;
    const SelectionMatrixSet& sel;
    int tau_c;
    std::vector<int> pilot_of;
    std::vector<int> scheduled;
    int tau_p = 0;

    PilotConfig candidate(int ue, int pilot) const {
        std::vector<int> cand_pilot = pilot_of;
        cand_pilot[ue] = pilot;
        std::vector<int> cand_sched = scheduled;
        cand_sched.push_back(ue);
        return PilotConfig::from_assignment(cand_sched, cand_pilot, stats.num_ues, tau_c,
                                            std::max(tau_p, pilot + 1));
    }
};

int effective_u_switch(const SwitchRule& rule, const ChannelStatistics& stats, const PilotConfig& pilots,
                       OperationMode mode, int l_serving) {
    if (rule.provenance == SwitchProvenance::ConfigOverride) return rule.u_switch;
    return u_switch(stats.spatially_correlated, pilots.has_reuse(), mode, stats.antennas_per_subarray, l_serving)
        .u_switch;
}

// Deterministic per-UE SE under a candidate assignment; `base_sinr` (when
// non-null) supplies reusable ergodic SINR aggregates for UEs whose error
// covariance the candidate cannot touch.
struct DetEvaluator {
    const ChannelStatistics& stats;
    const SelectionMatrixSet& sel;
    const SwitchRule& rule;
    OperationMode mode;
    int tau_c;

    struct UeResult {
        double sinr_sum = 0.0;               // centralized value or sum of locals
        std::vector<double> local;           // distributed only
    };

    // SE of UE i given its aggregate SINR and the candidate pilot length
    double se_of(double sinr, int tau) const {
        return (1.0 - static_cast<double>(tau) / tau_c) * std::log2(1.0 + sinr);
    }

    UeResult eval_ue(const EstimationModel& model, const PilotConfig& pilots, int i, ApproxKind kind) const {
        UeResult r;
        if (mode == OperationMode::Centralized) {
            const DeterministicSinr s = (kind == ApproxKind::Ergodic)
                                            ? ergodic_sinr_centralized(stats, model, pilots, sel, i)
                                            : asymptotic_sinr_centralized(stats, model, pilots, sel, i);
            r.sinr_sum = s.value;
        } else {
            const DeterministicSinr s = (kind == ApproxKind::Ergodic)
                                            ? ergodic_sinr_distributed(stats, model, pilots, sel, i)
                                            : asymptotic_sinr_distributed(stats, model, pilots, sel, i);
            r.local = s.per_subarray;
            for (double g : r.local) r.sinr_sum += g;
        }
        return r;
    }
};

}  // namespace

AllocationState schedule_nmse(const ChannelStatistics& stats, const SelectionMatrixSet& sel, double gamma_th,
                              int tau_c, const AllocationOptions& opt) {
    if (!(gamma_th > 0.0)) throw ModelError("schedule_nmse: gamma_th must be positive");
    const int K = stats.num_ues;
    const std::vector<int> order = descending_gain_order(stats);

    GreedyContext ctx{stats, sel, tau_c, std::vector<int>(K, -1), {}, 0};
    AllocationState st;
    double gamma_max = 0.0;
    size_t next = 0;

    std::vector<double> base_scores;  // per admitted UE, current assignment
    while (st.scheduled.size() < static_cast<size_t>(K) && gamma_max <= gamma_th) {
        const int k = order[next++];
        const int num_candidates = ctx.tau_p + (ctx.tau_p < tau_c ? 1 : 0);

        int best_t = -1;
        double best_val = std::numeric_limits<double>::infinity();
        for (int t = 0; t < num_candidates; ++t) {
            const PilotConfig cand = ctx.candidate(k, t);
            double val = 0.0;
            if (opt.incremental && t < ctx.tau_p) {
                // same pilot length; only the sharers of pilot t move
                std::vector<int> touched = cand.sharers[t];
                const std::vector<double> touched_scores = serving_nmse_for(stats, cand, sel, touched);
                for (double g : touched_scores) val = std::max(val, g);
                for (size_t i = 0; i < ctx.scheduled.size(); ++i) {
                    if (ctx.pilot_of[ctx.scheduled[i]] == t) continue;
                    val = std::max(val, base_scores[i]);
                }
            } else {
                std::vector<int> eval = ctx.scheduled;
                eval.push_back(k);
                const std::vector<double> scores = serving_nmse_for(stats, cand, sel, eval);
                for (double g : scores) val = std::max(val, g);
            }
            if (val < best_val) {
                best_val = val;
                best_t = t;
            }
        }

        gamma_max = best_val;
        const bool admit = gamma_max <= gamma_th;
        if (admit) {
            ctx.pilot_of[k] = best_t;
            ctx.scheduled.push_back(k);
            ctx.tau_p = std::max(ctx.tau_p, best_t + 1);
            st.scheduled.push_back(k);
            if (opt.incremental) {
                const PilotConfig committed = PilotConfig::from_assignment(ctx.scheduled, ctx.pilot_of, K, tau_c);
                base_scores = serving_nmse_for(stats, committed, sel, ctx.scheduled);
            }
        }
        st.trace.push_back({k, best_t, best_val, admit, ctx.tau_p});
        if (next >= order.size()) break;
    }

    st.pilots = ctx.scheduled.empty()
                    ? PilotConfig{}
                    : PilotConfig::from_assignment(ctx.scheduled, ctx.pilot_of, K, tau_c);
    st.served.assign(K, 0);
    for (int k : st.scheduled) st.served[k] = 1;
    return st;
}

namespace {

AllocationState schedule_sinr_impl(const ChannelStatistics& stats, const SelectionMatrixSet& sel, double eta_th,
                                   int tau_c, const SwitchRule& rule, OperationMode mode,
                                   const AllocationOptions& opt) {
    if (eta_th < 0.0) throw ModelError("schedule_sinr: eta_th must be nonnegative");
    if (tau_c < 2) throw ModelError("schedule_sinr: coherence block too short for pilots and data");
    const int K = stats.num_ues;
    const std::vector<int> order = descending_gain_order(stats);
    const DetEvaluator det{stats, sel, rule, mode, tau_c};

    GreedyContext ctx{stats, sel, tau_c, std::vector<int>(K, -1), {}, 0};
    AllocationState st;
    st.weights.mu.assign(K, std::vector<double>(stats.num_subarrays, 0.0));

    double eta_min = 2.0 * eta_th;  // sentinel, not an admission value
    size_t next = 0;
    bool first = true;

    // base model of the committed assignment, for the incremental path
    std::shared_ptr<const EstimationModel> base_model;

    while (st.scheduled.size() < static_cast<size_t>(K) && (first || eta_min > eta_th)) {
        first = false;
        const int k = order[next++];
        // keep at least one data symbol: new pilots only while tau_p < tau_c - 1
        const int num_candidates = ctx.tau_p + (ctx.tau_p < tau_c - 1 ? 1 : 0);
        if (num_candidates == 0) break;

        int best_t = -1;
        double best_val = -std::numeric_limits<double>::infinity();
        std::vector<std::vector<double>> best_weights;  // per scheduled order, distributed only

        for (int t = 0; t < num_candidates; ++t) {
            const PilotConfig cand = ctx.candidate(k, t);
            auto model = build_estimation_model(stats, cand, /*with_gains=*/false);

            const int count = static_cast<int>(cand.scheduled.size());
            bool all_ergodic = true;
            std::vector<ApproxKind> kinds(cand.scheduled.size());
            for (size_t i = 0; i < cand.scheduled.size(); ++i) {
                const int ue = cand.scheduled[i];
                const int uswitch = effective_u_switch(rule, stats, cand, mode, sel.l_serving(ue));
                kinds[i] = (count <= uswitch) ? ApproxKind::Asymptotic : ApproxKind::Ergodic;
                if (kinds[i] == ApproxKind::Asymptotic) all_ergodic = false;
            }

            double val = std::numeric_limits<double>::infinity();
            std::vector<std::vector<double>> cand_weights(cand.scheduled.size());
            const bool reuse_base = opt.incremental && all_ergodic && t < ctx.tau_p && base_model != nullptr;
            for (size_t i = 0; i < cand.scheduled.size(); ++i) {
                const int ue = cand.scheduled[i];
                DetEvaluator::UeResult r;
                if (reuse_base && ue != k && ctx.pilot_of[ue] != t) {
                    // untouched error covariance: evaluate against the
                    // committed model with the candidate interferer set
                    r = det.eval_ue(*base_model, cand, ue, kinds[i]);
                } else {
                    r = det.eval_ue(*model, cand, ue, kinds[i]);
                }
                if (mode == OperationMode::Distributed) {
                    double acc = 0.0;
                    for (double g : r.local) acc += g;
                    cand_weights[i].assign(r.local.size(), 0.0);
                    if (acc > 0.0)
                        for (size_t j = 0; j < r.local.size(); ++j) cand_weights[i][j] = r.local[j] / acc;
                    else
                        std::fill(cand_weights[i].begin(), cand_weights[i].end(),
                                  1.0 / static_cast<double>(r.local.size()));
                }
                val = std::min(val, det.se_of(r.sinr_sum, cand.tau_p));
            }
            if (val > best_val) {
                best_val = val;
                best_t = t;
                best_weights = std::move(cand_weights);
            }
        }

        eta_min = best_val;
        const bool admit = eta_min >= eta_th;
        if (admit) {
            ctx.pilot_of[k] = best_t;
            ctx.scheduled.push_back(k);
            ctx.tau_p = std::max(ctx.tau_p, best_t + 1);
            st.scheduled.push_back(k);
            if (mode == OperationMode::Distributed) {
                for (size_t i = 0; i < ctx.scheduled.size(); ++i) {
                    const int ue = ctx.scheduled[i];
                    const std::vector<int>& serving = sel.serving[ue];
                    std::fill(st.weights.mu[ue].begin(), st.weights.mu[ue].end(), 0.0);
                    for (size_t j = 0; j < serving.size(); ++j) st.weights.mu[ue][serving[j]] = best_weights[i][j];
                }
            }
            if (opt.incremental) {
                const PilotConfig committed = PilotConfig::from_assignment(ctx.scheduled, ctx.pilot_of,
                                                                           stats.num_ues, tau_c);
                base_model = build_estimation_model(stats, committed, /*with_gains=*/false);
            }
        }
        st.trace.push_back({k, best_t, best_val, admit, ctx.tau_p});
        if (next >= order.size()) break;
    }

    st.pilots = ctx.scheduled.empty()
                    ? PilotConfig{}
                    : PilotConfig::from_assignment(ctx.scheduled, ctx.pilot_of, stats.num_ues, tau_c);
    st.served.assign(K, 0);
    for (int k : st.scheduled) st.served[k] = 1;
    return st;
}

}  // namespace

AllocationState schedule_sinr_centralized(const ChannelStatistics& stats, const SelectionMatrixSet& sel,
                                          double eta_th, int tau_c, const SwitchRule& rule,
                                          const AllocationOptions& opt) {
    return schedule_sinr_impl(stats, sel, eta_th, tau_c, rule, OperationMode::Centralized, opt);
}

AllocationState schedule_sinr_distributed(const ChannelStatistics& stats, const SelectionMatrixSet& sel,
                                          double eta_th, int tau_c, const SwitchRule& rule,
                                          const AllocationOptions& opt) {
    return schedule_sinr_impl(stats, sel, eta_th, tau_c, rule, OperationMode::Distributed, opt);
}

AllocationState schedule_sinr_numeric(const ChannelStatistics& stats, const SelectionMatrixSet& sel, double eta_th,
                                      int tau_c, OperationMode mode, int trials, std::uint64_t seed) {
    if (eta_th < 0.0) throw ModelError("schedule_sinr_numeric: eta_th must be nonnegative");
    if (trials < 1) throw ModelError("schedule_sinr_numeric: trials must be positive");
    const int K = stats.num_ues;
    const std::vector<int> order = descending_gain_order(stats);
    const ChannelSampler sampler(stats);

    GreedyContext ctx{stats, sel, tau_c, std::vector<int>(K, -1), {}, 0};
    AllocationState st;
    st.weights.mu.assign(K, std::vector<double>(stats.num_subarrays, 0.0));

    double eta_min = 2.0 * eta_th;
    size_t next = 0;
    bool first = true;
    int iter = 0;

    while (st.scheduled.size() < static_cast<size_t>(K) && (first || eta_min > eta_th)) {
        first = false;
        const int k = order[next++];
        const int num_candidates = ctx.tau_p + (ctx.tau_p < tau_c - 1 ? 1 : 0);
        if (num_candidates == 0) break;

        int best_t = -1;
        double best_val = -std::numeric_limits<double>::infinity();

        for (int t = 0; t < num_candidates; ++t) {
            const PilotConfig cand = ctx.candidate(k, t);
            auto model = build_estimation_model(stats, cand);

            // mean instantaneous SINR per candidate UE; slots keep the
            // reduction order fixed under any thread count
            std::vector<std::vector<double>> slot(trials);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
            for (int trial = 0; trial < trials; ++trial) {
                rng::Stream h_stream = rng::derive_stream(seed, rng::salt::kAllocation, iter, trial, 0);
                rng::Stream n_stream = rng::derive_stream(seed, rng::salt::kAllocation, iter, trial, 100 + t);
                ChannelRealization real = sampler.sample(h_stream);
                ChannelEstimate est;
                est.model = model;
                mmse_estimate_into(est, real, stats, cand, n_stream);

                std::vector<double> sinr(cand.scheduled.size(), 0.0);
                if (mode == OperationMode::Centralized) {
                    const std::vector<double> all = centralized_sinrs_fast(est, sel, stats);
                    for (size_t i = 0; i < cand.scheduled.size(); ++i) sinr[i] = all[cand.scheduled[i]];
                } else {
                    DistributedTrial dt(stats, sel);
                    dt.evaluate(est);
                    for (size_t i = 0; i < cand.scheduled.size(); ++i) {
                        for (double g : dt.local_sinrs(cand.scheduled[i])) sinr[i] += g;
                    }
                }
                slot[trial] = std::move(sinr);
            }

            double val = std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < cand.scheduled.size(); ++i) {
                double mean = 0.0;
                for (int trial = 0; trial < trials; ++trial) mean += slot[trial][i];
                mean /= trials;
                const double se = (1.0 - static_cast<double>(cand.tau_p) / tau_c) * std::log2(1.0 + mean);
                val = std::min(val, se);
            }
            if (val > best_val) {
                best_val = val;
                best_t = t;
            }
        }

        eta_min = best_val;
        const bool admit = eta_min >= eta_th;
        if (admit) {
            ctx.pilot_of[k] = best_t;
            ctx.scheduled.push_back(k);
            ctx.tau_p = std::max(ctx.tau_p, best_t + 1);
            st.scheduled.push_back(k);
        }
        st.trace.push_back({k, best_t, best_val, admit, ctx.tau_p});
        ++iter;
        if (next >= order.size()) break;
    }

    st.pilots = ctx.scheduled.empty()
                    ? PilotConfig{}
                    : PilotConfig::from_assignment(ctx.scheduled, ctx.pilot_of, stats.num_ues, tau_c);
    st.served.assign(K, 0);
    for (int k : st.scheduled) st.served[k] = 1;
    return st;
}

AllocationState baseline_random(const ChannelStatistics& stats, int tau_p, int tau_c, rng::Stream& stream,
                                int num_scheduled) {
    if (tau_p < 1) throw ModelError("baseline_random: tau_p must be positive");
    const int K = stats.num_ues;
    const int u = (num_scheduled < 0) ? K : std::min(num_scheduled, K);
    const std::vector<int> order = descending_gain_order(stats);

    AllocationState st;
    std::vector<int> pilot_of(K, -1);
    for (int i = 0; i < u; ++i) {
        const int k = order[i];
        pilot_of[k] = stream.uniform_int(tau_p);
        st.scheduled.push_back(k);
        st.trace.push_back({k, pilot_of[k], 0.0, true, tau_p});
    }
    st.pilots = PilotConfig::from_assignment(st.scheduled, pilot_of, K, tau_c, tau_p);
    st.served.assign(K, 0);
    for (int k : st.scheduled) st.served[k] = 1;
    return st;
}

AllocationState baseline_greedy_book(const ChannelStatistics& stats, const SelectionMatrixSet& sel, int tau_p,
                                     int tau_c, rng::Stream& stream) {
    const int K = stats.num_ues;
    const int L = stats.num_subarrays;
    if (tau_p > K) throw ModelError("baseline_greedy_book: more pilots than UEs");
    if (tau_p < 1) throw ModelError("baseline_greedy_book: tau_p must be positive");

    std::vector<int> pilot_of(K, -1);

    // stage one: orthogonal pilots to random seed UEs
    std::vector<int> pool(K);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < tau_p; ++i) {
        const int j = i + stream.uniform_int(K - i);
        std::swap(pool[i], pool[j]);
        pilot_of[pool[i]] = i;
    }

    // stage two: remaining UEs by descending gain, least contaminated pilot
    // at the strongest subarray
    std::vector<std::vector<int>> sharers(tau_p);
    for (int k = 0; k < K; ++k)
        if (pilot_of[k] >= 0) sharers[pilot_of[k]].push_back(k);

    const std::vector<int> order = descending_gain_order(stats);
    for (int k : order) {
        if (pilot_of[k] >= 0) continue;
        int strongest = 0;
        for (int l = 1; l < L; ++l)
            if (stats.gain[k][l] > stats.gain[k][strongest]) strongest = l;
        int best_t = 0;
        double best_val = std::numeric_limits<double>::infinity();
        for (int t = 0; t < tau_p; ++t) {
            double contamination = 0.0;
            for (int i : sharers[t]) contamination += stats.gain_nlos[i][strongest];
            if (contamination < best_val) {
                best_val = contamination;
                best_t = t;
            }
        }
        pilot_of[k] = best_t;
        sharers[best_t].push_back(k);
    }

    // stage three: per (subarray, pilot), keep the strongest UE among those
    // the subarray serves; ties go to the lowest UE index
    std::vector<char> served(K, 0);
    for (int l = 0; l < L; ++l) {
        for (int t = 0; t < tau_p; ++t) {
            int best = -1;
            for (int k = 0; k < K; ++k) {
                if (pilot_of[k] != t) continue;
                const std::vector<int>& serving = sel.serving[k];
                if (!std::binary_search(serving.begin(), serving.end(), l)) continue;
                if (best < 0 || stats.gain[k][l] > stats.gain[best][l]) best = k;
            }
            if (best >= 0) served[best] = 1;
        }
    }

    AllocationState st;
    for (int k : order) {
        st.scheduled.push_back(k);
        st.trace.push_back({k, pilot_of[k], 0.0, true, tau_p});
    }
    st.pilots = PilotConfig::from_assignment(st.scheduled, pilot_of, K, tau_c, tau_p);
    st.served = served;
    return st;
}

double evaluate_min_se(const ChannelStatistics& stats, const SelectionMatrixSet& sel, const PilotConfig& pilots,
                       OperationMode mode, const ExhaustiveOptions& opt) {
    if (opt.metric == ExhaustiveMetric::DeterministicMinSe) {
        auto model = build_estimation_model(stats, pilots, /*with_gains=*/false);
        const int count = static_cast<int>(pilots.scheduled.size());
        double val = std::numeric_limits<double>::infinity();
        for (int ue : pilots.scheduled) {
            SwitchRule rule;
            if (opt.u_switch_override) {
                rule.u_switch = *opt.u_switch_override;
                rule.provenance = SwitchProvenance::ConfigOverride;
            } else {
                rule = u_switch(stats.spatially_correlated, pilots.has_reuse(), mode,
                                stats.antennas_per_subarray, sel.l_serving(ue));
            }
            const ApproxKind kind = select_approximation(count, rule);
            double sinr = 0.0;
            if (mode == OperationMode::Centralized) {
                sinr = (kind == ApproxKind::Ergodic)
                           ? ergodic_sinr_centralized(stats, *model, pilots, sel, ue).value
                           : asymptotic_sinr_centralized(stats, *model, pilots, sel, ue).value;
            } else {
                const DeterministicSinr s = (kind == ApproxKind::Ergodic)
                                                ? ergodic_sinr_distributed(stats, *model, pilots, sel, ue)
                                                : asymptotic_sinr_distributed(stats, *model, pilots, sel, ue);
                for (double g : s.per_subarray) sinr += g;
            }
            val = std::min(val, se_map(sinr, pilots.tau_p, pilots.tau_c));
        }
        return val;
    }

    const ChannelSampler sampler(stats);
    auto model = build_estimation_model(stats, pilots);
    std::vector<double> mean_se(pilots.scheduled.size(), 0.0);
    ChannelRealization real;
    ChannelEstimate est;
    est.model = model;
    DistributedTrial dt(stats, sel);
    for (int trial = 0; trial < opt.trials; ++trial) {
        rng::Stream h_stream = rng::derive_stream(opt.seed, rng::salt::kOracle, trial, 0);
        rng::Stream n_stream = rng::derive_stream(opt.seed, rng::salt::kOracle, trial, 1);
        sampler.sample_into(real, h_stream);
        mmse_estimate_into(est, real, stats, pilots, n_stream);
        if (mode == OperationMode::Centralized) {
            const std::vector<double> all = centralized_sinrs_fast(est, sel, stats);
            for (size_t i = 0; i < pilots.scheduled.size(); ++i)
                mean_se[i] += se_map(all[pilots.scheduled[i]], pilots.tau_p, pilots.tau_c);
        } else {
            dt.evaluate(est);
            for (size_t i = 0; i < pilots.scheduled.size(); ++i) {
                const int ue = pilots.scheduled[i];
                const std::vector<double>& locals = dt.local_sinrs(ue);
                std::vector<double> weights(locals.size(), 0.0);
                double acc = 0.0;
                for (double g : locals) acc += g;
                if (acc > 0.0)
                    for (size_t j = 0; j < locals.size(); ++j) weights[j] = locals[j] / acc;
                else
                    std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(locals.size()));
                mean_se[i] += se_map(dt.global_exact(ue, weights), pilots.tau_p, pilots.tau_c);
            }
        }
    }
    double val = std::numeric_limits<double>::infinity();
    for (double se : mean_se) val = std::min(val, se / opt.trials);
    return val;
}

ExhaustiveResult exhaustive_search(const ChannelStatistics& stats, const SelectionMatrixSet& sel, int num_ues,
                                   int tau_p_max, int tau_c, OperationMode mode, const ExhaustiveOptions& opt) {
    if (num_ues > 8) throw ModelError("exhaustive_search: more than 8 UEs is combinatorially off the table");
    if (num_ues > stats.num_ues) throw ModelError("exhaustive_search: not enough UEs in the scenario");
    const std::vector<int> order_full = descending_gain_order(stats);
    const std::vector<int> order(order_full.begin(), order_full.begin() + num_ues);
    const int max_pilots = std::min({tau_p_max, tau_c - 1, num_ues});
    if (max_pilots < 1) throw ModelError("exhaustive_search: no feasible pilot count");

    // restricted growth strings enumerate assignments up to pilot relabeling
    std::vector<std::vector<int>> assignments;
    std::vector<int> a(num_ues, 0);
    while (true) {
        int blocks = 0;
        for (int x : a) blocks = std::max(blocks, x + 1);
        if (blocks <= max_pilots) assignments.push_back(a);
        int i = num_ues - 1;
        for (; i > 0; --i) {
            int prefix_max = 0;
            for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, a[j]);
            if (a[i] <= prefix_max) {
                ++a[i];
                std::fill(a.begin() + i + 1, a.end(), 0);
                break;
            }
            a[i] = 0;
        }
        if (i == 0) break;
    }

    std::vector<double> score(assignments.size(), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (size_t idx = 0; idx < assignments.size(); ++idx) {
        std::vector<int> pilot_of(stats.num_ues, -1);
        for (int i = 0; i < num_ues; ++i) pilot_of[order[i]] = assignments[idx][i];
        const PilotConfig pilots = PilotConfig::from_assignment(order, pilot_of, stats.num_ues, tau_c);
        score[idx] = evaluate_min_se(stats, sel, pilots, mode, opt);
    }

    size_t best = 0;
    for (size_t idx = 1; idx < assignments.size(); ++idx)
        if (score[idx] > score[best]) best = idx;

    ExhaustiveResult out;
    std::vector<int> pilot_of(stats.num_ues, -1);
    for (int i = 0; i < num_ues; ++i) pilot_of[order[i]] = assignments[best][i];
    out.state.scheduled = order;
    out.state.pilots = PilotConfig::from_assignment(order, pilot_of, stats.num_ues, tau_c);
    out.state.served.assign(stats.num_ues, 0);
    for (int k : order) out.state.served[k] = 1;
    for (int i = 0; i < num_ues; ++i)
        out.state.trace.push_back({order[i], pilot_of[order[i]], score[best], true, out.state.pilots.tau_p});
    out.best_min_se = score[best];
    return out;
}

std::string serialize_report(const AllocationState& state) {
    std::ostringstream os;
    os << "# allocation report\n";
    os << "scheduled";
    for (int k : state.scheduled) os << ' ' << k;
    os << '\n';
    os << "tau_p " << state.pilots.tau_p << '\n';
    os << "tau_c " << state.pilots.tau_c << '\n';
    for (int k : state.scheduled) os << "pilot ue=" << k << " t=" << state.pilots.pilot_of[k] + 1 << '\n';
    if (!state.weights.mu.empty()) {
        for (int k : state.scheduled) {
            const std::vector<double>& row = state.weights.mu[k];
            for (size_t l = 0; l < row.size(); ++l)
                if (row[l] != 0.0) os << "weight ue=" << k << " l=" << l << " mu=" << format_double(row[l]) << '\n';
        }
    }
    for (size_t k = 0; k < state.served.size(); ++k)
        if (!state.served[k] &&
            std::find(state.scheduled.begin(), state.scheduled.end(), static_cast<int>(k)) != state.scheduled.end())
            os << "unserved ue=" << k << '\n';
    for (size_t i = 0; i < state.trace.size(); ++i) {
        const TraceEntry& e = state.trace[i];
        os << "trace step=" << i + 1 << " ue=" << e.ue << " pilot=" << e.pilot + 1
           << " metric=" << format_double(e.metric) << " admitted=" << (e.admitted ? 1 : 0)
           << " tau_p=" << e.tau_p_after << '\n';
    }
    return os.str();
}

}  // namespace xlsim
