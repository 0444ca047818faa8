#include "xlsim/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "xlsim/textio.hpp"

namespace xlsim {

namespace {

double pairwise_sum(const double* x, size_t n) {
    if (n <= 8) {
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) acc += x[i];
        return acc;
    }
    const size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double sample_mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
}

double sample_stderr(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    std::vector<double> sq(v.size());
    for (size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(sq.data(), sq.size()) / static_cast<double>(v.size() - 1);
    return std::sqrt(var / static_cast<double>(v.size()));
}

double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

std::uint64_t drop_seed_of(std::uint64_t seed, int drop) {
    std::uint64_t state = seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(drop + 1);
    return rng::splitmix64(state);
}

struct UnitSpec {
    int corr_idx = 0;
    CorrelationMode corr = CorrelationMode::LocalScattering;
    AllocationKind alloc = AllocationKind::Fixed;
    PilotScheme scheme = PilotScheme::Random;
    SelectionStrategy selection = SelectionStrategy::Lsf;
    int l_serving = 1;
    OperationMode bound_mode = OperationMode::Centralized;
    bool mode_bound = false;  // Sinr / SinrNumeric / Exhaustive bind pilots to a mode
    int index = 0;            // stable id across sweep values, drives RNG salts
};

struct LabelPolicy {
    bool corr = false, alloc = false, scheme = false, sel = false, lk = false, mode = false, weighting = false;
};

std::string make_label(const UnitSpec& u, const LabelPolicy& pol, const OperationMode* mode,
                       const WeightingStrategy* w) {
    std::string s;
    if (pol.mode && mode) s += ":" + to_string(*mode);
    if (pol.alloc) s += ":" + to_string(u.alloc);
    if (pol.scheme && u.alloc == AllocationKind::Fixed) s += ":" + to_string(u.scheme);
    if (pol.corr) s += ":" + to_string(u.corr);
    if (pol.sel) s += ":" + to_string(u.selection);
    if (pol.lk) s += ":Lk=" + std::to_string(u.l_serving);
    if (pol.weighting && w && mode && *mode == OperationMode::Distributed) s += ":" + to_string(*w);
    return s;
}

struct ResolvedUnit {
    const UnitSpec* spec = nullptr;
    SelectionMatrixSet sel;
    PilotConfig pilots;
    int est_group = -1;
    std::vector<OperationMode> modes;
    int scheduled_count = 0;
    std::vector<char> served;                        // indexed by UE id
    std::vector<std::vector<double>> committed_mu;   // [scheduled idx][serving idx]; may be empty
    // deterministic SEs per scheduled idx (filled when approximations are on)
    std::vector<double> det_cent_erg, det_cent_asy;
    std::vector<std::vector<double>> det_dist_erg, det_dist_asy;  // locals
    // trial-slot layout
    size_t offset = 0;
    bool with_cent = false, with_dist = false;
};

struct EstGroup {
    int corr_idx = 0;
    PilotConfig pilots;
    std::shared_ptr<const EstimationModel> model;
};

std::string pilot_signature(int corr_idx, const PilotConfig& p) {
    std::ostringstream os;
    os << corr_idx << '|' << p.tau_p << '|' << p.tau_c << '|';
    for (int k : p.scheduled) os << k << ':' << p.pilot_of[k] << ',';
    return os.str();
}

struct Accumulators {
    std::map<std::string, std::vector<double>> samples;  // mean/stderr rows
    std::map<std::string, std::vector<double>> pools;    // percentile pools (per-UE mean SE)
    std::map<std::string, double> consts;
    long zero_truth_dropped = 0;
};

std::vector<int> top_by_gain(const ChannelStatistics& stats, int count) {
    std::vector<int> order(stats.num_ues);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return stats.gain_avg[a] > stats.gain_avg[b]; });
    order.resize(count);
    return order;
}

class PointRunner {
public:
    PointRunner(const ScenarioConfig& cfg, int sweep_value, int drop, int threads, Accumulators& acc,
                std::map<std::string, AllocationState>& prefix_cache, std::ostream& diag)
        : cfg_(cfg), sv_(sweep_value), drop_(drop), threads_(threads), acc_(acc), prefix_cache_(prefix_cache),
          diag_(diag) {
        pc_ = cfg;
        switch (cfg.sweep) {
            case SweepAxis::M: pc_.antennas_per_subarray = sweep_value; break;
            case SweepAxis::U: pc_.scheduled_ues = sweep_value; break;
            case SweepAxis::Lk: pc_.l_serving = {sweep_value}; break;
            case SweepAxis::TauC:
                pc_.tau_c = sweep_value;
                pc_.tau_c_rule = TauRule::Fixed;
                break;
        }
        pc_.seed = drop_seed_of(cfg.seed, drop);
        pol_.corr = cfg.correlation.size() > 1;
        pol_.alloc = cfg.allocations.size() > 1;
        pol_.scheme = cfg.pilot_schemes.size() > 1;
        pol_.sel = cfg.selections.size() > 1;
        pol_.lk = cfg.l_serving.size() > 1 && cfg.sweep != SweepAxis::Lk;
        pol_.mode = cfg.modes.size() > 1;
        pol_.weighting = cfg.weightings.size() > 1;
    }

    void run();

private:
    const ScenarioConfig& cfg_;
    ScenarioConfig pc_;
    int sv_;
    int drop_;
    int threads_;
    Accumulators& acc_;
    std::map<std::string, AllocationState>& prefix_cache_;
    std::ostream& diag_;
    LabelPolicy pol_;

    SystemGeometry geom_;
    std::vector<std::shared_ptr<const ChannelStatistics>> stats_;
    std::vector<std::shared_ptr<const ChannelSampler>> samplers_;
    std::vector<UnitSpec> specs_;
    std::vector<ResolvedUnit> units_;
    std::vector<EstGroup> groups_;

    void skip(const UnitSpec& spec, const std::string& why) {
        diag_ << "xlsim: sweep=" << sv_ << " drop=" << drop_ << " variant " << spec.index << " skipped: " << why
              << "\n";
    }

    int resolve_scheduled(int num_ues) const {
        if (pc_.scheduled_ues < 0) return num_ues;
        return std::min(pc_.scheduled_ues, num_ues);
    }
    int tau_c_for(int u) const { return pc_.tau_c_rule == TauRule::EqualU ? u : pc_.tau_c; }
    int tau_p_for(int u) const {
        switch (pc_.tau_p_rule) {
            case TauRule::EqualU: return u;
            case TauRule::HalfU: return (u + 1) / 2;
            default: return pc_.tau_p;
        }
    }

    void build_specs();
    void resolve_units();
    bool resolve_pilots(const UnitSpec& spec, ResolvedUnit& unit);
    SinrContext sinr_context(const ChannelStatistics& stats, const PilotConfig* pilots) const;
    std::vector<std::vector<double>> statistical_weights(const ResolvedUnit& unit) const;
    void deterministic_metrics();
    void monte_carlo();
};

void PointRunner::build_specs() {
    int index = 0;
    for (size_t ci = 0; ci < cfg_.correlation.size(); ++ci) {
        for (AllocationKind alloc : cfg_.allocations) {
            const bool bound = (alloc == AllocationKind::Sinr || alloc == AllocationKind::SinrNumeric ||
                                alloc == AllocationKind::Exhaustive);
            const std::vector<PilotScheme> schemes =
                alloc == AllocationKind::Fixed ? cfg_.pilot_schemes : std::vector<PilotScheme>{PilotScheme::Random};
            for (PilotScheme scheme : schemes) {
                for (SelectionStrategy selection : cfg_.selections) {
                    const std::vector<int> lks =
                        cfg_.sweep == SweepAxis::Lk ? std::vector<int>{sv_} : cfg_.l_serving;
                    for (int lk : lks) {
                        if (bound) {
                            for (OperationMode mode : cfg_.modes) {
                                UnitSpec s;
                                s.corr_idx = static_cast<int>(ci);
                                s.corr = cfg_.correlation[ci];
                                s.alloc = alloc;
                                s.scheme = scheme;
                                s.selection = selection;
                                s.l_serving = lk;
                                s.bound_mode = mode;
                                s.mode_bound = true;
                                s.index = index++;
                                specs_.push_back(s);
                            }
                        } else {
                            UnitSpec s;
                            s.corr_idx = static_cast<int>(ci);
                            s.corr = cfg_.correlation[ci];
                            s.alloc = alloc;
                            s.scheme = scheme;
                            s.selection = selection;
                            s.l_serving = lk;
                            s.index = index++;
                            specs_.push_back(s);
                        }
                    }
                }
            }
        }
    }
}

SinrContext PointRunner::sinr_context(const ChannelStatistics& stats, const PilotConfig* pilots) const {
    const int K = stats.num_ues, L = stats.num_subarrays;
    PilotConfig proxy;
    if (pilots == nullptr) {
        std::vector<int> all(K);
        std::iota(all.begin(), all.end(), 0);
        proxy = PilotConfig::orthogonal(all, K, K);
        pilots = &proxy;
    }
    auto model = build_estimation_model(stats, *pilots, /*with_gains=*/false);
    SelectionMatrixSet full;
    full.serving.assign(K, {});
    std::vector<int> all_l(L);
    std::iota(all_l.begin(), all_l.end(), 0);
    for (int k = 0; k < K; ++k) full.serving[k] = all_l;

    SinrContext ctx;
    ctx.local_sinr.assign(K, std::vector<double>(L, 0.0));
    for (int k = 0; k < K; ++k) {
        if (pilots->pilot_of[k] < 0) {
            ctx.local_sinr[k] = stats.gain[k];  // unscheduled: gain proxy, never load-bearing
            continue;
        }
        const DeterministicSinr s = ergodic_sinr_distributed(stats, *model, *pilots, full, k);
        ctx.local_sinr[k] = s.per_subarray;
    }
    return ctx;
}

bool PointRunner::resolve_pilots(const UnitSpec& spec, ResolvedUnit& unit) {
    const ChannelStatistics& stats = *stats_[spec.corr_idx];
    const int K = stats.num_ues;
    const bool prefix_mode = (cfg_.sweep == SweepAxis::U) &&
                             (spec.alloc == AllocationKind::Nmse || spec.alloc == AllocationKind::Sinr ||
                              spec.alloc == AllocationKind::SinrNumeric);

    const int u_req = (spec.alloc == AllocationKind::Fixed || spec.alloc == AllocationKind::RandomBaseline ||
                       spec.alloc == AllocationKind::Exhaustive)
                          ? resolve_scheduled(K)
                          : K;
    const int tau_c = tau_c_for(u_req);

    switch (spec.alloc) {
        case AllocationKind::Fixed: {
            const int u = resolve_scheduled(K);
            int tau_p = spec.scheme == PilotScheme::Orthogonal ? u : tau_p_for(u);
            if (tau_p < 1 || tau_p > tau_c) {
                skip(spec, "pilot length " + std::to_string(tau_p) + " infeasible for tau_c " + std::to_string(tau_c));
                return false;
            }
            const std::vector<int> order = top_by_gain(stats, u);
            std::vector<int> pilot_of(K, -1);
            if (spec.scheme == PilotScheme::Orthogonal) {
                for (int i = 0; i < u; ++i) pilot_of[order[i]] = i;
            } else {
                rng::Stream stream = rng::derive_stream(pc_.seed, rng::salt::kPilotAssign, spec.index, sv_);
                for (int i = 0; i < u; ++i) pilot_of[order[i]] = stream.uniform_int(tau_p);
            }
            unit.pilots = PilotConfig::from_assignment(order, pilot_of, K, tau_c, tau_p);
            unit.served.assign(K, 0);
            for (int k : order) unit.served[k] = 1;
            return true;
        }
        case AllocationKind::RandomBaseline: {
            const int u = resolve_scheduled(K);
            const int tau_p = tau_p_for(u);
            if (tau_p < 1 || tau_p > tau_c) {
                skip(spec, "pilot length infeasible");
                return false;
            }
            rng::Stream stream = rng::derive_stream(pc_.seed, rng::salt::kPilotAssign, spec.index, sv_);
            const AllocationState st = baseline_random(stats, tau_p, tau_c, stream, u);
            unit.pilots = st.pilots;
            unit.served = st.served;
            return true;
        }
        case AllocationKind::GreedyBook: {
            const int tau_p = tau_p_for(resolve_scheduled(K));
            if (tau_p < 1 || tau_p > K || tau_p > tau_c) {
                skip(spec, "pilot length infeasible for the greedy baseline");
                return false;
            }
            rng::Stream stream = rng::derive_stream(pc_.seed, rng::salt::kAllocation, spec.index);
            const AllocationState st = baseline_greedy_book(stats, unit.sel, tau_p, tau_c, stream);
            unit.pilots = st.pilots;
            unit.served = st.served;
            return true;
        }
        case AllocationKind::Exhaustive: {
            const int u = std::min(resolve_scheduled(K), K);
            if (u > 8) {
                skip(spec, "exhaustive search capped at 8 UEs");
                return false;
            }
            ExhaustiveOptions eopt;
            eopt.trials = cfg_.numeric_alloc_trials;
            eopt.seed = pc_.seed;
            const ExhaustiveResult res =
                exhaustive_search(stats, unit.sel, u, tau_c - 1, tau_c, spec.bound_mode, eopt);
            unit.pilots = res.state.pilots;
            unit.served = res.state.served;
            return true;
        }
        default: break;
    }

    // threshold-driven schedulers; under a U sweep the full admission run is
    // cached and the first sv admissions form the evaluated prefix
    const std::string cache_key = std::to_string(drop_) + "|" + std::to_string(spec.index);
    AllocationState st;
    const auto cached = prefix_cache_.find(cache_key);
    if (prefix_mode && cached != prefix_cache_.end()) {
        st = cached->second;
    } else {
        const double gamma_th = prefix_mode ? 1.0 : pc_.gamma_th;
        const double eta_th = prefix_mode ? 0.0 : pc_.eta_th;
        SwitchRule rule;
        if (pc_.u_switch_override) {
            rule.u_switch = *pc_.u_switch_override;
            rule.provenance = SwitchProvenance::ConfigOverride;
        }
        switch (spec.alloc) {
            case AllocationKind::Nmse: st = schedule_nmse(stats, unit.sel, gamma_th, tau_c); break;
            case AllocationKind::Sinr:
                st = spec.bound_mode == OperationMode::Centralized
                         ? schedule_sinr_centralized(stats, unit.sel, eta_th, tau_c, rule)
                         : schedule_sinr_distributed(stats, unit.sel, eta_th, tau_c, rule);
                break;
            case AllocationKind::SinrNumeric:
                st = schedule_sinr_numeric(stats, unit.sel, eta_th, tau_c, spec.bound_mode,
                                           cfg_.numeric_alloc_trials, pc_.seed + 7777 * (spec.index + 1));
                break;
            default: return false;
        }
        if (prefix_mode) prefix_cache_[cache_key] = st;
    }

    if (st.scheduled.empty()) {
        skip(spec, "scheduler admitted no UE");
        return false;
    }

    if (prefix_mode) {
        const int want = sv_;
        if (static_cast<int>(st.scheduled.size()) < want) {
            skip(spec, "scheduler admitted only " + std::to_string(st.scheduled.size()) + " UEs");
            return false;
        }
        std::vector<int> sched(st.scheduled.begin(), st.scheduled.begin() + want);
        std::vector<int> pilot_of(K, -1);
        int tau_p = 0;
        for (int k : sched) {
            pilot_of[k] = st.pilots.pilot_of[k];
            tau_p = std::max(tau_p, pilot_of[k] + 1);
        }
        unit.pilots = PilotConfig::from_assignment(sched, pilot_of, K, tau_c, tau_p);
        unit.served.assign(K, 0);
        for (int k : sched) unit.served[k] = 1;
    } else {
        unit.pilots = st.pilots;
        unit.served = st.served;
    }

    // distributed schedulers commit statistical aggregation weights
    if (spec.mode_bound && spec.bound_mode == OperationMode::Distributed) {
        unit.committed_mu = statistical_weights(unit);
        if (!prefix_mode && spec.alloc == AllocationKind::Sinr && !st.weights.mu.empty()) {
            unit.committed_mu.clear();
            for (int k : unit.pilots.scheduled) {
                std::vector<double> row;
                for (int l : unit.sel.serving[k]) row.push_back(st.weights.mu[k][l]);
                unit.committed_mu.push_back(std::move(row));
            }
        }
    }
    return true;
}

std::vector<std::vector<double>> PointRunner::statistical_weights(const ResolvedUnit& unit) const {
    const UnitSpec& spec = *unit.spec;
    const ChannelStatistics& stats = *stats_[spec.corr_idx];
    auto model = build_estimation_model(stats, unit.pilots, /*with_gains=*/false);
    const int count = static_cast<int>(unit.pilots.scheduled.size());
    std::vector<std::vector<double>> out;
    for (int k : unit.pilots.scheduled) {
        SwitchRule rule;
        if (pc_.u_switch_override) {
            rule.u_switch = *pc_.u_switch_override;
            rule.provenance = SwitchProvenance::ConfigOverride;
        } else {
            rule = u_switch(stats.spatially_correlated, unit.pilots.has_reuse(), OperationMode::Distributed,
                            stats.antennas_per_subarray, unit.sel.l_serving(k));
        }
        const ApproxKind kind = select_approximation(count, rule);
        const DeterministicSinr s = kind == ApproxKind::Ergodic
                                        ? ergodic_sinr_distributed(stats, *model, unit.pilots, unit.sel, k)
                                        : asymptotic_sinr_distributed(stats, *model, unit.pilots, unit.sel, k);
        double acc = 0.0;
        for (double g : s.per_subarray) acc += g;
        std::vector<double> mu(s.per_subarray.size(), 1.0 / static_cast<double>(s.per_subarray.size()));
        if (acc > 0.0)
            for (size_t j = 0; j < mu.size(); ++j) mu[j] = s.per_subarray[j] / acc;
        out.push_back(std::move(mu));
    }
    return out;
}

void PointRunner::resolve_units() {
    for (const UnitSpec& spec : specs_) {
        const ChannelStatistics& stats = *stats_[spec.corr_idx];
        if (spec.l_serving < 1 || spec.l_serving > stats.num_subarrays) {
            skip(spec, "L_k=" + std::to_string(spec.l_serving) + " outside 1.." +
                           std::to_string(stats.num_subarrays));
            continue;
        }
        ResolvedUnit unit;
        unit.spec = &spec;

        // selection first; the SINR strategy needs deterministic local SINRs,
        // built from the fixed pilot scheme when the unit has one
        const bool fixed_pilots = spec.alloc == AllocationKind::Fixed;
        if (spec.selection == SelectionStrategy::Sinr) {
            SinrContext ctx;
            if (fixed_pilots) {
                ResolvedUnit probe;
                probe.spec = &spec;
                if (!resolve_pilots(spec, probe)) continue;
                ctx = sinr_context(stats, &probe.pilots);
            } else {
                ctx = sinr_context(stats, nullptr);
            }
            unit.sel = select_subarrays(SelectionStrategy::Sinr, stats, spec.l_serving, &ctx, nullptr);
        } else if (spec.selection == SelectionStrategy::Random) {
            rng::Stream stream = rng::derive_stream(pc_.seed, rng::salt::kSelection, spec.index);
            unit.sel = select_subarrays(SelectionStrategy::Random, stats, spec.l_serving, nullptr, &stream);
        } else {
            unit.sel = select_subarrays(SelectionStrategy::Lsf, stats, spec.l_serving);
        }

        if (!resolve_pilots(spec, unit)) continue;
        if (unit.pilots.scheduled.empty()) continue;

        unit.modes = spec.mode_bound ? std::vector<OperationMode>{spec.bound_mode} : cfg_.modes;
        unit.scheduled_count = static_cast<int>(unit.pilots.scheduled.size());

        const std::string sig = pilot_signature(spec.corr_idx, unit.pilots);
        int gidx = -1;
        for (size_t g = 0; g < groups_.size(); ++g) {
            if (groups_[g].corr_idx == spec.corr_idx && pilot_signature(spec.corr_idx, groups_[g].pilots) == sig) {
                gidx = static_cast<int>(g);
                break;
            }
        }
        if (gidx < 0) {
            EstGroup g;
            g.corr_idx = spec.corr_idx;
            g.pilots = unit.pilots;
            g.model = build_estimation_model(*stats_[spec.corr_idx], unit.pilots);
            groups_.push_back(std::move(g));
            gidx = static_cast<int>(groups_.size()) - 1;
        }
        unit.est_group = gidx;
        units_.push_back(std::move(unit));
    }
}

void PointRunner::deterministic_metrics() {
    if (cfg_.approximations == ApproxSet::None) return;
    for (ResolvedUnit& unit : units_) {
        const UnitSpec& spec = *unit.spec;
        const ChannelStatistics& stats = *stats_[spec.corr_idx];
        auto model = groups_[unit.est_group].model;
        const int count = unit.scheduled_count;

        for (OperationMode mode : unit.modes) {
            SwitchRule rule;
            if (pc_.u_switch_override) {
                rule.u_switch = *pc_.u_switch_override;
                rule.provenance = SwitchProvenance::ConfigOverride;
            } else {
                rule = u_switch(stats.spatially_correlated, unit.pilots.has_reuse(), mode,
                                stats.antennas_per_subarray, spec.l_serving);
            }
            const ApproxKind chosen = select_approximation(count, rule);
            const bool want_erg = cfg_.approximations == ApproxSet::Ergodic ||
                                  cfg_.approximations == ApproxSet::Both ||
                                  (cfg_.approximations == ApproxSet::Switch && chosen == ApproxKind::Ergodic);
            const bool want_asy = cfg_.approximations == ApproxSet::Asymptotic ||
                                  cfg_.approximations == ApproxSet::Both ||
                                  (cfg_.approximations == ApproxSet::Switch && chosen == ApproxKind::Asymptotic);

            const std::string lab = make_label(spec, pol_, &mode, nullptr);
            acc_.samples["u-switch" + lab].push_back(rule.u_switch);
            acc_.samples["uses-asymptotic" + lab].push_back(chosen == ApproxKind::Asymptotic ? 1.0 : 0.0);
            acc_.samples["mults-erg" + lab].push_back(static_cast<double>(
                complexity_count(ApproxKind::Ergodic, mode, stats.antennas_per_subarray, spec.l_serving, count)));
            acc_.samples["mults-asy" + lab].push_back(static_cast<double>(
                complexity_count(ApproxKind::Asymptotic, mode, stats.antennas_per_subarray, spec.l_serving, count)));

            la::MultCounter mc_erg, mc_asy;
            const int first = unit.pilots.scheduled.front();
            for (int k : unit.pilots.scheduled) {
                la::MultCounter* ce = (k == first) ? &mc_erg : nullptr;
                la::MultCounter* ca = (k == first) ? &mc_asy : nullptr;
                if (mode == OperationMode::Centralized) {
                    if (want_erg)
                        unit.det_cent_erg.push_back(
                            ergodic_sinr_centralized(stats, *model, unit.pilots, unit.sel, k, ce).value);
                    if (want_asy)
                        unit.det_cent_asy.push_back(
                            asymptotic_sinr_centralized(stats, *model, unit.pilots, unit.sel, k, ca).value);
                } else {
                    if (want_erg)
                        unit.det_dist_erg.push_back(
                            ergodic_sinr_distributed(stats, *model, unit.pilots, unit.sel, k, ce).per_subarray);
                    if (want_asy)
                        unit.det_dist_asy.push_back(
                            asymptotic_sinr_distributed(stats, *model, unit.pilots, unit.sel, k, ca).per_subarray);
                }
            }
            if (want_erg) acc_.samples["mults-erg-measured" + lab].push_back(static_cast<double>(mc_erg.real_total()));
            if (want_asy) acc_.samples["mults-asy-measured" + lab].push_back(static_cast<double>(mc_asy.real_total()));
        }
    }
}

void PointRunner::monte_carlo() {
    // slot layout
    const size_t n_weight = cfg_.weightings.size();
    size_t width = 0;
    for (ResolvedUnit& unit : units_) {
        unit.offset = width;
        unit.with_cent = std::find(unit.modes.begin(), unit.modes.end(), OperationMode::Centralized) !=
                         unit.modes.end();
        unit.with_dist = std::find(unit.modes.begin(), unit.modes.end(), OperationMode::Distributed) !=
                         unit.modes.end();
        const size_t n = static_cast<size_t>(unit.scheduled_count);
        width += (unit.with_cent ? n : 0) + (unit.with_dist ? n_weight * 2 * n : 0);
    }
    if (width == 0) return;

    const int T = cfg_.trials;
    std::vector<std::vector<double>> slots(static_cast<size_t>(T));

    auto eval_trial = [&](int trial) {
        std::vector<double> out(width, 0.0);

        std::vector<ChannelRealization> real(stats_.size());
        for (size_t c = 0; c < stats_.size(); ++c) {
            rng::Stream h_stream = rng::derive_stream(pc_.seed, rng::salt::kTrial, trial, 10 + static_cast<int>(c));
            samplers_[c]->sample_into(real[c], h_stream);
        }
        std::vector<ChannelEstimate> ests(groups_.size());
        for (size_t g = 0; g < groups_.size(); ++g) {
            ests[g].model = groups_[g].model;
            rng::Stream n_stream =
                rng::derive_stream(pc_.seed, rng::salt::kTrial, trial, 1000 + static_cast<int>(g));
            mmse_estimate_into(ests[g], real[groups_[g].corr_idx], *stats_[groups_[g].corr_idx],
                               groups_[g].pilots, n_stream);
        }

        for (const ResolvedUnit& unit : units_) {
            const UnitSpec& spec = *unit.spec;
            const ChannelStatistics& stats = *stats_[spec.corr_idx];
            const ChannelEstimate& est = ests[unit.est_group];
            const size_t n = static_cast<size_t>(unit.scheduled_count);
            size_t at = unit.offset;

            if (unit.with_cent) {
                const std::vector<double> sinrs = centralized_sinrs_fast(est, unit.sel, stats);
                for (size_t i = 0; i < n; ++i) {
                    const int k = unit.pilots.scheduled[i];
                    out[at + i] = unit.served[k]
                                      ? se_map(sinrs[k], unit.pilots.tau_p, unit.pilots.tau_c)
                                      : 0.0;
                }
                at += n;
            }
            if (unit.with_dist) {
                DistributedTrial dt(stats, unit.sel);
                dt.evaluate(est);
                for (size_t w = 0; w < n_weight; ++w) {
                    const WeightingStrategy strategy = cfg_.weightings[w];
                    for (size_t i = 0; i < n; ++i) {
                        const int k = unit.pilots.scheduled[i];
                        if (!unit.served[k]) {
                            out[at + 2 * i] = 0.0;
                            out[at + 2 * i + 1] = 0.0;
                            continue;
                        }
                        std::vector<double> mu;
                        if (strategy == WeightingStrategy::Optimal && !unit.committed_mu.empty()) {
                            mu = unit.committed_mu[i];
                        } else {
                            mu = compute_weights(strategy, dt.local_sinrs(k), stats, unit.sel, k);
                        }
                        const double exact = dt.global_exact(k, mu);
                        const double approx = dt.global_approx(k, mu);
                        out[at + 2 * i] = se_map(exact, unit.pilots.tau_p, unit.pilots.tau_c);
                        out[at + 2 * i + 1] = se_map(approx, unit.pilots.tau_p, unit.pilots.tau_c);
                    }
                    at += 2 * n;
                }
            }
        }
        return out;
    };

    if (threads_ == 1) {
        for (int trial = 0; trial < T; ++trial) slots[trial] = eval_trial(trial);
    } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads_)
#endif
        for (int trial = 0; trial < T; ++trial) slots[trial] = eval_trial(trial);
    }

    // ordered aggregation, independent of the trial execution order
    for (const ResolvedUnit& unit : units_) {
        const UnitSpec& spec = *unit.spec;
        const size_t n = static_cast<size_t>(unit.scheduled_count);
        size_t at = unit.offset;

        auto aggregate_exact = [&](OperationMode mode, const WeightingStrategy* w, size_t stride, size_t base,
                                   size_t approx_shift) {
            const std::string lab = make_label(spec, pol_, &mode, w);

            std::vector<double>& se_samples = acc_.samples["mean-SE" + lab];
            std::vector<double> ue_mean(n, 0.0);
            for (int t = 0; t < T; ++t) {
                for (size_t i = 0; i < n; ++i) {
                    const double se = slots[t][base + stride * i];
                    se_samples.push_back(se);
                    ue_mean[i] += se;
                }
            }
            for (size_t i = 0; i < n; ++i) ue_mean[i] /= T;

            double min_se = std::numeric_limits<double>::infinity();
            std::vector<double>& pool = acc_.pools["se" + lab];
            for (size_t i = 0; i < n; ++i) {
                pool.push_back(ue_mean[i]);
                min_se = std::min(min_se, ue_mean[i]);
            }
            acc_.samples["min-SE" + lab].push_back(min_se);

            if (approx_shift > 0) {
                std::vector<double>& ga = acc_.samples["mnae-global-approx" + lab];
                for (int t = 0; t < T; ++t) {
                    for (size_t i = 0; i < n; ++i) {
                        const double exact = slots[t][base + stride * i];
                        const double approx = slots[t][base + stride * i + approx_shift];
                        if (exact <= 0.0) {
                            ++acc_.zero_truth_dropped;
                            continue;
                        }
                        ga.push_back(std::abs(approx - exact) / exact);
                    }
                }
            }

            if (cfg_.approximations == ApproxSet::None) return;
            auto det_se = [&](bool erg, size_t i) {
                const int tau_p = unit.pilots.tau_p;
                const int tau_c = unit.pilots.tau_c;
                if (mode == OperationMode::Centralized) {
                    const std::vector<double>& v = erg ? unit.det_cent_erg : unit.det_cent_asy;
                    return se_map(v[i], tau_p, tau_c);
                }
                const std::vector<std::vector<double>>& locals = erg ? unit.det_dist_erg : unit.det_dist_asy;
                const ChannelStatistics& stats = *stats_[spec.corr_idx];
                std::vector<double> mu;
                if (w == nullptr || *w == WeightingStrategy::Optimal) {
                    double acc = 0.0;
                    for (double g : locals[i]) acc += g;
                    mu.assign(locals[i].size(), 1.0 / static_cast<double>(locals[i].size()));
                    if (acc > 0.0)
                        for (size_t j = 0; j < mu.size(); ++j) mu[j] = locals[i][j] / acc;
                } else {
                    mu = compute_weights(*w, locals[i], stats, unit.sel, unit.pilots.scheduled[i]);
                }
                return se_map_componentwise(locals[i], mu, tau_p, tau_c);
            };

            const bool have_erg =
                mode == OperationMode::Centralized ? !unit.det_cent_erg.empty() : !unit.det_dist_erg.empty();
            const bool have_asy =
                mode == OperationMode::Centralized ? !unit.det_cent_asy.empty() : !unit.det_dist_asy.empty();
            const char* erg_name = cfg_.approximations == ApproxSet::Switch ? "mnae-det" : "mnae-erg";
            const char* asy_name = cfg_.approximations == ApproxSet::Switch ? "mnae-det" : "mnae-asy";

            if (have_erg) {
                std::vector<double>& s = acc_.samples[std::string(erg_name) + lab];
                for (size_t i = 0; i < n; ++i) {
                    if (ue_mean[i] <= 0.0) {
                        ++acc_.zero_truth_dropped;
                        continue;
                    }
                    s.push_back(std::abs(det_se(true, i) - ue_mean[i]) / ue_mean[i]);
                }
            }
            if (have_asy) {
                std::vector<double>& s = acc_.samples[std::string(asy_name) + lab];
                for (size_t i = 0; i < n; ++i) {
                    const double est_se = det_se(false, i);
                    for (int t = 0; t < T; ++t) {
                        const double truth = slots[t][base + stride * i];
                        if (truth <= 0.0) {
                            ++acc_.zero_truth_dropped;
                            continue;
                        }
                        s.push_back(std::abs(est_se - truth) / truth);
                    }
                }
            }
        };

        for (OperationMode mode : unit.modes) {
            acc_.samples["scheduled-count" + make_label(spec, pol_, &mode, nullptr)].push_back(
                static_cast<double>(n));
        }
        if (unit.with_cent) {
            aggregate_exact(OperationMode::Centralized, nullptr, 1, at, 0);
            at += n;
        }
        if (unit.with_dist) {
            for (size_t w = 0; w < cfg_.weightings.size(); ++w) {
                aggregate_exact(OperationMode::Distributed, &cfg_.weightings[w], 2, at, 1);
                at += 2 * n;
            }
        }
    }
}

void PointRunner::run() {
    geom_ = build_geometry(pc_);
    for (CorrelationMode corr : cfg_.correlation) {
        auto st = std::make_shared<ChannelStatistics>(compute_channel_statistics(geom_, pc_, corr));
        samplers_.push_back(std::make_shared<ChannelSampler>(*st));
        stats_.push_back(std::move(st));
    }
    build_specs();
    resolve_units();
    deterministic_metrics();
    monte_carlo();
}


}  // namespace

double mnae(const std::vector<double>& truth, const std::vector<double>& estimate, long* dropped) {
    if (truth.size() != estimate.size()) throw ModelError("mnae: series length mismatch");
    std::vector<double> errs;
    errs.reserve(truth.size());
    long drop_count = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] <= 0.0) {
            ++drop_count;
            continue;
        }
        errs.push_back(std::abs(estimate[i] - truth[i]) / truth[i]);
    }
    if (dropped) *dropped += drop_count;
    if (errs.empty()) throw ModelError("mnae: no positive-truth samples");
    return sample_mean(errs);
}

bool MetricsTable::operator==(const MetricsTable& other) const {
    if (rows.size() != other.rows.size()) return false;
    for (size_t i = 0; i < rows.size(); ++i) {
        const MetricsRow& a = rows[i];
        const MetricsRow& b = other.rows[i];
        if (a.sweep != b.sweep || a.metric != b.metric || a.mean != b.mean || a.stderr_ != b.stderr_ ||
            a.trials != b.trials)
            return false;
    }
    return true;
}

MetricsTable run_scenario(const ScenarioConfig& cfg, const RunOptions& opt) {
    validate_config(cfg);
    std::ostream& diag = opt.diag ? *opt.diag : std::cerr;
    int threads = opt.threads;
#ifdef _OPENMP
    if (threads <= 0) threads = omp_get_max_threads();
#else
    threads = 1;
#endif

    MetricsTable table;
    std::map<std::string, AllocationState> prefix_cache;
    for (int sv : cfg.sweep_values) {
        const auto t0 = std::chrono::steady_clock::now();
        Accumulators acc;
        for (int drop = 0; drop < cfg.drops; ++drop) {
            try {
                PointRunner runner(cfg, sv, drop, threads, acc, prefix_cache, diag);
                runner.run();
            } catch (const std::exception& e) {
                diag << "xlsim: sweep=" << sv << " drop=" << drop << " failed: " << e.what() << "\n";
            }
        }

        std::map<std::string, MetricsRow> rows;
        for (const auto& [name, samples] : acc.samples) {
            MetricsRow r;
            r.sweep = sv;
            r.metric = name;
            r.mean = sample_mean(samples);
            r.stderr_ = sample_stderr(samples, r.mean);
            r.trials = static_cast<long>(samples.size());
            rows[name] = r;
        }
        for (const auto& [name, pool] : acc.pools) {
            for (double p : {5.0, 50.0, 95.0}) {
                MetricsRow r;
                r.sweep = sv;
                const size_t colon = name.find(':');
                const std::string suffix = colon == std::string::npos ? "" : name.substr(colon);
                r.metric = "se-p" + std::to_string(static_cast<int>(p)) + suffix;
                r.mean = percentile(pool, p);
                r.stderr_ = 0.0;
                r.trials = static_cast<long>(pool.size());
                rows[r.metric] = r;
            }
        }
        for (const auto& [name, value] : acc.consts) {
            MetricsRow r;
            r.sweep = sv;
            r.metric = name;
            r.mean = value;
            r.stderr_ = 0.0;
            r.trials = 1;
            rows[name] = r;
        }
        for (const auto& [name, row] : rows) table.rows.push_back(row);

        const auto t1 = std::chrono::steady_clock::now();
        diag << "xlsim: sweep=" << sv << " done in "
             << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() / 1000.0 << " s";
        if (acc.zero_truth_dropped > 0) diag << " (zero-truth samples dropped: " << acc.zero_truth_dropped << ")";
        diag << "\n";
    }
    return table;
}

void emit(const MetricsTable& table, OutputFormat format, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("emit: cannot open '" + path + "' for writing");
    out << emit_string(table, format);
    out.flush();
    if (!out) throw ConfigError("emit: write failed for '" + path + "'");
}

std::string emit_string(const MetricsTable& table, OutputFormat format) {
    if (format == OutputFormat::Csv) {
        std::ostringstream os;
        os << "sweep,metric,mean,stderr,trials\n";
        for (const MetricsRow& r : table.rows) {
            os << format_double(r.sweep) << ',' << r.metric << ',' << format_double(r.mean) << ','
               << format_double(r.stderr_) << ',' << r.trials << '\n';
        }
        return os.str();
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const MetricsRow& r : table.rows) {
        rows.push_back({{"sweep", r.sweep},
                        {"metric", r.metric},
                        {"mean", r.mean},
                        {"stderr", r.stderr_},
                        {"trials", r.trials}});
    }
    nlohmann::json doc;
    doc["rows"] = rows;
    return doc.dump(2) + "\n";
}

MetricsTable read_metrics_csv(const std::string& text) {
    MetricsTable t;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("metrics csv: empty input");
    if (line == "sweep,metric,mean,stderr,trials\r") line.pop_back();
    if (line != "sweep,metric,mean,stderr,trials") throw ConfigError("metrics csv: bad header");
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) throw ConfigError("metrics csv: row with wrong column count");
        MetricsRow r;
        r.sweep = std::strtod(cells[0].c_str(), nullptr);
        r.metric = cells[1];
        r.mean = std::strtod(cells[2].c_str(), nullptr);
        r.stderr_ = std::strtod(cells[3].c_str(), nullptr);
        r.trials = std::strtol(cells[4].c_str(), nullptr, 10);
        t.rows.push_back(r);
    }
    return t;
}

MetricsTable read_metrics_json(const std::string& text) {
    MetricsTable t;
    const nlohmann::json doc = nlohmann::json::parse(text);
    for (const auto& row : doc.at("rows")) {
        MetricsRow r;
        r.sweep = row.at("sweep").get<double>();
        r.metric = row.at("metric").get<std::string>();
        r.mean = row.at("mean").get<double>();
        r.stderr_ = row.at("stderr").get<double>();
        r.trials = row.at("trials").get<long>();
        t.rows.push_back(r);
    }
    return t;
}

}  // namespace xlsim
