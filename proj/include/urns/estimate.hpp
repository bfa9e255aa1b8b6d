#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "urns/rng.hpp"
#include "urns/simulate.hpp"

namespace urns {

// Wilson score interval; halfwidth at z = 1 doubles as a standard error that
// stays positive at empirical 0 and 1.
struct WilsonInterval {
    double center = 0.0;
    double halfwidth = 0.0;

    double lower() const { return center - halfwidth; }
    double upper() const { return center + halfwidth; }
};

inline WilsonInterval wilson(double successes, double n, double z = 1.0) {
    if (n <= 0.0) throw std::invalid_argument("wilson: sample size must be positive");
    const double phat = successes / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    WilsonInterval w;
    w.center = (phat + z2 / (2.0 * n)) / denom;
    w.halfwidth = z / denom * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    return w;
}

namespace detail {

// Runs one replica body per id over a fixed thread partition. Each thread
// owns one Worker (built by the factory) for scratch reuse; tallies merge
// through an associative commutative +=, so the aggregate never depends on
// the thread layout, and each replica's variates depend only on (seed, id).
template <class Tally, class Worker, class Factory, class Body>
Tally run_replicas(std::int64_t replicas, std::uint64_t seed, int threads,
                   Factory&& make_worker, Body&& body) {
    if (replicas < 1) throw std::invalid_argument("run_replicas: need at least one replica");
    threads = static_cast<int>(std::min<std::int64_t>(std::max(1, threads), replicas));
    if (threads == 1) {
        Tally tally;
        Worker worker = make_worker();
        for (std::int64_t id = 0; id < replicas; ++id) {
            RngStream rng(seed, static_cast<std::uint64_t>(id));
            body(worker, rng, tally);
        }
        return tally;
    }
    std::vector<Tally> partial(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            Worker worker = make_worker();
            const std::int64_t lo = replicas * t / threads;
            const std::int64_t hi = replicas * (t + 1) / threads;
            for (std::int64_t id = lo; id < hi; ++id) {
                RngStream rng(seed, static_cast<std::uint64_t>(id));
                body(worker, rng, partial[t]);
            }
        });
    }
    for (auto& th : pool) th.join();
    Tally tally;
    for (auto& part : partial) tally += part;
    return tally;
}

}  // namespace detail

struct EstimateOptions {
    enum class Mode { bracket, ruin_shortcut };

    Mode mode = Mode::bracket;
    // horizon < 0 picks the default for the mode (hard cap for bracket,
    // check interval budget for the ruin shortcut).
    std::int64_t horizon = -1;
    // A trajectory whose deficit walk stays above the deep level for
    // deep_steps consecutive steps is resolved as escaped. deep_level is a
    // floor: the effective level grows with p so that the missed-return
    // probability (p/(1-p))^level stays below 1e-10, which a fixed level
    // cannot deliver near p = 1/2.
    std::int32_t deep_level = 30;
    std::int32_t deep_steps = 100;
    int threads = 1;
};

namespace detail {

inline std::int32_t effective_deep_level(double p, std::int32_t floor_level) {
    if (p <= 0.0 || p >= 0.5) return floor_level;
    const double ratio = p / (1.0 - p);
    const double needed = std::ceil(std::log(1e-10) / std::log(ratio));
    return std::max(floor_level, static_cast<std::int32_t>(needed));
}

}  // namespace detail

struct FixationEstimate {
    double lower = 0.0;
    double upper = 0.0;
    double point = 0.0;
    double stderr_ = 0.0;
    std::int64_t replicas = 0;
    std::int64_t fixated = 0;
    std::int64_t escaped = 0;
    std::int64_t unresolved = 0;
    double unresolved_fraction = 0.0;
    // Populated for finite rho: AI-draw statistics against the stable-C3
    // fixation proxy.
    std::int64_t fixated_with_ai = 0;
    std::int64_t any_ai = 0;
    double ai_rate = 0.0;
    double ai_stderr = 0.0;
};

namespace detail {

struct CampaignTally {
    std::int64_t fixated = 0;
    std::int64_t escaped = 0;
    std::int64_t unresolved = 0;
    std::int64_t fixated_with_ai = 0;
    std::int64_t any_ai = 0;

    CampaignTally& operator+=(const CampaignTally& o) {
        fixated += o.fixated;
        escaped += o.escaped;
        unresolved += o.unresolved;
        fixated_with_ai += o.fixated_with_ai;
        any_ai += o.any_ai;
        return *this;
    }
};

inline constexpr std::int64_t kAutoBracketHorizon = 20'000;
inline constexpr std::int64_t kRuinCheckInterval = 256;
inline constexpr std::int64_t kRuinHardCap = 1'000'000;

// Margin of the urn's strict leader over its runner-up color, zero on ties.
inline std::int64_t leader_margin(const SystemState& s, std::int32_t urn) {
    std::int64_t best = -1, second = -1;
    for (std::int32_t k = 0; k < s.num_colors; ++k) {
        const std::int64_t c = s.at(urn, k);
        if (c > best) {
            second = best;
            best = c;
        } else if (c > second) {
            second = c;
        }
    }
    return best - second;
}

// One bracket-mode replica under the INF^i rule. Outcomes: fixated when the
// aligned absorbing predicate fires; escaped when the walk is certified deep
// (or, at p = 0, when the urns lock into opposite colors); unresolved when
// the hard horizon runs out first.
inline void bracket_replica_infinite(Stepper& stepper, RngStream& rng, std::int64_t horizon,
                                     const EstimateOptions& opts,
                                     std::vector<std::int64_t>& scratch, CampaignTally& tally) {
    const ModelParams& params = stepper.params();
    const bool two_by_two = params.urns == 2 && params.colors == 2;
    const bool deep_rule_valid = params.p < 0.5;

    SystemState state = SystemState::empty(params.urns, params.colors);
    StepRecord rec;
    std::int32_t deep_run = 0;
    for (std::int64_t n = 1; n <= horizon; ++n) {
        stepper.step(state, rng, rec);
        if (two_by_two) {
            const ConfigClass cls = classify(state);
            if (cls.is_c3()) {
                ++tally.fixated;
                return;
            }
            if (params.p == 0.0 && cls.is_c1() && cls.ell >= 1) {
                // Leaving C1 requires a combined-pool draw, which has
                // probability zero: opposite fixation is certain.
                ++tally.escaped;
                return;
            }
            deep_run = (deep_rule_valid && cls.is_c2() && cls.ell > opts.deep_level)
                           ? deep_run + 1
                           : 0;
        } else {
            if (aligned_color(state, scratch)) {
                ++tally.fixated;
                return;
            }
            if (params.urns == 2 && deep_rule_valid) {
                // Divergent certificate for two urns with C > 2 colors: strict
                // argmax colors differ and both leads are deep. Any same-color
                // fixation would first drag one lead through zero, an event of
                // probability at most (p/(1-p))^deep_level per urn.
                auto a = strict_argmax_color(state, 0);
                auto b = strict_argmax_color(state, 1);
                const bool divergent = a && b && *a != *b &&
                                       leader_margin(state, 0) > opts.deep_level &&
                                       leader_margin(state, 1) > opts.deep_level;
                deep_run = divergent ? deep_run + 1 : 0;
            }
        }
        if (deep_run >= opts.deep_steps) {
            ++tally.escaped;
            return;
        }
    }
    ++tally.unresolved;
}

// One ruin-shortcut replica (INF^i, two urns, two colors, p < 1/2). At each
// check point a trajectory sitting in C2(l) is resolved with the classical
// ruin probability (p/(1-p))^l: either the deficit walk never returns to 0,
// or it does and the run continues from the canonical C2(0) state, which is
// exact because the class is a sufficient statistic under this rule.
inline void ruin_replica(Stepper& stepper, RngStream& rng, std::int64_t check_interval,
                         CampaignTally& tally) {
    const ModelParams& params = stepper.params();
    const double ratio = params.p / (1.0 - params.p);

    SystemState state = SystemState::empty(2, 2);
    StepRecord rec;
    std::int64_t next_check = check_interval;
    for (std::int64_t n = 1; n <= kRuinHardCap; ++n) {
        stepper.step(state, rng, rec);
        const ConfigClass cls = classify(state);
        if (cls.is_c3()) {
            ++tally.fixated;
            return;
        }
        if (params.p == 0.0 && cls.is_c1() && cls.ell >= 1) {
            ++tally.escaped;
            return;
        }
        if (n >= next_check) {
            next_check = n + check_interval;
            if (cls.is_c2() && cls.ell >= 1) {
                if (rng.bernoulli(std::pow(ratio, static_cast<double>(cls.ell)))) {
                    state = SystemState::two_by_two(1, 0, 0, 0);  // canonical C2(0)
                } else {
                    ++tally.escaped;
                    return;
                }
            }
        }
    }
    ++tally.unresolved;
}

// One finite-rho replica. Fixation proxy: entered C3 by the horizon and
// never left it afterwards. The deep-deficit certificate still resolves
// escapes early; everything else is unresolved.
inline void bracket_replica_finite(Stepper& stepper, RngStream& rng, std::int64_t horizon,
                                   const EstimateOptions& opts,
                                   std::vector<std::int64_t>& scratch, CampaignTally& tally) {
    const ModelParams& params = stepper.params();
    const bool two_by_two = params.urns == 2 && params.colors == 2;
    const bool deep_rule_valid = params.p < 0.5 && two_by_two;

    SystemState state = SystemState::empty(params.urns, params.colors);
    StepRecord rec;
    bool saw_ai = false;
    bool entered = false;
    bool broken = false;
    bool aligned_now = false;
    std::int32_t deep_run = 0;
    for (std::int64_t n = 1; n <= horizon; ++n) {
        stepper.step(state, rng, rec);
        saw_ai = saw_ai || rec.any_ai();
        aligned_now = two_by_two ? classify(state).is_c3()
                                 : aligned_color(state, scratch).has_value();
        if (aligned_now && !entered) {
            entered = true;
        } else if (!aligned_now && entered) {
            broken = true;
        }
        if (deep_rule_valid && !entered) {
            const ConfigClass cls = classify(state);
            deep_run = (cls.is_c2() && cls.ell > opts.deep_level) ? deep_run + 1 : 0;
            if (deep_run >= opts.deep_steps) {
                ++tally.escaped;
                tally.any_ai += saw_ai;
                return;
            }
        }
    }
    tally.any_ai += saw_ai;
    if (entered && !broken && aligned_now) {
        ++tally.fixated;
        tally.fixated_with_ai += saw_ai;
    } else {
        ++tally.unresolved;
    }
}

}  // namespace detail

// Monte Carlo fixation estimate. Bracket mode returns
//   lower = fraction fixated, upper = lower + fraction unresolved,
// which sandwiches the fixation probability up to the deep-walk certificate
// error. The ruin shortcut resolves every path to fixated/escaped and is
// only defined where classical ruin theory applies (INF^i, U = C = 2,
// p < 1/2).
inline FixationEstimate estimate_fixation(const ModelParams& params, std::int64_t replicas,
                                          std::uint64_t seed, const EstimateOptions& opts = {}) {
    params.validate();
    const bool infinite = params.weights.infinite_rho();
    if (opts.mode == EstimateOptions::Mode::ruin_shortcut) {
        if (!infinite || params.urns != 2 || params.colors != 2 || !(params.p < 0.5))
            throw std::invalid_argument(
                "estimate_fixation: ruin shortcut requires the INF^i rule, two urns, two colors "
                "and p < 1/2");
    }

    EstimateOptions eff = opts;
    eff.deep_level = detail::effective_deep_level(params.p, opts.deep_level);

    struct Worker {
        Stepper stepper;
        std::vector<std::int64_t> scratch;
    };
    detail::CampaignTally tally = detail::run_replicas<detail::CampaignTally, Worker>(
        replicas, seed, eff.threads, [&] { return Worker{Stepper(params), {}}; },
        [&](Worker& w, RngStream& rng, detail::CampaignTally& local) {
            if (eff.mode == EstimateOptions::Mode::ruin_shortcut) {
                detail::ruin_replica(w.stepper, rng,
                                     eff.horizon > 0 ? eff.horizon : detail::kRuinCheckInterval,
                                     local);
            } else if (infinite) {
                detail::bracket_replica_infinite(
                    w.stepper, rng, eff.horizon > 0 ? eff.horizon : detail::kAutoBracketHorizon,
                    eff, w.scratch, local);
            } else {
                detail::bracket_replica_finite(w.stepper, rng,
                                               eff.horizon > 0 ? eff.horizon : 400, eff,
                                               w.scratch, local);
            }
        });

    FixationEstimate est;
    est.replicas = replicas;
    est.fixated = tally.fixated;
    est.escaped = tally.escaped;
    est.unresolved = tally.unresolved;
    est.fixated_with_ai = tally.fixated_with_ai;
    est.any_ai = tally.any_ai;
    const double n = static_cast<double>(replicas);
    est.lower = static_cast<double>(tally.fixated) / n;
    est.upper = est.lower + static_cast<double>(tally.unresolved) / n;
    est.point = 0.5 * (est.lower + est.upper);
    est.unresolved_fraction = static_cast<double>(tally.unresolved) / n;
    est.stderr_ = wilson(static_cast<double>(tally.fixated) + 0.5 * tally.unresolved, n).halfwidth;
    est.ai_rate = static_cast<double>(tally.fixated_with_ai) / n;
    est.ai_stderr = wilson(static_cast<double>(tally.fixated_with_ai), n).halfwidth;
    return est;
}

struct AiDrawRate {
    double rate = 0.0;
    double stderr_ = 0.0;
    std::int64_t events = 0;
    std::int64_t replicas = 0;
};

// Probability that a path both fixates (stable-C3 proxy at the horizon) and
// contains an AI-draw. Exactly zero under the INF^i rule.
inline AiDrawRate ai_draw_rate(const ModelParams& params, std::int64_t replicas,
                               std::uint64_t seed, std::int64_t horizon, int threads = 1) {
    params.validate();
    if (params.weights.infinite_rho()) return {0.0, 0.0, 0, replicas};
    EstimateOptions opts;
    opts.horizon = horizon;
    opts.threads = threads;
    FixationEstimate est = estimate_fixation(params, replicas, seed, opts);
    return {est.ai_rate, est.ai_stderr, est.fixated_with_ai, replicas};
}

struct NonconformistResult {
    std::vector<std::int64_t> counts;  // histogram over N = 0 .. (U-1)/2
    std::vector<double> pmf;
    std::int64_t replicas = 0;
    std::int64_t support_violations = 0;  // paths with N beyond (U-1)/2; provably impossible
};

// Full-model Monte Carlo for the number of non-conformist urns: U odd urns,
// two colors, INF^i rule. The first step decides the global majority; each
// urn is then watched until it either conforms (own strict majority matches)
// or its deficit is certified deep.
inline NonconformistResult nonconformist_mc(std::int32_t num_urns, double p,
                                            std::int64_t replicas, std::uint64_t seed,
                                            const EstimateOptions& opts = {}) {
    if (num_urns < 3 || num_urns % 2 == 0)
        throw std::invalid_argument("nonconformist_mc: requires an odd urn count >= 3");
    if (!(p >= 0.0 && p < 0.5))
        throw std::invalid_argument("nonconformist_mc: requires 0 <= p < 1/2");

    const std::int32_t deep_level = detail::effective_deep_level(p, opts.deep_level);
    ModelParams params{num_urns, 2, p, WeightSequence::generalized_power()};

    struct Tally {
        std::vector<std::int64_t> counts;
        std::int64_t violations = 0;

        Tally& operator+=(const Tally& o) {
            if (counts.size() < o.counts.size()) counts.resize(o.counts.size(), 0);
            for (std::size_t i = 0; i < o.counts.size(); ++i) counts[i] += o.counts[i];
            violations += o.violations;
            return *this;
        }
    };
    struct Worker {
        Stepper stepper;
        std::vector<std::int64_t> pool;
    };

    const std::int32_t n_max = (num_urns - 1) / 2;
    Tally tally = detail::run_replicas<Tally, Worker>(
        replicas, seed, opts.threads, [&] { return Worker{Stepper(params), {}}; },
        [&](Worker& w, RngStream& rng, Tally& local) {
            if (local.counts.empty()) local.counts.assign(n_max + 1, 0);
            Stepper& stepper = w.stepper;
            SystemState state = SystemState::empty(num_urns, 2);
            StepRecord rec;
            stepper.step(state, rng, rec);
            std::vector<std::int64_t>& pool = w.pool;
            state.combined_into(pool);
            const std::int32_t majority = *strict_argmax_color(pool);
            const std::int32_t minority = 1 - majority;

            std::vector<std::int32_t> open;
            for (std::int32_t u = 0; u < num_urns; ++u)
                if (state.at(u, majority) < state.at(u, minority)) open.push_back(u);

            std::vector<std::int32_t> deep(num_urns, 0);
            std::int32_t nonconformists = 0;
            for (std::int64_t n = 2; !open.empty() && n <= detail::kRuinHardCap; ++n) {
                stepper.step(state, rng, rec);
                for (std::size_t i = 0; i < open.size();) {
                    const std::int32_t u = open[i];
                    if (state.at(u, majority) > state.at(u, minority)) {
                        open[i] = open.back();
                        open.pop_back();
                        continue;
                    }
                    const std::int64_t deficit = state.at(u, minority) - state.at(u, majority);
                    deep[u] = deficit > deep_level ? deep[u] + 1 : 0;
                    if (deep[u] >= opts.deep_steps) {
                        ++nonconformists;
                        open[i] = open.back();
                        open.pop_back();
                        continue;
                    }
                    ++i;
                }
            }
            if (nonconformists > n_max) {
                ++local.violations;
                nonconformists = n_max;
            }
            ++local.counts[nonconformists];
        });

    NonconformistResult result;
    result.replicas = replicas;
    result.support_violations = tally.violations;
    result.counts = tally.counts;
    result.pmf.assign(tally.counts.size(), 0.0);
    for (std::size_t i = 0; i < tally.counts.size(); ++i)
        result.pmf[i] = static_cast<double>(tally.counts[i]) / static_cast<double>(replicas);
    return result;
}

}  // namespace urns
