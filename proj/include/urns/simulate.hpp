#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "urns/rng.hpp"
#include "urns/state.hpp"
#include "urns/weights.hpp"

namespace urns {

struct ModelParams {
    std::int32_t urns = 2;
    std::int32_t colors = 2;
    double p = 0.0;
    WeightSequence weights = WeightSequence::generalized_power();

    void validate() const {
        if (urns < 1) throw std::invalid_argument("ModelParams: need at least one urn");
        if (colors < 2) throw std::invalid_argument("ModelParams: need at least two colors");
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ModelParams: p outside [0,1]");
    }
};

// Outcome of one synchronous step, one entry per urn. ai_draw marks a draw
// whose color was strictly below the maximum count of the pool it came from;
// such draws never happen under the INF^i rule.
struct StepRecord {
    std::vector<std::uint8_t> drawn_color;
    std::vector<std::uint8_t> from_combined;
    std::vector<std::uint8_t> ai_draw;

    void resize(std::int32_t urns) {
        drawn_color.assign(urns, 0);
        from_combined.assign(urns, 0);
        ai_draw.assign(urns, 0);
    }

    bool any_ai() const {
        for (auto f : ai_draw)
            if (f) return true;
        return false;
    }
};

// Synchronous stepper. Every urn samples its pool flag and color against the
// pre-step counts (urn index ascending, pool variate before color variate),
// then all drawn balls are added at once. Owns its scratch buffers so the
// hot loop never allocates.
class Stepper {
  public:
    explicit Stepper(ModelParams params) : params_(std::move(params)) {
        params_.validate();
        if (params_.weights.rule() == WeightSequence::Rule::classical)
            log_rho_ = params_.weights.log_rho();
    }

    const ModelParams& params() const { return params_; }

    // Advances the state by one step; fills `rec` with what each urn did.
    void step(SystemState& state, RngStream& rng, StepRecord& rec) {
        rec.resize(params_.urns);
        state.combined_into(combined_);
        for (std::int32_t u = 0; u < params_.urns; ++u) {
            const bool combined = rng.bernoulli(params_.p);
            std::span<const std::int64_t> pool =
                combined ? std::span<const std::int64_t>(combined_)
                         : std::span<const std::int64_t>(
                               &state.counts[static_cast<std::size_t>(u) * params_.colors],
                               static_cast<std::size_t>(params_.colors));
            const std::int32_t color = sample_color(pool, rng);
            rec.from_combined[u] = combined;
            rec.drawn_color[u] = static_cast<std::uint8_t>(color);
            rec.ai_draw[u] = pool[color] < pool_max(pool);
        }
        for (std::int32_t u = 0; u < params_.urns; ++u) state.at(u, rec.drawn_color[u]) += 1;
    }

  private:
    static std::int64_t pool_max(std::span<const std::int64_t> pool) {
        std::int64_t best = pool[0];
        for (std::int64_t c : pool) best = std::max(best, c);
        return best;
    }

    // Consumes exactly one variate whatever the rule, so trajectories stay
    // reproducible across weight rules for a fixed seed.
    std::int32_t sample_color(std::span<const std::int64_t> pool, RngStream& rng) {
        const double u = rng.uniform();
        switch (params_.weights.rule()) {
            case WeightSequence::Rule::generalized_power: {
                // Uniform over the argmax set.
                const std::int64_t best = pool_max(pool);
                std::int32_t ties = 0;
                for (std::int64_t c : pool) ties += (c == best);
                std::int32_t pick = std::min<std::int32_t>(
                    static_cast<std::int32_t>(u * ties), ties - 1);
                for (std::int32_t k = 0; k < static_cast<std::int32_t>(pool.size()); ++k) {
                    if (pool[k] == best && pick-- == 0) return k;
                }
                return static_cast<std::int32_t>(pool.size()) - 1;  // unreachable
            }
            case WeightSequence::Rule::classical: {
                const std::int64_t best = pool_max(pool);
                double total = 0.0;
                probs_.assign(pool.size(), 0.0);
                for (std::size_t k = 0; k < pool.size(); ++k) {
                    probs_[k] = std::exp(static_cast<double>(pool[k] - best) * log_rho_);
                    total += probs_[k];
                }
                return pick_from_cumulative(total * u);
            }
            case WeightSequence::Rule::table: {
                draw_distribution_into(params_.weights, pool, probs_);
                return pick_from_cumulative(u);
            }
        }
        throw std::logic_error("unreachable weight rule");
    }

    std::int32_t pick_from_cumulative(double target) {
        double acc = 0.0;
        std::int32_t last_positive = 0;
        for (std::size_t k = 0; k < probs_.size(); ++k) {
            if (probs_[k] <= 0.0) continue;
            last_positive = static_cast<std::int32_t>(k);
            acc += probs_[k];
            if (target < acc) return last_positive;
        }
        return last_positive;
    }

    ModelParams params_;
    double log_rho_ = 0.0;
    std::vector<std::int64_t> combined_;
    std::vector<double> probs_;
};

// Free-function step matching the stepper, for one-off use.
inline StepRecord step(SystemState& state, const ModelParams& params, RngStream& rng) {
    Stepper stepper(params);
    StepRecord rec;
    stepper.step(state, rng, rec);
    return rec;
}

enum class StopRule { at_horizon, at_sigma3, at_tau_or_sigma3 };

enum class FixationStatus { fixated, escaped, unresolved };

// Full instrumentation of one path: step records, the class sequence (two
// urns / two colors only), the deficit walk sampled while the state is in a
// C2 class, first-entry times sigma2/sigma3 and the first AI-draw time tau.
struct Trajectory {
    std::vector<StepRecord> records;
    std::vector<ConfigClass> class_series;
    std::vector<std::int64_t> deficit_series;
    std::optional<std::int64_t> sigma2;
    std::optional<std::int64_t> sigma3;
    std::optional<std::int64_t> tau;
    FixationStatus fixation = FixationStatus::unresolved;
    std::int32_t fixated_color = -1;
    SystemState final_state;
    std::int64_t steps = 0;
};

// Runs from the empty state for at most `horizon` steps, recording the
// trajectory. sigma3 is the first time the aligned absorbing predicate holds
// (class C3 when U = C = 2); under the INF^i rule that event is definitive
// and the trajectory reports fixated.
inline Trajectory run(const ModelParams& params, RngStream& rng, std::int64_t horizon,
                      StopRule rule = StopRule::at_sigma3) {
    if (horizon < 1) throw std::invalid_argument("run: horizon must be positive");
    Stepper stepper(params);
    const bool track_classes = params.urns == 2 && params.colors == 2;

    Trajectory t;
    SystemState state = SystemState::empty(params.urns, params.colors);
    StepRecord rec;
    for (std::int64_t n = 1; n <= horizon; ++n) {
        stepper.step(state, rng, rec);
        t.records.push_back(rec);
        t.steps = n;
        if (!t.tau && rec.any_ai()) t.tau = n;
        if (track_classes) {
            const ConfigClass cls = classify(state);
            t.class_series.push_back(cls);
            if (cls.is_c2()) {
                t.deficit_series.push_back(cls.ell);
                if (!t.sigma2) t.sigma2 = n;
            }
        }
        if (!t.sigma3 && is_absorbing_aligned(state)) t.sigma3 = n;
        const bool stop_sigma3 = t.sigma3.has_value() && rule != StopRule::at_horizon;
        const bool stop_tau = t.tau.has_value() && rule == StopRule::at_tau_or_sigma3;
        if (stop_sigma3 || stop_tau) break;
    }
    if (params.weights.infinite_rho() && t.sigma3) {
        t.fixation = FixationStatus::fixated;
        t.fixated_color = *aligned_color(state);
    }
    t.final_state = std::move(state);
    return t;
}

}  // namespace urns
