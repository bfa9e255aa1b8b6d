#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "urns/rng.hpp"
#include "urns/weights.hpp"

namespace urns {

// Direct sequential sampler for a single two-color urn: each draw evaluates
// pi_w on the current counts and flips one uniform variate.
inline std::vector<std::int32_t> single_urn_direct(const WeightSequence& weights,
                                                   std::int64_t horizon, RngStream& rng) {
    if (horizon < 1) throw std::invalid_argument("single_urn_direct: horizon must be positive");
    std::vector<std::int32_t> draws;
    draws.reserve(horizon);
    std::int64_t counts[2] = {0, 0};
    for (std::int64_t n = 0; n < horizon; ++n) {
        const double p0 = draw_prob(weights, {counts[0], counts[1]}, 0);
        const std::int32_t color = rng.uniform() < p0 ? 0 : 1;
        draws.push_back(color);
        ++counts[color];
    }
    return draws;
}

// Time-line sampler for a single two-color urn. Steps where the v exponents
// differ are forced; where they tie, each color runs an exponential clock at
// rate u of its current count and the first ring wins. Memorylessness makes
// resampling the residual clocks at every tied step exact, so the output law
// equals the direct sampler's.
inline std::vector<std::int32_t> rubin_single_urn(const WeightSequence& weights,
                                                  std::int64_t horizon, RngStream& rng) {
    if (horizon < 1) throw std::invalid_argument("rubin_single_urn: horizon must be positive");
    std::vector<std::int32_t> draws;
    draws.reserve(horizon);
    std::int64_t counts[2] = {0, 0};
    for (std::int64_t n = 0; n < horizon; ++n) {
        const WeightTerm a = weights.term(counts[0]);
        const WeightTerm b = weights.term(counts[1]);
        std::int32_t color;
        if (a.v > b.v) {
            color = 0;
        } else if (a.v < b.v) {
            color = 1;
        } else {
            const double ring0 = rng.exponential(std::exp(a.log_u));
            const double ring1 = rng.exponential(std::exp(b.log_u));
            color = ring0 <= ring1 ? 0 : 1;
        }
        draws.push_back(color);
        ++counts[color];
    }
    return draws;
}

}  // namespace urns
