#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "urns/analytic.hpp"
#include "urns/estimate.hpp"
#include "urns/rng.hpp"

namespace urns {

namespace detail {

// Decorrelates the per-row replica streams of a sweep.
inline std::uint64_t row_seed(std::uint64_t seed, std::uint64_t row) {
    SplitMix64 sm(seed ^ (0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL * row));
    return sm.next();
}

}  // namespace detail

struct SweepPRow {
    double p = 0.0;
    double q0_analytic = 0.0;
    double mc_lower = 0.0;
    double mc_upper = 0.0;
    double stderr_ = 0.0;
};

// Fixation probability across an interaction-parameter grid under the INF^i
// rule: the closed form next to a bracketed Monte Carlo estimate.
inline std::vector<SweepPRow> sweep_p(const std::vector<double>& grid, std::int64_t replicas,
                                      std::uint64_t seed, const EstimateOptions& base = {}) {
    std::vector<SweepPRow> rows;
    rows.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double p = grid[i];
        ModelParams params{2, 2, p, WeightSequence::generalized_power()};
        EstimateOptions opts = base;
        opts.mode = EstimateOptions::Mode::bracket;
        FixationEstimate est =
            estimate_fixation(params, replicas, detail::row_seed(seed, i), opts);
        rows.push_back({p, analytic::q0(p), est.lower, est.upper, est.stderr_});
    }
    return rows;
}

inline std::vector<double> uniform_grid(double lo, double hi, std::int32_t points) {
    if (points < 2) throw std::invalid_argument("uniform_grid: need at least two points");
    std::vector<double> grid(points);
    for (std::int32_t i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    return grid;
}

struct SweepRhoRow {
    std::string rho_token;  // echoed exactly as given
    double rho = 0.0;
    double estimate_lower = 0.0;
    double estimate_upper = 0.0;
    double stderr_ = 0.0;
    double deviation = 0.0;  // |bracket midpoint - q0(p)|
    double ai_draw_rate = 0.0;
    double ai_stderr = 0.0;
};

// Finite-rho convergence sweep at fixed p: bracketed fixation proxy, its
// deviation from the INF^i closed form, and the fixate-with-AI-draw rate.
inline std::vector<SweepRhoRow> sweep_rho(double p,
                                          const std::vector<std::pair<std::string, double>>& rhos,
                                          std::int64_t replicas, std::int64_t horizon,
                                          std::uint64_t seed, const EstimateOptions& base = {}) {
    const double target = analytic::q0(p);
    std::vector<SweepRhoRow> rows;
    rows.reserve(rhos.size());
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        const auto& [token, rho] = rhos[i];
        ModelParams params{2, 2, p, WeightSequence::classical(rho)};
        EstimateOptions opts = base;
        opts.mode = EstimateOptions::Mode::bracket;
        opts.horizon = horizon;
        FixationEstimate est =
            estimate_fixation(params, replicas, detail::row_seed(seed, i), opts);
        SweepRhoRow row;
        row.rho_token = token;
        row.rho = rho;
        row.estimate_lower = est.lower;
        row.estimate_upper = est.upper;
        row.stderr_ = est.stderr_;
        row.deviation = std::abs(est.point - target);
        row.ai_draw_rate = est.ai_rate;
        row.ai_stderr = est.ai_stderr;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace urns
