#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "urns/rational.hpp"
#include "urns/state.hpp"

namespace urns::oracle {

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thomas elimination for a tridiagonal system. sub[i] multiplies x[i-1] in
// row i (sub[0] unused), sup[i] multiplies x[i+1] (sup[n-1] unused).
inline std::vector<double> solve_tridiagonal(std::span<const double> sub,
                                             std::span<const double> diag,
                                             std::span<const double> sup,
                                             std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (sub.size() != n || sup.size() != n || rhs.size() != n || n == 0)
        throw std::invalid_argument("solve_tridiagonal: inconsistent sizes");

    std::vector<double> c(n), d(n);
    double pivot = diag[0];
    if (pivot == 0.0) throw std::runtime_error("solve_tridiagonal: singular system");
    c[0] = sup[0] / pivot;
    d[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - sub[i] * c[i - 1];
        if (pivot == 0.0) throw std::runtime_error("solve_tridiagonal: singular system");
        c[i] = sup[i] / pivot;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

enum class Boundary { zero, one };

struct SolveResult {
    std::vector<double> q;  // q[0..L]
    std::vector<double> r;  // r[0..L]
};

// Truncated linear solve of the configuration-chain recurrences
//   q_0 = 1/2 + q_1/2
//   q_l = (p/2)^2 q_{l-1} + (1-p/2)^2 q_{l+1} + p(1-p/2) r_{l-1}   (1 <= l <= L)
//   r_0 = (1+p)/2 + (1-p)/2 r_1
//   r_l = p r_{l-1} + (1-p) r_{l+1}                                 (1 <= l <= L)
// with q_{L+1} and r_{L+1} pinned. Both subsystems are tridiagonal and
// inverse-positive; r is solved first and feeds the q right-hand side, so
// bracketing the far boundary brackets the whole solution componentwise.
//
// Boundary::zero pins both to 0, the consistent limit. Boundary::one caps
// the far values by classical ruin bounds instead of a literal 1, which
// would be vacuous: r = 1 solves every r row outright, and the q rows pass
// the far influence at the slow rate 1/lambda_plus. Both caps are standard
// random-walk facts. Fixation from C2(l) needs the deficit walk (up moves
// have probability at most p while in deficit) to reach 0, so
// r_{L+1} <= (p/(1-p))^{L+1}; from C1(l) one of the two urn margins must
// cross 0 the same way, so q_{L+1} <= 2 (p/(1-p))^{L+1}.
inline SolveResult truncated_solve(double p, std::int32_t level_cap, Boundary boundary) {
    if (!(p >= 0.0 && p < 0.5))
        throw std::invalid_argument("truncated_solve: requires 0 <= p < 1/2");
    if (level_cap < 2) throw std::invalid_argument("truncated_solve: truncation level below 2");

    const std::size_t n = static_cast<std::size_t>(level_cap) + 1;
    const bool upper = boundary == Boundary::one;
    const double ruin_far = std::pow(p / (1.0 - p), static_cast<double>(level_cap) + 1.0);
    const double q_far = upper ? std::min(1.0, 2.0 * ruin_far) : 0.0;
    const double r_far = upper ? ruin_far : 0.0;

    std::vector<double> sub(n, 0.0), diag(n, 1.0), sup(n, 0.0), rhs(n, 0.0);

    // r subsystem.
    sup[0] = -(1.0 - p) / 2.0;
    rhs[0] = (1.0 + p) / 2.0;
    for (std::size_t l = 1; l < n; ++l) {
        sub[l] = -p;
        sup[l] = -(1.0 - p);
        rhs[l] = 0.0;
    }
    rhs[n - 1] += (1.0 - p) * r_far;
    sup[n - 1] = 0.0;
    SolveResult out;
    out.r = solve_tridiagonal(sub, diag, sup, rhs);

    // q subsystem, sourced by the r solution.
    const double down = 0.25 * p * p;
    const double up = (1.0 - 0.5 * p) * (1.0 - 0.5 * p);
    const double source = p * (1.0 - 0.5 * p);
    sup[0] = -0.5;
    rhs[0] = 0.5;
    for (std::size_t l = 1; l < n; ++l) {
        sub[l] = -down;
        sup[l] = -up;
        rhs[l] = source * out.r[l - 1];
    }
    rhs[n - 1] += up * q_far;
    sup[n - 1] = 0.0;
    out.q = solve_tridiagonal(sub, diag, sup, rhs);
    return out;
}

// Lower and upper truncation solutions. The zero boundary is the consistent
// limit (q_l, r_l -> 0 for p < 1/2); boundary one gives the conservative
// upper sandwich. Both matrices are inverse-positive, so the pair brackets
// the infinite-system solution componentwise.
struct FixationTable {
    double p = 0.0;
    std::int32_t level_cap = 0;
    std::vector<double> q_lower, q_upper;
    std::vector<double> r_lower, r_upper;

    double q_width(std::size_t ell = 0) const { return q_upper[ell] - q_lower[ell]; }
};

inline FixationTable solve_bracket(double p, std::int32_t level_cap) {
    FixationTable t;
    t.p = p;
    t.level_cap = level_cap;
    SolveResult lo = truncated_solve(p, level_cap, Boundary::zero);
    SolveResult hi = truncated_solve(p, level_cap, Boundary::one);
    t.q_lower = std::move(lo.q);
    t.r_lower = std::move(lo.r);
    t.q_upper = std::move(hi.q);
    t.r_upper = std::move(hi.r);
    return t;
}

// ---------------------------------------------------------------------------
// Exact finite-depth path enumeration.

// Exact model parameters: rational interaction probability, and either the
// INF^i rule (rho absent) or a rational classical rho > 1.
struct ExactParams {
    std::int32_t urns = 2;
    std::int32_t colors = 2;
    Rat p = Rat(0);
    std::optional<Rat> rho;  // nullopt: INF^i rule

    void validate() const {
        if (urns < 1) throw std::invalid_argument("ExactParams: need at least one urn");
        if (colors < 2) throw std::invalid_argument("ExactParams: need at least two colors");
        if (p < Rat(0) || p > Rat(1)) throw std::invalid_argument("ExactParams: p outside [0,1]");
        if (rho && !(Rat(1) < *rho)) throw std::invalid_argument("ExactParams: rho must exceed 1");
    }
};

// Exact per-color draw distribution for one pool.
inline std::vector<Rat> exact_draw_distribution(const ExactParams& params,
                                                std::span<const std::int64_t> counts) {
    std::vector<Rat> probs(counts.size(), Rat(0));
    if (!params.rho) {
        std::int64_t best = counts[0];
        for (std::int64_t c : counts) best = std::max(best, c);
        long long ties = 0;
        for (std::int64_t c : counts) ties += (c == best);
        for (std::size_t k = 0; k < counts.size(); ++k)
            if (counts[k] == best) probs[k] = Rat(1, ties);
        return probs;
    }
    // Weight rho^c normalized by the common factor rho^{max c}: the weight of
    // color k becomes a^{c_k} b^{cmax - c_k} over denominator-free integers.
    std::int64_t cmax = counts[0];
    for (std::int64_t c : counts) cmax = std::max(cmax, c);
    const Rat a(params.rho->num(), 1), b(params.rho->den(), 1);
    Rat total(0);
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const unsigned e = static_cast<unsigned>(counts[k]);
        const unsigned f = static_cast<unsigned>(cmax - counts[k]);
        probs[k] = a.pow(e) * b.pow(f);
        total += probs[k];
    }
    for (Rat& x : probs) x /= total;
    return probs;
}

// One joint outcome sequence: per step and urn, the pool used (1 = combined)
// and the color drawn, with its exact probability and the resulting state.
struct EnumeratedPath {
    std::vector<std::uint8_t> pools;
    std::vector<std::uint8_t> colors;
    SystemState state;
    Rat prob;
};

namespace detail {

inline void enumerate_rec(const ExactParams& params, const SystemState& state, int depth,
                          Rat prob, std::vector<std::uint8_t>& pools,
                          std::vector<std::uint8_t>& colors, std::uint64_t budget,
                          std::uint64_t& expanded, std::vector<EnumeratedPath>& out) {
    if (depth == 0) {
        if (++expanded > budget) throw BudgetExceeded("enumerate_paths: path budget exceeded");
        out.push_back({pools, colors, state, prob});
        return;
    }

    // Joint per-step outcomes: pool flag and color for each urn in order.
    struct UrnChoice {
        std::uint8_t pool;
        std::uint8_t color;
        Rat prob;
    };
    std::vector<std::vector<UrnChoice>> choices(state.num_urns);
    std::vector<std::int64_t> combined;
    state.combined_into(combined);
    const Rat own_weight = Rat(1) - params.p;
    for (std::int32_t u = 0; u < state.num_urns; ++u) {
        std::span<const std::int64_t> own(&state.counts[static_cast<std::size_t>(u) *
                                                        state.num_colors],
                                          static_cast<std::size_t>(state.num_colors));
        const auto own_dist = exact_draw_distribution(params, own);
        const auto comb_dist = exact_draw_distribution(params, combined);
        for (std::int32_t k = 0; k < state.num_colors; ++k) {
            if (!own_weight.is_zero() && !own_dist[k].is_zero())
                choices[u].push_back({0, static_cast<std::uint8_t>(k), own_weight * own_dist[k]});
            if (!params.p.is_zero() && !comb_dist[k].is_zero())
                choices[u].push_back({1, static_cast<std::uint8_t>(k), params.p * comb_dist[k]});
        }
    }

    std::vector<std::size_t> pick(state.num_urns, 0);
    while (true) {
        Rat branch = prob;
        for (std::int32_t u = 0; u < state.num_urns; ++u) branch *= choices[u][pick[u]].prob;
        SystemState next = state;
        for (std::int32_t u = 0; u < state.num_urns; ++u) {
            const auto& ch = choices[u][pick[u]];
            next.at(u, ch.color) += 1;
            pools.push_back(ch.pool);
            colors.push_back(ch.color);
        }
        enumerate_rec(params, next, depth - 1, branch, pools, colors, budget, expanded, out);
        for (std::int32_t u = 0; u < state.num_urns; ++u) {
            pools.pop_back();
            colors.pop_back();
        }

        std::int32_t u = state.num_urns - 1;
        while (u >= 0 && ++pick[u] == choices[u].size()) {
            pick[u] = 0;
            --u;
        }
        if (u < 0) break;
    }
}

}  // namespace detail

inline constexpr std::uint64_t kDefaultPathBudget = 4'000'000;

// Exact distribution over all joint (pool, color) outcome sequences of the
// given depth, starting from `initial`. Probabilities sum to exactly one.
inline std::vector<EnumeratedPath> enumerate_paths(const ExactParams& params,
                                                   const SystemState& initial, int depth,
                                                   std::uint64_t budget = kDefaultPathBudget) {
    params.validate();
    if (initial.num_urns != params.urns || initial.num_colors != params.colors)
        throw std::invalid_argument("enumerate_paths: state does not match parameters");
    if (depth < 0 || depth > 12)
        throw std::invalid_argument("enumerate_paths: depth must be in [0, 12]");
    std::vector<EnumeratedPath> out;
    std::vector<std::uint8_t> pools, colors;
    std::uint64_t expanded = 0;
    detail::enumerate_rec(params, initial, depth, Rat(1), pools, colors, budget, expanded, out);
    return out;
}

inline std::vector<EnumeratedPath> enumerate_paths(const ExactParams& params, int depth,
                                                   std::uint64_t budget = kDefaultPathBudget) {
    return enumerate_paths(params, SystemState::empty(params.urns, params.colors), depth, budget);
}

// Exact distribution of the configuration class after `depth` steps
// (two urns, two colors only).
inline std::map<ConfigClass, Rat> class_distribution(const ExactParams& params,
                                                     const SystemState& initial, int depth,
                                                     std::uint64_t budget = kDefaultPathBudget) {
    std::map<ConfigClass, Rat> dist;
    for (const auto& path : enumerate_paths(params, initial, depth, budget)) {
        auto [it, inserted] = dist.try_emplace(classify(path.state), path.prob);
        if (!inserted) it->second += path.prob;
    }
    return dist;
}

}  // namespace urns::oracle
