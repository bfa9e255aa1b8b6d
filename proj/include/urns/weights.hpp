#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace urns {

// One generalized reinforcement weight u * INF^v. The magnitude u is kept in
// log space so that classical weights rho^i never overflow; v is the exponent
// of the formal infinity symbol. Only counts whose term attains the maximal v
// compete in a draw, with odds proportional to their u.
struct WeightTerm {
    double log_u = 0.0;  // natural log of the magnitude, must be finite
    double v = 0.0;      // exponent of the formal infinity symbol
};

// Reinforcement weight rule. Three shapes:
//   classical(rho)      term(i) = rho^i          (log_u = i*ln(rho), v = 0)
//   generalized_power() term(i) = INF^i          (log_u = 0,        v = i)
//   table(terms)        explicit finite list; indices past the end are errors
class WeightSequence {
  public:
    enum class Rule { classical, generalized_power, table };

    static WeightSequence classical(double rho) {
        if (!(rho > 1.0) || !std::isfinite(rho))
            throw std::invalid_argument("classical weight rule requires finite rho > 1");
        WeightSequence w;
        w.rule_ = Rule::classical;
        w.log_rho_ = std::log(rho);
        w.rho_ = rho;
        return w;
    }

    static WeightSequence generalized_power() {
        WeightSequence w;
        w.rule_ = Rule::generalized_power;
        return w;
    }

    static WeightSequence table(std::vector<WeightTerm> terms) {
        if (terms.empty()) throw std::invalid_argument("weight table must be non-empty");
        for (const auto& t : terms)
            if (!std::isfinite(t.log_u) || !std::isfinite(t.v))
                throw std::invalid_argument("weight table entries must be finite");
        WeightSequence w;
        w.rule_ = Rule::table;
        w.terms_ = std::move(terms);
        return w;
    }

    Rule rule() const { return rule_; }

    // True for the rho = infinity rule INF^i.
    bool infinite_rho() const { return rule_ == Rule::generalized_power; }

    double classical_rho() const {
        if (rule_ != Rule::classical)
            throw std::logic_error("classical_rho() on a non-classical weight rule");
        return rho_;
    }

    double log_rho() const {
        if (rule_ != Rule::classical)
            throw std::logic_error("log_rho() on a non-classical weight rule");
        return log_rho_;
    }

    std::size_t table_size() const { return terms_.size(); }

    WeightTerm term(std::int64_t index) const {
        if (index < 0) throw std::out_of_range("weight index must be non-negative");
        switch (rule_) {
            case Rule::classical:
                return {static_cast<double>(index) * log_rho_, 0.0};
            case Rule::generalized_power:
                return {0.0, static_cast<double>(index)};
            case Rule::table:
                if (static_cast<std::size_t>(index) >= terms_.size())
                    throw std::out_of_range("weight table has no entry for count " +
                                            std::to_string(index));
                return terms_[static_cast<std::size_t>(index)];
        }
        throw std::logic_error("unreachable weight rule");
    }

  private:
    WeightSequence() = default;

    Rule rule_ = Rule::generalized_power;
    double rho_ = 0.0;
    double log_rho_ = 0.0;
    std::vector<WeightTerm> terms_;
};

// Draw distribution over colors for a single pool. Colors whose term does not
// attain the maximal v get probability zero; within the argmax set odds are
// proportional to u, evaluated with max-subtraction in log space. An all-equal
// pool (in particular an empty one) comes out uniform.
inline void draw_distribution_into(const WeightSequence& w, std::span<const std::int64_t> counts,
                                   std::vector<double>& out) {
    if (counts.empty()) throw std::invalid_argument("draw_distribution: empty counts");
    out.assign(counts.size(), 0.0);

    double v_max = -std::numeric_limits<double>::infinity();
    double log_u_max = -std::numeric_limits<double>::infinity();
    thread_local std::vector<WeightTerm> terms;
    terms.clear();
    for (std::int64_t c : counts) {
        if (c < 0) throw std::invalid_argument("draw_distribution: negative count");
        terms.push_back(w.term(c));
        v_max = std::max(v_max, terms.back().v);
    }
    for (const auto& t : terms)
        if (t.v == v_max) log_u_max = std::max(log_u_max, t.log_u);

    double denom = 0.0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        if (terms[k].v == v_max) {
            out[k] = std::exp(terms[k].log_u - log_u_max);
            denom += out[k];
        }
    }
    for (double& x : out) x /= denom;
}

inline std::vector<double> draw_distribution(const WeightSequence& w,
                                             std::span<const std::int64_t> counts) {
    std::vector<double> out;
    draw_distribution_into(w, counts, out);
    return out;
}

// pi_w: probability that color k is drawn from a pool with the given counts.
inline double draw_prob(const WeightSequence& w, std::span<const std::int64_t> counts,
                        std::size_t k) {
    if (k >= counts.size()) throw std::invalid_argument("draw_prob: color index out of range");
    std::vector<double> dist;
    draw_distribution_into(w, counts, dist);
    return dist[k];
}

inline double draw_prob(const WeightSequence& w, std::initializer_list<std::int64_t> counts,
                        std::size_t k) {
    return draw_prob(w, std::span<const std::int64_t>(counts.begin(), counts.size()), k);
}

// Removes one ball of each color while both are present. For u-constant
// increasing-v rules this leaves the draw law unchanged.
inline std::pair<std::int64_t, std::int64_t> reduce_pair(std::int64_t black, std::int64_t white) {
    const std::int64_t m = std::min(black, white);
    return {black - m, white - m};
}

}  // namespace urns
