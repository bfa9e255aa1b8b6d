#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace urns::analytic {

namespace detail {

inline void require_p(double p, double hi, const char* what) {
    if (!(p >= 0.0) || !(p <= hi))
        throw std::invalid_argument(std::string(what) + ": interaction parameter out of range");
}

}  // namespace detail

// Roots of the characteristic polynomial (1-p/2)^2 L^2 - L + (p/2)^2 = 0.
inline std::pair<double, double> lambda_pm(double p) {
    detail::require_p(p, 0.5, "lambda_pm");
    const double a = 1.0 - 0.5 * p;
    const double disc = std::sqrt(1.0 - p * p * a * a);
    return {(1.0 - disc) / (2.0 * a * a), (1.0 + disc) / (2.0 * a * a)};
}

inline double lambda_minus(double p) { return lambda_pm(p).first; }
inline double lambda_plus(double p) { return lambda_pm(p).second; }

// Coefficient of the particular solution exp(p x / (1-p)).
inline double C_of(double p) {
    detail::require_p(p, 0.5, "C_of");
    const double onemp = 1.0 - p;
    const double denom = 2.0 * p * p * p - 6.0 * p * p + 9.0 * p - 4.0;
    // denom is negative on [0, 1/2]; it has no root there.
    return -2.0 * onemp * onemp * (1.0 + p) / denom;
}

// Coefficient of the decaying homogeneous mode exp(lambda_minus x).
inline double A_of(double p) {
    detail::require_p(p, 0.5, "A_of");
    const double c = C_of(p);
    return (1.0 - p + c * (3.0 * p - 2.0)) / ((1.0 - p) * (2.0 - lambda_minus(p)));
}

// Probability that the two urns fixate on the same color from an empty start.
inline double q0(double p) {
    detail::require_p(p, 0.5, "q0");
    return A_of(p) + C_of(p);
}

// Same-color fixation probability started from class C2(ell).
inline double r_ell(double p, std::int64_t ell) {
    if (!(p >= 0.0 && p < 0.5)) throw std::invalid_argument("r_ell: requires 0 <= p < 1/2");
    if (ell < 0) throw std::invalid_argument("r_ell: negative level");
    return (1.0 + p) / (2.0 - p) * std::pow(p / (1.0 - p), static_cast<double>(ell));
}

inline double r1(double p) { return r_ell(p, 1); }

// Same-color fixation probability started from class C1(ell): the ell-th
// series coefficient of f_p, i.e. A lambda_minus^ell + C (p/(1-p))^ell.
// The endpoint p = 1/2 is the continuous limit (A -> 0, C -> 1, so q = 1).
inline double q_ell(double p, std::int64_t ell) {
    detail::require_p(p, 0.5, "q_ell");
    if (ell < 0) throw std::invalid_argument("q_ell: negative level");
    if (p == 0.5) return 1.0;
    const double e = static_cast<double>(ell);
    return A_of(p) * std::pow(lambda_minus(p), e) + C_of(p) * std::pow(p / (1.0 - p), e);
}

// f_p(x) = A exp(lambda_minus x) + C exp(p x / (1-p)).
inline double f_p_eval(double p, double x) {
    if (!(p >= 0.0 && p < 0.5)) throw std::invalid_argument("f_p_eval: requires 0 <= p < 1/2");
    return A_of(p) * std::exp(lambda_minus(p) * x) + C_of(p) * std::exp(p / (1.0 - p) * x);
}

// Residual of the defining ODE at x, with derivatives taken analytically:
// (1-p/2)^2 f'' - f' + (p/2)^2 f + (p(1+p)/2) exp(p x/(1-p)).
inline double ode_residual(double p, double x) {
    if (!(p >= 0.0 && p < 0.5))
        throw std::invalid_argument("ode_residual: requires 0 <= p < 1/2");
    const double a = A_of(p), c = C_of(p);
    const double lm = lambda_minus(p), s = p / (1.0 - p);
    const double ea = std::exp(lm * x), ec = std::exp(s * x);
    const double f = a * ea + c * ec;
    const double f1 = a * lm * ea + c * s * ec;
    const double f2 = a * lm * lm * ea + c * s * s * ec;
    const double half = 1.0 - 0.5 * p;
    return half * half * f2 - f1 + 0.25 * p * p * f + 0.5 * p * (1.0 + p) * ec;
}

// The growing homogeneous mode is absent: f_p must stay below exp(x).
inline bool growth_bound_holds(double p, double x_max = 30.0, int steps = 60) {
    for (int i = 0; i <= steps; ++i) {
        const double x = x_max * i / steps;
        if (f_p_eval(p, x) > std::exp(x) * (1.0 + 1e-12)) return false;
    }
    return true;
}

// All fixation-formula quantities for one interaction parameter.
struct ClosedForm {
    double p = 0.0;
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
    double C_p = 0.0;
    double A_p = 0.0;
    double q0 = 0.0;

    static ClosedForm at(double p) {
        auto [lm, lp] = analytic::lambda_pm(p);
        return {p, lm, lp, analytic::C_of(p), analytic::A_of(p), analytic::q0(p)};
    }
};

// Law of the number of non-conformist urns for an odd number of urns under
// the INF^i rule: the first step fixes the majority color; each of the
// M = min(K, U-K) minority urns then conforms independently with probability
// r1(p), where K is Binomial(U, 1/2).
inline std::vector<double> nonconformist_pmf(std::int32_t num_urns, double p) {
    if (num_urns < 3 || num_urns % 2 == 0)
        throw std::invalid_argument("nonconformist_pmf: requires an odd urn count >= 3");
    if (!(p >= 0.0 && p < 0.5))
        throw std::invalid_argument("nonconformist_pmf: requires 0 <= p < 1/2");

    const std::int32_t m_max = (num_urns - 1) / 2;
    // Pascal rows are exact in doubles for these sizes.
    std::vector<std::vector<double>> choose(num_urns + 1);
    for (std::int32_t n = 0; n <= num_urns; ++n) {
        choose[n].assign(n + 1, 1.0);
        for (std::int32_t k = 1; k < n; ++k) choose[n][k] = choose[n - 1][k - 1] + choose[n - 1][k];
    }

    const double conform = r1(p);
    std::vector<double> pmf(m_max + 1, 0.0);
    for (std::int32_t m = 0; m <= m_max; ++m) {
        const double pm = 2.0 * choose[num_urns][m] * std::pow(0.5, num_urns);
        for (std::int32_t n = 0; n <= m; ++n)
            pmf[n] += pm * choose[m][n] * std::pow(1.0 - conform, n) * std::pow(conform, m - n);
    }
    return pmf;
}

// Two urns, C >= 2 colors: same-color fixation probability 1/C + (C-1)/C q_1.
inline double multicolor_q(std::int32_t colors, double p) {
    if (colors < 2) throw std::invalid_argument("multicolor_q: need at least two colors");
    detail::require_p(p, 0.5, "multicolor_q");
    const double c = static_cast<double>(colors);
    return 1.0 / c + (c - 1.0) / c * q_ell(p, 1);
}

// Largest argument for which the total-progeny generating function of the
// subcritical geometric branching process is finite.
inline double gw_nu_max(double p) {
    if (!(p > 0.0 && p < 0.5)) throw std::invalid_argument("gw_nu_max: requires 0 < p < 1/2");
    return 1.0 / (4.0 * p * (1.0 - p));
}

// Minimal root of g = nu (1-p) / (1 - p g): total-progeny generating function.
inline double gw_total_progeny_gf(double p, double nu) {
    if (!(p > 0.0 && p < 0.5))
        throw std::invalid_argument("gw_total_progeny_gf: requires 0 < p < 1/2");
    if (!(nu >= 0.0)) throw std::invalid_argument("gw_total_progeny_gf: negative argument");
    double radicand = 1.0 - 4.0 * p * (1.0 - p) * nu;
    // nu == nu_max lands epsilon-negative in floating point.
    if (radicand < 0.0 && radicand > -1e-12) radicand = 0.0;
    if (radicand < 0.0)
        throw std::invalid_argument("gw_total_progeny_gf: argument beyond the convergence bound");
    return (1.0 - std::sqrt(radicand)) / (2.0 * p);
}

}  // namespace urns::analytic
