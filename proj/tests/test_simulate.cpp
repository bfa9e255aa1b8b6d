#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "stats.hpp"
#include "urns/analytic.hpp"
#include "urns/estimate.hpp"
#include "urns/oracle.hpp"
#include "urns/rubin.hpp"
#include "urns/simulate.hpp"

using urns::ConfigClass;
using urns::EstimateOptions;
using urns::ModelParams;
using urns::Rat;
using urns::RngStream;
using urns::StepRecord;
using urns::SystemState;
using urns::WeightSequence;

namespace {

// Empirical one-step class frequencies from a fixed start, checked against
// the exact enumeration marginals by chi-square.
double one_step_chi_square(const ModelParams& params, const urns::oracle::ExactParams& exact,
                           const SystemState& start, std::int64_t samples, std::uint64_t seed) {
    const auto exact_dist = urns::oracle::class_distribution(exact, start, 1);
    std::vector<ConfigClass> keys;
    std::vector<double> probs;
    for (const auto& [cls, prob] : exact_dist) {
        keys.push_back(cls);
        probs.push_back(prob.to_double());
    }
    std::map<ConfigClass, std::int64_t> hist;
    urns::Stepper stepper(params);
    StepRecord rec;
    for (std::int64_t i = 0; i < samples; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        SystemState state = start;
        stepper.step(state, rng, rec);
        ++hist[urns::classify(state)];
    }
    std::vector<std::int64_t> observed(keys.size(), 0);
    std::int64_t matched = 0;
    for (std::size_t k = 0; k < keys.size(); ++k) {
        if (auto it = hist.find(keys[k]); it != hist.end()) {
            observed[k] = it->second;
            matched += it->second;
        }
    }
    REQUIRE(matched == samples);  // nothing outside the exact support
    return teststat::chi_square_pvalue(observed, probs, samples);
}

}  // namespace

TEST_CASE("one-step class transitions match the exact enumeration") {
    const std::int64_t n = 100000;
    for (double p : {0.3, 0.4}) {
        ModelParams params{2, 2, p, WeightSequence::generalized_power()};
        urns::oracle::ExactParams exact;
        exact.p = p == 0.3 ? Rat(3, 10) : Rat(2, 5);

        // From C1(l >= 1): {C1(l-1): (p/2)^2, C1(l+1): (1-p/2)^2, C2(l-1): p(1-p/2)}.
        CHECK(one_step_chi_square(params, exact, SystemState::two_by_two(1, 0, 0, 1), n, 11) >
              0.001);
        CHECK(one_step_chi_square(params, exact, SystemState::two_by_two(3, 0, 0, 3), n, 12) >
              0.001);
        // From C2(0): {C3: (1+p)/2, C2(1): (1-p)/2}.
        CHECK(one_step_chi_square(params, exact, SystemState::two_by_two(1, 0, 0, 0), n, 13) >
              0.001);
        // From C2(l >= 1): {C2(l-1): p, C2(l+1): 1-p}.
        CHECK(one_step_chi_square(params, exact, SystemState::two_by_two(3, 0, 0, 2), n, 14) >
              0.001);
        // From empty: {C3: 1/2, C1(1): 1/2}.
        CHECK(one_step_chi_square(params, exact, SystemState::empty(2, 2), n, 15) > 0.001);
    }
}

TEST_CASE("finite-rho one-step transitions also match the exact enumeration") {
    ModelParams params{2, 2, 0.25, WeightSequence::classical(2.0)};
    urns::oracle::ExactParams exact;
    exact.p = Rat(1, 4);
    exact.rho = Rat(2);
    CHECK(one_step_chi_square(params, exact, SystemState::two_by_two(2, 1, 0, 1), 100000, 21) >
          0.001);
    CHECK(one_step_chi_square(params, exact, SystemState::two_by_two(1, 0, 0, 1), 100000, 22) >
          0.001);
}

TEST_CASE("trajectories are bit-identical for a fixed seed and replica id") {
    ModelParams params{2, 2, 0.35, WeightSequence::classical(4.0)};
    for (std::uint64_t replica : {0ULL, 7ULL}) {
        RngStream rng_a(99, replica), rng_b(99, replica);
        const auto ta = urns::run(params, rng_a, 300, urns::StopRule::at_horizon);
        const auto tb = urns::run(params, rng_b, 300, urns::StopRule::at_horizon);
        CHECK(ta.final_state == tb.final_state);
        CHECK(ta.sigma2 == tb.sigma2);
        CHECK(ta.sigma3 == tb.sigma3);
        CHECK(ta.tau == tb.tau);
        REQUIRE(ta.records.size() == tb.records.size());
        for (std::size_t i = 0; i < ta.records.size(); ++i) {
            CHECK(ta.records[i].drawn_color == tb.records[i].drawn_color);
            CHECK(ta.records[i].from_combined == tb.records[i].from_combined);
            CHECK(ta.records[i].ai_draw == tb.records[i].ai_draw);
        }
    }
}

TEST_CASE("estimates do not depend on the thread layout") {
    ModelParams params{2, 2, 0.3, WeightSequence::generalized_power()};
    EstimateOptions one;
    one.threads = 1;
    EstimateOptions four;
    four.threads = 4;
    const auto a = urns::estimate_fixation(params, 20000, 5150, one);
    const auto b = urns::estimate_fixation(params, 20000, 5150, four);
    CHECK(a.fixated == b.fixated);
    CHECK(a.escaped == b.escaped);
    CHECK(a.unresolved == b.unresolved);
}

TEST_CASE("INF^i phase pattern: C1 then C2 then C3, and never an AI-draw") {
    ModelParams params{2, 2, 0.3, WeightSequence::generalized_power()};
    for (std::uint64_t replica = 0; replica < 2000; ++replica) {
        RngStream rng(31337, replica);
        const auto t = urns::run(params, rng, 2000, urns::StopRule::at_sigma3);
        CHECK(!t.tau.has_value());
        bool seen_c2 = false, seen_c3 = false;
        for (const auto& cls : t.class_series) {
            if (cls.is_c1()) CHECK(!(seen_c2 || seen_c3));
            if (cls.is_c2()) {
                CHECK(!seen_c3);
                seen_c2 = true;
            }
            if (cls.is_c3()) seen_c3 = true;
        }
        if (t.sigma3) {
            CHECK(t.fixation == urns::FixationStatus::fixated);
            CHECK(*t.sigma3 == t.steps);
            if (t.sigma2) CHECK(*t.sigma2 <= *t.sigma3);
        }
    }
}

TEST_CASE("each urn gains exactly one ball per step") {
    ModelParams params{3, 3, 0.4, WeightSequence::classical(2.0)};
    RngStream rng(64, 2);
    const auto t = urns::run(params, rng, 40, urns::StopRule::at_horizon);
    for (std::int32_t u = 0; u < 3; ++u) CHECK(t.final_state.urn_total(u) == t.steps);
}

TEST_CASE("ai_draw flags a color outside the pool argmax") {
    // Decreasing v forces the minority color, which is an AI-draw whenever
    // the pool is not tied.
    const auto w = WeightSequence::table({{0.0, 0.0}, {0.0, -1.0}, {0.0, -2.0}});
    ModelParams params{1, 2, 0.0, w};
    RngStream rng(5, 0);
    const auto t = urns::run(params, rng, 2, urns::StopRule::at_horizon);
    CHECK(!t.records[0].ai_draw[0]);  // empty pool is tied: no argmax to miss
    CHECK(t.records[1].ai_draw[0]);   // (1,0) pool forced to draw the zero side
    CHECK(t.tau == 2);
}

TEST_CASE("stop rules cut trajectories at the advertised times") {
    ModelParams params{2, 2, 0.3, WeightSequence::classical(2.0)};
    for (std::uint64_t replica = 0; replica < 50; ++replica) {
        RngStream rng_a(88, replica), rng_b(88, replica);
        const auto full = urns::run(params, rng_a, 150, urns::StopRule::at_horizon);
        const auto cut = urns::run(params, rng_b, 150, urns::StopRule::at_tau_or_sigma3);
        if (cut.tau || cut.sigma3) {
            std::int64_t expect = 150;
            if (cut.tau) expect = std::min(expect, *cut.tau);
            if (cut.sigma3) expect = std::min(expect, *cut.sigma3);
            CHECK(cut.steps == expect);
        } else {
            CHECK(cut.steps == 150);
        }
        (void)full;
    }
}

TEST_CASE("deficit walk is recorded while in C2") {
    ModelParams params{2, 2, 0.3, WeightSequence::generalized_power()};
    RngStream rng(7, 3);
    const auto t = urns::run(params, rng, 500, urns::StopRule::at_sigma3);
    std::size_t c2_steps = 0;
    for (const auto& cls : t.class_series) c2_steps += cls.is_c2();
    CHECK(t.deficit_series.size() == c2_steps);
    for (std::int64_t y : t.deficit_series) CHECK(y >= 0);
}

TEST_CASE("finite rho sees AI-draws; the INF^i rule never does") {
    SUBCASE("rho = 2, p = 0.3: a positive fraction of paths hits tau") {
        ModelParams params{2, 2, 0.3, WeightSequence::classical(2.0)};
        std::int64_t with_tau = 0;
        const std::int64_t n = 20000;
        for (std::int64_t i = 0; i < n; ++i) {
            RngStream rng(512, static_cast<std::uint64_t>(i));
            const auto t = urns::run(params, rng, 200, urns::StopRule::at_horizon);
            with_tau += t.tau.has_value();
        }
        const double frac = static_cast<double>(with_tau) / n;
        CHECK(frac > 0.05);  // regression floor; observed much higher
    }
    SUBCASE("p = 0 still produces AI-draws from own pools at finite rho") {
        ModelParams params{2, 2, 0.0, WeightSequence::classical(2.0)};
        std::int64_t with_tau = 0;
        for (std::int64_t i = 0; i < 5000; ++i) {
            RngStream rng(513, static_cast<std::uint64_t>(i));
            with_tau += urns::run(params, rng, 100, urns::StopRule::at_horizon).tau.has_value();
        }
        CHECK(with_tau > 0);
    }
    SUBCASE("INF^i: tau is never set, and the rate function reports exact zero") {
        ModelParams params{2, 2, 0.3, WeightSequence::generalized_power()};
        const auto rate = urns::ai_draw_rate(params, 1000, 3, 200);
        CHECK(rate.rate == 0.0);
        CHECK(rate.events == 0);
    }
}

TEST_CASE("ruin shortcut agrees with the closed form at p = 0.3") {
    ModelParams params{2, 2, 0.3, WeightSequence::generalized_power()};
    EstimateOptions opts;
    opts.mode = EstimateOptions::Mode::ruin_shortcut;
    opts.threads = 2;
    const auto est = urns::estimate_fixation(params, 100000, 1234, opts);
    CHECK(est.unresolved == 0);
    CHECK(std::abs(est.point - urns::analytic::q0(0.3)) <= 4.0 * est.stderr_);
}

TEST_CASE("estimate endpoints: independent urns at p = 0 and the critical p = 1/2") {
    SUBCASE("p = 0, ruin mode: exactly half the paths fixate together") {
        ModelParams params{2, 2, 0.0, WeightSequence::generalized_power()};
        EstimateOptions opts;
        opts.mode = EstimateOptions::Mode::ruin_shortcut;
        const auto est = urns::estimate_fixation(params, 50000, 77, opts);
        CHECK(std::abs(est.point - 0.5) <= 4.0 * est.stderr_);
    }
    SUBCASE("p = 1/2, bracket mode: the point estimate approaches one") {
        ModelParams params{2, 2, 0.5, WeightSequence::generalized_power()};
        EstimateOptions opts;
        opts.threads = 2;
        const auto est = urns::estimate_fixation(params, 20000, 78, opts);
        CHECK(est.upper == 1.0);
        CHECK(est.point > 0.99);
    }
}

TEST_CASE("ruin shortcut preconditions") {
    EstimateOptions ruin;
    ruin.mode = EstimateOptions::Mode::ruin_shortcut;
    CHECK_THROWS_AS(urns::estimate_fixation({2, 2, 0.5, WeightSequence::generalized_power()}, 10,
                                            1, ruin),
                    std::invalid_argument);
    CHECK_THROWS_AS(urns::estimate_fixation({2, 2, 0.3, WeightSequence::classical(2.0)}, 10, 1,
                                            ruin),
                    std::invalid_argument);
    CHECK_THROWS_AS(urns::estimate_fixation({3, 2, 0.3, WeightSequence::generalized_power()}, 10,
                                            1, ruin),
                    std::invalid_argument);
}

TEST_CASE("AI-draw rate falls roughly geometrically in rho") {
    // Doubling rho should about halve the fixate-with-AI-draw probability.
    const std::int64_t n = 30000;
    std::vector<double> rates;
    for (double rho : {8.0, 16.0, 32.0, 64.0}) {
        ModelParams params{2, 2, 0.3, WeightSequence::classical(rho)};
        rates.push_back(urns::ai_draw_rate(params, n, 777, 300, 2).rate);
    }
    for (std::size_t i = 0; i + 1 < rates.size(); ++i) {
        CHECK(rates[i + 1] < rates[i]);
        const double ratio = rates[i + 1] / rates[i];
        CHECK(ratio > 0.2);
        CHECK(ratio < 0.85);
    }
}

TEST_CASE("single-urn fixation dichotomy under constant v") {
    SUBCASE("u_i = 2^i: draws lock onto one color") {
        std::vector<urns::WeightTerm> terms;
        for (int i = 0; i <= 101; ++i) terms.push_back({i * std::log(2.0), 0.0});
        const auto w = WeightSequence::table(terms);
        int locked = 0;
        const int trials = 2000;
        for (int i = 0; i < trials; ++i) {
            RngStream rng(4242, static_cast<std::uint64_t>(i));
            const auto draws = urns::single_urn_direct(w, 100, rng);
            bool constant_tail = true;
            for (std::size_t t = 50; t < draws.size(); ++t)
                constant_tail = constant_tail && draws[t] == draws[50];
            locked += constant_tail;
        }
        CHECK(static_cast<double>(locked) / trials > 0.99);
    }
    SUBCASE("u_i = 1: both colors keep appearing") {
        std::vector<urns::WeightTerm> terms(101, urns::WeightTerm{0.0, 0.0});
        const auto w = WeightSequence::table(terms);
        int mixed = 0;
        const int trials = 2000;
        for (int i = 0; i < trials; ++i) {
            RngStream rng(4343, static_cast<std::uint64_t>(i));
            const auto draws = urns::single_urn_direct(w, 100, rng);
            bool saw0 = false, saw1 = false;
            for (std::size_t t = 50; t < draws.size(); ++t) {
                saw0 = saw0 || draws[t] == 0;
                saw1 = saw1 || draws[t] == 1;
            }
            mixed += saw0 && saw1;
        }
        CHECK(static_cast<double>(mixed) / trials > 0.10);
    }
}

TEST_CASE("non-conformist Monte Carlo tracks the exact mixture law") {
    for (const auto& [u, p] : {std::pair{3, 0.2}, std::pair{5, 0.3}}) {
        const auto exact = urns::analytic::nonconformist_pmf(u, p);
        EstimateOptions opts;
        opts.threads = 2;
        const auto mc = urns::nonconformist_mc(u, p, 50000, 999, opts);
        REQUIRE(mc.pmf.size() == exact.size());
        CHECK(teststat::tv_distance(mc.pmf, exact) < 0.012);
    }
}

TEST_CASE("multicolor fixation: two urns, three colors vs the closed form") {
    ModelParams params{2, 3, 0.3, WeightSequence::generalized_power()};
    EstimateOptions opts;
    opts.threads = 2;
    const auto est = urns::estimate_fixation(params, 50000, 2025, opts);
    const double target = urns::analytic::multicolor_q(3, 0.3);
    CHECK(est.lower - 4.0 * est.stderr_ <= target);
    CHECK(target <= est.upper + 4.0 * est.stderr_);
    CHECK(est.unresolved_fraction < 0.01);
}

TEST_CASE("weight-table overrun propagates out of the stepper") {
    // Two entries only: the second step must index count 2 for some pool.
    const auto w = WeightSequence::table({{0.0, 0.0}, {0.0, 1.0}});
    ModelParams params{2, 2, 0.5, w};
    RngStream rng(1, 0);
    CHECK_THROWS_AS((void)urns::run(params, rng, 50, urns::StopRule::at_horizon),
                    std::out_of_range);
}
