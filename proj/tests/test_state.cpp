#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>

#include "urns/state.hpp"

using urns::ConfigClass;
using urns::SystemState;

TEST_CASE("classify on the reference configurations") {
    CHECK(urns::classify(SystemState::two_by_two(4, 0, 0, 4)) == ConfigClass::c1(4));
    CHECK(urns::classify(SystemState::two_by_two(8, 0, 0, 2)) == ConfigClass::c2(2));
    CHECK(urns::classify(SystemState::two_by_two(0, 0, 0, 0)) == ConfigClass::c1(0));
    CHECK(urns::classify(SystemState::two_by_two(3, 1, 2, 1)) == ConfigClass::c3());
    // Unequal totals with a tied urn sit at deficit zero.
    CHECK(urns::classify(SystemState::two_by_two(1, 0, 0, 0)) == ConfigClass::c2(0));
    CHECK(urns::classify(SystemState::two_by_two(3, 1, 2, 2)) == ConfigClass::c2(0));
}

TEST_CASE("classify rejects other shapes") {
    CHECK_THROWS_AS((void)urns::classify(SystemState::empty(3, 2)), std::invalid_argument);
    CHECK_THROWS_AS((void)urns::classify(SystemState::empty(2, 3)), std::invalid_argument);
}

TEST_CASE("classify is total and symmetric on [0,20]^4") {
    for (std::int64_t b1 = 0; b1 <= 20; ++b1)
        for (std::int64_t w1 = 0; w1 <= 20; ++w1)
            for (std::int64_t b2 = 0; b2 <= 20; ++b2)
                for (std::int64_t w2 = 0; w2 <= 20; ++w2) {
                    const ConfigClass cls = urns::classify(SystemState::two_by_two(b1, w1, b2, w2));
                    if (cls.is_c1() || cls.is_c2()) CHECK(cls.ell >= 0);
                    // Swapping the colors or the urns lands in the same class.
                    const ConfigClass swapped_colors =
                        urns::classify(SystemState::two_by_two(w1, b1, w2, b2));
                    const ConfigClass swapped_urns =
                        urns::classify(SystemState::two_by_two(b2, w2, b1, w1));
                    CHECK(cls == swapped_colors);
                    CHECK(cls == swapped_urns);
                }
}

TEST_CASE("aligned absorbing predicate coincides with C3 for two urns, two colors") {
    for (std::int64_t b1 = 0; b1 <= 8; ++b1)
        for (std::int64_t w1 = 0; w1 <= 8; ++w1)
            for (std::int64_t b2 = 0; b2 <= 8; ++b2)
                for (std::int64_t w2 = 0; w2 <= 8; ++w2) {
                    const SystemState s = SystemState::two_by_two(b1, w1, b2, w2);
                    CHECK(urns::is_absorbing_aligned(s) == urns::classify(s).is_c3());
                }
}

TEST_CASE("aligned color for mixed pool shapes") {
    SystemState s = SystemState::empty(3, 3);
    s.at(0, 1) = 4;
    s.at(1, 1) = 2;
    s.at(1, 0) = 1;
    s.at(2, 1) = 3;
    CHECK(urns::aligned_color(s) == 1);
    s.at(1, 0) = 2;  // urn 1 ties: no longer absorbing
    CHECK(!urns::aligned_color(s).has_value());
}

TEST_CASE("combined counts derive from the rows") {
    SystemState s = SystemState::empty(3, 2);
    s.at(0, 0) = 4;
    s.at(1, 0) = 1;
    s.at(2, 1) = 5;
    CHECK(s.combined(0) == 5);
    CHECK(s.combined(1) == 5);
    CHECK(s.urn_total(2) == 5);
}
