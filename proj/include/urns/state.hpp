#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace urns {

// Ball counts for U urns and C colors. counts are stored row-major by urn.
// The combined pool (all urns together) is always derived, never stored.
struct SystemState {
    std::int32_t num_urns = 0;
    std::int32_t num_colors = 0;
    std::vector<std::int64_t> counts;

    static SystemState empty(std::int32_t urns, std::int32_t colors) {
        if (urns < 1) throw std::invalid_argument("SystemState: need at least one urn");
        if (colors < 2) throw std::invalid_argument("SystemState: need at least two colors");
        SystemState s;
        s.num_urns = urns;
        s.num_colors = colors;
        s.counts.assign(static_cast<std::size_t>(urns) * colors, 0);
        return s;
    }

    // Two-urn, two-color convenience: (B1, W1, B2, W2).
    static SystemState two_by_two(std::int64_t b1, std::int64_t w1, std::int64_t b2,
                                  std::int64_t w2) {
        SystemState s = empty(2, 2);
        s.at(0, 0) = b1;
        s.at(0, 1) = w1;
        s.at(1, 0) = b2;
        s.at(1, 1) = w2;
        return s;
    }

    std::int64_t& at(std::int32_t urn, std::int32_t color) {
        return counts[static_cast<std::size_t>(urn) * num_colors + color];
    }
    std::int64_t at(std::int32_t urn, std::int32_t color) const {
        return counts[static_cast<std::size_t>(urn) * num_colors + color];
    }

    std::int64_t combined(std::int32_t color) const {
        std::int64_t total = 0;
        for (std::int32_t u = 0; u < num_urns; ++u) total += at(u, color);
        return total;
    }

    void combined_into(std::vector<std::int64_t>& out) const {
        out.assign(num_colors, 0);
        for (std::int32_t u = 0; u < num_urns; ++u)
            for (std::int32_t k = 0; k < num_colors; ++k) out[k] += at(u, k);
    }

    std::int64_t urn_total(std::int32_t urn) const {
        std::int64_t total = 0;
        for (std::int32_t k = 0; k < num_colors; ++k) total += at(urn, k);
        return total;
    }

    bool operator==(const SystemState&) const = default;
};

// Two-urn/two-color configuration classes. C1(l): balanced totals with per-urn
// imbalance l. C2(l): one global majority but one urn lagging it by deficit l.
// C3: global and per-urn majorities agree (absorbing under the INF^i rule).
struct ConfigClass {
    enum class Kind : std::uint8_t { c1, c2, c3 };

    Kind kind = Kind::c1;
    std::int64_t ell = 0;

    static ConfigClass c1(std::int64_t ell) { return {Kind::c1, ell}; }
    static ConfigClass c2(std::int64_t ell) { return {Kind::c2, ell}; }
    static ConfigClass c3() { return {Kind::c3, 0}; }

    bool is_c1() const { return kind == Kind::c1; }
    bool is_c2() const { return kind == Kind::c2; }
    bool is_c3() const { return kind == Kind::c3; }

    bool operator==(const ConfigClass&) const = default;
    auto operator<=>(const ConfigClass&) const = default;

    std::string to_string() const {
        switch (kind) {
            case Kind::c1: return "C1(" + std::to_string(ell) + ")";
            case Kind::c2: return "C2(" + std::to_string(ell) + ")";
            case Kind::c3: return "C3";
        }
        return "?";
    }
};

// Classifies a two-urn/two-color state. Total over both classes:
//  - equal color totals        -> C1(|B1 - W1|)
//  - both urns strictly favor the global majority -> C3
//  - otherwise exactly one urn fails to, and its deficit names the class C2(d).
// A tied urn next to unequal totals lands in C2(0).
inline ConfigClass classify(const SystemState& s) {
    if (s.num_urns != 2 || s.num_colors != 2)
        throw std::invalid_argument("classify: defined only for two urns and two colors");

    const std::int64_t b1 = s.at(0, 0), w1 = s.at(0, 1);
    const std::int64_t b2 = s.at(1, 0), w2 = s.at(1, 1);
    const std::int64_t black = b1 + b2, white = w1 + w2;

    if (black == white) return ConfigClass::c1(std::llabs(b1 - w1));

    const std::int32_t major = black > white ? 0 : 1;
    const std::int32_t minor = 1 - major;
    const bool urn1_major = s.at(0, major) > s.at(0, minor);
    const bool urn2_major = s.at(1, major) > s.at(1, minor);

    if (urn1_major && urn2_major) return ConfigClass::c3();
    const std::int32_t lagging = urn1_major ? 1 : 0;
    return ConfigClass::c2(s.at(lagging, minor) - s.at(lagging, major));
}

// Color strictly ahead in the given urn, if any.
inline std::optional<std::int32_t> strict_argmax_color(const SystemState& s, std::int32_t urn) {
    std::int32_t best = 0;
    bool strict = true;
    for (std::int32_t k = 1; k < s.num_colors; ++k) {
        if (s.at(urn, k) > s.at(urn, best)) {
            best = k;
            strict = true;
        } else if (s.at(urn, k) == s.at(urn, best)) {
            strict = false;
        }
    }
    return strict ? std::optional<std::int32_t>(best) : std::nullopt;
}

inline std::optional<std::int32_t> strict_argmax_color(const std::vector<std::int64_t>& counts) {
    std::size_t best = 0;
    bool strict = true;
    for (std::size_t k = 1; k < counts.size(); ++k) {
        if (counts[k] > counts[best]) {
            best = k;
            strict = true;
        } else if (counts[k] == counts[best]) {
            strict = false;
        }
    }
    return strict ? std::optional<std::int32_t>(static_cast<std::int32_t>(best)) : std::nullopt;
}

// Absorbing predicate under the INF^i rule for any U, C: every pool (each urn
// and the combined one) has the same strict-argmax color. For U = 2, C = 2
// this is exactly class C3. The scratch overload keeps hot loops free of
// allocations.
inline std::optional<std::int32_t> aligned_color(const SystemState& s,
                                                 std::vector<std::int64_t>& scratch) {
    std::optional<std::int32_t> color;
    for (std::int32_t u = 0; u < s.num_urns; ++u) {
        auto own = strict_argmax_color(s, u);
        if (!own) return std::nullopt;
        if (color && *color != *own) return std::nullopt;
        color = own;
    }
    s.combined_into(scratch);
    auto comb = strict_argmax_color(scratch);
    if (!comb || *comb != *color) return std::nullopt;
    return color;
}

inline std::optional<std::int32_t> aligned_color(const SystemState& s) {
    std::vector<std::int64_t> scratch;
    return aligned_color(s, scratch);
}

inline bool is_absorbing_aligned(const SystemState& s) { return aligned_color(s).has_value(); }

}  // namespace urns
