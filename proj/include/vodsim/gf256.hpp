#pragma once

// GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x + 1 (0x11B).
// Multiplication goes through log/antilog tables built at compile time from
// the generator 0x03 (0x02 is not primitive for this polynomial).

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "vodsim/error.hpp"

namespace vodsim::gf256 {

using Elem = std::uint8_t;

inline constexpr unsigned kPolynomial = 0x11B;
inline constexpr Elem kGenerator = 0x03;

namespace detail {

struct Tables {
    std::array<Elem, 512> exp{};
    std::array<std::uint16_t, 256> log{};
};

constexpr Tables make_tables() {
    Tables t;
    unsigned x = 1;
    for (unsigned i = 0; i < 255; ++i) {
        t.exp[i] = static_cast<Elem>(x);
        t.log[x] = static_cast<std::uint16_t>(i);
        // x *= 3  ==  x ^ (x * 2)
        unsigned doubled = x << 1;
        if (doubled & 0x100) doubled ^= kPolynomial;
        x ^= doubled;
    }
    for (unsigned i = 255; i < 512; ++i) t.exp[i] = t.exp[i - 255];
    return t;
}

inline constexpr Tables kTables = make_tables();

}  // namespace detail

constexpr Elem add(Elem a, Elem b) { return a ^ b; }
constexpr Elem sub(Elem a, Elem b) { return a ^ b; }

constexpr Elem mul(Elem a, Elem b) {
    if (a == 0 || b == 0) return 0;
    return detail::kTables.exp[detail::kTables.log[a] + detail::kTables.log[b]];
}

inline Elem inv(Elem a) {
    if (a == 0) throw Error(ErrorCode::ZeroInverse, "0 has no multiplicative inverse");
    return detail::kTables.exp[255 - detail::kTables.log[a]];
}

inline Elem div(Elem a, Elem b) { return mul(a, inv(b)); }

/// dst += coef * src, element-wise. Spans must have equal length.
inline void axpy(std::span<Elem> dst, std::span<const Elem> src, Elem coef) {
    if (coef == 0) return;
    const auto lc = detail::kTables.log[coef];
    for (std::size_t i = 0; i < dst.size(); ++i) {
        if (src[i] != 0) dst[i] ^= detail::kTables.exp[lc + detail::kTables.log[src[i]]];
    }
}

inline void scale(std::span<Elem> v, Elem coef) {
    for (auto& x : v) x = mul(x, coef);
}

}  // namespace vodsim::gf256
