#pragma once

// Philox4x32-10 counter-based generator (Salmon et al. 2011). A draw is a pure
// function of (key, counter), so any path/step can be regenerated in isolation
// and results do not depend on how work is split across threads.

#include <array>
#include <cstdint>

#include "mgpert/normal.hpp"

namespace mgpert {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace detail

constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        detail::mulhilo(detail::kPhiloxM0, ctr[0], hi0, lo0);
        detail::mulhilo(detail::kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += detail::kPhiloxW0;
        key[1] += detail::kPhiloxW1;
    }
    return ctr;
}

/// Uniform on (0, 1) from two 32-bit words: (k + 0.5) 2^-52 with k the top 52
/// bits. Every value is exact, so the largest is 1 - 2^-53 and never rounds to 1.
constexpr double u01_from_bits(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t k = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-52;
}

/// Keyed Philox stream. Counter layout: {step, unit, stream_lo, stream_hi}.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

    /// Two uniforms on (0, 1) for (step, unit).
    [[nodiscard]] std::array<double, 2> uniforms(std::uint32_t step, std::uint32_t unit) const noexcept {
        const PhiloxCounter out = philox4x32_10({step, unit, stream_lo_, stream_hi_}, key_);
        return {u01_from_bits(out[0], out[1]), u01_from_bits(out[2], out[3])};
    }

    /// Two independent standard normals for (step, unit), by inverse CDF.
    [[nodiscard]] std::array<double, 2> normals(std::uint32_t step, std::uint32_t unit) const {
        const auto u = uniforms(step, unit);
        return {normal_quantile(u[0]), normal_quantile(u[1])};
    }

private:
    PhiloxKey key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
};

}  // namespace mgpert
