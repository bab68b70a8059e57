#include "manakov/rng.hpp"

#include <cmath>
#include <numbers>

namespace manakov {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

PhiloxCounter CounterRng::block(std::uint64_t step, std::uint32_t index) const noexcept {
    // The step occupies 32 bits; the upper half is folded into the block
    // word so very long runs still get distinct counters.
    const auto hi = static_cast<std::uint32_t>(step >> 32);
    return philox4x32_10({index ^ (hi << 16), static_cast<std::uint32_t>(step), path_, stream_},
                         key_);
}

void CounterRng::uniforms(std::uint64_t step, std::span<double> out) const noexcept {
    std::uint32_t index = 0;
    for (std::size_t i = 0; i < out.size(); i += 2, ++index) {
        const PhiloxCounter r = block(step, index);
        out[i] = to_open_unit(r[0], r[1]);
        if (i + 1 < out.size()) out[i + 1] = to_open_unit(r[2], r[3]);
    }
}

void CounterRng::normals(std::uint64_t step, std::span<double> out) const noexcept {
    std::uint32_t index = 0;
    for (std::size_t i = 0; i < out.size(); i += 2, ++index) {
        const PhiloxCounter r = block(step, index);
        const double u1 = to_open_unit(r[0], r[1]);
        const double u2 = to_open_unit(r[2], r[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out[i] = radius * std::cos(angle);
        if (i + 1 < out.size()) out[i + 1] = radius * std::sin(angle);
    }
}

}  // namespace manakov
