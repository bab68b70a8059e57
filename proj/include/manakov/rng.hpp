#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al. SC'11).
//
// Every Gaussian drawn anywhere in the library is a pure function of
//
//     key     = master seed (64 bits)
//     counter = (block, step, path, stream)
//
// so any path, and any step of any path, can be regenerated in isolation
// and results never depend on how paths are scheduled across threads.

#include <array>
#include <cstdint>
#include <span>

namespace manakov {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Stream tags used by the solvers.  The ensemble id of a study is folded
/// into the upper bits so distinct ensembles never share a stream.
enum class StreamTag : std::uint32_t {
    Driver = 1,
    DriverStats = 2,
    LimitNoise = 3,
    Test = 15,
};

constexpr std::uint32_t stream_id(StreamTag tag, std::uint32_t ensemble = 0) noexcept {
    return (ensemble << 4) | static_cast<std::uint32_t>(tag);
}

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t path, std::uint32_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_(path),
          stream_(stream) {}

    /// Fill `out` with iid standard normals belonging to time step `step`.
    /// Two normals per Philox block (Box-Muller on 53-bit uniforms).
    void normals(std::uint64_t step, std::span<double> out) const noexcept;

    /// Uniform doubles in the open interval (0, 1) for time step `step`.
    void uniforms(std::uint64_t step, std::span<double> out) const noexcept;

    std::uint32_t path() const noexcept { return path_; }
    std::uint32_t stream() const noexcept { return stream_; }

private:
    PhiloxCounter block(std::uint64_t step, std::uint32_t index) const noexcept;

    PhiloxKey key_;
    std::uint32_t path_;
    std::uint32_t stream_;
};

}  // namespace manakov
