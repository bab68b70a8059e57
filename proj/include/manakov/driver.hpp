#pragma once

// Polarization driver: the diffusion nu(t) on the unit sphere of C^2,
//
//   d nu = i sqrt(gamma_c) (sigma1 nu o dW1 + sigma2 nu o dW2) + i gamma_s sigma3 nu dt,
//
// and its Pauli observables m = g(nu), which set the local birefringence
// matrix  sigma_bar = m1 sigma1 + m2 sigma2 + m3 sigma3.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "manakov/core.hpp"
#include "manakov/pauli.hpp"
#include "manakov/rng.hpp"

namespace manakov::driver {

struct PauliVector {
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;

    double norm() const noexcept { return std::sqrt(m1 * m1 + m2 * m2 + m3 * m3); }
};

struct DriverState {
    Spinor nu{Complex(1.0, 0.0), Complex(0.0, 0.0)};
    double time = 0.0;  ///< base (fast) time
};

/// m3 = |nu1|^2 - |nu2|^2,  m1 + i m2 = 2 nu1 nu2.  No unit-norm check.
PauliVector pauli_vector(const Spinor& nu) noexcept;

/// [[m3, m1 - i m2], [m1 + i m2, -m3]]
Mat2 sigma_bar_matrix(const PauliVector& m) noexcept;

struct SigmaBar {
    PauliVector m;
    Mat2 matrix;
};

/// Throws std::domain_error if | |nu|^2 - 1 | > 1e-10.
SigmaBar sigma_bar(const DriverState& state);

/// One-step propagator exp(i sqrt(gamma_c)(sigma1 dW1 + sigma2 dW2) + i gamma_s sigma3 dt).
Mat2 driver_exponential(double dt, std::array<double, 2> dW, const FiberParams& params) noexcept;

/// Applies driver_exponential to nu and renormalizes.  dt <= 0 -> ConfigError.
DriverState step_driver(const DriverState& state, double dt, std::array<double, 2> dW,
                        const FiberParams& params);

/// Default step min(0.01/gamma_c, 0.01/|gamma_s|, 0.01).
double default_driver_dt(const FiberParams& params) noexcept;

/// The rescaled driver nu_eps(t) = nu(t / eps^2), fed from a counter-based
/// stream.  Slow-time step k uses the normals of stream step k; a step of
/// slow length h is a base-driver step of length h / eps^2.
class DriverPath {
public:
    DriverPath(DriverState start, const FiberParams& params, CounterRng rng);

    /// Advance by slow time `slow_dt` using stream step `step`.
    /// Returns the propagator that was applied to nu.
    Mat2 advance(double slow_dt, std::uint64_t step);

    const DriverState& state() const noexcept { return state_; }

private:
    DriverState state_;
    FiberParams params_;
    CounterRng rng_;
};

/// Advance `state` by slow time t in steps of `slow_dt`,
/// consuming stream steps first_step, first_step + 1, ...
DriverState rescaled_driver(const DriverState& state, double t, double epsilon, double slow_dt,
                            const FiberParams& params, const CounterRng& rng,
                            std::uint64_t first_step = 0);

// ---------------------------------------------------------------------------
// Ergodic statistics
// ---------------------------------------------------------------------------

struct InvariantStatsConfig {
    FiberParams params{1.0, 1.0, 1.0, 0.0, 1.0};
    std::size_t n_paths = 8;
    double t_burn = -1.0;          ///< < 0 selects 20 / gamma_c
    double t_sample = 2000.0;
    double dt = -1.0;              ///< < 0 selects default_driver_dt
    double lag_cutoff = -1.0;      ///< < 0 selects 10 / gamma_c
    double sample_interval = -1.0; ///< < 0 selects 0.05 / gamma_c (rounded to a multiple of dt)
    std::size_t batches_per_path = 10;
    double tolerance = 0.0;        ///< flag any stderr above this (0 disables)
    std::uint64_t seed = 1;
    unsigned threads = 0;          ///< 0 = use default worker count
};

using Matrix3 = std::array<std::array<double, 3>, 3>;

struct InvariantStats {
    std::array<double, 3> mean_g{};
    std::array<double, 3> mean_g_stderr{};
    Matrix3 cov_g{};               ///< E[g_j g_k]
    Matrix3 cov_g_stderr{};
    Matrix3 corr_integral{};       ///< int_0^T_lag E[g_j(nu(0)) g_k(nu(t))] dt
    Matrix3 corr_integral_stderr{};
    std::size_t n_batches = 0;
    double dt = 0.0;
    double t_burn = 0.0;
    double lag_cutoff = 0.0;
    double sample_interval = 0.0;
    std::vector<std::string> flags;
};

InvariantStats estimate_invariant_stats(const InvariantStatsConfig& config);

}  // namespace manakov::driver
