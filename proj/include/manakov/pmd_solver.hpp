#pragma once

// Split-step integrator for the rescaled Manakov-PMD equation
//
//   i dX/dt + (i b'/eps) sigma_bar(nu_eps(t)) dX/dx + (d0/2) d^2X/dx^2 + F(X) = 0,
//
// where nu_eps(t) = nu(t / eps^2) is the polarization driver.  Two frames:
//
//  * X frame:   Strang splitting with sigma_bar frozen at the step midpoint,
//               exact Fourier-multiplier linear flow, RK4 nonlinear substep.
//  * Psi frame: Psi = Z(nu) X, which turns the birefringence operator into
//               the constant sigma3 and moves the randomness into a pointwise
//               SU(2) factor.  Used as an independent check on the X frame.

#include <array>
#include <cstdint>

#include "manakov/core.hpp"
#include "manakov/driver.hpp"
#include "manakov/trajectory.hpp"

namespace manakov::pmd {

using driver::DriverState;
using driver::PauliVector;

enum class Frame { X, Psi };

/// Which Kerr term the solver integrates.
enum class Nonlinearity {
    /// F_nu = (8/9)|X|^2 X - (1/6)(N_nu(X) - E_Lambda N_nu(X))
    AveragedKerr,
    /// (5/6)|X|^2 X + (1/6)(X* s X) s X with s = sigma_bar: the local-axes
    /// form, i.e. the fluctuation enters with the opposite sign.
    LocalAxes,
    Off,
};

/// Pointwise nonlinear PMD terms (N1, N2).
Spinor nonlinear_pmd_terms(const Spinor& x, const PauliVector& m) noexcept;

/// Average of nonlinear_pmd_terms over the uniform law of nu:
/// ((2/3)(2|X2|^2 - |X1|^2) X1, (2/3)(2|X1|^2 - |X2|^2) X2).
Spinor mean_pmd_terms(const Spinor& x) noexcept;

/// F_nu(X) = (8/9)|X|^2 X - (1/6)(N_nu(X) - E N(X)).
Spinor f_nu(const Spinor& x, const PauliVector& m) noexcept;

/// Kerr term selected by `form` (zero for Off).
Spinor pmd_nonlinearity(const Spinor& x, const PauliVector& m, Nonlinearity form) noexcept;

/// Exact flow of i dX/dt + (i b'/eps) sigma_bar dX/dx + (d0/2) X_xx = 0 over
/// `dt` with sigma_bar = sigma_bar(m) frozen.  Per mode xi:
///   exp(-i d0 xi^2 dt / 2) [cos(b' xi dt/eps) I - i sin(b' xi dt/eps) sigma_bar].
SpinorField linear_pmd_halfstep(const SpinorField& f, const PauliVector& m, double dt,
                                const FiberParams& params);

struct PmdRunConfig {
    FiberParams params{1.0, 1.0, 1.0, 0.0, 0.3};
    double dt = 1e-3;
    double t_final = 0.0;
    SpinorField initial{SpectralGrid(8, 1.0)};
    std::uint64_t seed = 1;
    std::uint32_t path_index = 0;
    std::uint32_t ensemble = 0;      ///< folded into the RNG stream id
    Frame frame = Frame::X;
    std::size_t record_every = 1;
    Nonlinearity nonlinearity = Nonlinearity::AveragedKerr;
    double step_factor = 0.1;        ///< dt <= step_factor * eps^2
    double h1_ceiling = 1e6;
    DriverState driver_start{};
    bool keep_snapshots = false;
};

/// Throws ConfigError naming the offending field.
void validate(const PmdRunConfig& config);

/// Standard normals for the two driver half-steps of one PDE step.
struct StepNoise {
    std::array<double, 2> first_half{};
    std::array<double, 2> second_half{};
};

/// The noise of PDE step `step` for the path described by `config`.
StepNoise draw_step_noise(const PmdRunConfig& config, std::uint64_t step);

struct StepResult {
    SpinorField field;
    DriverState driver;
};

/// One X-frame Strang step of length config.dt: driver to the midpoint,
/// half linear flow, RK4 nonlinear substep, half linear flow, driver to the
/// end.  Throws NumericalAbort on non-finite output.
StepResult step_pmd(const SpinorField& f, const DriverState& driver, const StepNoise& noise,
                    const PmdRunConfig& config);

/// Integrate to t_final in the configured frame.  Deterministic given the
/// seed.  Diagnostics every record_every steps and at the end.  Non-finite
/// values and the H^1 ceiling end the run with `abort` set.
Trajectory run_pmd(const PmdRunConfig& config);

/// The Psi-frame integration of the same path (same noise), mapped back
/// to the X frame at every record.  Ignores config.frame.
Trajectory psi_frame_oracle(const PmdRunConfig& config);

/// Z(nu) = [[nu1, conj(nu2)], [-nu2, conj(nu1)]],  Psi = Z X.
Mat2 frame_matrix(const Spinor& nu) noexcept;

}  // namespace manakov::pmd
