#pragma once

// The white-noise limit of the PMD equation (stochastic Manakov equation),
//
//   i dX + ((d0/2) X_xx + (8/9)|X|^2 X) dt + i sqrt(gamma) sum_k sigma_k X_x o dW_k = 0,
//
// integrated pathwise in Stratonovich form, plus a spectral Euler-Maruyama
// scheme for the equivalent Ito form that serves as a weak cross-check.

#include <array>
#include <cstdint>

#include "manakov/core.hpp"
#include "manakov/trajectory.hpp"

namespace manakov::limit {

enum class Scheme { StratonovichSplit, ItoEulerSpectral };

struct LimitRunConfig {
    FiberParams params{1.0, 1.0, 1.0, 0.0, 1.0};  ///< only d0 and gamma are used
    double dt = 1e-3;
    double t_final = 0.0;
    SpinorField initial{SpectralGrid(8, 1.0)};
    std::uint64_t seed = 1;
    std::uint32_t path_index = 0;
    std::uint32_t ensemble = 0;
    Scheme scheme = Scheme::StratonovichSplit;
    double h1_ceiling = 1e6;
    std::size_t record_every = 1;
    bool nonlinear = true;
    bool keep_snapshots = false;
};

void validate(const LimitRunConfig& config);

/// Exact flow of dX = -sqrt(gamma) sum_k sigma_k X_x o dW_k with the
/// increments frozen: per mode cos(r xi) I - i sin(r xi) (dW . sigma)/|dW|,
/// r = sqrt(gamma) |dW|.
SpinorField noise_flow(const SpinorField& f, const std::array<double, 3>& dW,
                       const FiberParams& params);

/// (8/9)(|X1|^2 + |X2|^2) X
Spinor f_limit(const Spinor& x) noexcept;

/// Strang step: free flow dt/2, Kerr phase dt/2, noise, Kerr phase dt/2,
/// free flow dt/2.  dW holds Brownian increments (variance dt each).
SpinorField step_limit_stratonovich(const SpinorField& f, const LimitRunConfig& config,
                                    const std::array<double, 3>& dW);

/// Spectral Euler-Maruyama for the Ito form, followed by the Kerr phase:
///   X^ <- exp((-i d0/2 - 3 gamma/2) xi^2 dt) (X^ - sqrt(gamma) sum_k sigma_k (i xi) X^ dW_k).
SpinorField step_limit_ito(const SpinorField& f, const LimitRunConfig& config,
                           const std::array<double, 3>& dW);

/// Brownian increments of step `step` for the path in `config`.
std::array<double, 3> draw_increments(const LimitRunConfig& config, std::uint64_t step);

Trajectory run_limit(const LimitRunConfig& config);

/// H(u) = (d0/4) int |u_x|^2 - (2/9) int |u|^4.
double energy(const SpinorField& f, const FiberParams& params);

/// Ito drift of H along the limit dynamics,
///   (4 gamma/9) int (d/dx |X|^2)^2 - (8 gamma/9) int |X1 X2_x - X1_x X2|^2,
/// equal to (24 gamma/9) <X, X_x Re(X . conj X_x)>
///        - (8 gamma/9) sum_k <X, sigma_k X_x Re(X . conj(sigma_k X_x))>.
double energy_drift(const SpinorField& f, const FiberParams& params);

/// The fully expanded three-integral drift formula in the form printed with
/// the energy lemma.  It disagrees with energy_drift (for X = (u, 0) it is
/// half as large); kept for diagnostics only.
double energy_drift_printed(const SpinorField& f, const FiberParams& params);

/// Martingale integrands of H: sqrt(gamma) (8/9) <|X|^2 X, sigma_k X_x>, k = 1..3.
std::array<double, 3> energy_noise_coefficients(const SpinorField& f, const FiberParams& params);

}  // namespace manakov::limit
