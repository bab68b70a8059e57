#include "manakov/limit_solver.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "manakov/pauli.hpp"
#include "manakov/rng.hpp"

namespace manakov::limit {

namespace {

bool finite(const Spinor& v) noexcept {
    return std::isfinite(v[0].real()) && std::isfinite(v[0].imag()) &&
           std::isfinite(v[1].real()) && std::isfinite(v[1].imag());
}

void check_finite(std::span<const Spinor> x, std::int64_t step) {
    for (const auto& v : x) {
        if (!finite(v)) {
            throw NumericalAbort(NumericalAbort::Reason::NonFinite, step,
                                 "non-finite field value at step " + std::to_string(step));
        }
    }
}

void free_flow(std::span<Spinor> modes, const SpectralGrid& grid, double d0, double h) {
    const auto xi = grid.wavenumbers();
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const Complex p = std::polar(1.0, -0.5 * d0 * xi[k] * xi[k] * h);
        modes[k][0] *= p;
        modes[k][1] *= p;
    }
}

void kerr_phase(std::span<Spinor> x, double h) {
    for (auto& v : x) {
        const Complex p = std::polar(1.0, (8.0 / 9.0) * (std::norm(v[0]) + std::norm(v[1])) * h);
        v[0] *= p;
        v[1] *= p;
    }
}

void apply_noise(std::span<Spinor> modes, const SpectralGrid& grid,
                 const std::array<double, 3>& dW, double gamma) {
    const double w = std::sqrt(dW[0] * dW[0] + dW[1] * dW[1] + dW[2] * dW[2]);
    if (w == 0.0 || gamma == 0.0) return;
    const double r = std::sqrt(gamma) * w;
    const auto xi = grid.wavenumbers();
    for (std::size_t k = 0; k < modes.size(); ++k) {
        // exp(-i r xi n.sigma) = su2_exp(-r xi n)
        const double a = -r * xi[k] / w;
        modes[k] = su2_exp(a * dW[0], a * dW[1], a * dW[2]).apply(modes[k]);
    }
}

std::vector<Spinor> copy_values(const SpinorField& f) {
    return {f.values().begin(), f.values().end()};
}

void stratonovich(std::vector<Spinor>& x, const SpectralGrid& grid, const FiberParams& p,
                  bool nonlinear, double h, const std::array<double, 3>& dW) {
    grid.forward(x);
    free_flow(x, grid, p.d0(), 0.5 * h);
    grid.inverse(x);
    if (nonlinear) kerr_phase(x, 0.5 * h);
    grid.forward(x);
    apply_noise(x, grid, dW, p.gamma());
    grid.inverse(x);
    if (nonlinear) kerr_phase(x, 0.5 * h);
    grid.forward(x);
    free_flow(x, grid, p.d0(), 0.5 * h);
    grid.inverse(x);
}

void ito_euler(std::vector<Spinor>& x, const SpectralGrid& grid, const FiberParams& p,
               bool nonlinear, double h, const std::array<double, 3>& dW) {
    const auto xi = grid.wavenumbers();
    const double g = p.gamma();
    const double sg = std::sqrt(g);
    const Mat2 s = pauli_combination(dW[0], dW[1], dW[2]);
    grid.forward(x);
    for (std::size_t k = 0; k < x.size(); ++k) {
        const Complex damp = std::exp(Complex(-1.5 * g * xi[k] * xi[k] * h,
                                              -0.5 * p.d0() * xi[k] * xi[k] * h));
        const Spinor sv = s.apply(x[k]);
        const Complex c = Complex(0.0, sg * xi[k]);
        x[k] = {damp * (x[k][0] - c * sv[0]), damp * (x[k][1] - c * sv[1])};
    }
    grid.inverse(x);
    if (nonlinear) kerr_phase(x, h);
}

// Pointwise integrand helpers on the grid.
struct Derived {
    std::vector<Spinor> x;
    std::vector<Spinor> dx;
};

Derived with_derivative(const SpinorField& f) {
    const SpinorField d = derivative(f);
    return {copy_values(f), copy_values(d)};
}

}  // namespace

void validate(const LimitRunConfig& c) {
    if (!std::isfinite(c.params.gamma())) {
        throw ConfigError("gamma_c: must be positive when b_prime != 0 (gamma is undefined)");
    }
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ConfigError("dt: must be positive");
    if (!(c.t_final >= 0.0) || !std::isfinite(c.t_final)) {
        throw ConfigError("t_final: must be finite and >= 0");
    }
    if (c.record_every == 0) throw ConfigError("record_every: must be >= 1");
    if (!(c.h1_ceiling > 0.0)) throw ConfigError("h1_ceiling: must be positive");
    if (!c.initial.all_finite()) throw ConfigError("initial: field has non-finite entries");
}

SpinorField noise_flow(const SpinorField& f, const std::array<double, 3>& dW,
                       const FiberParams& params) {
    SpectralField s = to_spectrum(f);
    apply_noise(s.modes, s.grid, dW, params.gamma());
    return from_spectrum(s);
}

Spinor f_limit(const Spinor& x) noexcept {
    const double mass = std::norm(x[0]) + std::norm(x[1]);
    return {(8.0 / 9.0) * mass * x[0], (8.0 / 9.0) * mass * x[1]};
}

SpinorField step_limit_stratonovich(const SpinorField& f, const LimitRunConfig& config,
                                    const std::array<double, 3>& dW) {
    std::vector<Spinor> x = copy_values(f);
    stratonovich(x, f.grid(), config.params, config.nonlinear, config.dt, dW);
    return SpinorField(f.grid(), std::move(x));
}

SpinorField step_limit_ito(const SpinorField& f, const LimitRunConfig& config,
                           const std::array<double, 3>& dW) {
    std::vector<Spinor> x = copy_values(f);
    ito_euler(x, f.grid(), config.params, config.nonlinear, config.dt, dW);
    return SpinorField(f.grid(), std::move(x));
}

std::array<double, 3> draw_increments(const LimitRunConfig& config, std::uint64_t step) {
    const CounterRng rng(config.seed, config.path_index,
                         stream_id(StreamTag::LimitNoise, config.ensemble));
    std::array<double, 4> z{};
    rng.normals(step, z);
    const double steps = static_cast<double>(step_count(config.t_final, config.dt));
    const double h = steps > 0 ? config.t_final / steps : config.dt;
    const double s = std::sqrt(h);
    return {s * z[0], s * z[1], s * z[2]};
}

Trajectory run_limit(const LimitRunConfig& config) {
    validate(config);
    const SpectralGrid& grid = config.initial.grid();
    Trajectory traj{.final_field = config.initial};
    traj.n_steps = step_count(config.t_final, config.dt);
    traj.dt = traj.n_steps > 0 ? config.t_final / static_cast<double>(traj.n_steps) : 0.0;

    std::vector<Spinor> x = copy_values(config.initial);
    auto record = [&](std::int64_t step, double t) {
        SpinorField f(grid, x);
        const DiagnosticRecord rec{step, t, l2_norm(f), h1_norm(f), energy(f, config.params)};
        traj.records.push_back(rec);
        if (config.keep_snapshots) traj.snapshots.push_back({f, t});
        traj.final_field = std::move(f);
        if (rec.h1 > config.h1_ceiling) {
            std::ostringstream msg;
            msg << "H1 norm " << rec.h1 << " exceeded ceiling " << config.h1_ceiling
                << " at step " << step;
            throw NumericalAbort(NumericalAbort::Reason::BlowUpSuspected, step, msg.str());
        }
    };

    try {
        record(0, 0.0);
        for (std::size_t n = 0; n < traj.n_steps; ++n) {
            const auto dW = draw_increments(config, n);
            const auto index = static_cast<std::int64_t>(n + 1);
            if (config.scheme == Scheme::StratonovichSplit) {
                stratonovich(x, grid, config.params, config.nonlinear, traj.dt, dW);
            } else {
                ito_euler(x, grid, config.params, config.nonlinear, traj.dt, dW);
            }
            check_finite(x, index);
            if ((n + 1) % config.record_every == 0 || n + 1 == traj.n_steps) {
                record(index, static_cast<double>(n + 1) * traj.dt);
            }
        }
        traj.final_time = static_cast<double>(traj.n_steps) * traj.dt;
    } catch (const NumericalAbort& e) {
        traj.abort = AbortInfo{e.reason(), e.step(), static_cast<double>(e.step()) * traj.dt,
                               e.what()};
        traj.final_time = traj.abort->t;
    }
    return traj;
}

double energy(const SpinorField& f, const FiberParams& params) {
    const double grad = l2_norm(derivative(f));
    double quartic = 0.0;
    for (const auto& v : f.values()) {
        const double m = std::norm(v[0]) + std::norm(v[1]);
        quartic += m * m;
    }
    quartic *= f.grid().dx();
    return 0.25 * params.d0() * grad * grad - (2.0 / 9.0) * quartic;
}

double energy_drift(const SpinorField& f, const FiberParams& params) {
    const Derived d = with_derivative(f);
    double density = 0.0;
    double twist = 0.0;
    for (std::size_t j = 0; j < d.x.size(); ++j) {
        const Spinor& u = d.x[j];
        const Spinor& v = d.dx[j];
        const double rho_x = 2.0 * (std::conj(u[0]) * v[0] + std::conj(u[1]) * v[1]).real();
        density += rho_x * rho_x;
        twist += std::norm(u[0] * v[1] - v[0] * u[1]);
    }
    const double dx = f.grid().dx();
    const double g = params.gamma();
    return (4.0 * g / 9.0) * density * dx - (8.0 * g / 9.0) * twist * dx;
}

double energy_drift_printed(const SpinorField& f, const FiberParams& params) {
    const Derived d = with_derivative(f);
    double density = 0.0;
    double twist = 0.0;
    double cross = 0.0;
    for (std::size_t j = 0; j < d.x.size(); ++j) {
        const Spinor& u = d.x[j];
        const Spinor& v = d.dx[j];
        const double r1 = 2.0 * (std::conj(u[0]) * v[0]).real();
        const double r2 = 2.0 * (std::conj(u[1]) * v[1]).real();
        density += (r1 + r2) * (r1 + r2);
        twist += std::norm(u[0] * v[1] - v[0] * u[1]);
        cross += r1 * r2;
    }
    const double dx = f.grid().dx();
    const double g = params.gamma();
    return ((2.0 * g / 9.0) * density - (4.0 * g / 9.0) * twist + (12.0 * g / 9.0) * cross) * dx;
}

std::array<double, 3> energy_noise_coefficients(const SpinorField& f, const FiberParams& params) {
    const Derived d = with_derivative(f);
    const Mat2 sigma[3] = {kSigma1, kSigma2, kSigma3};
    std::array<double, 3> c{};
    for (std::size_t j = 0; j < d.x.size(); ++j) {
        const Spinor& u = d.x[j];
        const double mass = std::norm(u[0]) + std::norm(u[1]);
        for (int k = 0; k < 3; ++k) {
            const Spinor sv = sigma[k].apply(d.dx[j]);
            c[k] += mass * (std::conj(u[0]) * sv[0] + std::conj(u[1]) * sv[1]).real();
        }
    }
    const double scale = std::sqrt(params.gamma()) * (8.0 / 9.0) * f.grid().dx();
    for (auto& v : c) v *= scale;
    return c;
}

}  // namespace manakov::limit
