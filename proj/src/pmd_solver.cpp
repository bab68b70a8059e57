#include "manakov/pmd_solver.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "manakov/limit_solver.hpp"

namespace manakov::pmd {

Spinor nonlinear_pmd_terms(const Spinor& x, const PauliVector& m) noexcept {
    const Complex x1 = x[0];
    const Complex x2 = x[1];
    const double a1 = std::norm(x1);
    const double a2 = std::norm(x2);
    const double transverse = m.m1 * m.m1 + m.m2 * m.m2;
    const Complex minus(m.m1, -m.m2);  // m1 - i m2
    const Complex plus(m.m1, m.m2);    // m1 + i m2
    const Complex n1 = transverse * (2.0 * a2 - a1) * x1 + minus * m.m3 * (2.0 * a1 - a2) * x2 +
                       minus * minus * x2 * x2 * std::conj(x1) +
                       plus * m.m3 * x1 * x1 * std::conj(x2);
    const Complex n2 = transverse * (2.0 * a1 - a2) * x2 - plus * m.m3 * (2.0 * a2 - a1) * x1 -
                       minus * m.m3 * x2 * x2 * std::conj(x1) +
                       plus * plus * x1 * x1 * std::conj(x2);
    return {n1, n2};
}

Spinor mean_pmd_terms(const Spinor& x) noexcept {
    const double a1 = std::norm(x[0]);
    const double a2 = std::norm(x[1]);
    return {(2.0 / 3.0) * (2.0 * a2 - a1) * x[0], (2.0 / 3.0) * (2.0 * a1 - a2) * x[1]};
}

namespace {

// 8/9 |X|^2 X + sign/6 (N(X) - E N(X))
Spinor kerr_with_fluctuation(const Spinor& x, const PauliVector& m, double sign) noexcept {
    const Spinor n = nonlinear_pmd_terms(x, m);
    const Spinor en = mean_pmd_terms(x);
    const double mass = std::norm(x[0]) + std::norm(x[1]);
    return {(8.0 / 9.0) * mass * x[0] + (sign / 6.0) * (n[0] - en[0]),
            (8.0 / 9.0) * mass * x[1] + (sign / 6.0) * (n[1] - en[1])};
}

}  // namespace

Spinor f_nu(const Spinor& x, const PauliVector& m) noexcept {
    return kerr_with_fluctuation(x, m, -1.0);
}

Spinor pmd_nonlinearity(const Spinor& x, const PauliVector& m, Nonlinearity form) noexcept {
    switch (form) {
    case Nonlinearity::AveragedKerr:
        return kerr_with_fluctuation(x, m, -1.0);
    case Nonlinearity::LocalAxes:
        return kerr_with_fluctuation(x, m, 1.0);
    case Nonlinearity::Off:
        break;
    }
    return {};
}

Mat2 frame_matrix(const Spinor& nu) noexcept {
    return {nu[0], std::conj(nu[1]), -nu[1], std::conj(nu[0])};
}

namespace {

// Fourier multiplier of the frozen-coefficient linear flow over a fixed
// step h: per mode  phase_k (cos_k I - i sin_k S)  with S = sigma_bar.
class LinearFlow {
public:
    LinearFlow(const SpectralGrid& grid, const FiberParams& p, double h) {
        const auto xi = grid.wavenumbers();
        const double speed = p.b_prime() / p.epsilon();
        phase_.resize(xi.size());
        cos_.resize(xi.size());
        sin_.resize(xi.size());
        for (std::size_t k = 0; k < xi.size(); ++k) {
            phase_[k] = std::polar(1.0, -0.5 * p.d0() * xi[k] * xi[k] * h);
            cos_[k] = std::cos(speed * xi[k] * h);
            sin_[k] = std::sin(speed * xi[k] * h);
        }
    }

    void apply(std::span<Spinor> modes, const Mat2& s) const noexcept {
        const Complex minus_i(0.0, -1.0);
        for (std::size_t k = 0; k < modes.size(); ++k) {
            const Spinor v = modes[k];
            const Spinor sv = s.apply(v);
            const Complex is = minus_i * sin_[k];
            modes[k] = {phase_[k] * (cos_[k] * v[0] + is * sv[0]),
                        phase_[k] * (cos_[k] * v[1] + is * sv[1])};
        }
    }

private:
    std::vector<Complex> phase_;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

// The propagator of the sigma3 frame written out from its kernel: two
// decoupled scalar multipliers exp(-i d0 xi^2 h/2 -/+ i (b'/eps) xi h).
class Sigma3Flow {
public:
    Sigma3Flow(const SpectralGrid& grid, const FiberParams& p, double h) {
        const auto xi = grid.wavenumbers();
        const double speed = p.b_prime() / p.epsilon();
        up_.resize(xi.size());
        down_.resize(xi.size());
        for (std::size_t k = 0; k < xi.size(); ++k) {
            const double dispersion = -0.5 * p.d0() * xi[k] * xi[k] * h;
            up_[k] = std::polar(1.0, dispersion - speed * xi[k] * h);
            down_[k] = std::polar(1.0, dispersion + speed * xi[k] * h);
        }
    }

    void apply(std::span<Spinor> modes) const noexcept {
        for (std::size_t k = 0; k < modes.size(); ++k) {
            modes[k][0] *= up_[k];
            modes[k][1] *= down_[k];
        }
    }

private:
    std::vector<Complex> up_;
    std::vector<Complex> down_;
};

Spinor renormalized(const Spinor& v) {
    const double n = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    return {v[0] / n, v[1] / n};
}

// RK4 for dX/dt = i F(X) with m frozen, applied pointwise.
void kerr_rk4(std::span<Spinor> x, const PauliVector& m, Nonlinearity form, double h) {
    if (form == Nonlinearity::Off) return;
    const Complex i(0.0, 1.0);
    auto rhs = [&](const Spinor& v) {
        const Spinor f = pmd_nonlinearity(v, m, form);
        return Spinor{i * f[0], i * f[1]};
    };
    for (auto& v : x) {
        const Spinor k1 = rhs(v);
        const Spinor k2 = rhs({v[0] + 0.5 * h * k1[0], v[1] + 0.5 * h * k1[1]});
        const Spinor k3 = rhs({v[0] + 0.5 * h * k2[0], v[1] + 0.5 * h * k2[1]});
        const Spinor k4 = rhs({v[0] + h * k3[0], v[1] + h * k3[1]});
        v[0] += (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        v[1] += (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    }
}

// Exact flow of i dPsi/dt + a|Psi|^2 Psi + b (Psi* s3 Psi) s3 Psi = 0: each
// component only picks up a phase because |Psi1| and |Psi2| are invariant.
void psi_kerr_exact(std::span<Spinor> psi, Nonlinearity form, double h) {
    double a = 0.0;
    double b = 0.0;
    switch (form) {
    case Nonlinearity::AveragedKerr:
        // Z F_nu(Z^* Psi) = (17/18)|Psi|^2 Psi - (1/6)(Psi* s3 Psi) s3 Psi
        a = 17.0 / 18.0;
        b = -1.0 / 6.0;
        break;
    case Nonlinearity::LocalAxes:
        a = 5.0 / 6.0;
        b = 1.0 / 6.0;
        break;
    case Nonlinearity::Off:
        return;
    }
    for (auto& v : psi) {
        const double r1 = std::norm(v[0]);
        const double r2 = std::norm(v[1]);
        const double s = r1 - r2;
        v[0] *= std::polar(1.0, (a * (r1 + r2) + b * s) * h);
        v[1] *= std::polar(1.0, (a * (r1 + r2) - b * s) * h);
    }
}

void check_finite(std::span<const Spinor> x, std::int64_t step) {
    for (const auto& v : x) {
        if (!std::isfinite(v[0].real()) || !std::isfinite(v[0].imag()) ||
            !std::isfinite(v[1].real()) || !std::isfinite(v[1].imag())) {
            throw NumericalAbort(NumericalAbort::Reason::NonFinite, step,
                                 "non-finite field value at step " + std::to_string(step));
        }
    }
}

void apply_pointwise(std::span<Spinor> x, const Mat2& m) {
    for (auto& v : x) v = m.apply(v);
}

// sigma3 E sigma3: the action of a driver step on the Psi frame, since
// Z(E nu) = (sigma3 E sigma3) Z(nu) for E in SU(2).
Mat2 psi_frame_factor(const Mat2& e) {
    return {e.a00, -e.a01, -e.a10, e.a11};
}

class Integrator {
public:
    Integrator(const PmdRunConfig& cfg, double h)
        : cfg_(cfg),
          grid_(cfg.initial.grid()),
          h_(h),
          fast_half_(0.5 * h / (cfg.params.epsilon() * cfg.params.epsilon())),
          x_flow_(grid_, cfg.params, 0.5 * h),
          psi_flow_(grid_, cfg.params, 0.5 * h),
          driver_(cfg.driver_start),
          field_(cfg.initial.values().begin(), cfg.initial.values().end()) {
        if (cfg.frame == Frame::Psi) apply_pointwise(field_, frame_matrix(driver_.nu));
    }

    void step_x(const StepNoise& z, std::int64_t index) {
        advance_driver(z.first_half);
        const PauliVector m = driver::pauli_vector(driver_.nu);
        const Mat2 s = driver::sigma_bar_matrix(m);
        grid_.forward(field_);
        x_flow_.apply(field_, s);
        grid_.inverse(field_);
        kerr_rk4(field_, m, cfg_.nonlinearity, h_);
        grid_.forward(field_);
        x_flow_.apply(field_, s);
        grid_.inverse(field_);
        advance_driver(z.second_half);
        check_finite(field_, index);
    }

    // Linear half-flow, then the pointwise part (driver half, exact Kerr
    // phase, driver half), then the other linear half-flow.
    void step_psi(const StepNoise& z, std::int64_t index) {
        grid_.forward(field_);
        psi_flow_.apply(field_);
        grid_.inverse(field_);
        apply_pointwise(field_, psi_frame_factor(advance_driver(z.first_half)));
        psi_kerr_exact(field_, cfg_.nonlinearity, h_);
        apply_pointwise(field_, psi_frame_factor(advance_driver(z.second_half)));
        grid_.forward(field_);
        psi_flow_.apply(field_);
        grid_.inverse(field_);
        check_finite(field_, index);
    }

    SpinorField x_field() const {
        std::vector<Spinor> values = field_;
        if (cfg_.frame == Frame::Psi) apply_pointwise(values, frame_matrix(driver_.nu).adjoint());
        return SpinorField(grid_, std::move(values));
    }

    const DriverState& driver() const { return driver_; }

private:
    Mat2 advance_driver(const std::array<double, 2>& z) {
        const double scale = std::sqrt(fast_half_);
        const Mat2 e =
            driver::driver_exponential(fast_half_, {scale * z[0], scale * z[1]}, cfg_.params);
        driver_.nu = renormalized(e.apply(driver_.nu));
        driver_.time += fast_half_;
        return e;
    }

    const PmdRunConfig& cfg_;
    SpectralGrid grid_;
    double h_;
    double fast_half_;
    LinearFlow x_flow_;
    Sigma3Flow psi_flow_;
    DriverState driver_;
    std::vector<Spinor> field_;
};

DiagnosticRecord diagnose(const SpinorField& x, const FiberParams& p, std::int64_t step, double t) {
    return {step, t, l2_norm(x), h1_norm(x), limit::energy(x, p)};
}

Trajectory integrate(PmdRunConfig cfg, Frame frame) {
    validate(cfg);
    cfg.frame = frame;
    Trajectory traj{.final_field = cfg.initial};
    traj.n_steps = step_count(cfg.t_final, cfg.dt);
    traj.dt = traj.n_steps > 0 ? cfg.t_final / static_cast<double>(traj.n_steps) : 0.0;

    Integrator integ(cfg, traj.dt);
    auto record = [&](std::int64_t step, double t) {
        SpinorField x = integ.x_field();
        const DiagnosticRecord rec = diagnose(x, cfg.params, step, t);
        traj.records.push_back(rec);
        if (cfg.keep_snapshots) traj.snapshots.push_back({x, t});
        if (rec.h1 > cfg.h1_ceiling) {
            std::ostringstream msg;
            msg << "H1 norm " << rec.h1 << " exceeded ceiling " << cfg.h1_ceiling << " at step "
                << step;
            throw NumericalAbort(NumericalAbort::Reason::BlowUpSuspected, step, msg.str());
        }
        return x;
    };

    double t = 0.0;
    try {
        traj.final_field = record(0, 0.0);
        for (std::size_t n = 0; n < traj.n_steps; ++n) {
            const StepNoise z = draw_step_noise(cfg, n);
            const auto index = static_cast<std::int64_t>(n + 1);
            if (frame == Frame::X) {
                integ.step_x(z, index);
            } else {
                integ.step_psi(z, index);
            }
            t = static_cast<double>(n + 1) * traj.dt;
            if ((n + 1) % cfg.record_every == 0 || n + 1 == traj.n_steps) {
                traj.final_field = record(index, t);
            }
        }
        traj.final_time = t;
    } catch (const NumericalAbort& e) {
        traj.abort = AbortInfo{e.reason(), e.step(), static_cast<double>(e.step()) * traj.dt,
                               e.what()};
        traj.final_time = traj.abort->t;
    }
    return traj;
}

}  // namespace

SpinorField linear_pmd_halfstep(const SpinorField& f, const PauliVector& m, double dt,
                                const FiberParams& params) {
    SpectralField s = to_spectrum(f);
    LinearFlow(s.grid, params, dt).apply(s.modes, driver::sigma_bar_matrix(m));
    return from_spectrum(s);
}

void validate(const PmdRunConfig& c) {
    const double eps = c.params.epsilon();
    if (!(c.step_factor > 0.0)) throw ConfigError("step_factor: must be positive");
    if (!(c.dt > 0.0)) throw ConfigError("dt: must be positive");
    const double limit = c.step_factor * eps * eps;
    if (c.dt > limit * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "dt: " << c.dt << " violates dt <= " << c.step_factor << " * epsilon^2 = " << limit;
        throw ConfigError(msg.str());
    }
    if (!(c.t_final >= 0.0) || !std::isfinite(c.t_final)) {
        throw ConfigError("t_final: must be finite and >= 0");
    }
    if (c.record_every == 0) throw ConfigError("record_every: must be >= 1");
    if (!(c.h1_ceiling > 0.0)) throw ConfigError("h1_ceiling: must be positive");
    if (!c.initial.all_finite()) throw ConfigError("initial: field has non-finite entries");
    const double n2 = std::norm(c.driver_start.nu[0]) + std::norm(c.driver_start.nu[1]);
    if (std::abs(n2 - 1.0) > 1e-10) throw ConfigError("driver_start: nu must be a unit vector");
}

StepNoise draw_step_noise(const PmdRunConfig& config, std::uint64_t step) {
    const CounterRng rng(config.seed, config.path_index, stream_id(StreamTag::Driver, config.ensemble));
    StepNoise z;
    rng.normals(2 * step, z.first_half);
    rng.normals(2 * step + 1, z.second_half);
    return z;
}

StepResult step_pmd(const SpinorField& f, const DriverState& driver, const StepNoise& noise,
                    const PmdRunConfig& config) {
    PmdRunConfig local = config;
    local.initial = f;
    local.driver_start = driver;
    local.frame = Frame::X;
    Integrator integ(local, config.dt);
    integ.step_x(noise, 1);
    return {integ.x_field(), integ.driver()};
}

Trajectory run_pmd(const PmdRunConfig& config) {
    return integrate(config, config.frame);
}

Trajectory psi_frame_oracle(const PmdRunConfig& config) {
    return integrate(config, Frame::Psi);
}

}  // namespace manakov::pmd
