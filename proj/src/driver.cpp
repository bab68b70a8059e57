#include "manakov/driver.hpp"

#include <algorithm>
#include <cmath>

#include "manakov/parallel.hpp"

namespace manakov::driver {

PauliVector pauli_vector(const Spinor& nu) noexcept {
    const Complex prod = 2.0 * nu[0] * nu[1];
    return {prod.real(), prod.imag(), std::norm(nu[0]) - std::norm(nu[1])};
}

Mat2 sigma_bar_matrix(const PauliVector& m) noexcept {
    return pauli_combination(m.m1, m.m2, m.m3);
}

SigmaBar sigma_bar(const DriverState& state) {
    const double n2 = std::norm(state.nu[0]) + std::norm(state.nu[1]);
    if (std::abs(n2 - 1.0) > 1e-10) {
        throw std::domain_error("sigma_bar: driver state is off the unit sphere (|nu|^2 = " +
                                std::to_string(n2) + ")");
    }
    const PauliVector m = pauli_vector(state.nu);
    return {m, sigma_bar_matrix(m)};
}

Mat2 driver_exponential(double dt, std::array<double, 2> dW, const FiberParams& params) noexcept {
    const double root = std::sqrt(params.gamma_c());
    return su2_exp(root * dW[0], root * dW[1], params.gamma_s() * dt);
}

namespace {

Spinor renormalized(const Spinor& v) {
    const double n = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    return {v[0] / n, v[1] / n};
}

}  // namespace

DriverState step_driver(const DriverState& state, double dt, std::array<double, 2> dW,
                        const FiberParams& params) {
    if (!(dt > 0.0)) throw ConfigError("step_driver: dt must be positive");
    const Mat2 e = driver_exponential(dt, dW, params);
    return {renormalized(e.apply(state.nu)), state.time + dt};
}

double default_driver_dt(const FiberParams& params) noexcept {
    double dt = std::min(0.01, 0.01 / params.gamma_c());
    if (params.gamma_s() != 0.0) dt = std::min(dt, 0.01 / std::abs(params.gamma_s()));
    return dt;
}

DriverPath::DriverPath(DriverState start, const FiberParams& params, CounterRng rng)
    : state_(start), params_(params), rng_(rng) {}

Mat2 DriverPath::advance(double slow_dt, std::uint64_t step) {
    const double eps = params_.epsilon();
    const double fast_dt = slow_dt / (eps * eps);
    std::array<double, 2> z{};
    rng_.normals(step, z);
    const double scale = std::sqrt(fast_dt);
    const Mat2 e = driver_exponential(fast_dt, {scale * z[0], scale * z[1]}, params_);
    state_.nu = renormalized(e.apply(state_.nu));
    state_.time += fast_dt;
    return e;
}

DriverState rescaled_driver(const DriverState& state, double t, double epsilon, double slow_dt,
                            const FiberParams& params, const CounterRng& rng,
                            std::uint64_t first_step) {
    if (!(slow_dt > 0.0)) throw ConfigError("rescaled_driver: dt must be positive");
    if (t <= 0.0) return state;
    const auto n_steps = static_cast<std::uint64_t>(std::ceil(t / slow_dt - 1e-9));
    const double h = t / static_cast<double>(n_steps);
    DriverPath path(state, params.with_epsilon(epsilon), rng);
    for (std::uint64_t k = 0; k < n_steps; ++k) path.advance(h, first_step + k);
    return path.state();
}

// ---------------------------------------------------------------------------

namespace {

struct BatchEstimate {
    std::array<double, 3> mean{};
    Matrix3 second{};
    Matrix3 corr{};
};

// Time averages over one batch of equally spaced samples.  Lagged products
// only pair samples inside the batch.
BatchEstimate estimate_batch(const std::vector<std::array<double, 3>>& g, std::size_t begin,
                             std::size_t end, std::size_t max_lag, double h) {
    BatchEstimate est;
    const std::size_t n = end - begin;
    for (std::size_t i = begin; i < end; ++i) {
        for (int j = 0; j < 3; ++j) {
            est.mean[j] += g[i][j];
            for (int k = 0; k < 3; ++k) est.second[j][k] += g[i][j] * g[i][k];
        }
    }
    for (int j = 0; j < 3; ++j) {
        est.mean[j] /= static_cast<double>(n);
        for (int k = 0; k < 3; ++k) est.second[j][k] /= static_cast<double>(n);
    }
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        Matrix3 c{};
        for (std::size_t i = begin; i + lag < end; ++i) {
            const auto& a = g[i];
            const auto& b = g[i + lag];
            for (int j = 0; j < 3; ++j) {
                for (int k = 0; k < 3; ++k) c[j][k] += a[j] * b[k];
            }
        }
        const double weight = (lag == 0 || lag == max_lag) ? 0.5 * h : h;
        const double count = static_cast<double>(n - lag);
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) est.corr[j][k] += weight * c[j][k] / count;
        }
    }
    return est;
}

struct MeanAndError {
    double mean = 0.0;
    double std_error = 0.0;
};

template <class Get>
MeanAndError summarize(const std::vector<BatchEstimate>& batches, Get get) {
    const auto n = static_cast<double>(batches.size());
    double sum = 0.0;
    for (const auto& b : batches) sum += get(b);
    const double mean = sum / n;
    if (batches.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (const auto& b : batches) ss += (get(b) - mean) * (get(b) - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

InvariantStats estimate_invariant_stats(const InvariantStatsConfig& cfg) {
    if (cfg.n_paths == 0) throw ConfigError("estimate_invariant_stats: n_paths must be >= 1");
    if (cfg.batches_per_path == 0) throw ConfigError("batches_per_path must be >= 1");
    if (!(cfg.params.gamma_c() > 0.0)) throw ConfigError("gamma_c: must be positive for driver statistics");
    const FiberParams& p = cfg.params;
    InvariantStats out;
    out.dt = cfg.dt > 0.0 ? cfg.dt : default_driver_dt(p);
    out.t_burn = cfg.t_burn >= 0.0 ? cfg.t_burn : 20.0 / p.gamma_c();
    out.lag_cutoff = cfg.lag_cutoff > 0.0 ? cfg.lag_cutoff : 10.0 / p.gamma_c();
    const double interval = cfg.sample_interval > 0.0 ? cfg.sample_interval : 0.05 / p.gamma_c();
    const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(interval / out.dt)));
    out.sample_interval = static_cast<double>(stride) * out.dt;
    const auto max_lag = static_cast<std::size_t>(std::llround(out.lag_cutoff / out.sample_interval));
    out.lag_cutoff = static_cast<double>(max_lag) * out.sample_interval;

    const auto burn_steps = static_cast<std::uint64_t>(std::ceil(out.t_burn / out.dt - 1e-9));
    const auto n_samples = static_cast<std::size_t>(std::floor(cfg.t_sample / out.sample_interval));
    const std::size_t batch_len = n_samples / cfg.batches_per_path;
    if (batch_len <= 2 * max_lag) {
        throw ConfigError("t_sample too short: each batch must span more than twice the lag cutoff");
    }

    std::vector<std::vector<BatchEstimate>> per_path(cfg.n_paths);
    parallel_for(cfg.n_paths, worker_count(cfg.threads), [&](std::size_t path) {
        const CounterRng rng(cfg.seed, static_cast<std::uint32_t>(path),
                             stream_id(StreamTag::DriverStats));
        DriverState state;
        std::uint64_t step = 0;
        std::array<double, 2> z{};
        const double root_dt = std::sqrt(out.dt);
        auto advance = [&] {
            rng.normals(step++, z);
            state = step_driver(state, out.dt, {root_dt * z[0], root_dt * z[1]}, p);
        };
        for (std::uint64_t k = 0; k < burn_steps; ++k) advance();
        std::vector<std::array<double, 3>> g(n_samples);
        for (std::size_t i = 0; i < n_samples; ++i) {
            for (std::size_t k = 0; k < stride; ++k) advance();
            const PauliVector m = pauli_vector(state.nu);
            g[i] = {m.m1, m.m2, m.m3};
        }
        auto& batches = per_path[path];
        for (std::size_t b = 0; b < cfg.batches_per_path; ++b) {
            batches.push_back(
                estimate_batch(g, b * batch_len, (b + 1) * batch_len, max_lag, out.sample_interval));
        }
    });

    std::vector<BatchEstimate> all;
    for (auto& v : per_path) all.insert(all.end(), v.begin(), v.end());
    out.n_batches = all.size();

    double worst = 0.0;
    for (int j = 0; j < 3; ++j) {
        auto m = summarize(all, [j](const BatchEstimate& b) { return b.mean[j]; });
        out.mean_g[j] = m.mean;
        out.mean_g_stderr[j] = m.std_error;
        worst = std::max(worst, m.std_error);
        for (int k = 0; k < 3; ++k) {
            auto s = summarize(all, [j, k](const BatchEstimate& b) { return b.second[j][k]; });
            out.cov_g[j][k] = s.mean;
            out.cov_g_stderr[j][k] = s.std_error;
            auto c = summarize(all, [j, k](const BatchEstimate& b) { return b.corr[j][k]; });
            out.corr_integral[j][k] = c.mean;
            out.corr_integral_stderr[j][k] = c.std_error;
            worst = std::max({worst, s.std_error, c.std_error});
        }
    }
    if (cfg.tolerance > 0.0 && worst > cfg.tolerance) out.flags.emplace_back("insufficient_samples");
    if (out.n_batches < 2) out.flags.emplace_back("single_batch_no_stderr");
    return out;
}

}  // namespace manakov::driver
