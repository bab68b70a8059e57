#include <doctest.h>

#include <cmath>
#include <vector>

#include "manakov/limit_solver.hpp"
#include "manakov/stats.hpp"
#include "test_support.hpp"

using namespace manakov;
using namespace manakov::limit;

namespace {

const double kPi = std::acos(-1.0);

LimitRunConfig base_config(const SpinorField& initial, double gamma, double dt) {
    LimitRunConfig c;
    // gamma = b'^2 / (6 gamma_c) with gamma_c = 1
    c.params = FiberParams(1.0, std::sqrt(6.0 * gamma), 1.0, 0.0, 1.0);
    c.initial = initial;
    c.dt = dt;
    return c;
}

SpinorField soliton(const SpectralGrid& g, double a, double d0) {
    const double c = 8.0 / 9.0;
    return sech_profile(g, a, 1.0 / (a * std::sqrt(c / d0)));
}

}  // namespace

TEST_CASE("noise flow") {
    const auto g = make_grid(64, 2.0 * kPi);
    const SpinorField f = testing::random_field(g, 8);
    const FiberParams p(1.0, 1.0, 1.0, 0.0, 1.0);

    const SpinorField same = noise_flow(f, {0.0, 0.0, 0.0}, p);
    CHECK(testing::max_abs_diff(same, f) < 1e-14);

    for (const auto& dW : {std::array<double, 3>{0.3, -0.1, 0.7}, std::array<double, 3>{-1.0, 2.0, 0.5}}) {
        CHECK(std::abs(l2_norm(noise_flow(f, dW, p)) - l2_norm(f)) < 1e-12 * l2_norm(f));
    }

    // single mode xi1 = 3 polarized along (1,0): exp(-i sqrt(gamma) w xi1 sigma1)
    SpinorField wave(g);
    for (std::size_t j = 0; j < 64; ++j) wave[j] = {std::polar(1.0, 3.0 * g.position(j)), 0.0};
    const double w = 0.21;
    const SpinorField out = noise_flow(wave, {w, 0.0, 0.0}, p);
    const double theta = std::sqrt(p.gamma()) * w * 3.0;
    for (std::size_t j = 0; j < 64; ++j) {
        CHECK(std::abs(out[j][0] - std::cos(theta) * wave[j][0]) < 1e-12);
        CHECK(std::abs(out[j][1] - Complex(0.0, -std::sin(theta)) * wave[j][0]) < 1e-12);
    }
}

TEST_CASE("f_limit") {
    const Spinor a = f_limit({1.0, 0.0});
    CHECK(std::abs(a[0] - 8.0 / 9.0) < 1e-15);
    CHECK(std::abs(a[1]) == 0.0);
    const Spinor z = f_limit({0.0, 0.0});
    CHECK(std::abs(z[0]) == 0.0);
    const Spinor x{Complex(0.3, 0.4), Complex(-1.0, 0.2)};
    const Spinor f = f_limit(x);
    const double r = std::sqrt(std::norm(x[0]) + std::norm(x[1]));
    CHECK(std::sqrt(std::norm(f[0]) + std::norm(f[1])) == doctest::Approx(8.0 / 9.0 * r * r * r));
}

TEST_CASE("energy") {
    const auto g = make_grid(16, 2.0);
    const FiberParams p(0.37, 1.0, 1.0, 0.0, 1.0);
    CHECK(energy(SpinorField(g), p) == 0.0);
    SpinorField one(g);
    for (std::size_t j = 0; j < 16; ++j) one[j] = {1.0, 0.0};
    CHECK(energy(one, p) == doctest::Approx(-4.0 / 9.0));
}

TEST_CASE("soliton propagates with fixed shape and energy") {
    const auto g = make_grid(1024, 40.0);
    const SpinorField u0 = soliton(g, 1.0, 1.0);
    LimitRunConfig c = base_config(u0, 0.0, 1e-3);
    c.t_final = 1.0;
    c.record_every = 100;
    const Trajectory t = run_limit(c);
    REQUIRE_FALSE(t.aborted());
    double shape = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double d = std::abs(t.final_field[j][0]) - std::abs(u0[j][0]);
        shape += d * d;
    }
    CHECK(std::sqrt(shape * g.dx()) <= 1e-4);
    // phase rotates at omega = c a^2 / 2
    const Complex ratio = t.final_field[512][0] / u0[512][0];
    CHECK(std::abs(ratio - std::polar(1.0, 4.0 / 9.0)) < 1e-4);
    const double h0 = t.records.front().energy;
    for (const auto& r : t.records) CHECK(std::abs(r.energy - h0) <= 1e-6);
}

TEST_CASE("Stratonovich step") {
    const auto g = make_grid(128, 30.0);
    LimitRunConfig c = base_config(SpinorField(g), 0.5, 1e-2);
    CHECK(l2_norm(step_limit_stratonovich(SpinorField(g), c, {0.1, 0.2, 0.3})) == 0.0);

    c.initial = gaussian_profile(g, 1.5, 1.0, 0.0, {0.4, 0.5});
    SpinorField x = c.initial;
    const double l0 = l2_norm(x);
    for (std::uint64_t s = 0; s < 50; ++s) {
        const double before = l2_norm(x);
        x = step_limit_stratonovich(x, c, draw_increments(c, s));
        CHECK(std::abs(l2_norm(x) - before) <= 1e-10 * before);
    }
    CHECK(std::abs(l2_norm(x) - l0) <= 1e-8 * l0);
}

TEST_CASE("Ito step") {
    const auto g = make_grid(128, 30.0);
    const SpinorField v = gaussian_profile(g, 1.2, 1.0, 0.0, {0.3, 0.0});

    // gamma = 0: Strang versus Lie splitting differ by O(dt^2) per step.
    double prev = 0.0;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        const LimitRunConfig c = base_config(v, 0.0, dt);
        const double d = testing::l2_distance(step_limit_ito(v, c, {0.0, 0.0, 0.0}),
                                              step_limit_stratonovich(v, c, {0.0, 0.0, 0.0}));
        if (prev > 0.0) CHECK(prev / d == doctest::Approx(4.0).epsilon(0.1));
        prev = d;
    }

    // Linear single mode: E |X^(xi1)|^2 stays put under the Ito scheme, up to
    // the per-step factor E[e^{-3a}(1 + a |Z|^2)] = e^{-3a}(1 + 3a), a = gamma xi^2 dt.
    const auto gm = make_grid(32, 2.0 * kPi);
    SpinorField wave(gm);
    for (std::size_t j = 0; j < 32; ++j) wave[j] = {std::polar(1.0, 2.0 * gm.position(j)), 0.0};
    LimitRunConfig lc = base_config(wave, 0.3, 1e-3);
    lc.nonlinear = false;
    lc.scheme = Scheme::ItoEulerSpectral;
    lc.t_final = 0.5;
    std::vector<double> power;
    for (std::uint32_t path = 0; path < 400; ++path) {
        lc.path_index = path;
        const SpectralField s = to_spectrum(run_limit(lc).final_field);
        power.push_back((std::norm(s.modes[2][0]) + std::norm(s.modes[2][1])) / (32.0 * 32.0));
    }
    const auto ps = stats::summarize(power);
    const double a = lc.params.gamma() * 4.0 * lc.dt;
    const double expected = std::pow(std::exp(-3.0 * a) * (1.0 + 3.0 * a), 500.0);
    CHECK(std::abs(ps.mean - expected) < 3.0 * ps.std_error);
    CHECK(std::abs(expected - 1.0) < 5e-3);
}

TEST_CASE("Ito scheme conserves L2 in mean") {
    const auto g = make_grid(64, 30.0);
    LimitRunConfig c = base_config(gaussian_profile(g, 1.0, 1.5), 1.0 / 6.0, 1e-3);
    c.scheme = Scheme::ItoEulerSpectral;
    c.t_final = 0.2;
    c.record_every = 1000;
    std::vector<double> mass;
    for (std::uint32_t path = 0; path < 200; ++path) {
        c.path_index = path;
        const double l = l2_norm(run_limit(c).final_field);
        mass.push_back(l * l);
    }
    const auto s = stats::summarize(mass);
    const double m0 = l2_norm(c.initial) * l2_norm(c.initial);
    CHECK(std::abs(s.mean - m0) < 3.0 * s.std_error + 1e-6 * m0);
}

TEST_CASE("run_limit") {
    const auto g = make_grid(128, 30.0);
    LimitRunConfig c = base_config(gaussian_profile(g, 1.3, 1.0, 0.0, {0.2, 0.1}), 1.0 / 6.0, 1e-3);
    c.record_every = 50;
    const Trajectory empty = run_limit(c);
    CHECK(empty.n_steps == 0);
    CHECK(testing::max_abs_diff(empty.final_field, c.initial) == 0.0);

    c.t_final = 0.5;
    const Trajectory t = run_limit(c);
    REQUIRE_FALSE(t.aborted());
    const double l0 = t.records.front().l2;
    for (const auto& r : t.records) CHECK(std::abs(r.l2 - l0) <= 1e-8 * l0);
    CHECK(testing::max_abs_diff(run_limit(c).final_field, t.final_field) == 0.0);

    c.h1_ceiling = 1.5;
    const Trajectory guarded = run_limit(c);
    REQUIRE(guarded.aborted());
    CHECK(guarded.abort->reason == NumericalAbort::Reason::BlowUpSuspected);
    CHECK(guarded.abort->message.find("H1") != std::string::npos);

    c.h1_ceiling = 1e6;
    c.dt = -1.0;
    CHECK_THROWS_AS(run_limit(c), ConfigError);
    c.dt = 1e-3;
    c.params = FiberParams(1.0, 1.0, 0.0, 0.0, 1.0);
    CHECK_THROWS_AS(run_limit(c), ConfigError);
}

TEST_CASE("rotating the noise leaves the law of |X_x| unchanged") {
    const auto g = make_grid(64, 30.0);
    LimitRunConfig c = base_config(gaussian_profile(g, 1.2, 1.0, 0.0, {0.3, 0.0}), 0.4, 1e-2);
    c.t_final = 0.3;
    // rotation by 0.7 rad about (1,1,1)/sqrt(3)
    const double a = 0.7;
    const double u = 1.0 / std::sqrt(3.0);
    const double ca = std::cos(a), sa = std::sin(a), t = 1.0 - ca;
    const double r[3][3] = {{ca + u * u * t, u * u * t - u * sa, u * u * t + u * sa},
                            {u * u * t + u * sa, ca + u * u * t, u * u * t - u * sa},
                            {u * u * t - u * sa, u * u * t + u * sa, ca + u * u * t}};
    std::vector<double> plain, rotated;
    for (std::uint32_t path = 0; path < 200; ++path) {
        c.path_index = path;
        SpinorField x = c.initial, y = c.initial;
        for (std::uint64_t s = 0; s < 30; ++s) {
            const auto dW = draw_increments(c, s);
            std::array<double, 3> rw{};
            for (int i = 0; i < 3; ++i) rw[i] = r[i][0] * dW[0] + r[i][1] * dW[1] + r[i][2] * dW[2];
            x = step_limit_stratonovich(x, c, dW);
            y = step_limit_stratonovich(y, c, rw);
        }
        plain.push_back(l2_norm(derivative(x)));
        rotated.push_back(l2_norm(derivative(y)));
    }
    const auto sp = stats::summarize(plain);
    const auto sr = stats::summarize(rotated);
    CHECK(std::abs(sp.mean - sr.mean) < 3.0 * std::hypot(sp.std_error, sr.std_error));
}

TEST_CASE("energy drift and martingale terms match finite differences of the noise flow") {
    const auto g = make_grid(256, 30.0);
    const FiberParams p(1.0, 1.0, 1.0, 0.0, 1.0);
    // A genuinely two-component profile with varying relative phase.
    SpinorField x = gaussian_profile(g, 1.1, 1.2, -0.4, {0.0, 0.0}, 0.3);
    const SpinorField y = gaussian_profile(g, 0.8, 0.9, 0.6, {kPi / 2.0, 0.0}, -0.5);
    for (std::size_t j = 0; j < g.size(); ++j) x[j][1] = y[j][1];

    const double h = 1e-3;
    const double h0 = energy(x, p);
    double second = 0.0;
    std::array<double, 3> first{};
    for (int k = 0; k < 3; ++k) {
        std::array<double, 3> e{};
        e[k] = h;
        const double plus = energy(noise_flow(x, e, p), p);
        e[k] = -h;
        const double minus = energy(noise_flow(x, e, p), p);
        second += 0.5 * (plus - 2.0 * h0 + minus) / (h * h);
        first[k] = (plus - minus) / (2.0 * h);
    }
    const double drift = energy_drift(x, p);
    CHECK(std::abs(drift - second) <= 1e-5 * std::abs(drift));
    const auto c = energy_noise_coefficients(x, p);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(c[k] - first[k]) <= 1e-5 * (std::abs(c[k]) + 1e-3));

    // For a single polarization the expanded printed form is half the drift.
    const SpinorField single = gaussian_profile(g, 1.0, 1.0);
    CHECK(energy_drift_printed(single, p) == doctest::Approx(0.5 * energy_drift(single, p)).epsilon(1e-10));
}
