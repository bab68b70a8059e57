// Acceptance checks.  Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "manakov/cli.hpp"
#include "manakov/driver.hpp"
#include "manakov/limit_solver.hpp"
#include "manakov/mc_harness.hpp"
#include "manakov/pmd_solver.hpp"
#include "manakov/stats.hpp"
#include "test_support.hpp"

using namespace manakov;
namespace fs = std::filesystem;

namespace {

const double kPi = std::acos(-1.0);

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

// 1. Invariant statistics of the driver.
Outcome driver_invariant_measure() {
    driver::InvariantStatsConfig c;
    c.params = FiberParams(1.0, 1.0, 1.0, 0.2, 1.0);
    c.n_paths = 128;
    c.dt = 0.005;
    c.t_burn = 20.0;
    c.t_sample = 2000.0;
    c.seed = 2024;
    const driver::InvariantStats s = driver::estimate_invariant_stats(c);

    bool ok = true;
    double worst_mean = 0.0, worst_cov = 0.0, worst_corr = 0.0;
    for (int j = 0; j < 3; ++j) {
        const double zm = std::abs(s.mean_g[j]) / s.mean_g_stderr[j];
        worst_mean = std::max(worst_mean, zm);
        ok = ok && zm <= 3.0;
        for (int k = 0; k < 3; ++k) {
            const double target = j == k ? 1.0 / 3.0 : 0.0;
            const double zc = std::abs(s.cov_g[j][k] - target) / s.cov_g_stderr[j][k];
            worst_cov = std::max(worst_cov, zc);
            ok = ok && zc <= 3.0;
        }
        const double rel = std::abs(s.corr_integral[j][j] - 1.0 / 12.0) * 12.0;
        worst_corr = std::max(worst_corr, rel);
        ok = ok && rel <= 0.10;
    }
    return {ok, "max |E g|/se " + fmt(worst_mean, 3) + ", max |E gg - d/3|/se " +
                    fmt(worst_cov, 3) + ", corr diag " + fmt(s.corr_integral[0][0]) + " " +
                    fmt(s.corr_integral[1][1]) + " " + fmt(s.corr_integral[2][2]) +
                    " (max rel err " + fmt(worst_corr, 3) + " vs 0.10)"};
}

// 2. Frozen-driver linear flow against the eigenprojector form of the
// multiplier, and the fast drift as a pure translation.
Outcome linear_propagator() {
    const auto g = make_grid(128, 25.0);
    const SpinorField f = testing::random_field(g, 17);
    const FiberParams p(0.8, 1.4, 1.0, 0.0, 0.35);
    const double t = 0.37;
    const SpectralField in = to_spectrum(f);
    const auto xi = g.wavenumbers();

    double mult_err = 0.0;
    std::mt19937_64 gen(3);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 8; ++trial) {
        double m[3] = {z(gen), z(gen), z(gen)};
        const double n = std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
        for (double& v : m) v /= n;
        const SpectralField out =
            to_spectrum(pmd::linear_pmd_halfstep(f, {m[0], m[1], m[2]}, t, p));
        // P+- = (I +- sigma_bar)/2, eigenvalues -+ b' xi / eps of the drift
        const Complex s11(m[2], 0.0), s12(m[0], -m[1]), s21(m[0], m[1]), s22(-m[2], 0.0);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double a = 0.5 * p.d0() * xi[k] * xi[k] * t;
            const double b = p.b_prime() / p.epsilon() * xi[k] * t;
            const Complex ep = std::exp(Complex(0.0, -a - b));
            const Complex em = std::exp(Complex(0.0, -a + b));
            const Complex u0 = in.modes[k][0], u1 = in.modes[k][1];
            const Complex pu0 = 0.5 * (u0 + s11 * u0 + s12 * u1);
            const Complex pu1 = 0.5 * (u1 + s21 * u0 + s22 * u1);
            const Complex r0 = ep * pu0 + em * (u0 - pu0);
            const Complex r1 = ep * pu1 + em * (u1 - pu1);
            const double scale = std::abs(u0) + std::abs(u1) + 1e-300;
            mult_err = std::max({mult_err, std::abs(out.modes[k][0] - r0) / scale,
                                 std::abs(out.modes[k][1] - r1) / scale});
        }
    }

    const auto gt = make_grid(256, 40.0);
    const Polarization pol{0.6, 0.3};
    pmd::PmdRunConfig c;
    c.params = FiberParams(0.0, 1.0, 0.0, 0.0, 0.5);
    c.initial = gaussian_profile(gt, 1.0, 1.0, 0.0, pol);
    c.dt = 0.1 * 0.25;
    c.t_final = 1.0;
    c.nonlinearity = pmd::Nonlinearity::Off;
    const Trajectory run = pmd::run_pmd(c);
    const double shift = c.params.b_prime() * c.t_final / c.params.epsilon();
    const SpinorField right = gaussian_profile(gt, 1.0, 1.0, shift, pol);
    const SpinorField left = gaussian_profile(gt, 1.0, 1.0, -shift, pol);
    double shift_err = run.aborted() ? 1.0 : 0.0;
    for (std::size_t j = 0; j < gt.size(); ++j) {
        shift_err = std::max({shift_err, std::abs(run.final_field[j][0] - right[j][0]),
                              std::abs(run.final_field[j][1] - left[j][1])});
    }
    return {mult_err <= 1e-12 && shift_err <= 1e-10,
            "multiplier rel err " + fmt(mult_err, 3) + " (<= 1e-12), translation err " +
                fmt(shift_err, 3) + " (<= 1e-10)"};
}

// 3. Free dispersion: sup|u| ~ t^{-1/2}.
Outcome dispersive_decay() {
    const auto g = make_grid(4096, 400.0);
    // unit-mass Gaussian of width 0.25: amplitude (pi w^2)^{-1/4}
    const double w = 0.25;
    const SpinorField u0 = gaussian_profile(g, std::pow(kPi * w * w, -0.25), w);
    const FiberParams free(1.0, 0.0, 1.0, 0.0, 1.0);
    std::vector<double> lx, ly;
    for (int i = 0; i <= 20; ++i) {
        const double t = std::pow(10.0, i / 20.0);
        const SpinorField u = pmd::linear_pmd_halfstep(u0, {0.0, 0.0, 1.0}, t, free);
        double sup = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) sup = std::max(sup, std::abs(u[j][0]));
        lx.push_back(std::log(t));
        ly.push_back(std::log(sup));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    return {std::abs(slope + 0.5) <= 0.02, "fitted slope " + fmt(slope, 5) + " (-0.5 +- 0.02)"};
}

double max_rel_l2_drift(const Trajectory& t) {
    if (t.aborted() || t.records.empty()) return std::numeric_limits<double>::infinity();
    const double l0 = t.records.front().l2;
    double d = 0.0;
    for (const auto& r : t.records) d = std::max(d, std::abs(r.l2 - l0) / l0);
    return d;
}

// 4. L2 conservation over 50 paths of each solver.
Outcome l2_conservation() {
    const auto g = make_grid(256, 40.0);
    const SpinorField v = gaussian_profile(g, 1.2, 1.0, 0.0, {0.5, 0.4});
    pmd::PmdRunConfig pc;
    pc.params = FiberParams(1.0, 1.0, 1.0, 0.2, 0.3);
    pc.initial = v;
    pc.dt = 0.1 * 0.09;
    pc.t_final = 0.5;
    limit::LimitRunConfig lc;
    lc.params = pc.params;
    lc.initial = v;
    lc.dt = 1e-3;
    lc.t_final = 0.5;
    lc.record_every = 10;

    double pmd_worst = 0.0, lim_worst = 0.0;
    for (std::uint32_t path = 0; path < 50; ++path) {
        pc.path_index = path;
        lc.path_index = path;
        pmd_worst = std::max(pmd_worst, max_rel_l2_drift(pmd::run_pmd(pc)));
        lim_worst = std::max(lim_worst, max_rel_l2_drift(limit::run_limit(lc)));
    }
    return {pmd_worst <= 1e-6 && lim_worst <= 1e-8,
            "max relative drift PMD " + fmt(pmd_worst, 3) + " (<= 1e-6), limit " +
                fmt(lim_worst, 3) + " (<= 1e-8)"};
}

// 5. Scalar soliton of i u_t + (d0/2) u_xx + (8/9)|u|^2 u = 0.
Outcome soliton() {
    const auto g = make_grid(1024, 40.0);
    const double a = 1.0, d0 = 1.0;
    const SpinorField u0 = sech_profile(g, a, 1.0 / (a * std::sqrt(8.0 / (9.0 * d0))));
    limit::LimitRunConfig c;
    c.params = FiberParams(d0, 0.0, 1.0, 0.0, 1.0);  // gamma = 0
    c.initial = u0;
    c.dt = 1e-3;
    c.t_final = 1.0;
    c.record_every = 100;
    const Trajectory t = limit::run_limit(c);
    if (t.aborted()) return {false, "run aborted"};
    double shape = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double d = std::abs(t.final_field[j][0]) - std::abs(u0[j][0]);
        shape += d * d;
    }
    shape = std::sqrt(shape * g.dx());
    double sup = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        sup = std::max(sup, std::abs(std::abs(t.final_field[j][0]) - std::abs(u0[j][0])));
    }
    return {shape <= 1e-4 && sup <= 1e-4,
            "|u| shape error L2 " + fmt(shape, 3) + ", sup " + fmt(sup, 3) + " (<= 1e-4)"};
}

// 6. X frame against the Psi frame on the same noise.
Outcome frame_cross_validation() {
    const auto g = make_grid(128, 40.0);
    const SpinorField v = gaussian_profile(g, 1.0, 1.5, 0.0, {0.5, 0.3});
    const double eps = 0.5;
    auto mean_gap = [&](double b_prime, double dt_factor, std::uint32_t paths, double* worst) {
        pmd::PmdRunConfig c;
        c.params = FiberParams(1.0, b_prime, 1.0, 0.2, eps);
        c.initial = v;
        c.t_final = 0.1;
        c.dt = dt_factor * eps * eps;
        double sum = 0.0;
        for (std::uint32_t p = 0; p < paths; ++p) {
            c.path_index = p;
            const double d =
                testing::l2_distance(pmd::run_pmd(c).final_field, pmd::psi_frame_oracle(c).final_field);
            sum += d;
            if (worst != nullptr) *worst = std::max(*worst, d);
        }
        return sum / paths;
    };
    double worst = 0.0;
    mean_gap(0.02, 0.01, 8, &worst);
    const double g1 = mean_gap(1.0, 0.01, 8, nullptr);
    const double g2 = mean_gap(1.0, 0.005, 8, nullptr);
    const double g4 = mean_gap(1.0, 0.0025, 8, nullptr);
    const bool ok = worst <= 1e-4 && g2 < g1 && g4 < g2;
    return {ok, "b'=0.02: max gap " + fmt(worst, 3) + " (<= 1e-4); b'=1 mean gap at dt=0.01, "
                "0.005, 0.0025 eps^2: " + fmt(g1, 3) + " " + fmt(g2, 3) + " " + fmt(g4, 3) +
                    " (decreasing)"};
}

// 7. Ito and Stratonovich schemes give the same E[h1^2(T)].
Outcome ito_stratonovich() {
    const auto g = make_grid(256, 40.0);
    limit::LimitRunConfig c;
    c.params = FiberParams(1.0, 1.0, 1.0, 0.0, 1.0);  // gamma = 1/6
    c.initial = gaussian_profile(g, 1.2, 1.0, 0.0, {0.4, 0.2});
    c.dt = 1e-3;
    c.t_final = 0.5;
    c.record_every = 1000;
    const observables::ObservableSet set{observables::Observable::H1Squared};
    c.scheme = limit::Scheme::StratonovichSplit;
    const mc::EnsembleResult s = mc::run_ensemble(c, 200, set, 11);
    c.scheme = limit::Scheme::ItoEulerSpectral;
    const mc::EnsembleResult i = mc::run_ensemble(c, 200, set, 11);
    const auto& a = s.summary[0];
    const auto& b = i.summary[0];
    const bool overlap = std::abs(a.mean - b.mean) <= 3.0 * (a.std_error + b.std_error);
    return {overlap && s.abort_count == 0 && i.abort_count == 0,
            "Stratonovich " + fmt(a.mean, 6) + " +- " + fmt(a.std_error, 2) + ", Ito " +
                fmt(b.mean, 6) + " +- " + fmt(b.std_error, 2) + " (3-stderr intervals overlap)"};
}

// 8. PMD laws approach the limit law as eps decreases.
Outcome diffusion_limit() {
    mc::ConvergenceStudyConfig c;
    c.epsilons = {0.4, 0.3, 0.2, 0.1};
    c.n_paths = 200;
    const auto g = make_grid(256, 40.0);
    const SpinorField v = gaussian_profile(g, 1.0, 1.0);
    c.pmd_base.params = FiberParams(1.0, 1.0, 1.0, 0.2, 0.4);
    c.pmd_base.initial = v;
    c.pmd_base.t_final = 0.5;
    c.pmd_base.dt = 1e-3;
    c.pmd_base.record_every = 100;
    c.limit_base.params = c.pmd_base.params;
    c.limit_base.initial = v;
    c.limit_base.t_final = 0.5;
    c.limit_base.dt = 1e-3;
    c.limit_base.record_every = 100;
    c.observables = observables::parse_set({"h1_sq", "l4_quartic", "rms_width"});
    c.master_seed = 1;
    const mc::ConvergenceResult r = mc::convergence_study(c);

    bool ok = r.flags.empty();
    std::ostringstream detail;
    const std::size_t n_obs = c.observables.size();
    for (std::size_t k = 0; k < n_obs; ++k) {
        std::vector<double> d, se;
        for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
            d.push_back(r.rows[i * n_obs + k].discrepancy);
            se.push_back(r.rows[i * n_obs + k].discrepancy_stderr);
        }
        const auto& last = r.rows[(c.epsilons.size() - 1) * n_obs + k];
        const bool mono = stats::non_increasing_within(d, se, 2.0);
        const bool ks = last.ks_stat < last.ks_critical_5pct;
        ok = ok && mono && ks;
        detail << (k ? "; " : "") << last.observable << " d=[";
        for (std::size_t i = 0; i < d.size(); ++i) detail << (i ? " " : "") << fmt(d[i], 2);
        detail << "] se~" << fmt(se.back(), 2) << " KS " << fmt(last.ks_stat, 3) << "/"
               << fmt(last.ks_critical_5pct, 3);
    }
    return {ok, detail.str()};
}

// 9. Mean one-step increment of the energy against its drift.
Outcome energy_drift_regression() {
    const auto g = make_grid(256, 30.0);
    limit::LimitRunConfig c;
    c.params = FiberParams(1.0, 1.0, 1.0, 0.0, 1.0);  // gamma = 1/6
    SpinorField x = gaussian_profile(g, 1.1, 1.2, -0.4, {0.0, 0.0}, 0.3);
    const SpinorField y = gaussian_profile(g, 0.8, 0.9, 0.6, {kPi / 2.0, 0.0}, -0.5);
    for (std::size_t j = 0; j < g.size(); ++j) x[j][1] = y[j][1];
    c.initial = x;
    c.dt = 1e-3;
    c.seed = 99;

    const double h0 = limit::energy(x, c.params);
    const auto coef = limit::energy_noise_coefficients(x, c.params);
    // Hessian of w -> H(noise_flow(x, w)) at 0 by central differences; the
    // quadratic term below has mean zero, so it only removes variance.
    const double e = 1e-3;
    auto h_at = [&](std::array<double, 3> w) { return limit::energy(limit::noise_flow(x, w, c.params), c.params); };
    double hess[3][3];
    for (int j = 0; j < 3; ++j) {
        for (int k = j; k < 3; ++k) {
            std::array<double, 3> pp{}, pm{}, mp{}, mm{};
            pp[j] += e, pp[k] += e;
            pm[j] += e, pm[k] -= e;
            mp[j] -= e, mp[k] += e;
            mm[j] -= e, mm[k] -= e;
            hess[j][k] = hess[k][j] = (h_at(pp) - h_at(pm) - h_at(mp) + h_at(mm)) / (4.0 * e * e);
        }
    }
    std::vector<double> inc;
    for (std::uint64_t n = 0; n < 2000; ++n) {
        const auto dW = limit::draw_increments(c, n);
        const SpinorField x1 = limit::step_limit_stratonovich(x, c, dW);
        double control = 0.0;
        for (int j = 0; j < 3; ++j) {
            control += coef[j] * dW[j];
            for (int k = 0; k < 3; ++k) {
                control += 0.5 * hess[j][k] * (dW[j] * dW[k] - (j == k ? c.dt : 0.0));
            }
        }
        inc.push_back(limit::energy(x1, c.params) - h0 - control);
    }
    const auto s = stats::summarize(inc);
    const double drift = limit::energy_drift(x, c.params) * c.dt;
    const double printed = limit::energy_drift_printed(x, c.params) * c.dt;
    const double z = std::abs(s.mean - drift) / s.std_error;
    const double z_printed = std::abs(s.mean - printed) / s.std_error;
    return {z <= 3.0, "mean increment " + fmt(s.mean, 5) + " +- " + fmt(s.std_error, 2) +
                          ", drift*dt " + fmt(drift, 5) + " (z=" + fmt(z, 3) +
                          "); expanded form " + fmt(printed, 5) + " (z=" + fmt(z_printed, 3) +
                          ")"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 10. Outputs do not depend on the worker count.
Outcome reproducibility() {
    // Worker counts are set explicitly here; an external cap would hide them.
    unsetenv("MANAKOV_THREADS");
    const fs::path root = fs::temp_directory_path() / "manakov_acceptance_repro";
    fs::remove_all(root);
    std::vector<fs::path> dirs;
    for (const char* w : {"1", "4", "8"}) {
        const fs::path out = root / (std::string("w") + w);
        dirs.push_back(out);
        const std::vector<std::string> args = {
            "manakov", "converge", "--set", "epsilons=0.4,0.2", "n_paths=24", "n_points=64",
            "domain_length=30", "t_final=0.2", "record_every=5", "--seed", "5", "--threads", w,
            "--out", out.string()};
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream sink;
        auto* old_out = std::cout.rdbuf(sink.rdbuf());
        auto* old_err = std::cerr.rdbuf(sink.rdbuf());
        const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data());
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
        if (code != 0) return {false, "converge exited with " + std::to_string(code)};
    }
    std::size_t compared = 0, bytes = 0;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
        const std::string name = entry.path().filename().string();
        const bool data = name.ends_with(".csv") || name.ends_with(".ndjson");
        if (!data) continue;
        const std::string ref = slurp(entry.path());
        for (std::size_t i = 1; i < dirs.size(); ++i) {
            if (slurp(dirs[i] / name) != ref) {
                return {false, name + " differs between 1 and " + dirs[i].filename().string()};
            }
        }
        ++compared;
        bytes += ref.size();
    }
    fs::remove_all(root);
    return {compared >= 5, std::to_string(compared) + " CSV/NDJSON files (" +
                               std::to_string(bytes) + " bytes) identical across 1, 4, 8 workers"};
}

}  // namespace

// Optional arguments select criteria by number, e.g. `acceptance 6 9`.
int main(int argc, char** argv) {
    std::vector<std::size_t> only;
    for (int i = 1; i < argc; ++i) only.push_back(static_cast<std::size_t>(std::atoi(argv[i])));
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"driver invariant measure", driver_invariant_measure},
        {"exact linear propagator", linear_propagator},
        {"dispersive decay", dispersive_decay},
        {"L2 conservation", l2_conservation},
        {"soliton", soliton},
        {"X/Psi frame cross-validation", frame_cross_validation},
        {"Ito/Stratonovich weak consistency", ito_stratonovich},
        {"diffusion limit", diffusion_limit},
        {"energy drift", energy_drift_regression},
        {"reproducibility", reproducibility},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && std::find(only.begin(), only.end(), i + 1) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += o.pass ? 0 : 1;
        std::printf("criterion %zu %s: %s: %s [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL",
                    criteria[i].first, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
