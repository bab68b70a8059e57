#include <doctest.h>

#include <cmath>

#include "manakov/mc_harness.hpp"
#include "manakov/rng.hpp"
#include "manakov/stats.hpp"

using namespace manakov;
using namespace manakov::mc;

namespace {

limit::LimitRunConfig small_limit() {
    limit::LimitRunConfig c;
    c.params = FiberParams(1.0, 1.0, 1.0, 0.0, 1.0);
    c.initial = gaussian_profile(make_grid(64, 30.0), 1.0, 1.5);
    c.dt = 1e-2;
    c.t_final = 0.2;
    return c;
}

pmd::PmdRunConfig small_pmd(double eps) {
    pmd::PmdRunConfig c;
    c.params = FiberParams(1.0, 1.0, 1.0, 0.2, eps);
    c.initial = gaussian_profile(make_grid(64, 30.0), 1.0, 1.5, 0.0, {0.4, 0.0});
    c.dt = 0.1 * eps * eps;
    c.t_final = 0.2;
    return c;
}

}  // namespace

TEST_CASE("single path ensemble") {
    const auto set = observables::parse_set({"h1_sq"});
    const EnsembleResult r = run_ensemble(small_limit(), 1, set, 5);
    CHECK(r.summary[0].std_error == 0.0);
    CHECK(r.summary[0].n_effective == 1);
    CHECK(r.summary[0].mean == r.paths[0].values[0]);
}

TEST_CASE("l2 is constant across limit paths") {
    const auto set = observables::parse_set({"l2_sq", "h1_sq"});
    const EnsembleResult r = run_ensemble(small_limit(), 16, set, 5);
    CHECK(r.summary[0].variance <= 1e-16);
    CHECK(r.summary[1].variance > 1e-8);
    const double m0 = std::pow(l2_norm(small_limit().initial), 2);
    for (const auto& p : r.paths) CHECK(std::abs(p.values[0] - m0) <= 1e-8 * m0);
}

TEST_CASE("results do not depend on worker count") {
    const auto set = observables::all_observables();
    const EnsembleResult a = run_ensemble(small_pmd(0.4), 6, set, 11, 1);
    const EnsembleResult b = run_ensemble(small_pmd(0.4), 6, set, 11, 4);
    for (std::size_t i = 0; i < 6; ++i) CHECK(a.paths[i].values == b.paths[i].values);
    for (std::size_t k = 0; k < set.size(); ++k) CHECK(a.summary[k].mean == b.summary[k].mean);
}

TEST_CASE("stderr scales like n^-1/2") {
    // synthetic i.i.d. data through the same summary code
    const CounterRng r(3, 0, stream_id(StreamTag::Test));
    std::vector<double> x(20000);
    r.normals(0, x);
    const std::vector<double> half(x.begin(), x.begin() + 10000);
    const double ratio = stats::summarize(x).std_error / stats::summarize(half).std_error;
    CHECK(ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("aborted paths are counted and excluded") {
    const auto set = observables::parse_set({"h1_sq"});
    auto c = small_limit();
    c.params = FiberParams(1.0, 3.0, 1.0, 0.0, 1.0);
    c.t_final = 0.5;
    // a ceiling between the typical and the largest final H1 norms
    const EnsembleResult free = run_ensemble(c, 24, set, 2);
    auto values = free.samples(0);
    std::sort(values.begin(), values.end());
    c.h1_ceiling = std::sqrt(values[12]);
    const EnsembleResult r = run_ensemble(c, 24, set, 2);
    CHECK(r.abort_count > 0);
    CHECK(r.abort_count < 24);
    CHECK(r.summary[0].n_effective + r.abort_count == 24);

    c.h1_ceiling = 1e-3;
    CHECK_THROWS_AS(run_ensemble(c, 4, set, 2), StudyError);
}

TEST_CASE("convergence study plumbing") {
    ConvergenceStudyConfig cfg;
    cfg.epsilons = {0.5, 0.4};
    cfg.n_paths = 8;
    cfg.pmd_base = small_pmd(0.5);
    cfg.pmd_base.dt = 1.0;  // clipped to 0.1 eps^2 per row
    cfg.limit_base = small_limit();
    cfg.observables = observables::parse_set({"h1_sq", "rms_width"});
    const ConvergenceResult r = convergence_study(cfg);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.pmd_dt[0] == doctest::Approx(0.025));
    CHECK(r.pmd_dt[1] == doctest::Approx(0.016));
    CHECK(r.rows[1].observable == "rms_width");
    CHECK(r.rows[2].epsilon == 0.4);
    for (const auto& row : r.rows) {
        CHECK(row.discrepancy == doctest::Approx(std::abs(row.pmd_mean - row.limit_mean)));
        CHECK(row.ks_critical_5pct == doctest::Approx(stats::ks_critical_value(8, 8, 0.05)));
    }

    cfg.epsilons = {0.4, 0.5};
    CHECK_THROWS_AS(convergence_study(cfg), ConfigError);
}

TEST_CASE("without noise the PMD and limit ensembles agree") {
    // b' = 0 and gamma = 0: both sides are deterministic Manakov flows; the
    // PMD side keeps the fluctuating part of F_nu, which averages out.
    ConvergenceStudyConfig cfg;
    cfg.epsilons = {0.2, 0.1};
    cfg.n_paths = 16;
    cfg.pmd_base = small_pmd(0.2);
    cfg.pmd_base.params = FiberParams(1.0, 0.0, 1.0, 0.2, 0.2);
    cfg.limit_base = small_limit();
    cfg.limit_base.initial = cfg.pmd_base.initial;
    cfg.limit_base.params = FiberParams(1.0, 0.0, 1.0, 0.0, 1.0);
    cfg.observables = observables::parse_set({"h1_sq"});
    const ConvergenceResult r = convergence_study(cfg);
    const auto& last = r.rows.back();
    CHECK(last.discrepancy <= std::max(3.0 * last.discrepancy_stderr, 1e-3 * last.limit_mean));
}
