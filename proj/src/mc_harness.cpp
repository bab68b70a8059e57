#include "manakov/mc_harness.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "manakov/parallel.hpp"
#include "manakov/stats.hpp"

namespace manakov::mc {

std::vector<double> EnsembleResult::samples(std::size_t index) const {
    std::vector<double> out;
    out.reserve(paths.size());
    for (const auto& p : paths) {
        if (!p.abort) out.push_back(p.values.at(index));
    }
    return out;
}

namespace {

const FiberParams& params_of(const RunConfig& c) {
    return std::visit([](const auto& cfg) -> const FiberParams& { return cfg.params; }, c);
}

Trajectory run_path(const RunConfig& c, std::uint64_t seed, std::uint32_t path) {
    return std::visit(
        [&](auto cfg) {
            cfg.seed = seed;
            cfg.path_index = path;
            cfg.keep_snapshots = false;
            if constexpr (std::is_same_v<decltype(cfg), pmd::PmdRunConfig>) {
                return pmd::run_pmd(cfg);
            } else {
                return limit::run_limit(cfg);
            }
        },
        c);
}

}  // namespace

EnsembleResult run_ensemble(const RunConfig& config, std::size_t n_paths,
                            const observables::ObservableSet& set, std::uint64_t master_seed,
                            unsigned threads) {
    std::visit([](const auto& cfg) { validate(cfg); }, config);
    if (n_paths == 0) throw ConfigError("n_paths: must be >= 1");
    if (set.empty()) throw ConfigError("observables: at least one is required");

    EnsembleResult result;
    result.observables = set;
    result.n_paths = n_paths;
    result.paths.resize(n_paths);
    const FiberParams& params = params_of(config);

    parallel_for(n_paths, worker_count(threads), [&](std::size_t i) {
        const auto path = static_cast<std::uint32_t>(i);
        Trajectory traj = run_path(config, master_seed, path);
        PathRecord& rec = result.paths[i];
        rec.path = path;
        if (traj.aborted()) {
            rec.abort = traj.abort;
        } else {
            rec.values = observables::evaluate_values(set, traj.final_field, params);
        }
    });

    for (const auto& p : result.paths) {
        if (p.abort) ++result.abort_count;
    }
    if (result.abort_count == n_paths) {
        throw StudyError("all " + std::to_string(n_paths) + " paths aborted");
    }
    for (std::size_t k = 0; k < set.size(); ++k) {
        const std::vector<double> xs = result.samples(k);
        const stats::SampleSummary s = stats::summarize(xs);
        result.summary.push_back(
            {std::string(observables::name(set[k])), s.mean, s.variance, s.std_error, s.n});
    }
    return result;
}

void validate(const ConvergenceStudyConfig& c) {
    if (c.epsilons.empty()) throw ConfigError("epsilons: at least one value is required");
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
        const double e = c.epsilons[i];
        if (!(e > 0.0) || e > 1.0) throw ConfigError("epsilons: values must lie in (0, 1]");
        if (i > 0 && !(e < c.epsilons[i - 1])) {
            throw ConfigError("epsilons: values must be strictly decreasing");
        }
    }
    if (c.n_paths < 2) throw ConfigError("n_paths: must be >= 2");
    if (c.observables.empty()) throw ConfigError("observables: at least one is required");
    validate(c.limit_base);
    if (!(c.pmd_base.dt > 0.0)) throw ConfigError("dt: must be positive");
}

ConvergenceResult convergence_study(const ConvergenceStudyConfig& config) {
    validate(config);
    ConvergenceResult out;

    limit::LimitRunConfig lim = config.limit_base;
    lim.ensemble = 0;
    out.limit = run_ensemble(lim, config.n_paths, config.observables, config.master_seed,
                             config.threads);
    if (out.limit.abort_count > 0) out.flags.push_back("aborted_paths");

    for (std::size_t i = 0; i < config.epsilons.size(); ++i) {
        const double eps = config.epsilons[i];
        pmd::PmdRunConfig p = config.pmd_base;
        p.params = p.params.with_epsilon(eps);
        p.dt = std::min(config.pmd_base.dt, p.step_factor * eps * eps);
        p.ensemble = static_cast<std::uint32_t>(i + 1);
        out.pmd_dt.push_back(p.dt);
        out.pmd.push_back(run_ensemble(p, config.n_paths, config.observables,
                                       config.master_seed, config.threads));
        const EnsembleResult& e = out.pmd.back();
        if (e.abort_count > 0 &&
            std::find(out.flags.begin(), out.flags.end(), "aborted_paths") == out.flags.end()) {
            out.flags.push_back("aborted_paths");
        }
        for (std::size_t k = 0; k < config.observables.size(); ++k) {
            const auto& ps = e.summary[k];
            const auto& ls = out.limit.summary[k];
            const std::vector<double> a = e.samples(k);
            const std::vector<double> b = out.limit.samples(k);
            ConvergenceRow row;
            row.epsilon = eps;
            row.observable = ps.name;
            row.pmd_mean = ps.mean;
            row.pmd_stderr = ps.std_error;
            row.limit_mean = ls.mean;
            row.limit_stderr = ls.std_error;
            row.discrepancy = std::abs(ps.mean - ls.mean);
            row.discrepancy_stderr = std::hypot(ps.std_error, ls.std_error);
            row.ks_stat = stats::ks_two_sample(a, b);
            row.ks_critical_5pct = stats::ks_critical_value(a.size(), b.size(), 0.05);
            out.rows.push_back(row);
        }
    }
    return out;
}

}  // namespace manakov::mc
