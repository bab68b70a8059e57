#pragma once

// Monte-Carlo ensembles of PMD and limit trajectories, and the weak
// convergence study comparing their observable laws as eps decreases.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "manakov/limit_solver.hpp"
#include "manakov/observables.hpp"
#include "manakov/pmd_solver.hpp"

namespace manakov::mc {

/// Every path of the ensemble aborted.
class StudyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using RunConfig = std::variant<pmd::PmdRunConfig, limit::LimitRunConfig>;

struct ObservableSummary {
    std::string name;
    double mean = 0.0;
    double variance = 0.0;
    double std_error = 0.0;
    std::size_t n_effective = 0;
};

struct PathRecord {
    std::uint32_t path = 0;
    std::optional<AbortInfo> abort;
    std::vector<double> values;  ///< observables at t_final; empty if aborted
};

struct EnsembleResult {
    observables::ObservableSet observables;
    std::vector<ObservableSummary> summary;
    std::vector<PathRecord> paths;
    std::size_t n_paths = 0;
    std::size_t abort_count = 0;

    /// Final values of observable `index` over the paths that completed.
    std::vector<double> samples(std::size_t index) const;
};

/// Path i runs with path_index i of the config's (seed, ensemble) stream,
/// so the result does not depend on `threads`.
EnsembleResult run_ensemble(const RunConfig& config, std::size_t n_paths,
                            const observables::ObservableSet& set, std::uint64_t master_seed,
                            unsigned threads = 0);

struct ConvergenceStudyConfig {
    std::vector<double> epsilons{0.4, 0.3, 0.2, 0.1};
    std::size_t n_paths = 200;
    pmd::PmdRunConfig pmd_base;      ///< grid, initial data, t_final, params
    limit::LimitRunConfig limit_base;
    observables::ObservableSet observables;
    std::uint64_t master_seed = 1;
    unsigned threads = 0;
};

void validate(const ConvergenceStudyConfig& config);

struct ConvergenceRow {
    double epsilon = 0.0;
    std::string observable;
    double pmd_mean = 0.0;
    double pmd_stderr = 0.0;
    double limit_mean = 0.0;
    double limit_stderr = 0.0;
    double discrepancy = 0.0;         ///< |pmd_mean - limit_mean|
    double discrepancy_stderr = 0.0;  ///< sqrt(pmd_stderr^2 + limit_stderr^2)
    double ks_stat = 0.0;
    double ks_critical_5pct = 0.0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;  ///< eps-major, observable-minor
    EnsembleResult limit;
    std::vector<EnsembleResult> pmd;   ///< one per eps
    std::vector<double> pmd_dt;        ///< step used for each eps
    std::vector<std::string> flags;    ///< e.g. "aborted_paths"
};

/// One limit ensemble (ensemble id 0) shared by every row, one PMD
/// ensemble per eps (ensemble id 1 + index), dt_eps = min(pmd_base.dt,
/// step_factor * eps^2).
ConvergenceResult convergence_study(const ConvergenceStudyConfig& config);

}  // namespace manakov::mc
