#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "manakov/core.hpp"

namespace manakov {

/// One NDJSON diagnostics line.
struct DiagnosticRecord {
    std::int64_t step = 0;
    double t = 0.0;
    double l2 = 0.0;
    double h1 = 0.0;
    double energy = 0.0;
};

struct AbortInfo {
    NumericalAbort::Reason reason = NumericalAbort::Reason::NonFinite;
    std::int64_t step = 0;
    double t = 0.0;
    std::string message;
};

struct Trajectory {
    std::vector<DiagnosticRecord> records;
    std::vector<Snapshot> snapshots;  ///< only filled when requested
    SpinorField final_field;
    double final_time = 0.0;
    std::size_t n_steps = 0;
    double dt = 0.0;
    std::optional<AbortInfo> abort;

    bool aborted() const noexcept { return abort.has_value(); }
};

/// Number of steps covering t_final with a step no larger than dt.
std::size_t step_count(double t_final, double dt);

}  // namespace manakov
