#pragma once

// Configuration handling and subcommand dispatch for the `manakov` tool.
//
// A config is one flat object of keys (see default_config()).  Files are
// JSON, or TOML restricted to top-level `key = value` lines with numbers,
// booleans, strings and flat arrays.  --set key=value overrides win over
// the file.

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "manakov/driver.hpp"
#include "manakov/limit_solver.hpp"
#include "manakov/mc_harness.hpp"
#include "manakov/pmd_solver.hpp"

namespace manakov::cli {

using Json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericalAbort = 2, kIoError = 3 };

/// Every recognized key with its default (null means "derived").
Json default_config();

/// Flat TOML subset; throws ConfigError with the offending line number.
Json parse_toml(std::string_view text);

/// JSON when the file starts with '{', TOML otherwise.  IoError if unreadable.
Json load_config_file(const std::string& path);

/// Merge defaults <- file <- overrides, reject unknown keys, check value
/// types, fill derived entries (gamma, dt) and validate the typed configs
/// that `subcommand` needs.  Throws ConfigError naming the field.
Json resolve_config(const Json& file, const std::vector<std::string>& overrides,
                    std::string_view subcommand);

FiberParams fiber_params(const Json& cfg);
SpinorField initial_field(const Json& cfg);
pmd::PmdRunConfig pmd_config(const Json& cfg);
limit::LimitRunConfig limit_config(const Json& cfg);
driver::InvariantStatsConfig stats_config(const Json& cfg);
mc::ConvergenceStudyConfig study_config(const Json& cfg);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double x);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Entry point of the tool; returns the process exit code.
int dispatch(int argc, const char* const* argv);

}  // namespace manakov::cli
