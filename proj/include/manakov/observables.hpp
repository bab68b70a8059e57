#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "manakov/core.hpp"

namespace manakov::observables {

enum class Observable {
    L2Squared,        ///< "l2_sq"
    H1Squared,        ///< "h1_sq"
    L4Quartic,        ///< "l4_quartic"      int |u|^4
    Energy,           ///< "energy_H"
    RmsWidth,         ///< "rms_width"       about the centroid
    StokesImbalance,  ///< "stokes_imbalance" int (|X1|^2 - |X2|^2)
};

/// Stable key used in NDJSON and CSV output.
std::string_view name(Observable o) noexcept;
std::optional<Observable> from_name(std::string_view key) noexcept;

using ObservableSet = std::vector<Observable>;

ObservableSet all_observables();

/// Parses names; throws ConfigError on an unknown key.
ObservableSet parse_set(const std::vector<std::string>& names);

double evaluate_one(Observable o, const SpinorField& f, const FiberParams& params);

/// Values in the order of `set`.
std::vector<double> evaluate_values(const ObservableSet& set, const SpinorField& f,
                                    const FiberParams& params);

std::map<std::string, double> evaluate(const ObservableSet& set, const SpinorField& f,
                                       const FiberParams& params);

}  // namespace manakov::observables
