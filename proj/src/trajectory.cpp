#include "manakov/trajectory.hpp"

#include <cmath>

namespace manakov {

std::size_t step_count(double t_final, double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt: must be positive");
    if (t_final <= 0.0) return 0;
    // The tolerance keeps t_final = k * dt from rounding up to k + 1 steps.
    return static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
}

}  // namespace manakov
