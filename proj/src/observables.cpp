#include "manakov/observables.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "manakov/limit_solver.hpp"

namespace manakov::observables {

namespace {

constexpr std::array<std::pair<Observable, std::string_view>, 6> kNames{{
    {Observable::L2Squared, "l2_sq"},
    {Observable::H1Squared, "h1_sq"},
    {Observable::L4Quartic, "l4_quartic"},
    {Observable::Energy, "energy_H"},
    {Observable::RmsWidth, "rms_width"},
    {Observable::StokesImbalance, "stokes_imbalance"},
}};

double rms_width(const SpinorField& f) {
    const SpectralGrid& g = f.grid();
    double mass = 0.0;
    double first = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double rho = std::norm(f[j][0]) + std::norm(f[j][1]);
        mass += rho;
        first += rho * g.position(j);
    }
    if (mass == 0.0) return 0.0;
    const double center = first / mass;
    double second = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double rho = std::norm(f[j][0]) + std::norm(f[j][1]);
        const double d = g.position(j) - center;
        second += rho * d * d;
    }
    return std::sqrt(second / mass);
}

}  // namespace

std::string_view name(Observable o) noexcept {
    for (const auto& [key, text] : kNames) {
        if (key == o) return text;
    }
    return "unknown";
}

std::optional<Observable> from_name(std::string_view key) noexcept {
    for (const auto& [o, text] : kNames) {
        if (text == key) return o;
    }
    return std::nullopt;
}

ObservableSet all_observables() {
    ObservableSet set;
    for (const auto& entry : kNames) set.push_back(entry.first);
    return set;
}

ObservableSet parse_set(const std::vector<std::string>& names) {
    ObservableSet set;
    for (const auto& n : names) {
        const auto o = from_name(n);
        if (!o) throw ConfigError("observables: unknown observable '" + n + "'");
        set.push_back(*o);
    }
    return set;
}

double evaluate_one(Observable o, const SpinorField& f, const FiberParams& params) {
    switch (o) {
    case Observable::L2Squared: {
        const double n = l2_norm(f);
        return n * n;
    }
    case Observable::H1Squared: {
        const double n = h1_norm(f);
        return n * n;
    }
    case Observable::L4Quartic: {
        double sum = 0.0;
        for (const auto& v : f.values()) {
            const double m = std::norm(v[0]) + std::norm(v[1]);
            sum += m * m;
        }
        return sum * f.grid().dx();
    }
    case Observable::Energy:
        return limit::energy(f, params);
    case Observable::RmsWidth:
        return rms_width(f);
    case Observable::StokesImbalance: {
        double sum = 0.0;
        for (const auto& v : f.values()) sum += std::norm(v[0]) - std::norm(v[1]);
        return sum * f.grid().dx();
    }
    }
    return 0.0;
}

std::vector<double> evaluate_values(const ObservableSet& set, const SpinorField& f,
                                    const FiberParams& params) {
    std::vector<double> out;
    out.reserve(set.size());
    for (const auto o : set) out.push_back(evaluate_one(o, f, params));
    return out;
}

std::map<std::string, double> evaluate(const ObservableSet& set, const SpinorField& f,
                                       const FiberParams& params) {
    std::map<std::string, double> out;
    for (const auto o : set) out.emplace(std::string(name(o)), evaluate_one(o, f, params));
    return out;
}

}  // namespace manakov::observables
