#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "manakov/cli.hpp"
#include "manakov/stats.hpp"

namespace py = pybind11;
using namespace manakov;
using cli::Json;

namespace {

using ComplexArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

ComplexArray to_numpy(const SpinorField& f) {
    ComplexArray out({static_cast<py::ssize_t>(f.size()), py::ssize_t{2}});
    auto a = out.mutable_unchecked<2>();
    for (std::size_t j = 0; j < f.size(); ++j) {
        a(j, 0) = f[j][0];
        a(j, 1) = f[j][1];
    }
    return out;
}

SpinorField from_numpy(const ComplexArray& arr, double length) {
    if (arr.ndim() != 2 || arr.shape(1) != 2) {
        throw ConfigError("field: expected an array of shape (n_points, 2)");
    }
    SpinorField f(SpectralGrid(static_cast<std::size_t>(arr.shape(0)), length));
    auto a = arr.unchecked<2>();
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = {a(j, 0), a(j, 1)};
    return f;
}

Json parse(const std::string& config_json) {
    Json j = config_json.empty() ? Json(nullptr) : Json::parse(config_json);
    return j;
}

py::dict abort_dict(const AbortInfo& a) {
    py::dict d;
    d["reason"] = to_string(a.reason);
    d["step"] = a.step;
    d["t"] = a.t;
    d["message"] = a.message;
    return d;
}

py::dict trajectory_dict(const Trajectory& traj, const Json& cfg) {
    py::list records;
    for (const auto& r : traj.records) {
        py::dict d;
        d["step"] = r.step;
        d["t"] = r.t;
        d["l2"] = r.l2;
        d["h1"] = r.h1;
        d["energy"] = r.energy;
        records.append(d);
    }
    py::dict out;
    out["records"] = records;
    out["final_field"] = to_numpy(traj.final_field);
    out["final_time"] = traj.final_time;
    out["n_steps"] = traj.n_steps;
    out["dt"] = traj.dt;
    out["abort"] = traj.abort ? py::object(abort_dict(*traj.abort)) : py::object(py::none());
    out["config"] = cfg.dump();
    return out;
}

template <class Config>
void replace_initial(Config& c, const std::optional<ComplexArray>& initial, const Json& cfg) {
    if (initial) c.initial = from_numpy(*initial, cfg.at("domain_length").get<double>());
}

py::list matrix(const driver::Matrix3& m) {
    py::list rows;
    for (const auto& r : m) rows.append(py::make_tuple(r[0], r[1], r[2]));
    return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Split-step solvers for the Manakov-PMD system and its stochastic limit.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<mc::StudyError>(m, "StudyError", PyExc_RuntimeError);

    m.attr("__version__") = cli::kVersion;

    m.def(
        "resolve_config",
        [](const std::string& config_json, const std::string& subcommand) {
            return cli::resolve_config(parse(config_json), {}, subcommand).dump();
        },
        py::arg("config_json"), py::arg("subcommand"),
        "Resolved config (JSON text) with defaults and derived values filled in.");

    m.def("default_config", [] { return cli::default_config().dump(); });

    m.def(
        "wavenumbers",
        [](std::size_t n, double length) {
            const auto xi = SpectralGrid(n, length).wavenumbers();
            return std::vector<double>(xi.begin(), xi.end());
        },
        py::arg("n_points"), py::arg("domain_length"));

    m.def(
        "initial_field",
        [](const std::string& config_json) {
            const Json cfg = cli::resolve_config(parse(config_json), {}, "simulate-pmd");
            return to_numpy(cli::initial_field(cfg));
        },
        py::arg("config_json"));

    m.def(
        "l2_norm", [](const ComplexArray& f, double length) { return l2_norm(from_numpy(f, length)); },
        py::arg("field"), py::arg("domain_length"));
    m.def(
        "h1_norm", [](const ComplexArray& f, double length) { return h1_norm(from_numpy(f, length)); },
        py::arg("field"), py::arg("domain_length"));

    m.def(
        "observables",
        [](const ComplexArray& f, double length, const std::string& config_json) {
            const Json cfg = cli::resolve_config(parse(config_json), {}, "simulate-limit");
            return observables::evaluate(observables::all_observables(), from_numpy(f, length),
                                         cli::fiber_params(cfg));
        },
        py::arg("field"), py::arg("domain_length"), py::arg("config_json") = "");

    m.def(
        "limit_energy",
        [](const ComplexArray& f, double length, double d0) {
            return limit::energy(from_numpy(f, length), FiberParams(d0, 0.0, 1.0, 0.0, 1.0));
        },
        py::arg("field"), py::arg("domain_length"), py::arg("d0") = 1.0);

    m.def(
        "simulate_pmd",
        [](const std::string& config_json, std::optional<ComplexArray> initial) {
            const Json cfg = cli::resolve_config(parse(config_json), {}, "simulate-pmd");
            pmd::PmdRunConfig c = cli::pmd_config(cfg);
            replace_initial(c, initial, cfg);
            const Trajectory t = [&] {
                py::gil_scoped_release release;
                return pmd::run_pmd(c);
            }();
            return trajectory_dict(t, cfg);
        },
        py::arg("config_json"), py::arg("initial") = py::none());

    m.def(
        "psi_frame_oracle",
        [](const std::string& config_json, std::optional<ComplexArray> initial) {
            const Json cfg = cli::resolve_config(parse(config_json), {}, "simulate-pmd");
            pmd::PmdRunConfig c = cli::pmd_config(cfg);
            replace_initial(c, initial, cfg);
            const Trajectory t = [&] {
                py::gil_scoped_release release;
                return pmd::psi_frame_oracle(c);
            }();
            return trajectory_dict(t, cfg);
        },
        py::arg("config_json"), py::arg("initial") = py::none());

    m.def(
        "simulate_limit",
        [](const std::string& config_json, std::optional<ComplexArray> initial) {
            const Json cfg = cli::resolve_config(parse(config_json), {}, "simulate-limit");
            limit::LimitRunConfig c = cli::limit_config(cfg);
            replace_initial(c, initial, cfg);
            const Trajectory t = [&] {
                py::gil_scoped_release release;
                return limit::run_limit(c);
            }();
            return trajectory_dict(t, cfg);
        },
        py::arg("config_json"), py::arg("initial") = py::none());

    m.def(
        "driver_stats",
        [](const std::string& config_json) {
            const Json cfg = cli::resolve_config(parse(config_json), {}, "driver-stats");
            const driver::InvariantStatsConfig c = cli::stats_config(cfg);
            driver::InvariantStats s;
            {
                py::gil_scoped_release release;
                s = driver::estimate_invariant_stats(c);
            }
            py::dict d;
            d["mean_g"] = s.mean_g;
            d["mean_g_stderr"] = s.mean_g_stderr;
            d["second_moments"] = matrix(s.cov_g);
            d["second_moments_stderr"] = matrix(s.cov_g_stderr);
            d["corr_integral"] = matrix(s.corr_integral);
            d["corr_integral_stderr"] = matrix(s.corr_integral_stderr);
            d["n_batches"] = s.n_batches;
            d["flags"] = s.flags;
            return d;
        },
        py::arg("config_json"));

    m.def(
        "convergence_study",
        [](const std::string& config_json) {
            const Json cfg = cli::resolve_config(parse(config_json), {}, "converge");
            const mc::ConvergenceStudyConfig c = cli::study_config(cfg);
            mc::ConvergenceResult r;
            {
                py::gil_scoped_release release;
                r = mc::convergence_study(c);
            }
            py::list rows;
            for (const auto& row : r.rows) {
                py::dict d;
                d["epsilon"] = row.epsilon;
                d["observable"] = row.observable;
                d["pmd_mean"] = row.pmd_mean;
                d["pmd_stderr"] = row.pmd_stderr;
                d["limit_mean"] = row.limit_mean;
                d["limit_stderr"] = row.limit_stderr;
                d["discrepancy"] = row.discrepancy;
                d["discrepancy_stderr"] = row.discrepancy_stderr;
                d["ks_stat"] = row.ks_stat;
                d["ks_critical_5pct"] = row.ks_critical_5pct;
                rows.append(d);
            }
            py::dict out;
            out["rows"] = rows;
            out["pmd_dt"] = r.pmd_dt;
            out["flags"] = r.flags;
            return out;
        },
        py::arg("config_json"));

    m.def(
        "ks_two_sample",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return stats::ks_two_sample(a, b);
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "read_snapshot",
        [](const std::string& path) {
            const Snapshot s = read_snapshot(path);
            return py::make_tuple(to_numpy(s.field), s.field.grid().length(), s.time);
        },
        py::arg("path"), "Returns (field, domain_length, time).");

    m.def(
        "write_snapshot",
        [](const std::string& path, const ComplexArray& f, double length, double time) {
            write_snapshot(path, from_numpy(f, length), time);
        },
        py::arg("path"), py::arg("field"), py::arg("domain_length"), py::arg("time") = 0.0);
}
