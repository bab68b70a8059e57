#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "manakov/cli.hpp"
#include "manakov/stats.hpp"

namespace manakov::cli {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// JSON number token; non-finite values become null.
std::string num(double x) { return std::isfinite(x) ? format_double(x) : "null"; }

std::string quoted(const std::string& s) { return Json(s).dump(); }

Json json_num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string abort_json(const AbortInfo& a) {
    std::ostringstream o;
    o << "{\"reason\":" << quoted(to_string(a.reason)) << ",\"step\":" << a.step
      << ",\"t\":" << num(a.t) << ",\"message\":" << quoted(a.message) << "}";
    return o.str();
}

// Output directory plus the inventory that goes into manifest.json.
class RunDir {
public:
    RunDir(std::string subcommand, Json config, std::string out)
        : subcommand_(std::move(subcommand)), config_(std::move(config)), dir_(std::move(out)),
          started_(utc_now()) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) {
            throw IoError("cannot create output directory '" + dir_.string() + "'");
        }
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write(const std::string& name, const std::string& body) {
        std::ofstream out(path(name), std::ios::binary | std::ios::trunc);
        out << body;
        out.close();
        if (!out) throw IoError("cannot write '" + path(name) + "'");
        add(name);
    }

    void add(const std::string& name) { files_.push_back(name); }

    void set_abort(const AbortInfo& a) { abort_ = Json::parse(abort_json(a)); }

    void finish(const std::string& status, int exit_code) {
        Json files = Json::array();
        for (const auto& name : files_) {
            files.push_back({{"path", name},
                             {"bytes", fs::file_size(path(name))},
                             {"sha256", sha256_file(path(name))}});
        }
        const Json manifest = {
            {"subcommand", subcommand_},
            {"tool_version", kVersion},
            {"master_seed", config_.value("seed", Json(nullptr))},
            {"config", config_},
            {"started", started_},
            {"finished", utc_now()},
            {"status", status},
            {"exit_code", exit_code},
            {"abort", abort_},
            {"files", files},
        };
        std::ofstream out(path("manifest.json"), std::ios::binary | std::ios::trunc);
        out << manifest.dump(2) << "\n";
        out.close();
        if (!out) throw IoError("cannot write manifest in '" + dir_.string() + "'");
    }

private:
    std::string subcommand_;
    Json config_;
    fs::path dir_;
    std::string started_;
    std::vector<std::string> files_;
    Json abort_ = nullptr;
};

std::string diagnostics_ndjson(const Trajectory& traj) {
    std::ostringstream o;
    for (const auto& r : traj.records) {
        o << "{\"step\":" << r.step << ",\"t\":" << num(r.t) << ",\"l2\":" << num(r.l2)
          << ",\"h1\":" << num(r.h1) << ",\"energy\":" << num(r.energy) << "}\n";
    }
    if (traj.abort) o << "{\"abort\":" << abort_json(*traj.abort) << "}\n";
    return o.str();
}

std::string snapshot_name(std::int64_t step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%08lld.bin", static_cast<long long>(step));
    return buf;
}

int finish_trajectory(RunDir& run, const Trajectory& traj, const std::string& label) {
    run.write("diagnostics.ndjson", diagnostics_ndjson(traj));
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        const std::string name = snapshot_name(traj.records.at(i).step);
        write_snapshot(run.path(name), traj.snapshots[i].field, traj.snapshots[i].time);
        run.add(name);
    }
    const double t_last = traj.records.empty() ? 0.0 : traj.records.back().t;
    write_snapshot(run.path("final.bin"), traj.final_field, t_last);
    run.add("final.bin");

    if (traj.abort) {
        run.set_abort(*traj.abort);
        run.finish("aborted", kNumericalAbort);
        std::cerr << label << ": aborted at step " << traj.abort->step << ": "
                  << traj.abort->message << "\n";
        return kNumericalAbort;
    }
    run.finish("ok", kOk);
    const auto& last = traj.records.back();
    std::cout << label << ": " << traj.n_steps << " steps of dt=" << format_double(traj.dt)
              << ", t=" << format_double(last.t) << ", l2=" << format_double(last.l2)
              << ", h1=" << format_double(last.h1) << "\n";
    return kOk;
}

int run_simulate_pmd(const Json& cfg, const std::string& out) {
    const pmd::PmdRunConfig c = pmd_config(cfg);
    RunDir run("simulate-pmd", cfg, out);
    return finish_trajectory(run, pmd::run_pmd(c), "simulate-pmd");
}

int run_simulate_limit(const Json& cfg, const std::string& out) {
    const limit::LimitRunConfig c = limit_config(cfg);
    RunDir run("simulate-limit", cfg, out);
    return finish_trajectory(run, limit::run_limit(c), "simulate-limit");
}

Json vec3(const std::array<double, 3>& v) { return {json_num(v[0]), json_num(v[1]), json_num(v[2])}; }

Json mat3(const driver::Matrix3& m) { return {vec3(m[0]), vec3(m[1]), vec3(m[2])}; }

int run_driver_stats(const Json& cfg, const std::string& out) {
    const driver::InvariantStatsConfig c = stats_config(cfg);
    RunDir run("driver-stats", cfg, out);
    const driver::InvariantStats s = driver::estimate_invariant_stats(c);
    const Json report = {
        {"mean_g", vec3(s.mean_g)},
        {"mean_g_stderr", vec3(s.mean_g_stderr)},
        {"second_moments", mat3(s.cov_g)},
        {"second_moments_stderr", mat3(s.cov_g_stderr)},
        {"corr_integral", mat3(s.corr_integral)},
        {"corr_integral_stderr", mat3(s.corr_integral_stderr)},
        {"n_batches", s.n_batches},
        {"dt", s.dt},
        {"t_burn", s.t_burn},
        {"lag_cutoff", s.lag_cutoff},
        {"sample_interval", s.sample_interval},
        {"flags", s.flags},
    };
    run.write("driver_stats.json", report.dump(2) + "\n");
    run.finish("ok", kOk);
    std::cout << "driver-stats: " << s.n_batches << " batches, corr diagonal "
              << format_double(s.corr_integral[0][0]) << " " << format_double(s.corr_integral[1][1])
              << " " << format_double(s.corr_integral[2][2]) << "\n";
    return kOk;
}

std::string paths_ndjson(const mc::EnsembleResult& e, const std::string& ensemble, double eps) {
    std::ostringstream o;
    for (const auto& p : e.paths) {
        o << "{\"ensemble\":" << quoted(ensemble) << ",\"epsilon\":" << num(eps)
          << ",\"path\":" << p.path;
        if (p.abort) {
            o << ",\"abort\":" << abort_json(*p.abort) << "}\n";
            continue;
        }
        o << ",\"values\":{";
        for (std::size_t k = 0; k < e.observables.size(); ++k) {
            if (k > 0) o << ",";
            o << quoted(std::string(observables::name(e.observables[k]))) << ":"
              << num(p.values[k]);
        }
        o << "}}\n";
    }
    return o.str();
}

std::string cdf_csv_rows(const mc::EnsembleResult& e, const std::string& ensemble, double eps) {
    std::ostringstream o;
    for (std::size_t k = 0; k < e.observables.size(); ++k) {
        const std::vector<double> xs = e.samples(k);
        const std::string obs(observables::name(e.observables[k]));
        for (const auto& [x, f] : stats::empirical_cdf(xs)) {
            o << ensemble << "," << format_double(eps) << "," << obs << "," << format_double(x)
              << "," << format_double(f) << "\n";
        }
    }
    return o.str();
}

int run_converge(const Json& cfg, const std::string& out) {
    const mc::ConvergenceStudyConfig c = study_config(cfg);
    RunDir run("converge", cfg, out);
    std::cerr << "converge: " << c.n_paths << " paths, " << c.epsilons.size()
              << " epsilon values\n";
    mc::ConvergenceResult r;
    try {
        r = mc::convergence_study(c);
    } catch (const mc::StudyError&) {
        run.finish("aborted", kNumericalAbort);
        throw;
    }

    std::ostringstream csv;
    csv << "epsilon,observable,pmd_mean,pmd_stderr,limit_mean,limit_stderr,discrepancy,ks_stat,"
           "discrepancy_stderr,ks_critical_5pct\n";
    for (const auto& row : r.rows) {
        csv << format_double(row.epsilon) << "," << row.observable << ","
            << format_double(row.pmd_mean) << "," << format_double(row.pmd_stderr) << ","
            << format_double(row.limit_mean) << "," << format_double(row.limit_stderr) << ","
            << format_double(row.discrepancy) << "," << format_double(row.ks_stat) << ","
            << format_double(row.discrepancy_stderr) << ","
            << format_double(row.ks_critical_5pct) << "\n";
    }
    run.write("convergence.csv", csv.str());

    run.write("paths_limit.ndjson", paths_ndjson(r.limit, "limit", 0.0));
    std::string cdf = "ensemble,epsilon,observable,value,cdf\n" + cdf_csv_rows(r.limit, "limit", 0.0);
    for (std::size_t i = 0; i < r.pmd.size(); ++i) {
        const double eps = c.epsilons[i];
        run.write("paths_eps_" + format_double(eps) + ".ndjson", paths_ndjson(r.pmd[i], "pmd", eps));
        cdf += cdf_csv_rows(r.pmd[i], "pmd", eps);
    }
    run.write("cdf.csv", cdf);

    // Per observable: discrepancies non-increasing within 2 stderr as eps
    // decreases, and the KS verdict at the smallest eps.
    Json checks = Json::object();
    const std::size_t n_obs = c.observables.size();
    for (std::size_t k = 0; k < n_obs; ++k) {
        std::vector<double> d, se;
        for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
            d.push_back(r.rows[i * n_obs + k].discrepancy);
            se.push_back(r.rows[i * n_obs + k].discrepancy_stderr);
        }
        const auto& last = r.rows[(c.epsilons.size() - 1) * n_obs + k];
        checks[last.observable] = {
            {"non_increasing_within_2se", stats::non_increasing_within(d, se, 2.0)},
            {"ks_below_critical_at_smallest_eps", last.ks_stat < last.ks_critical_5pct},
        };
    }
    Json aborts = {{"limit", r.limit.abort_count}};
    for (std::size_t i = 0; i < r.pmd.size(); ++i) {
        aborts[format_double(c.epsilons[i])] = r.pmd[i].abort_count;
    }
    const Json summary = {
        {"pmd_dt", r.pmd_dt},
        {"flags", r.flags},
        {"aborted_paths", aborts},
        {"checks", checks},
    };
    run.write("summary.json", summary.dump(2) + "\n");
    run.finish("ok", kOk);
    std::cout << csv.str();
    return kOk;
}

int run_inspect(const std::string& file, const std::string& out) {
    const Snapshot s = read_snapshot(file);
    if (!out.empty()) write_snapshot(out, s.field, s.time);
    std::ostringstream o;
    o << "{\"components\":2,\"domain_length\":" << num(s.field.grid().length())
      << ",\"n_points\":" << s.field.grid().size() << ",\"time\":" << num(s.time)
      << ",\"l2\":" << num(l2_norm(s.field)) << ",\"h1\":" << num(h1_norm(s.field)) << "}\n";
    std::cout << o.str();
    return kOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Simulation of the Manakov-PMD system and its stochastic limit", "manakov"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", kVersion);

    struct RunOptions {
        std::string config;
        std::vector<std::string> overrides;
        std::string out = "run";
        std::optional<std::uint64_t> seed;
        std::optional<unsigned> threads;
    };
    RunOptions opts;
    std::string snapshot_in, snapshot_out;

    const std::pair<const char*, const char*> run_commands[] = {
        {"simulate-pmd", "Integrate the PMD system for one noise path"},
        {"simulate-limit", "Integrate the stochastic limit equation for one noise path"},
        {"driver-stats", "Estimate invariant-measure statistics of the driver"},
        {"converge", "Compare PMD and limit ensembles as epsilon decreases"},
    };
    for (const auto& [name, help] : run_commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", opts.config, "TOML or JSON config file");
        sub->add_option("-s,--set", opts.overrides, "Override config keys (key=value ...)");
        sub->add_option("-o,--out", opts.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", opts.seed, "Master seed (same as --set seed=N)");
        sub->add_option("--threads", opts.threads, "Worker threads (same as --set threads=N)");
    }
    CLI::App* inspect = app.add_subcommand("inspect-snapshot", "Print a snapshot header");
    inspect->add_option("file", snapshot_in, "Snapshot file")->required();
    inspect->add_option("-o,--out", snapshot_out, "Rewrite the snapshot to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kConfigError;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        if (sub == "inspect-snapshot") return run_inspect(snapshot_in, snapshot_out);

        Json file = nullptr;
        if (!opts.config.empty()) file = load_config_file(opts.config);
        std::vector<std::string> overrides = opts.overrides;
        if (opts.seed) overrides.push_back("seed=" + std::to_string(*opts.seed));
        if (opts.threads) overrides.push_back("threads=" + std::to_string(*opts.threads));
        const Json cfg = resolve_config(file, overrides, sub);

        if (sub == "simulate-pmd") return run_simulate_pmd(cfg, opts.out);
        if (sub == "simulate-limit") return run_simulate_limit(cfg, opts.out);
        if (sub == "driver-stats") return run_driver_stats(cfg, opts.out);
        return run_converge(cfg, opts.out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const mc::StudyError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return kNumericalAbort;
    } catch (const NumericalAbort& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return kNumericalAbort;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIoError;
    }
}

}  // namespace manakov::cli
