#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "manakov/cli.hpp"

namespace manakov::cli {

namespace {

const char* const kSubcommands[] = {"simulate-pmd", "simulate-limit", "driver-stats", "converge",
                                    "inspect-snapshot"};

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

// Drops a trailing '#' comment that is not inside a string.
std::string strip_comment(std::string_view line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote != 0) {
            if (c == '\\' && quote == '"') {
                ++i;
            } else if (c == quote) {
                quote = 0;
            }
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return std::string(line.substr(0, i));
        }
    }
    return std::string(line);
}

// TOML literal strings ('...') become JSON strings; TOML arrays may carry a
// trailing comma.  Everything else in the subset is already valid JSON.
std::string toml_value_to_json(std::string_view v) {
    std::string out;
    char quote = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const char c = v[i];
        if (quote == '\'') {
            if (c == '\'') {
                out += '"';
                quote = 0;
            } else if (c == '"' || c == '\\') {
                out += '\\';
                out += c;
            } else {
                out += c;
            }
        } else if (quote == '"') {
            out += c;
            if (c == '\\' && i + 1 < v.size()) {
                out += v[++i];
            } else if (c == '"') {
                quote = 0;
            }
        } else if (c == '\'' || c == '"') {
            quote = c;
            out += '"';
        } else if (c == ']') {
            std::size_t k = out.size();
            while (k > 0 && std::isspace(static_cast<unsigned char>(out[k - 1]))) --k;
            if (k > 0 && out[k - 1] == ',') out.erase(k - 1, 1);
            out += c;
        } else if (c == '_' && i > 0 && std::isdigit(static_cast<unsigned char>(v[i - 1]))) {
            // 1_000 digit separators
        } else {
            out += c;
        }
    }
    return out;
}

bool valid_bare_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    }
    return true;
}

// An override value: JSON literal when it parses, a comma list for the
// array-valued keys, a bare string otherwise.
Json parse_override_value(const std::string& key, const std::string& text, const Json& defaults) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error&) {
    }
    const auto it = defaults.find(key);
    if (it != defaults.end() && it->is_array()) {
        Json arr = Json::array();
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            try {
                arr.push_back(Json::parse(t));
            } catch (const Json::parse_error&) {
                arr.push_back(t);
            }
        }
        return arr;
    }
    return text;
}

double number(const Json& cfg, const char* key) {
    const Json& v = cfg.at(key);
    if (!v.is_number()) throw ConfigError(std::string(key) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(std::string(key) + ": must be finite");
    return x;
}

std::uint64_t count(const Json& cfg, const char* key) {
    const Json& v = cfg.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0) throw ConfigError(std::string(key) + ": must be non-negative");
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (x >= 0.0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
    }
    throw ConfigError(std::string(key) + ": expected a non-negative integer");
}

std::string text(const Json& cfg, const char* key) {
    const Json& v = cfg.at(key);
    if (!v.is_string()) throw ConfigError(std::string(key) + ": expected a string");
    return v.get<std::string>();
}

bool flag(const Json& cfg, const char* key) {
    const Json& v = cfg.at(key);
    if (!v.is_boolean()) throw ConfigError(std::string(key) + ": expected true or false");
    return v.get<bool>();
}

// Derived-value key: null selects the default.
double number_or(const Json& cfg, const char* key, double fallback) {
    return cfg.at(key).is_null() ? fallback : number(cfg, key);
}

// Type checks shared by every subcommand, so a typo'd value fails early.
void check_types(const Json& cfg) {
    const Json defaults = default_config();
    for (const auto& [key, def] : defaults.items()) {
        const Json& v = cfg.at(key);
        if (v.is_null()) {
            if (!def.is_null()) throw ConfigError(key + ": must not be null");
            continue;
        }
        if (def.is_number() || def.is_null()) {
            if (!v.is_number()) throw ConfigError(key + ": expected a number");
        } else if (def.is_string()) {
            if (!v.is_string()) throw ConfigError(key + ": expected a string");
        } else if (def.is_boolean()) {
            if (!v.is_boolean()) throw ConfigError(key + ": expected true or false");
        } else if (def.is_array()) {
            if (!v.is_array()) throw ConfigError(key + ": expected an array");
            for (const Json& e : v) {
                if (def.front().is_number() && !e.is_number()) {
                    throw ConfigError(key + ": expected an array of numbers");
                }
                if (def.front().is_string() && !e.is_string()) {
                    throw ConfigError(key + ": expected an array of strings");
                }
            }
        }
    }
}

}  // namespace

Json default_config() {
    return Json{
        // fiber
        {"d0", 1.0},
        {"b_prime", 1.0},
        {"gamma_c", 1.0},
        {"gamma_s", 0.2},
        {"epsilon", 0.3},
        // grid and initial data
        {"n_points", 256},
        {"domain_length", 40.0},
        {"profile", "gaussian"},
        {"amplitude", 1.0},
        {"width", 1.0},
        {"center", 0.0},
        {"chirp", 0.0},
        {"theta", 0.0},
        {"phase", 0.0},
        {"initial_snapshot", ""},
        // integration
        {"t_final", 0.5},
        {"dt", nullptr},
        {"step_factor", 0.1},
        {"frame", "x"},
        {"nonlinearity", "averaged"},
        {"scheme", "stratonovich"},
        {"nonlinear", true},
        {"record_every", 10},
        {"snapshots", false},
        {"h1_ceiling", 1e6},
        {"seed", 1},
        {"path_index", 0},
        {"threads", 0},
        // convergence study
        {"epsilons", {0.4, 0.3, 0.2, 0.1}},
        {"n_paths", 200},
        {"limit_dt", 1e-3},
        {"observables", {"h1_sq", "l4_quartic", "rms_width"}},
        // driver statistics
        {"stats_paths", 8},
        {"t_burn", nullptr},
        {"t_sample", 2000.0},
        {"driver_dt", nullptr},
        {"lag_cutoff", nullptr},
        {"sample_interval", nullptr},
        {"batches_per_path", 10},
        {"stats_tolerance", 0.0},
    };
}

Json parse_toml(std::string_view input) {
    Json out = Json::object();
    std::stringstream ss{std::string(input)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            throw ConfigError(where + "tables are not supported; use top-level keys");
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.size() >= 2 && (key.front() == '"' || key.front() == '\'') &&
            key.back() == key.front()) {
            key = key.substr(1, key.size() - 2);
        }
        if (!valid_bare_key(key)) throw ConfigError(where + "invalid key '" + key + "'");
        if (out.contains(key)) throw ConfigError(where + "duplicate key '" + key + "'");
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (value.empty()) throw ConfigError(where + "missing value for '" + key + "'");
        Json v;
        try {
            v = Json::parse(toml_value_to_json(value));
        } catch (const Json::parse_error&) {
            const std::string lower = [&] {
                std::string s = value;
                for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                return s;
            }();
            if (lower == "inf" || lower == "+inf" || lower == "nan") {
                throw ConfigError(where + key + ": must be finite");
            }
            throw ConfigError(where + "cannot parse value of '" + key + "'");
        }
        if (v.is_object()) throw ConfigError(where + "inline tables are not supported");
        out[key] = std::move(v);
    }
    return out;
}

Json load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string body = buf.str();
    const std::string head = trim(body);
    if (!head.empty() && head.front() == '{') {
        try {
            Json j = Json::parse(body);
            if (!j.is_object()) throw ConfigError("config: top level must be an object");
            return j;
        } catch (const Json::parse_error& e) {
            throw ConfigError("config: malformed JSON in '" + path + "': " + e.what());
        }
    }
    return parse_toml(body);
}

Json resolve_config(const Json& file, const std::vector<std::string>& overrides,
                    std::string_view subcommand) {
    bool known = false;
    for (const char* s : kSubcommands) known = known || subcommand == s;
    if (!known) throw ConfigError("unknown subcommand '" + std::string(subcommand) + "'");

    const Json defaults = default_config();
    Json cfg = defaults;
    if (!file.is_null() && !file.is_object()) throw ConfigError("config: expected an object");
    if (file.is_object()) {
        for (const auto& [key, value] : file.items()) {
            // Derived; recomputed below so a resolved config can be fed back in.
            if (key == "gamma") continue;
            if (!defaults.contains(key)) throw ConfigError(key + ": unknown config key");
            cfg[key] = value;
        }
    }
    for (const std::string& ov : overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("override '" + ov + "': expected key=value");
        }
        const std::string key = trim(std::string_view(ov).substr(0, eq));
        if (!defaults.contains(key)) throw ConfigError(key + ": unknown config key");
        cfg[key] = parse_override_value(key, trim(std::string_view(ov).substr(eq + 1)), defaults);
    }
    check_types(cfg);

    const FiberParams p = fiber_params(cfg);
    cfg["gamma"] = p.gamma();

    if (subcommand == "simulate-pmd") {
        const pmd::PmdRunConfig c = pmd_config(cfg);
        pmd::validate(c);
        cfg["dt"] = c.dt;
    } else if (subcommand == "simulate-limit") {
        const limit::LimitRunConfig c = limit_config(cfg);
        limit::validate(c);
        cfg["dt"] = c.dt;
    } else if (subcommand == "driver-stats") {
        const driver::InvariantStatsConfig c = stats_config(cfg);
        if (!(c.params.gamma_c() > 0.0)) throw ConfigError("gamma_c: must be positive");
        if (c.n_paths == 0) throw ConfigError("stats_paths: must be >= 1");
        if (!(c.t_sample > 0.0)) throw ConfigError("t_sample: must be positive");
        if (c.batches_per_path == 0) throw ConfigError("batches_per_path: must be >= 1");
    } else if (subcommand == "converge") {
        mc::validate(study_config(cfg));
    }
    return cfg;
}

FiberParams fiber_params(const Json& cfg) {
    return {number(cfg, "d0"), number(cfg, "b_prime"), number(cfg, "gamma_c"),
            number(cfg, "gamma_s"), number(cfg, "epsilon")};
}

SpinorField initial_field(const Json& cfg) {
    const std::string profile = text(cfg, "profile");
    if (profile == "snapshot") {
        const std::string path = text(cfg, "initial_snapshot");
        if (path.empty()) throw ConfigError("initial_snapshot: required when profile = snapshot");
        return read_snapshot(path).field;
    }
    const SpectralGrid grid(count(cfg, "n_points"), number(cfg, "domain_length"));
    const Polarization pol{number(cfg, "theta"), number(cfg, "phase")};
    const double amp = number(cfg, "amplitude");
    const double width = number(cfg, "width");
    if (!(width > 0.0)) throw ConfigError("width: must be positive");
    const double center = number(cfg, "center");
    if (profile == "gaussian") {
        return gaussian_profile(grid, amp, width, center, pol, number(cfg, "chirp"));
    }
    if (profile == "sech") return sech_profile(grid, amp, width, center, pol);
    throw ConfigError("profile: expected gaussian, sech or snapshot, got '" + profile + "'");
}

pmd::PmdRunConfig pmd_config(const Json& cfg) {
    pmd::PmdRunConfig c;
    c.params = fiber_params(cfg);
    c.step_factor = number(cfg, "step_factor");
    const double eps = c.params.epsilon();
    c.dt = number_or(cfg, "dt", c.step_factor * eps * eps);
    c.t_final = number(cfg, "t_final");
    c.initial = initial_field(cfg);
    c.seed = count(cfg, "seed");
    c.path_index = static_cast<std::uint32_t>(count(cfg, "path_index"));
    const std::string frame = text(cfg, "frame");
    if (frame == "x") {
        c.frame = pmd::Frame::X;
    } else if (frame == "psi") {
        c.frame = pmd::Frame::Psi;
    } else {
        throw ConfigError("frame: expected x or psi, got '" + frame + "'");
    }
    const std::string nl = text(cfg, "nonlinearity");
    if (nl == "averaged") {
        c.nonlinearity = pmd::Nonlinearity::AveragedKerr;
    } else if (nl == "local_axes") {
        c.nonlinearity = pmd::Nonlinearity::LocalAxes;
    } else if (nl == "off") {
        c.nonlinearity = pmd::Nonlinearity::Off;
    } else {
        throw ConfigError("nonlinearity: expected averaged, local_axes or off, got '" + nl + "'");
    }
    if (!flag(cfg, "nonlinear")) c.nonlinearity = pmd::Nonlinearity::Off;
    c.record_every = count(cfg, "record_every");
    c.h1_ceiling = number(cfg, "h1_ceiling");
    c.keep_snapshots = flag(cfg, "snapshots");
    return c;
}

limit::LimitRunConfig limit_config(const Json& cfg) {
    limit::LimitRunConfig c;
    c.params = fiber_params(cfg);
    c.dt = number_or(cfg, "dt", 1e-3);
    c.t_final = number(cfg, "t_final");
    c.initial = initial_field(cfg);
    c.seed = count(cfg, "seed");
    c.path_index = static_cast<std::uint32_t>(count(cfg, "path_index"));
    const std::string scheme = text(cfg, "scheme");
    if (scheme == "stratonovich") {
        c.scheme = limit::Scheme::StratonovichSplit;
    } else if (scheme == "ito") {
        c.scheme = limit::Scheme::ItoEulerSpectral;
    } else {
        throw ConfigError("scheme: expected stratonovich or ito, got '" + scheme + "'");
    }
    c.nonlinear = flag(cfg, "nonlinear");
    c.record_every = count(cfg, "record_every");
    c.h1_ceiling = number(cfg, "h1_ceiling");
    c.keep_snapshots = flag(cfg, "snapshots");
    return c;
}

driver::InvariantStatsConfig stats_config(const Json& cfg) {
    driver::InvariantStatsConfig c;
    c.params = fiber_params(cfg);
    c.n_paths = count(cfg, "stats_paths");
    c.t_burn = number_or(cfg, "t_burn", -1.0);
    c.t_sample = number(cfg, "t_sample");
    c.dt = number_or(cfg, "driver_dt", -1.0);
    c.lag_cutoff = number_or(cfg, "lag_cutoff", -1.0);
    c.sample_interval = number_or(cfg, "sample_interval", -1.0);
    c.batches_per_path = count(cfg, "batches_per_path");
    c.tolerance = number(cfg, "stats_tolerance");
    c.seed = count(cfg, "seed");
    c.threads = static_cast<unsigned>(count(cfg, "threads"));
    return c;
}

mc::ConvergenceStudyConfig study_config(const Json& cfg) {
    mc::ConvergenceStudyConfig c;
    c.epsilons = cfg.at("epsilons").get<std::vector<double>>();
    c.n_paths = count(cfg, "n_paths");
    c.pmd_base = pmd_config(cfg);
    // Unset dt: every eps runs at step_factor * eps^2.
    if (cfg.at("dt").is_null()) c.pmd_base.dt = std::numeric_limits<double>::max();
    c.pmd_base.keep_snapshots = false;
    c.limit_base = limit_config(cfg);
    c.limit_base.dt = number(cfg, "limit_dt");
    c.limit_base.keep_snapshots = false;
    c.observables = observables::parse_set(cfg.at("observables").get<std::vector<std::string>>());
    c.master_seed = count(cfg, "seed");
    c.threads = static_cast<unsigned>(count(cfg, "threads"));
    return c;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "' for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw IoError("sha256: digest initialisation failed");
    }
    char chunk[1 << 16];
    while (in) {
        in.read(chunk, sizeof chunk);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, chunk, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return hex.str();
}

}  // namespace manakov::cli
