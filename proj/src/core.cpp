#include "manakov/core.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

#include <fftw3.h>
#include <nlohmann/json.hpp>

namespace manakov {

const char* to_string(NumericalAbort::Reason reason) {
    switch (reason) {
    case NumericalAbort::Reason::NonFinite:
        return "non_finite";
    case NumericalAbort::Reason::BlowUpSuspected:
        return "blow_up_suspected";
    }
    return "unknown";
}

namespace {

// FFTW's planner is not re-entrant; execution with the new-array interface is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(std::span<Spinor> data) {
    return reinterpret_cast<fftw_complex*>(data.data());
}

}  // namespace

struct SpectralGrid::Plans {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;

    explicit Plans(std::size_t n) {
        // Both components in one plan: stride 2 between samples, distance 1
        // between components.  ESTIMATE keeps plans (and results) identical
        // from run to run.
        std::vector<Spinor> scratch(n);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        int len = static_cast<int>(n);
        unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        std::lock_guard lock(planner_mutex());
        forward = fftw_plan_many_dft(1, &len, 2, buf, nullptr, 2, 1, buf, nullptr, 2, 1,
                                     FFTW_FORWARD, flags);
        inverse = fftw_plan_many_dft(1, &len, 2, buf, nullptr, 2, 1, buf, nullptr, 2, 1,
                                     FFTW_BACKWARD, flags);
        if (forward == nullptr || inverse == nullptr) {
            throw std::runtime_error("FFTW failed to create a plan");
        }
    }

    ~Plans() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(inverse);
    }

    Plans(const Plans&) = delete;
    Plans& operator=(const Plans&) = delete;
};

SpectralGrid::SpectralGrid(std::size_t n_points, double domain_length)
    : n_(n_points), length_(domain_length) {
    if (n_points < 8 || !std::has_single_bit(n_points)) {
        throw ConfigError("n_points must be a power of two >= 8, got " + std::to_string(n_points));
    }
    if (!(domain_length > 0.0) || !std::isfinite(domain_length)) {
        throw ConfigError("domain_length must be positive");
    }
    dx_ = length_ / static_cast<double>(n_);
    auto xi = std::make_shared<std::vector<double>>(n_);
    const double base = 2.0 * std::numbers::pi / length_;
    const auto half = static_cast<std::int64_t>(n_ / 2);
    for (std::size_t k = 0; k < n_; ++k) {
        auto signed_k = static_cast<std::int64_t>(k);
        if (signed_k >= half) signed_k -= static_cast<std::int64_t>(n_);
        (*xi)[k] = base * static_cast<double>(signed_k);
    }
    xi_ = std::move(xi);
    plans_ = std::make_shared<const Plans>(n_);
}

void SpectralGrid::forward(std::span<Spinor> data) const {
    fftw_complex* p = as_fftw(data);
    fftw_execute_dft(plans_->forward, p, p);
}

void SpectralGrid::inverse(std::span<Spinor> data) const {
    fftw_complex* p = as_fftw(data);
    fftw_execute_dft(plans_->inverse, p, p);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& s : data) {
        s[0] *= scale;
        s[1] *= scale;
    }
}

SpectralGrid make_grid(std::size_t n_points, double domain_length) {
    return SpectralGrid(n_points, domain_length);
}

SpinorField::SpinorField(SpectralGrid grid)
    : grid_(std::move(grid)), values_(grid_.size(), Spinor{}) {}

SpinorField::SpinorField(SpectralGrid grid, std::vector<Spinor> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ConfigError("field has " + std::to_string(values_.size()) +
                          " samples but the grid has " + std::to_string(grid_.size()));
    }
}

bool SpinorField::all_finite() const noexcept {
    for (const auto& s : values_) {
        if (!std::isfinite(s[0].real()) || !std::isfinite(s[0].imag()) ||
            !std::isfinite(s[1].real()) || !std::isfinite(s[1].imag())) {
            return false;
        }
    }
    return true;
}

void require_finite(const SpinorField& f, std::int64_t step) {
    if (!f.all_finite()) {
        throw NumericalAbort(NumericalAbort::Reason::NonFinite, step,
                             "non-finite field value at step " + std::to_string(step));
    }
}

SpectralField to_spectrum(const SpinorField& f) {
    require_finite(f);
    SpectralField s{f.grid(), {f.values().begin(), f.values().end()}};
    s.grid.forward(s.modes);
    return s;
}

SpinorField from_spectrum(const SpectralField& s) {
    std::vector<Spinor> values = s.modes;
    s.grid.inverse(values);
    return SpinorField(s.grid, std::move(values));
}

double spectral_energy(const SpectralField& s) {
    double sum = 0.0;
    for (const auto& m : s.modes) sum += std::norm(m[0]) + std::norm(m[1]);
    const auto n = static_cast<double>(s.grid.size());
    return s.grid.dx() * sum / n;
}

double l2_norm(const SpinorField& f) {
    double sum = 0.0;
    for (const auto& v : f.values()) sum += std::norm(v[0]) + std::norm(v[1]);
    return std::sqrt(sum * f.grid().dx());
}

SpinorField derivative(const SpinorField& f) {
    SpectralField s = to_spectrum(f);
    auto xi = s.grid.wavenumbers();
    const std::size_t nyquist = s.grid.size() / 2;
    for (std::size_t k = 0; k < s.modes.size(); ++k) {
        const Complex factor = (k == nyquist) ? Complex{} : Complex(0.0, xi[k]);
        s.modes[k][0] *= factor;
        s.modes[k][1] *= factor;
    }
    return from_spectrum(s);
}

double h1_norm(const SpinorField& f) {
    const double l2 = l2_norm(f);
    const double dl2 = l2_norm(derivative(f));
    return std::sqrt(l2 * l2 + dl2 * dl2);
}

FiberParams::FiberParams(double d0, double b_prime, double gamma_c, double gamma_s, double epsilon)
    : d0_(d0), b_prime_(b_prime), gamma_c_(gamma_c), gamma_s_(gamma_s), epsilon_(epsilon) {
    if (!std::isfinite(d0) || !std::isfinite(b_prime) || !std::isfinite(gamma_s)) {
        throw ConfigError("fiber parameters must be finite");
    }
    if (!(gamma_c >= 0.0) || !std::isfinite(gamma_c)) {
        throw ConfigError("gamma_c must be >= 0");
    }
    if (!(epsilon > 0.0) || epsilon > 1.0) {
        throw ConfigError("epsilon must lie in (0, 1]");
    }
    // gamma_c = 0 freezes the driver; gamma is then only finite for b' = 0.
    if (gamma_c > 0.0) {
        gamma_ = b_prime * b_prime / (6.0 * gamma_c);
    } else {
        gamma_ = b_prime == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
}

Spinor Polarization::vector() const {
    return {Complex(std::cos(theta), 0.0), std::polar(std::sin(theta), phase)};
}

SpinorField gaussian_profile(const SpectralGrid& grid, double amplitude, double width,
                             double center, Polarization pol, double chirp) {
    if (!(width > 0.0)) throw ConfigError("width must be positive");
    SpinorField f(grid);
    const Spinor p = pol.vector();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double y = grid.position(j) - center;
        const Complex a = amplitude * std::exp(-y * y / (2.0 * width * width)) *
                          std::polar(1.0, chirp * y * y);
        f[j] = {a * p[0], a * p[1]};
    }
    return f;
}

SpinorField sech_profile(const SpectralGrid& grid, double amplitude, double width, double center,
                         Polarization pol) {
    if (!(width > 0.0)) throw ConfigError("width must be positive");
    SpinorField f(grid);
    const Spinor p = pol.vector();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double a = amplitude / std::cosh((grid.position(j) - center) / width);
        f[j] = {a * p[0], a * p[1]};
    }
    return f;
}

// ---------------------------------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O writes the native representation");

void write_snapshot(const std::string& path, const SpinorField& f, double time) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    nlohmann::json header = {{"n_points", f.size()},
                             {"domain_length", f.grid().length()},
                             {"time", time},
                             {"components", 2}};
    out << header.dump() << '\n';
    static_assert(sizeof(Spinor) == 4 * sizeof(double));
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.size() * sizeof(Spinor)));
    if (!out) throw IoError("failed writing " + path);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": missing header line");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": malformed header: " + e.what());
    }
    try {
        if (header.at("components").get<int>() != 2) {
            throw IoError(path + ": expected 2 components");
        }
        SpectralGrid grid(header.at("n_points").get<std::size_t>(),
                          header.at("domain_length").get<double>());
        std::vector<Spinor> values(grid.size());
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(values.size() * sizeof(Spinor)));
        if (in.gcount() != static_cast<std::streamsize>(values.size() * sizeof(Spinor))) {
            throw IoError(path + ": truncated payload");
        }
        if (in.peek() != std::char_traits<char>::eof()) {
            throw IoError(path + ": trailing bytes after payload");
        }
        return {SpinorField(std::move(grid), std::move(values)), header.at("time").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": bad header field: " + e.what());
    } catch (const ConfigError& e) {
        throw IoError(path + ": " + e.what());
    }
}

}  // namespace manakov
