#pragma once

// Periodic spectral grid, two-component fields and the shared error types.
//
// The computational domain is the torus [-L/2, L/2) sampled at n points
// (n a power of two).  Fourier conventions:
//
//   forward:  F_k = sum_j f_j exp(-2 pi i j k / n)      (unnormalized)
//   inverse:  f_j = (1/n) sum_k F_k exp(+2 pi i j k / n)
//
// so that d/dx acts on mode k as multiplication by i*xi_k, and the discrete
// Parseval identity reads  dx * sum_j |f_j|^2 = (L / n^2) * sum_k |F_k|^2.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace manakov {

using Complex = std::complex<double>;

/// Value of the two polarization components at one grid point.
using Spinor = std::array<Complex, 2>;

/// Invalid user input: bad grid sizes, parameters, time steps, config keys.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A trajectory had to stop: non-finite values, or the H^1 guard tripped.
class NumericalAbort : public std::runtime_error {
public:
    enum class Reason { NonFinite, BlowUpSuspected };

    NumericalAbort(Reason reason, std::int64_t step, const std::string& what)
        : std::runtime_error(what), reason_(reason), step_(step) {}

    Reason reason() const noexcept { return reason_; }
    std::int64_t step() const noexcept { return step_; }

private:
    Reason reason_;
    std::int64_t step_;
};

const char* to_string(NumericalAbort::Reason reason);

class SpectralGrid {
public:
    /// Throws ConfigError unless n_points is a power of two >= 8 and
    /// domain_length > 0.
    SpectralGrid(std::size_t n_points, double domain_length);

    std::size_t size() const noexcept { return n_; }
    double length() const noexcept { return length_; }
    double dx() const noexcept { return dx_; }

    /// Wavenumbers 2 pi k / L in FFT order; index n/2 carries the Nyquist
    /// mode with k = -n/2.
    std::span<const double> wavenumbers() const noexcept { return *xi_; }

    /// Grid coordinate of sample j, x_j = -L/2 + j dx.
    double position(std::size_t j) const noexcept {
        return -0.5 * length_ + static_cast<double>(j) * dx_;
    }

    /// In-place componentwise transforms on a buffer of size() spinors.
    void forward(std::span<Spinor> data) const;
    void inverse(std::span<Spinor> data) const;

    bool operator==(const SpectralGrid& other) const noexcept {
        return n_ == other.n_ && length_ == other.length_;
    }

private:
    struct Plans;

    std::size_t n_;
    double length_;
    double dx_;
    std::shared_ptr<const std::vector<double>> xi_;
    std::shared_ptr<const Plans> plans_;
};

/// Two-component complex field X = (X1, X2) sampled on a grid.
class SpinorField {
public:
    explicit SpinorField(SpectralGrid grid);
    SpinorField(SpectralGrid grid, std::vector<Spinor> values);

    const SpectralGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<Spinor> values() noexcept { return values_; }
    std::span<const Spinor> values() const noexcept { return values_; }
    Spinor& operator[](std::size_t j) noexcept { return values_[j]; }
    const Spinor& operator[](std::size_t j) const noexcept { return values_[j]; }

    bool all_finite() const noexcept;

private:
    SpectralGrid grid_;
    std::vector<Spinor> values_;
};

/// Fourier coefficients of a SpinorField (unnormalized forward transform).
struct SpectralField {
    SpectralGrid grid;
    std::vector<Spinor> modes;
};

SpectralGrid make_grid(std::size_t n_points, double domain_length);

/// Throws NumericalAbort(NonFinite) if any entry is NaN or infinite.
SpectralField to_spectrum(const SpinorField& f);
SpinorField from_spectrum(const SpectralField& s);

/// dx * sum_k |F_k|^2 / n, which equals l2_norm(f)^2 by Parseval.
double spectral_energy(const SpectralField& s);

double l2_norm(const SpinorField& f);
double h1_norm(const SpinorField& f);

/// Spectral derivative i*xi*F; the Nyquist mode is dropped.
SpinorField derivative(const SpinorField& f);

/// Throws NumericalAbort(NonFinite, step) when the field has a bad entry.
void require_finite(const SpinorField& f, std::int64_t step = -1);

/// Dimensionless fiber constants.  gamma = b'^2 / (6 gamma_c) is derived.
/// gamma_c = 0 is accepted as a frozen driver; gamma is then 0 when b' = 0
/// and +inf otherwise (the limit solver rejects that case).
class FiberParams {
public:
    /// Throws ConfigError unless gamma_c >= 0 and 0 < epsilon <= 1.
    FiberParams(double d0, double b_prime, double gamma_c, double gamma_s, double epsilon);

    double d0() const noexcept { return d0_; }
    double b_prime() const noexcept { return b_prime_; }
    double gamma_c() const noexcept { return gamma_c_; }
    double gamma_s() const noexcept { return gamma_s_; }
    double epsilon() const noexcept { return epsilon_; }
    double gamma() const noexcept { return gamma_; }

    FiberParams with_epsilon(double epsilon) const {
        return {d0_, b_prime_, gamma_c_, gamma_s_, epsilon};
    }

private:
    double d0_;
    double b_prime_;
    double gamma_c_;
    double gamma_s_;
    double epsilon_;
    double gamma_;
};

// ---------------------------------------------------------------------------
// Initial profiles
// ---------------------------------------------------------------------------

/// Polarization (cos theta, e^{i phi} sin theta).
struct Polarization {
    double theta = 0.0;
    double phase = 0.0;

    Spinor vector() const;
};

/// amplitude * exp(-(x-center)^2 / (2 width^2)) * exp(i chirp (x-center)^2) * pol
SpinorField gaussian_profile(const SpectralGrid& grid, double amplitude, double width,
                             double center = 0.0, Polarization pol = {}, double chirp = 0.0);

/// amplitude * sech((x-center) / width) * pol
SpinorField sech_profile(const SpectralGrid& grid, double amplitude, double width,
                         double center = 0.0, Polarization pol = {});

// ---------------------------------------------------------------------------
// Snapshot files
// ---------------------------------------------------------------------------
//
// One JSON header line
//   {"components":2,"domain_length":L,"n_points":n,"time":t}\n
// followed by 4*n little-endian IEEE-754 doubles:
//   re X1(x0), im X1(x0), re X2(x0), im X2(x0), re X1(x1), ...

struct Snapshot {
    SpinorField field;
    double time = 0.0;
};

void write_snapshot(const std::string& path, const SpinorField& f, double time);
Snapshot read_snapshot(const std::string& path);

/// Raised for unreadable/unwritable files and malformed snapshots.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace manakov
