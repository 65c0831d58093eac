#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace couette {

using cplx = std::complex<double>;

/// Periodic strip [0, 2pi) x [-L_y, L_y) sampled on n_z x n_y points.
///
/// Physical samples are stored row-major as [y][z]; sample (i, j) sits at
/// z = i*dz and y = j*dy (mod 2 L_y). Spectral storage is the r2c half plane
/// [j][k] with k = 0..n_z/2 and signed eta index m(j) = j or j - n_y.
class Grid {
public:
    Grid(int n_z, int n_y, double L_y);

    int n_z() const { return n_z_; }
    int n_y() const { return n_y_; }
    double L_y() const { return L_y_; }

    int n_k() const { return n_z_ / 2 + 1; }
    double d_eta() const;
    double dz() const;
    double dy() const;

    /// Signed eta index for storage row j.
    int eta_index(int row) const { return row <= n_y_ / 2 ? row : row - n_y_; }
    /// Storage row for signed eta index m in (-n_y/2, n_y/2].
    int row_of(int m) const { return m >= 0 ? m : m + n_y_; }
    double eta(int row) const { return d_eta() * eta_index(row); }

    std::size_t physical_size() const {
        return static_cast<std::size_t>(n_z_) * static_cast<std::size_t>(n_y_);
    }
    std::size_t spectral_size() const {
        return static_cast<std::size_t>(n_k()) * static_cast<std::size_t>(n_y_);
    }

    bool operator==(const Grid&) const = default;

private:
    int n_z_;
    int n_y_;
    double L_y_;
};

/// Fourier coefficients of a real field on the half plane k >= 0.
/// Negative k are implied by conjugate symmetry.
class SpectralField {
public:
    explicit SpectralField(const Grid& grid);

    const Grid& grid() const { return grid_; }

    cplx& at(int row, int k) { return c_[index(row, k)]; }
    const cplx& at(int row, int k) const { return c_[index(row, k)]; }

    /// Coefficient at signed (k, m); k < 0 is read through conjugation.
    cplx coeff(int k, int m) const;

    std::span<cplx> data() { return c_; }
    std::span<const cplx> data() const { return c_; }

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double a);
    void fill_zero();

    /// Zero the k = n_z/2 column and the m = n_y/2 row.
    void zero_nyquist();
    /// Replace the k = 0 column by its Hermitian part (exact symmetry).
    void symmetrize();
    /// Largest |c(0,m) - conj(c(0,-m))| over the k = 0 column, plus
    /// imaginary parts of self-conjugate slots.
    double hermitian_defect() const;
    double max_abs() const;

    /// Mean square of the physical field: sum over the full plane of |c|^2.
    double norm2() const;

private:
    std::size_t index(int row, int k) const {
        return static_cast<std::size_t>(row) * grid_.n_k() + static_cast<std::size_t>(k);
    }

    Grid grid_;
    std::vector<cplx> c_;
};

/// One-dimensional Hermitian spectrum over eta (x-independent profile).
/// Stored over all n_y signed indices, row order matching Grid.
class ZeroModeField {
public:
    explicit ZeroModeField(const Grid& grid);

    const Grid& grid() const { return grid_; }
    cplx& at(int row) { return c_[static_cast<std::size_t>(row)]; }
    const cplx& at(int row) const { return c_[static_cast<std::size_t>(row)]; }
    std::span<cplx> data() { return c_; }
    std::span<const cplx> data() const { return c_; }

    ZeroModeField& operator+=(const ZeroModeField& o);
    ZeroModeField& operator*=(double a);
    void fill_zero();
    void zero_nyquist();
    void symmetrize();
    double hermitian_defect() const;
    double norm2() const;

private:
    Grid grid_;
    std::vector<cplx> c_;
};

struct ShearFrame {
    explicit ShearFrame(double t);
    double t;
};

struct ShearSymbols {
    cplx dz;
    cplx dyL;
    double lapL;
};

ShearSymbols shear_symbols(int k, double eta, const ShearFrame& frame);

/// Owns FFTW plans for one grid. Plan creation is serialized internally;
/// execution uses private buffers, so one instance must not be shared
/// between threads.
class FourierTransform {
public:
    explicit FourierTransform(const Grid& grid);
    ~FourierTransform();
    FourierTransform(const FourierTransform&) = delete;
    FourierTransform& operator=(const FourierTransform&) = delete;

    const Grid& grid() const;

    SpectralField forward(std::span<const double> physical) const;
    void forward(std::span<const double> physical, SpectralField& out) const;
    std::vector<double> inverse(const SpectralField& field) const;
    void inverse(const SpectralField& field, std::span<double> out) const;

    /// Profile in y (length n_y) to its eta spectrum and back.
    ZeroModeField forward_1d(std::span<const double> profile) const;
    std::vector<double> inverse_1d(const ZeroModeField& field) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SpectralField forward_transform(const Grid& grid, std::span<const double> physical);
std::vector<double> inverse_transform(const SpectralField& field);

struct Velocity {
    SpectralField u1;
    SpectralField u2;
};

Velocity biot_savart(const SpectralField& f, const ShearFrame& frame);

/// Zero-mode Biot-Savart: u0^1 = i f0 / eta, mean mode mapped to zero.
ZeroModeField biot_savart_zero(const ZeroModeField& f0);

bool retained(const Grid& grid, int k, int m);
SpectralField dealias(const SpectralField& field);
void dealias_in_place(SpectralField& field);
void dealias_in_place(ZeroModeField& field);

}  // namespace couette
