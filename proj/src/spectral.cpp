#include "couette/spectral.hpp"

#include "couette/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace couette {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Tolerance on the k = 0 Hermitian defect accepted by the inverse transform.
constexpr double kHermitianTol = 1e-12;

}  // namespace

Grid::Grid(int n_z, int n_y, double L_y) : n_z_(n_z), n_y_(n_y), L_y_(L_y) {
    if (n_z < 4 || n_z % 2 != 0)
        throw ValidationError("n_z must be even and >= 4, got " + std::to_string(n_z));
    if (n_y < 4 || n_y % 2 != 0)
        throw ValidationError("n_y must be even and >= 4, got " + std::to_string(n_y));
    if (!(L_y > 0.0) || !std::isfinite(L_y))
        throw ValidationError("L_y must be > 0");
}

double Grid::d_eta() const { return std::numbers::pi / L_y_; }
double Grid::dz() const { return 2.0 * std::numbers::pi / n_z_; }
double Grid::dy() const { return 2.0 * L_y_ / n_y_; }

SpectralField::SpectralField(const Grid& grid) : grid_(grid), c_(grid.spectral_size()) {}

cplx SpectralField::coeff(int k, int m) const {
    const int nz = grid_.n_z(), ny = grid_.n_y();
    if (k <= -nz / 2 || k > nz / 2 || m <= -ny / 2 || m > ny / 2) return {0.0, 0.0};
    if (k >= 0) return at(grid_.row_of(m), k);
    if (m == ny / 2) return {0.0, 0.0};
    return std::conj(at(grid_.row_of(-m), -k));
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double a) {
    for (auto& v : c_) v *= a;
    return *this;
}

void SpectralField::fill_zero() { std::fill(c_.begin(), c_.end(), cplx{}); }

void SpectralField::zero_nyquist() {
    const int nk = grid_.n_k(), ny = grid_.n_y();
    for (int j = 0; j < ny; ++j) at(j, nk - 1) = 0.0;
    for (int k = 0; k < nk; ++k) at(ny / 2, k) = 0.0;
}

void SpectralField::symmetrize() {
    const int ny = grid_.n_y();
    at(0, 0) = at(0, 0).real();
    for (int m = 1; m < ny / 2; ++m) {
        const cplx a = at(m, 0), b = at(ny - m, 0);
        const cplx h = 0.5 * (a + std::conj(b));
        at(m, 0) = h;
        at(ny - m, 0) = std::conj(h);
    }
    at(ny / 2, 0) = at(ny / 2, 0).real();
}

double SpectralField::hermitian_defect() const {
    const int ny = grid_.n_y();
    double d = std::abs(at(0, 0).imag());
    for (int m = 1; m < ny / 2; ++m)
        d = std::max(d, std::abs(at(m, 0) - std::conj(at(ny - m, 0))));
    return d;
}

double SpectralField::max_abs() const {
    double a = 0.0;
    for (const auto& v : c_) a = std::max(a, std::abs(v));
    return a;
}

double SpectralField::norm2() const {
    const int nk = grid_.n_k(), ny = grid_.n_y(), nz = grid_.n_z();
    double s = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int k = 0; k < nk; ++k) {
            // k = n_z/2 is self-conjugate in the full plane.
            const double w = (k == 0 || k == nz / 2) ? 1.0 : 2.0;
            s += w * std::norm(at(j, k));
        }
    return s;
}

ZeroModeField::ZeroModeField(const Grid& grid)
    : grid_(grid), c_(static_cast<std::size_t>(grid.n_y())) {}

ZeroModeField& ZeroModeField::operator+=(const ZeroModeField& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

ZeroModeField& ZeroModeField::operator*=(double a) {
    for (auto& v : c_) v *= a;
    return *this;
}

void ZeroModeField::fill_zero() { std::fill(c_.begin(), c_.end(), cplx{}); }

void ZeroModeField::zero_nyquist() { c_[static_cast<std::size_t>(grid_.n_y() / 2)] = 0.0; }

void ZeroModeField::symmetrize() {
    const int ny = grid_.n_y();
    c_[0] = c_[0].real();
    for (int m = 1; m < ny / 2; ++m) {
        const cplx h = 0.5 * (at(m) + std::conj(at(ny - m)));
        at(m) = h;
        at(ny - m) = std::conj(h);
    }
    at(ny / 2) = at(ny / 2).real();
}

double ZeroModeField::hermitian_defect() const {
    const int ny = grid_.n_y();
    double d = std::abs(c_[0].imag());
    for (int m = 1; m < ny / 2; ++m) d = std::max(d, std::abs(at(m) - std::conj(at(ny - m))));
    return d;
}

double ZeroModeField::norm2() const {
    double s = 0.0;
    for (const auto& v : c_) s += std::norm(v);
    return s;
}

ShearFrame::ShearFrame(double t_) : t(t_) {
    if (!(t_ >= 0.0)) throw ValidationError("shear frame time must be >= 0");
}

ShearSymbols shear_symbols(int k, double eta, const ShearFrame& frame) {
    const double kk = k;
    const double xi = eta - kk * frame.t;
    return {cplx(0.0, kk), cplx(0.0, xi), -(kk * kk + xi * xi)};
}

struct FourierTransform::Impl {
    Grid grid;
    double* real_buf = nullptr;
    fftw_complex* cplx_buf = nullptr;
    double* real_1d = nullptr;
    fftw_complex* cplx_1d = nullptr;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
    fftw_plan r2c_1d = nullptr;
    fftw_plan c2r_1d = nullptr;

    explicit Impl(const Grid& g) : grid(g) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        const int nz = g.n_z(), ny = g.n_y(), nk = g.n_k();
        real_buf = fftw_alloc_real(g.physical_size());
        cplx_buf = fftw_alloc_complex(static_cast<std::size_t>(ny) * nk);
        real_1d = fftw_alloc_real(static_cast<std::size_t>(ny));
        cplx_1d = fftw_alloc_complex(static_cast<std::size_t>(ny / 2 + 1));
        r2c = fftw_plan_dft_r2c_2d(ny, nz, real_buf, cplx_buf, FFTW_ESTIMATE);
        c2r = fftw_plan_dft_c2r_2d(ny, nz, cplx_buf, real_buf, FFTW_ESTIMATE);
        r2c_1d = fftw_plan_dft_r2c_1d(ny, real_1d, cplx_1d, FFTW_ESTIMATE);
        c2r_1d = fftw_plan_dft_c2r_1d(ny, cplx_1d, real_1d, FFTW_ESTIMATE);
    }

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(r2c);
        fftw_destroy_plan(c2r);
        fftw_destroy_plan(r2c_1d);
        fftw_destroy_plan(c2r_1d);
        fftw_free(real_buf);
        fftw_free(cplx_buf);
        fftw_free(real_1d);
        fftw_free(cplx_1d);
    }
};

FourierTransform::FourierTransform(const Grid& grid) : impl_(std::make_unique<Impl>(grid)) {}
FourierTransform::~FourierTransform() = default;

const Grid& FourierTransform::grid() const { return impl_->grid; }

void FourierTransform::forward(std::span<const double> physical, SpectralField& out) const {
    const Grid& g = impl_->grid;
    if (physical.size() != g.physical_size())
        throw ValidationError("physical array size " + std::to_string(physical.size()) +
                              " does not match grid " + std::to_string(g.n_y()) + "x" +
                              std::to_string(g.n_z()));
    if (!(out.grid() == g)) throw ValidationError("output field grid mismatch");
    std::copy(physical.begin(), physical.end(), impl_->real_buf);
    fftw_execute(impl_->r2c);
    const double scale = 1.0 / static_cast<double>(g.physical_size());
    auto* src = reinterpret_cast<const cplx*>(impl_->cplx_buf);
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] * scale;
    out.zero_nyquist();
    out.symmetrize();
}

SpectralField FourierTransform::forward(std::span<const double> physical) const {
    SpectralField out(impl_->grid);
    forward(physical, out);
    return out;
}

void FourierTransform::inverse(const SpectralField& field, std::span<double> out) const {
    const Grid& g = impl_->grid;
    if (!(field.grid() == g)) throw ValidationError("field grid mismatch");
    if (out.size() != g.physical_size()) throw ValidationError("output array size mismatch");
    const double scale = std::max(1.0, field.max_abs());
    if (field.hermitian_defect() > kHermitianTol * scale)
        throw CorruptedField("k = 0 column breaks conjugate symmetry");
    const int nk = g.n_k(), ny = g.n_y();
    for (int j = 0; j < ny; ++j)
        if (field.at(j, nk - 1) != cplx{}) throw CorruptedField("nonzero k Nyquist column");
    for (int k = 0; k < nk; ++k)
        if (field.at(ny / 2, k) != cplx{}) throw CorruptedField("nonzero eta Nyquist row");
    auto src = field.data();
    auto* dst = reinterpret_cast<cplx*>(impl_->cplx_buf);
    std::copy(src.begin(), src.end(), dst);
    fftw_execute(impl_->c2r);
    std::copy(impl_->real_buf, impl_->real_buf + g.physical_size(), out.begin());
}

std::vector<double> FourierTransform::inverse(const SpectralField& field) const {
    std::vector<double> out(impl_->grid.physical_size());
    inverse(field, out);
    return out;
}

ZeroModeField FourierTransform::forward_1d(std::span<const double> profile) const {
    const Grid& g = impl_->grid;
    const int ny = g.n_y();
    if (profile.size() != static_cast<std::size_t>(ny))
        throw ValidationError("profile length does not match n_y");
    std::copy(profile.begin(), profile.end(), impl_->real_1d);
    fftw_execute(impl_->r2c_1d);
    ZeroModeField out(g);
    auto* src = reinterpret_cast<const cplx*>(impl_->cplx_1d);
    const double scale = 1.0 / ny;
    for (int m = 0; m < ny / 2; ++m) out.at(m) = src[m] * scale;
    for (int m = 1; m < ny / 2; ++m) out.at(ny - m) = std::conj(out.at(m));
    out.at(0) = out.at(0).real();
    return out;
}

std::vector<double> FourierTransform::inverse_1d(const ZeroModeField& field) const {
    const Grid& g = impl_->grid;
    const int ny = g.n_y();
    const double scale = std::max(1.0, [&] {
        double a = 0.0;
        for (const auto& v : field.data()) a = std::max(a, std::abs(v));
        return a;
    }());
    if (field.hermitian_defect() > kHermitianTol * scale)
        throw CorruptedField("zero-mode profile breaks conjugate symmetry");
    if (field.at(ny / 2) != cplx{}) throw CorruptedField("nonzero eta Nyquist mode");
    auto* dst = reinterpret_cast<cplx*>(impl_->cplx_1d);
    for (int m = 0; m <= ny / 2; ++m) dst[m] = field.at(m);
    fftw_execute(impl_->c2r_1d);
    return std::vector<double>(impl_->real_1d, impl_->real_1d + ny);
}

SpectralField forward_transform(const Grid& grid, std::span<const double> physical) {
    if (physical.size() != grid.physical_size())
        throw ValidationError("physical array size does not match grid");
    FourierTransform ft(grid);
    return ft.forward(physical);
}

std::vector<double> inverse_transform(const SpectralField& field) {
    FourierTransform ft(field.grid());
    return ft.inverse(field);
}

Velocity biot_savart(const SpectralField& f, const ShearFrame& frame) {
    const Grid& g = f.grid();
    Velocity v{SpectralField(g), SpectralField(g)};
    const int nk = g.n_k(), ny = g.n_y();
    for (int j = 0; j < ny; ++j) {
        const double eta = g.eta(j);
        for (int k = 0; k < nk; ++k) {
            if (k == 0 && j == 0) continue;
            const double xi = eta - k * frame.t;
            const double p = static_cast<double>(k) * k + xi * xi;
            const cplx fh = f.at(j, k) / p;
            v.u1.at(j, k) = cplx(0.0, xi) * fh;
            v.u2.at(j, k) = cplx(0.0, -static_cast<double>(k)) * fh;
        }
    }
    return v;
}

ZeroModeField biot_savart_zero(const ZeroModeField& f0) {
    const Grid& g = f0.grid();
    ZeroModeField u(g);
    for (int j = 1; j < g.n_y(); ++j) u.at(j) = cplx(0.0, 1.0) * f0.at(j) / g.eta(j);
    return u;
}

bool retained(const Grid& grid, int k, int m) {
    return 3 * std::abs(k) <= grid.n_z() && 3 * std::abs(m) <= grid.n_y();
}

void dealias_in_place(SpectralField& field) {
    const Grid& g = field.grid();
    for (int j = 0; j < g.n_y(); ++j) {
        const int m = g.eta_index(j);
        for (int k = 0; k < g.n_k(); ++k)
            if (!retained(g, k, m)) field.at(j, k) = 0.0;
    }
}

void dealias_in_place(ZeroModeField& field) {
    const Grid& g = field.grid();
    for (int j = 0; j < g.n_y(); ++j)
        if (!retained(g, 0, g.eta_index(j))) field.at(j) = 0.0;
}

SpectralField dealias(const SpectralField& field) {
    SpectralField out = field;
    dealias_in_place(out);
    return out;
}

}  // namespace couette
