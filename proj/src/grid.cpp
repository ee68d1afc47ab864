#include "gcsge/grid.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "gcsge/errors.hpp"

namespace gcsge {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const cplx* p) { return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p)); }

}  // namespace

Grid make_grid(double L, std::size_t N) {
    if (!(L > 0.0) || !std::isfinite(L)) {
        throw ConfigError("grid length must be positive and finite, got " + std::to_string(L));
    }
    if (N < 8 || N % 2 != 0) {
        throw ConfigError("grid point count must be even and >= 8, got " + std::to_string(N));
    }
    return Grid(L, N);
}

double Grid::wavenumber(std::size_t n) const noexcept {
    const double dk = 2.0 * std::numbers::pi / L_;
    const auto half = N_ / 2;
    if (n <= half) return dk * static_cast<double>(n);
    return dk * (static_cast<double>(n) - static_cast<double>(N_));
}

double Grid::k_max() const noexcept { return wavenumber(N_ / 2); }

RealBuffer Grid::nodes() const {
    RealBuffer out(N_);
    for (std::size_t j = 0; j < N_; ++j) out[j] = x(j);
    return out;
}

RealBuffer Grid::wavenumbers() const {
    RealBuffer out(N_);
    for (std::size_t n = 0; n < N_; ++n) out[n] = wavenumber(n);
    return out;
}

double Grid::wrap(double xv) const noexcept {
    double r = std::fmod(xv + 0.5 * L_, L_);
    if (r < 0.0) r += L_;
    // fmod can return exactly L_ after the shift for inputs a hair below -L/2.
    if (r >= L_) r -= L_;
    return r - 0.5 * L_;
}

double integrate(std::span<const double> f, double dx) {
    double s = 0.0;
    for (double v : f) s += v;
    return s * dx;
}

double integrate(const RealField& f) { return integrate(f.span(), f.grid.dx()); }

Spectral::Spectral(std::size_t n) : n_(n) {
    ComplexBuffer a(n), b(n);
    std::lock_guard lock(planner_mutex());
    const int ni = static_cast<int>(n);
    fwd_ = fftw_plan_dft_1d(ni, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_1d(ni, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
}

Spectral::~Spectral() {
    if (fwd_ == nullptr && inv_ == nullptr) return;
    std::lock_guard lock(planner_mutex());
    if (fwd_ != nullptr) fftw_destroy_plan(fwd_);
    if (inv_ != nullptr) fftw_destroy_plan(inv_);
}

Spectral::Spectral(Spectral&& o) noexcept : n_(o.n_), fwd_(o.fwd_), inv_(o.inv_) {
    o.fwd_ = nullptr;
    o.inv_ = nullptr;
}

Spectral& Spectral::operator=(Spectral&& o) noexcept {
    std::swap(n_, o.n_);
    std::swap(fwd_, o.fwd_);
    std::swap(inv_, o.inv_);
    return *this;
}

void Spectral::forward(const cplx* in, cplx* out) const {
    fftw_execute_dft(fwd_, as_fftw(in), as_fftw(out));
}

void Spectral::inverse(const cplx* in, cplx* out) const {
    fftw_execute_dft(inv_, as_fftw(in), as_fftw(out));
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] *= scale;
}

ComplexBuffer forward_transform(const ComplexField& f) {
    Spectral fft(f.size());
    ComplexBuffer out(f.size());
    fft.forward(f.values, out);
    return out;
}

ComplexField inverse_transform(const Grid& g, const ComplexBuffer& spectrum) {
    Spectral fft(g.size());
    ComplexField out(g);
    fft.inverse(spectrum, out.values);
    return out;
}

ComplexField spectral_derivative(const ComplexField& f, int order) {
    if (order != 1 && order != 2) throw ConfigError("spectral_derivative supports order 1 or 2");
    const Grid& g = f.grid;
    Spectral fft(g.size());
    ComplexBuffer hat(g.size());
    fft.forward(f.values, hat);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double k = g.wavenumber(n);
        if (order == 1) {
            hat[n] = g.is_nyquist(n) ? cplx{0.0, 0.0} : hat[n] * cplx{0.0, k};
        } else {
            hat[n] *= -k * k;
        }
    }
    ComplexField out(g);
    fft.inverse(hat, out.values);
    return out;
}

RealField periodic_convolution(const RealField& f, const RealField& kernel_centered) {
    const Grid& g = f.grid;
    const std::size_t N = g.size();
    Spectral fft(N);
    ComplexBuffer a(N), b(N), ah(N), bh(N);
    for (std::size_t j = 0; j < N; ++j) {
        a[j] = f[j];
        // Node N/2 is x = 0; rotate so offset m*dx lands at index m mod N.
        b[j] = kernel_centered[(j + N / 2) % N];
    }
    fft.forward(a, ah);
    fft.forward(b, bh);
    for (std::size_t n = 0; n < N; ++n) ah[n] *= bh[n];
    fft.inverse(ah, a);
    RealField out(g);
    const double dx = g.dx();
    for (std::size_t j = 0; j < N; ++j) out[j] = a[j].real() * dx;
    return out;
}

double max_abs(std::span<const cplx> v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

}  // namespace gcsge
