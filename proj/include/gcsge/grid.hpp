#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <fftw3.h>

namespace gcsge {

using cplx = std::complex<double>;

/// Allocator routing through fftw_malloc so every field buffer shares the
/// SIMD alignment FFTW planned for. Plans are then reusable on any field.
template <typename T>
struct FftwAllocator {
    using value_type = T;

    FftwAllocator() noexcept = default;
    template <typename U>
    FftwAllocator(const FftwAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        void* p = fftw_malloc(n * sizeof(T));
        if (p == nullptr) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

    template <typename U>
    bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using ComplexBuffer = std::vector<cplx, FftwAllocator<cplx>>;
using RealBuffer = std::vector<double>;

/// Uniform periodic grid on [-L/2, L/2).
///
/// Nodes: x_j = -L/2 + j*dx, j = 0..N-1.
/// Wavenumbers follow the FFTW output order: k_n = 2*pi*n/L for
/// n = 0..N/2 (the Nyquist mode N/2 is stored as +N/2), then
/// k_n = 2*pi*(n-N)/L for n = N/2+1..N-1.
class Grid {
public:
    Grid() = default;

    double length() const noexcept { return L_; }
    std::size_t size() const noexcept { return N_; }
    double dx() const noexcept { return L_ / static_cast<double>(N_); }
    double x(std::size_t j) const noexcept { return -0.5 * L_ + static_cast<double>(j) * dx(); }
    double wavenumber(std::size_t n) const noexcept;
    double k_max() const noexcept;
    bool is_nyquist(std::size_t n) const noexcept { return n == N_ / 2; }

    RealBuffer nodes() const;
    RealBuffer wavenumbers() const;

    /// Map any coordinate into [-L/2, L/2).
    double wrap(double x) const noexcept;
    /// Signed minimal-image displacement a - b in [-L/2, L/2).
    double displacement(double a, double b) const noexcept { return wrap(a - b); }

    bool operator==(const Grid& o) const noexcept { return L_ == o.L_ && N_ == o.N_; }

    friend Grid make_grid(double L, std::size_t N);

private:
    Grid(double L, std::size_t N) : L_(L), N_(N) {}
    double L_ = 0.0;
    std::size_t N_ = 0;
};

/// Throws ConfigError unless L > 0 and N is even with N >= 8.
Grid make_grid(double L, std::size_t N);

struct ComplexField {
    Grid grid;
    ComplexBuffer values;

    ComplexField() = default;
    explicit ComplexField(const Grid& g) : grid(g), values(g.size(), cplx{0.0, 0.0}) {}

    std::size_t size() const noexcept { return values.size(); }
    cplx& operator[](std::size_t j) { return values[j]; }
    const cplx& operator[](std::size_t j) const { return values[j]; }
    std::span<cplx> span() { return values; }
    std::span<const cplx> span() const { return values; }
};

struct RealField {
    Grid grid;
    RealBuffer values;

    RealField() = default;
    explicit RealField(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t j) { return values[j]; }
    const double& operator[](std::size_t j) const { return values[j]; }
    std::span<double> span() { return values; }
    std::span<const double> span() const { return values; }
};

/// Rectangle rule on the periodic grid: sum_j f_j * dx.
double integrate(const RealField& f);
double integrate(std::span<const double> f, double dx);

/// Owns FFTW plans for one grid size. Forward is unnormalized
/// (F_n = sum_j f_j e^{-i k_n (x_j + L/2)}), inverse divides by N, so
/// sum_j |f_j|^2 dx = (dx / N) sum_n |F_n|^2.
///
/// Plans are created with FFTW_ESTIMATE so the chosen algorithm, and hence
/// every bit of the result, is reproducible from run to run. Not thread-safe
/// per instance; give each realization its own.
class Spectral {
public:
    explicit Spectral(std::size_t n);
    ~Spectral();
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;
    Spectral(Spectral&&) noexcept;
    Spectral& operator=(Spectral&&) noexcept;

    std::size_t size() const noexcept { return n_; }

    /// Out-of-place transforms; in and out must be distinct FFTW-aligned buffers.
    void forward(const cplx* in, cplx* out) const;
    void inverse(const cplx* in, cplx* out) const;

    void forward(const ComplexBuffer& in, ComplexBuffer& out) const { forward(in.data(), out.data()); }
    void inverse(const ComplexBuffer& in, ComplexBuffer& out) const { inverse(in.data(), out.data()); }

private:
    std::size_t n_ = 0;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
};

ComplexBuffer forward_transform(const ComplexField& f);
ComplexField inverse_transform(const Grid& g, const ComplexBuffer& spectrum);

/// d^order f / dx^order by wavenumber multiplication; the Nyquist mode of
/// odd derivatives is zeroed. order must be 1 or 2.
ComplexField spectral_derivative(const ComplexField& f, int order);

/// Periodic convolution (f * g)(x) = int f(x') g(x - x') dx', with g given
/// as a function of the signed displacement sampled at grid offsets.
RealField periodic_convolution(const RealField& f, const RealField& kernel_centered);

double max_abs(std::span<const cplx> v);

}  // namespace gcsge
