#include "gcsge/kernels.hpp"

#include <algorithm>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gcsge::kernels {

namespace {

// Below this size a parallel region costs more than it saves.
constexpr std::ptrdiff_t kParallelThreshold = 2048;

bool go_parallel(std::ptrdiff_t n) {
#ifdef _OPENMP
    return n >= kParallelThreshold && !omp_in_parallel() && omp_get_max_threads() > 1;
#else
    (void)n;
    return false;
#endif
}

inline double nonlinear_point(const cplx& p, const cplx& px, const cplx& pxx, double v, cplx& o) {
    const double s = std::norm(p);
    const cplx bracket = (s * s - 2.0 * s + v) * p + s * pxx - std::conj(p) * (px * px);
    o = cplx{bracket.imag(), -bracket.real()};  // -i * bracket
    return s;
}

}  // namespace

double gcsge_nonlinear_serial(std::span<const cplx> phi, std::span<const cplx> phi_x,
                              std::span<const cplx> phi_xx, std::span<const double> V,
                              std::span<cplx> out) {
    double smax = 0.0;
    const std::size_t n = phi.size();
    for (std::size_t j = 0; j < n; ++j) {
        smax = std::max(smax, nonlinear_point(phi[j], phi_x[j], phi_xx[j], V[j], out[j]));
    }
    return smax;
}

double gcsge_nonlinear_omp(std::span<const cplx> phi, std::span<const cplx> phi_x,
                           std::span<const cplx> phi_xx, std::span<const double> V,
                           std::span<cplx> out) {
    const auto n = static_cast<std::ptrdiff_t>(phi.size());
    double smax = 0.0;
#pragma omp parallel for reduction(max : smax) if (go_parallel(n))
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        smax = std::max(smax, nonlinear_point(phi[j], phi_x[j], phi_xx[j], V[j], out[j]));
    }
    return smax;
}

double gcsge_nonlinear(Exec exec, std::span<const cplx> phi, std::span<const cplx> phi_x,
                       std::span<const cplx> phi_xx, std::span<const double> V,
                       std::span<cplx> out) {
    return exec == Exec::parallel ? gcsge_nonlinear_omp(phi, phi_x, phi_xx, V, out)
                                  : gcsge_nonlinear_serial(phi, phi_x, phi_xx, V, out);
}

void multiply_serial(std::span<const cplx> a, std::span<const cplx> m, std::span<cplx> out) {
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * m[j];
}

void multiply_omp(std::span<const cplx> a, std::span<const cplx> m, std::span<cplx> out) {
    const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for if (go_parallel(n))
    for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = a[j] * m[j];
}

void multiply(Exec exec, std::span<const cplx> a, std::span<const cplx> m, std::span<cplx> out) {
    exec == Exec::parallel ? multiply_omp(a, m, out) : multiply_serial(a, m, out);
}

void axpy_multiply_serial(std::span<const cplx> a, double h, std::span<const cplx> b,
                          std::span<const cplx> m, std::span<cplx> out) {
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = m[j] * (a[j] + h * b[j]);
}

void axpy_multiply_omp(std::span<const cplx> a, double h, std::span<const cplx> b,
                       std::span<const cplx> m, std::span<cplx> out) {
    const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for if (go_parallel(n))
    for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = m[j] * (a[j] + h * b[j]);
}

void axpy_multiply(Exec exec, std::span<const cplx> a, double h, std::span<const cplx> b,
                   std::span<const cplx> m, std::span<cplx> out) {
    exec == Exec::parallel ? axpy_multiply_omp(a, h, b, m, out)
                           : axpy_multiply_serial(a, h, b, m, out);
}

void multiply_add_serial(std::span<const cplx> a, std::span<const cplx> m, double h,
                         std::span<const cplx> b, std::span<cplx> out) {
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = m[j] * a[j] + h * b[j];
}

void multiply_add_omp(std::span<const cplx> a, std::span<const cplx> m, double h,
                      std::span<const cplx> b, std::span<cplx> out) {
    const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for if (go_parallel(n))
    for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = m[j] * a[j] + h * b[j];
}

void multiply_add(Exec exec, std::span<const cplx> a, std::span<const cplx> m, double h,
                  std::span<const cplx> b, std::span<cplx> out) {
    exec == Exec::parallel ? multiply_add_omp(a, m, h, b, out)
                           : multiply_add_serial(a, m, h, b, out);
}

void rk4_combine_serial(std::span<cplx> u, std::span<const cplx> k1, std::span<const cplx> k2,
                        std::span<const cplx> k3, std::span<const cplx> k4,
                        std::span<const cplx> e1, std::span<const cplx> e2, double h) {
    const double h6 = h / 6.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        u[j] = e2[j] * u[j] + h6 * (e2[j] * k1[j] + 2.0 * e1[j] * (k2[j] + k3[j]) + k4[j]);
    }
}

void rk4_combine_omp(std::span<cplx> u, std::span<const cplx> k1, std::span<const cplx> k2,
                     std::span<const cplx> k3, std::span<const cplx> k4,
                     std::span<const cplx> e1, std::span<const cplx> e2, double h) {
    const double h6 = h / 6.0;
    const auto n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for if (go_parallel(n))
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        u[j] = e2[j] * u[j] + h6 * (e2[j] * k1[j] + 2.0 * e1[j] * (k2[j] + k3[j]) + k4[j]);
    }
}

void rk4_combine(Exec exec, std::span<cplx> u, std::span<const cplx> k1,
                 std::span<const cplx> k2, std::span<const cplx> k3, std::span<const cplx> k4,
                 std::span<const cplx> e1, std::span<const cplx> e2, double h) {
    exec == Exec::parallel ? rk4_combine_omp(u, k1, k2, k3, k4, e1, e2, h)
                           : rk4_combine_serial(u, k1, k2, k3, k4, e1, e2, h);
}

}  // namespace gcsge::kernels
