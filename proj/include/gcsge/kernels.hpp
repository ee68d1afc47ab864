#pragma once

#include <span>

#include "gcsge/grid.hpp"

// Pointwise kernels behind the integrators. Each has a serial reference and
// an OpenMP version; both perform the same per-element arithmetic, so their
// outputs are bit-identical and the serial one serves as the test oracle.
namespace gcsge::kernels {

enum class Exec { serial, parallel };

/// Nonlinear + potential part of the GCSGE right-hand side, i.e. everything
/// except the linear operator i(d_xx - 1):
///   n = -i(s^2 - 2s) phi - i s phi_xx + i conj(phi) phi_x^2 - i V phi,  s = |phi|^2.
/// Returns max |phi|^2 over the grid.
double gcsge_nonlinear_serial(std::span<const cplx> phi, std::span<const cplx> phi_x,
                              std::span<const cplx> phi_xx, std::span<const double> V,
                              std::span<cplx> out);
double gcsge_nonlinear_omp(std::span<const cplx> phi, std::span<const cplx> phi_x,
                           std::span<const cplx> phi_xx, std::span<const double> V,
                           std::span<cplx> out);
double gcsge_nonlinear(Exec exec, std::span<const cplx> phi, std::span<const cplx> phi_x,
                       std::span<const cplx> phi_xx, std::span<const double> V,
                       std::span<cplx> out);

/// out = a * m (elementwise).
void multiply_serial(std::span<const cplx> a, std::span<const cplx> m, std::span<cplx> out);
void multiply_omp(std::span<const cplx> a, std::span<const cplx> m, std::span<cplx> out);
void multiply(Exec exec, std::span<const cplx> a, std::span<const cplx> m, std::span<cplx> out);

/// out = m * (a + h * b) (elementwise); the integrating-factor stage update.
void axpy_multiply_serial(std::span<const cplx> a, double h, std::span<const cplx> b,
                          std::span<const cplx> m, std::span<cplx> out);
void axpy_multiply_omp(std::span<const cplx> a, double h, std::span<const cplx> b,
                       std::span<const cplx> m, std::span<cplx> out);
void axpy_multiply(Exec exec, std::span<const cplx> a, double h, std::span<const cplx> b,
                   std::span<const cplx> m, std::span<cplx> out);

/// out = m * a + h * b (elementwise).
void multiply_add_serial(std::span<const cplx> a, std::span<const cplx> m, double h,
                         std::span<const cplx> b, std::span<cplx> out);
void multiply_add_omp(std::span<const cplx> a, std::span<const cplx> m, double h,
                      std::span<const cplx> b, std::span<cplx> out);
void multiply_add(Exec exec, std::span<const cplx> a, std::span<const cplx> m, double h,
                  std::span<const cplx> b, std::span<cplx> out);

/// IF-RK4 final combination:
///   u <- e2 u + h/6 (e2 k1 + 2 e1 (k2 + k3) + k4)
void rk4_combine_serial(std::span<cplx> u, std::span<const cplx> k1, std::span<const cplx> k2,
                        std::span<const cplx> k3, std::span<const cplx> k4,
                        std::span<const cplx> e1, std::span<const cplx> e2, double h);
void rk4_combine_omp(std::span<cplx> u, std::span<const cplx> k1, std::span<const cplx> k2,
                     std::span<const cplx> k3, std::span<const cplx> k4,
                     std::span<const cplx> e1, std::span<const cplx> e2, double h);
void rk4_combine(Exec exec, std::span<cplx> u, std::span<const cplx> k1,
                 std::span<const cplx> k2, std::span<const cplx> k3, std::span<const cplx> k4,
                 std::span<const cplx> e1, std::span<const cplx> e2, double h);

}  // namespace gcsge::kernels
