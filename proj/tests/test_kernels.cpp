#include <random>

#include "doctest.h"
#include "gcsge/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace gcsge;

namespace {

ComplexBuffer random_buffer(std::mt19937_64& rng, std::size_t n, double scale) {
    std::normal_distribution<double> nd(0.0, scale);
    ComplexBuffer b(n);
    for (auto& z : b) z = {nd(rng), nd(rng)};
    return b;
}

}  // namespace

TEST_CASE("nonlinear kernel: OpenMP matches serial reference") {
#ifdef _OPENMP
    omp_set_num_threads(4);
#endif
    std::mt19937_64 rng(42);
    for (std::size_t n : {8u, 1000u, 4096u, 16384u}) {
        const auto phi = random_buffer(rng, n, 0.1);
        const auto px = random_buffer(rng, n, 0.05);
        const auto pxx = random_buffer(rng, n, 0.02);
        std::vector<double> V(n);
        for (std::size_t j = 0; j < n; ++j) V[j] = 1e-3 * static_cast<double>(j % 17);
        ComplexBuffer a(n), b(n);
        const double sa = kernels::gcsge_nonlinear_serial(phi, px, pxx, V, a);
        const double sb = kernels::gcsge_nonlinear_omp(phi, px, pxx, V, b);
        CHECK(sa == sb);
        CHECK(a == b);
    }
}

TEST_CASE("nonlinear kernel value at a single point") {
    // n = -i[(s^2 - 2s + V) phi + s phi_xx - conj(phi) phi_x^2]
    const ComplexBuffer phi{{0.3, 0.1}}, px{{0.02, -0.01}}, pxx{{-0.005, 0.004}};
    const std::vector<double> V{0.01};
    ComplexBuffer out(1);
    const double s = kernels::gcsge_nonlinear_serial(phi, px, pxx, V, out);
    const cplx p = phi[0];
    const double ss = std::norm(p);
    const cplx expect = cplx{0, -1} * ((ss * ss - 2 * ss + 0.01) * p + ss * pxx[0] - std::conj(p) * px[0] * px[0]);
    CHECK(s == doctest::Approx(0.1));
    CHECK(std::abs(out[0] - expect) <= 1e-16);
}

TEST_CASE("stage kernels: OpenMP matches serial reference") {
    std::mt19937_64 rng(3);
    const std::size_t n = 10000;
    const auto u = random_buffer(rng, n, 1.0), k1 = random_buffer(rng, n, 1.0),
               k2 = random_buffer(rng, n, 1.0), k3 = random_buffer(rng, n, 1.0),
               k4 = random_buffer(rng, n, 1.0), e1 = random_buffer(rng, n, 1.0),
               e2 = random_buffer(rng, n, 1.0);
    ComplexBuffer a(n), b(n);
    kernels::multiply_serial(u, e1, a);
    kernels::multiply_omp(u, e1, b);
    CHECK(a == b);
    kernels::axpy_multiply_serial(u, 0.3, k1, e1, a);
    kernels::axpy_multiply_omp(u, 0.3, k1, e1, b);
    CHECK(a == b);
    kernels::multiply_add_serial(u, e1, 0.3, k1, a);
    kernels::multiply_add_omp(u, e1, 0.3, k1, b);
    CHECK(a == b);
    a = u;
    b = u;
    kernels::rk4_combine_serial(a, k1, k2, k3, k4, e1, e2, 0.01);
    kernels::rk4_combine_omp(b, k1, k2, k3, k4, e1, e2, 0.01);
    CHECK(a == b);
}
