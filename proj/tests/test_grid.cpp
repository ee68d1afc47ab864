#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gcsge/errors.hpp"
#include "gcsge/field_io.hpp"
#include "gcsge/grid.hpp"

using namespace gcsge;
using std::numbers::pi;

TEST_CASE("make_grid spacing and wavenumbers") {
    SUBCASE("newton preset grid") {
        const Grid g = make_grid(628.32, 4096);
        CHECK(g.dx() == doctest::Approx(0.15340).epsilon(1e-4));
        CHECK(g.k_max() == doctest::Approx(20.48).epsilon(1e-3));
        CHECK(g.dx() * static_cast<double>(g.size()) == doctest::Approx(628.32).epsilon(1e-15));
    }
    SUBCASE("tunneling grid") {
        const Grid g = make_grid(1256.636, 1024);
        CHECK(g.dx() == doctest::Approx(1.2272).epsilon(1e-4));
    }
    SUBCASE("smallest grid") {
        const Grid g = make_grid(2 * pi, 8);
        const double xs[] = {-pi, -3 * pi / 4, -pi / 2, -pi / 4, 0, pi / 4, pi / 2, 3 * pi / 4};
        const double ks[] = {0, 1, 2, 3, 4, -3, -2, -1};
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(g.x(j) == doctest::Approx(xs[j]).epsilon(1e-15));
            CHECK(g.wavenumber(j) == doctest::Approx(ks[j]).epsilon(1e-15));
        }
        CHECK(g.is_nyquist(4));
    }
}

TEST_CASE("make_grid rejects bad input") {
    CHECK_THROWS_AS(make_grid(0.0, 64), ConfigError);
    CHECK_THROWS_AS(make_grid(-1.0, 64), ConfigError);
    CHECK_THROWS_AS(make_grid(10.0, 63), ConfigError);
    CHECK_THROWS_AS(make_grid(10.0, 6), ConfigError);
}

TEST_CASE("wavenumbers closed under negation except Nyquist") {
    const Grid g = make_grid(37.0, 48);
    const auto k = g.wavenumbers();
    for (std::size_t n = 1; n < g.size(); ++n) {
        if (g.is_nyquist(n)) continue;
        CHECK(k[g.size() - n] == doctest::Approx(-k[n]).epsilon(1e-14));
    }
}

TEST_CASE("wrap maps into [-L/2, L/2)") {
    const Grid g = make_grid(10.0, 16);
    CHECK(g.wrap(5.0) == doctest::Approx(-5.0));
    CHECK(g.wrap(-5.0) == doctest::Approx(-5.0));
    CHECK(g.wrap(12.5) == doctest::Approx(2.5));
    CHECK(g.wrap(-17.5) == doctest::Approx(2.5));
    CHECK(g.displacement(4.5, -4.5) == doctest::Approx(-1.0));
}

TEST_CASE("integrate") {
    SUBCASE("constant") {
        const Grid g = make_grid(10.0, 64);
        CHECK(integrate(RealField(g, 1.0)) == doctest::Approx(10.0).epsilon(1e-15));
    }
    SUBCASE("sech^2 closed form") {
        // int w^2 sech^2(w x) dx = 2 w
        const Grid g = make_grid(628.32, 4096);
        const double w = 0.2;
        RealField f(g);
        for (std::size_t j = 0; j < g.size(); ++j) f[j] = w * w / std::pow(std::cosh(w * g.x(j)), 2);
        CHECK(std::abs(integrate(f) - 2 * w) <= 1e-10);
    }
    SUBCASE("cosine orthogonality") {
        const Grid g = make_grid(12.0, 64);
        RealField f(g);
        for (std::size_t j = 0; j < g.size(); ++j) f[j] = std::cos(2 * pi * g.x(j) / 12.0);
        CHECK(std::abs(integrate(f)) <= 1e-14);
    }
}

TEST_CASE("spectral derivative") {
    SUBCASE("plane wave eigenfunction") {
        const Grid g = make_grid(20.0, 64);
        const double k = 2 * pi * 3 / 20.0;
        ComplexField f(g);
        for (std::size_t j = 0; j < g.size(); ++j) f[j] = std::polar(1.0, k * g.x(j));
        const auto d = spectral_derivative(f, 1);
        for (std::size_t j = 0; j < g.size(); ++j) {
            CHECK(std::abs(d[j] - cplx{0, k} * f[j]) <= 1e-12);
        }
    }
    SUBCASE("sech second derivative vs analytic") {
        // sech'' = sech - 2 sech^3
        const Grid g = make_grid(40 * pi, 1024);
        ComplexField f(g);
        for (std::size_t j = 0; j < g.size(); ++j) f[j] = 1.0 / std::cosh(g.x(j));
        const auto d = spectral_derivative(f, 2);
        double err = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double s = 1.0 / std::cosh(g.x(j));
            err = std::max(err, std::abs(d[j] - cplx{s - 2 * s * s * s, 0}));
        }
        CHECK(err <= 1e-8);
    }
    SUBCASE("constant field") {
        const Grid g = make_grid(5.0, 16);
        ComplexField f(g);
        for (auto& v : f.values) v = {2.5, -1.0};
        const auto d = spectral_derivative(f, 1);
        CHECK(max_abs(d.span()) <= 1e-14);
    }
    SUBCASE("derivative of even real field is odd") {
        const Grid g = make_grid(30.0, 256);
        ComplexField f(g);
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double x = g.x(j);
            f[j] = std::exp(-x * x / 4) + 0.3 / std::cosh(x);
        }
        const auto d = spectral_derivative(f, 1);
        // node j mirrors node N - j about x = 0
        for (std::size_t j = 1; j < g.size(); ++j) {
            CHECK(std::abs(d[j] + d[g.size() - j]) <= 1e-10);
        }
    }
    CHECK_THROWS_AS(spectral_derivative(ComplexField(make_grid(1.0, 8)), 3), ConfigError);
}

TEST_CASE("transform round trip and Parseval") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (std::size_t N : {8u, 64u, 1000u, 4096u}) {
        const Grid g = make_grid(3.7 * static_cast<double>(N) / 8, N);
        ComplexField f(g);
        for (auto& v : f.values) v = {nd(rng), nd(rng)};
        const auto hat = forward_transform(f);
        const auto back = inverse_transform(g, hat);
        double num = 0.0, den = 0.0, spec = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            num += std::norm(back[j] - f[j]);
            den += std::norm(f[j]);
            spec += std::norm(hat[j]);
        }
        CHECK(std::sqrt(num / den) <= 1e-12);
        const double phys = den * g.dx();
        const double parseval = spec * g.dx() / static_cast<double>(N);
        CHECK(std::abs(phys - parseval) / phys <= 1e-12);
    }
}

TEST_CASE("periodic convolution with a narrow kernel shifts nothing") {
    const Grid g = make_grid(50.0, 256);
    RealField f(g), kern(g);
    for (std::size_t j = 0; j < g.size(); ++j) f[j] = std::exp(-std::pow(g.x(j) - 3.0, 2));
    kern[g.size() / 2] = 1.0 / g.dx();  // discrete delta at x = 0
    const auto c = periodic_convolution(f, kern);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(c[j] == doctest::Approx(f[j]).epsilon(1e-12));
}

TEST_CASE("snapshot format") {
    const Grid g = make_grid(628.32, 16);
    ComplexField f(g);
    for (std::size_t j = 0; j < g.size(); ++j) f[j] = {0.1 * static_cast<double>(j), -1.0 / (1.0 + j)};

    std::stringstream ss;
    write_snapshot(ss, f, 12.5);
    const std::string bytes = ss.str();
    REQUIRE(bytes.size() == 5 + 8 * 3 + 16 * 16);
    CHECK(bytes.substr(0, 5) == "GCSF1");
    CHECK(static_cast<unsigned char>(bytes[5]) == 16);  // N little-endian
    for (int i = 6; i < 13; ++i) CHECK(bytes[i] == 0);

    const auto back = read_complex_snapshot(ss);
    CHECK(back.t == 12.5);
    CHECK(back.field.grid == g);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(back.field[j] == f[j]);

    RealField r(g, 0.25);
    std::stringstream rs;
    write_snapshot(rs, r, 0.0);
    CHECK(rs.str().substr(0, 5) == "GRSF1");
    CHECK(rs.str().size() == 5 + 24 + 16 * 8);
    const auto rb = read_real_snapshot(rs);
    CHECK(rb.field.values == r.values);

    std::stringstream bad("GRSF1....");
    CHECK_THROWS_AS(read_complex_snapshot(bad), ConfigError);
}
