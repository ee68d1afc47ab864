#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "gcsge/errors.hpp"
#include "gcsge/schrodinger.hpp"

using namespace gcsge;
using std::numbers::pi;

namespace {

double spread(const Wavefunction& w, double center) {
    const Grid& g = w.psi.grid;
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double r = std::norm(w.psi[j]);
        const double d = g.displacement(g.x(j), center);
        m0 += r;
        m1 += r * d;
        m2 += r * d * d;
    }
    const double mean = m1 / m0;
    return std::sqrt(m2 / m0 - mean * mean);
}

ComplexField translate(const ComplexField& f, double s) {
    auto spec = forward_transform(f);
    for (std::size_t n = 0; n < spec.size(); ++n) spec[n] *= std::polar(1.0, -f.grid.wavenumber(n) * s);
    return inverse_transform(f.grid, spec);
}

double l2_diff(const ComplexField& a, const ComplexField& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
    return std::sqrt(s * a.grid.dx());
}

}  // namespace

TEST_CASE("closed-form constants") {
    CHECK(phase_wavenumber(0.0604, 0.1, 0.01) == doctest::Approx(28.84).epsilon(1e-3));
    CHECK(2 * pi / phase_wavenumber(0.0604, 0.1, 0.01) == doctest::Approx(0.2179).epsilon(1e-3));
    CHECK(position_spread(0.1, 0.01) == doctest::Approx(0.2868).epsilon(1e-3));
    CHECK(position_spread(0.18, 0.0064) * position_spread(0.18, 0.0064) == doctest::Approx(5.776448849e-3));
    // sigma_X sigma_P = hbar / 2
    CHECK(position_spread(0.3, 0.02) * momentum_spread(0.3, 0.02) == doctest::Approx(effective_hbar(0.02) / 2));
}

TEST_CASE("initial wavefunction") {
    const Grid g = make_grid(40.0, 1024);
    const auto rho = gaussian_density(g, -3.0, 0.2868);
    CHECK(integrate(rho) == doctest::Approx(1.0).epsilon(1e-13));

    SUBCASE("at rest it is real and positive") {
        const auto w = build_initial(rho, 0.0, 0.1, 0.01);
        for (const auto& z : w.psi.values) {
            CHECK(z.imag() == 0.0);
            CHECK(z.real() >= 0.0);
        }
    }
    SUBCASE("unnormalized density is rescaled with a warning") {
        RealField twice = rho;
        for (double& r : twice.values) r *= 2.0;
        std::string seen;
        const auto w = build_initial(twice, 0.05, 0.1, 0.01, [&](const std::string& m) { seen = m; });
        CHECK_FALSE(seen.empty());
        CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("bad input") {
        RealField neg = rho;
        neg[3] = -1e-3;
        CHECK_THROWS_AS(build_initial(neg, 0.0, 0.1, 0.01), ConfigError);
        CHECK_THROWS_AS(build_initial(RealField(g), 0.0, 0.1, 0.01), ConfigError);
        CHECK_THROWS_AS(build_initial(rho, 0.0, 1.2, 0.01), ParameterError);
    }
}

TEST_CASE("free Gaussian spreading") {
    const Grid g = make_grid(40.0, 1024);
    const double w = 0.1, eps = 0.01, s0 = position_spread(w, eps);
    const auto psi0 = build_initial(gaussian_density(g, 0.0, s0), 0.0, w, eps);
    SeConfig cfg;
    cfg.dt = 0.5;
    cfg.t_end = 200.0;
    cfg.snapshot_times = {0.0, 50.0, 100.0, 200.0};
    const auto series = evolve_se(psi0, RealField(g), cfg);
    REQUIRE(series.size() == 4);
    const double D = pi * eps * eps / (3 * w);  // hbar / 2m
    for (const auto& s : series) {
        const double expected = std::sqrt(s0 * s0 + D * D * s.t * s.t / (s0 * s0));
        CHECK(std::abs(spread(s, 0.0) / expected - 1.0) <= 1e-6);
        CHECK(std::abs(s.norm() - 1.0) <= 1e-12);
    }
}

TEST_CASE("Galilean boost") {
    const Grid g = make_grid(40.0, 2048);
    const double w = 0.1, eps = 0.01;
    const double k = 2 * pi * 184 / 40.0;  // periodic carrier
    const double v = k * effective_hbar(eps) / w;
    const auto rho = gaussian_density(g, -5.0, position_spread(w, eps));
    SeConfig cfg;
    cfg.dt = 0.25;
    cfg.t_end = 100.0;
    cfg.snapshot_times = {100.0};
    const auto moving = evolve_se(build_initial(rho, v, w, eps), RealField(g), cfg).back();
    const auto rest = evolve_se(build_initial(rho, 0.0, w, eps), RealField(g), cfg).back();

    const double t = 100.0;
    ComplexField boosted = translate(rest.psi, v * t);
    for (std::size_t j = 0; j < g.size(); ++j) boosted[j] *= std::polar(1.0, k * g.x(j) - 0.5 * k * v * t);
    CHECK(l2_diff(moving.psi, boosted) <= 1e-8);
}

TEST_CASE("barrier evolution: norm and order") {
    const Grid g = make_grid(40.0, 1024);
    const double w = 0.1, eps = 0.01;
    const auto psi0 = build_initial(gaussian_density(g, -2.0, position_spread(w, eps)), 0.0604, w, eps);
    RealField Vp(g);
    for (std::size_t j = 0; j < g.size(); ++j) Vp[j] = 1e-4 * std::exp(-0.5 * g.x(j) * g.x(j));

    auto run = [&](double dt) {
        SeConfig cfg;
        cfg.dt = dt;
        cfg.t_end = 40.0;
        cfg.snapshot_times = {40.0};
        return evolve_se(psi0, Vp, cfg).back();
    };
    const auto ref = run(0.0125);
    CHECK(std::abs(ref.norm() - 1.0) <= 1e-10);
    const double e1 = l2_diff(run(0.4).psi, ref.psi);
    const double e2 = l2_diff(run(0.2).psi, ref.psi);
    MESSAGE("errors ", e1, " ", e2, " ratio ", e1 / e2);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("resolution and config checks") {
    const Grid g = make_grid(40.0, 128);  // dx = 0.31 against lambda = 0.22
    const auto psi0 = build_initial(gaussian_density(g, 0.0, 1.0), 0.0604, 0.1, 0.01);
    SeConfig cfg;
    cfg.dt = 0.5;
    cfg.t_end = 1.0;
    CHECK_THROWS_AS(evolve_se(psi0, RealField(g), cfg), ConfigError);
    const auto still = build_initial(gaussian_density(g, 0.0, 1.0), 0.0, 0.1, 0.01);
    CHECK_NOTHROW(evolve_se(still, RealField(g), cfg));
    CHECK_THROWS_AS(evolve_se(still, RealField(make_grid(40.0, 64)), cfg), ConfigError);
    cfg.snapshot_times = {0.3};
    CHECK_THROWS_AS(evolve_se(still, RealField(g), cfg), ConfigError);
}

TEST_CASE("Madelung fields") {
    const Grid g = make_grid(40.0, 2048);
    const double w = 0.1, eps = 0.01;
    const double k = 2 * pi * 184 / 40.0;
    const double v = k * effective_hbar(eps) / w;
    const auto rho = gaussian_density(g, 0.0, 0.5);

    SUBCASE("linear phase gives u = v0 on the support") {
        const auto m = madelung(build_initial(rho, v, w, eps));
        std::size_t live = 0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (m.masked[j]) {
                CHECK(m.u[j] == 0.0);
                continue;
            }
            ++live;
            CHECK(std::abs(m.u[j] - v) <= 1e-9 * v);
        }
        CHECK(live > 0);
        CHECK(live < g.size());
    }
    SUBCASE("real psi gives u = 0") {
        const auto m = madelung(build_initial(rho, 0.0, w, eps));
        for (double u : m.u.values) CHECK(std::abs(u) <= 1e-14);
    }
    SUBCASE("binned onto ensemble bins") {
        const auto m = madelung(build_initial(rho, v, w, eps));
        const auto bins = make_bins(g, 0.5);
        const auto d = bin_madelung(m, bins);
        double total = 0.0;
        for (double r : d.rho) total += r * bins.width;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(d.u[bins.index(0.0)] == doctest::Approx(v).epsilon(1e-9));
        CHECK(d.u[0] == 0.0);  // far tail is masked
    }
}
