#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gcsge/errors.hpp"
#include "gcsge/integrator.hpp"
#include "gcsge/soliton.hpp"

using namespace gcsge;
using std::numbers::pi;

namespace {

// scipy.integrate.quad oracles
constexpr double kMassW01 = 0.10067204612436344;
constexpr double kMassW002 = 0.02000533504058535;
// int w^2 sech^2(wx)/(1 - w^2 sech^2(wx)) V0 exp(-x^2/(2 sigma^2)) dx, w=0.1, V0=1e-3, sigma=20
constexpr double kBarrierTopCharge = 0.00018414655033204336;
constexpr double kBarrierTopIntensity = 0.0001828529006131135;

RealField gaussian_barrier(const Grid& g, double V0, double sigma) {
    RealField V(g);
    for (std::size_t j = 0; j < g.size(); ++j) V[j] = V0 * std::exp(-g.x(j) * g.x(j) / (2 * sigma * sigma));
    return V;
}

}  // namespace

TEST_CASE("soliton profile") {
    const Grid g = make_grid(628.32, 4096);
    SUBCASE("stationary soliton is real with peak w'") {
        const auto phi = soliton_profile({0.2, 0.0, 0.0}, 0.0, g);
        CHECK(phi[g.size() / 2] == cplx{0.2, 0.0});
        for (const auto& z : phi.values) CHECK(z.imag() == 0.0);
    }
    SUBCASE("internal wavenumber is v0/2") {
        const SolitonParams p{0.1, 0.0604, -110.0};
        CHECK(p.wavenumber() == doctest::Approx(0.0302));
        const auto phi = soliton_profile(p, 0.0, g);
        const auto dphi = spectral_derivative(phi, 1);
        // local wavenumber Im(phi* phi_x)/|phi|^2 at the core
        const std::size_t j = static_cast<std::size_t>((-110.0 + 314.16) / g.dx());
        CHECK((std::conj(phi[j]) * dphi[j]).imag() / std::norm(phi[j]) == doctest::Approx(0.0302).epsilon(1e-9));
    }
    SUBCASE("width and wavelength") {
        const SolitonParams p{0.2, 0.1, 0.0};
        CHECK(p.width() == doctest::Approx(2.867869).epsilon(1e-6));
        CHECK(p.wavelength().value() == doctest::Approx(125.66).epsilon(1e-4));
        CHECK_FALSE(SolitonParams{0.2, 0.0, 0.0}.wavelength().has_value());
    }
    SUBCASE("invalid amplitude") {
        CHECK_THROWS_AS(soliton_profile({0.0, 0.0, 0.0}, 0.0, g), ParameterError);
        CHECK_THROWS_AS(soliton_profile({1.0, 0.0, 0.0}, 0.0, g), ParameterError);
    }
}

TEST_CASE("soliton mass") {
    CHECK(soliton_mass(0.1) == doctest::Approx(kMassW01).epsilon(1e-13));
    CHECK(soliton_mass(0.02) == doctest::Approx(kMassW002).epsilon(1e-13));
    CHECK(soliton_mass(0.1) / 0.1 == doctest::Approx(1.0067).epsilon(1e-4));
    CHECK(soliton_mass(0.02) / 0.02 <= 1.0003);
}

TEST_CASE("momentum density") {
    const Grid g = make_grid(628.32, 4096);
    SUBCASE("stationary soliton carries no momentum") {
        const auto p = momentum_density(soliton_profile({0.2, 0.0, 30.0}, 0.0, g));
        for (double v : p.values) CHECK(std::abs(v) <= 1e-12);
    }
    SUBCASE("integrated momentum is m v0") {
        for (const auto& sp : {SolitonParams{0.1, 0.0604, -110.0}, SolitonParams{0.2, 0.1, 100.0},
                               SolitonParams{0.35, -0.7, 250.0}}) {
            const double P = integrate(momentum_density(soliton_profile(sp, 2.0, g)));
            const double mv = soliton_mass(sp.amplitude) * sp.velocity;
            CHECK(std::abs(P - mv) / std::abs(mv) <= 1e-8);
        }
        const double P = integrate(momentum_density(soliton_profile({0.1, 0.0604, -110.0}, 0.0, g)));
        CHECK(P == doctest::Approx(6.0806e-3).epsilon(1e-4));
    }
    SUBCASE("plane wave density is constant") {
        const Grid pg = make_grid(100.0, 64);
        const double w = 0.3, k = 2 * pi * 4 / 100.0;
        ComplexField phi(pg);
        for (std::size_t j = 0; j < pg.size(); ++j) phi[j] = std::polar(w, k * pg.x(j));
        const auto p = momentum_density(phi);
        for (double v : p.values) CHECK(v == doctest::Approx(w * w * k / (1 - w * w)).epsilon(1e-12));
    }
}

TEST_CASE("potential energy") {
    const Grid g = make_grid(1256.636, 4096);
    SUBCASE("constant potential factorizes") {
        const RealField V(g, 0.003);
        CHECK(potential_energy(V, {0.1, 0.0, 12.0}) == doctest::Approx(0.003 * 2 * kMassW01).epsilon(1e-10));
    }
    SUBCASE("Gaussian barrier top") {
        const auto V = gaussian_barrier(g, 0.001, 20.0);
        CHECK(potential_energy(V, {0.1, 0.0, 0.0}) == doctest::Approx(kBarrierTopCharge).epsilon(1e-9));
        CHECK(potential_energy(V, {0.1, 0.0, 0.0}, PotentialWeighting::intensity) ==
              doctest::Approx(kBarrierTopIntensity).epsilon(1e-9));
    }
    SUBCASE("far from the barrier") {
        const auto V = gaussian_barrier(g, 0.001, 20.0);
        CHECK(potential_energy(V, {0.1, 0.0, 400.0}) <= 1e-12);
    }
    SUBCASE("field form matches pointwise form") {
        const auto V = gaussian_barrier(g, 0.001, 20.0);
        const auto field = potential_energy_field(V, 0.1);
        for (std::size_t j : {0u, 1000u, 2048u, 2100u, 3000u}) {
            CHECK(field[j] == doctest::Approx(potential_energy(V, {0.1, 0.0, g.x(j)})).epsilon(1e-9).scale(1e-8));
        }
    }
}

TEST_CASE("default window") {
    const double l = default_window(0.1, 0.01, 1256.636);
    CHECK(l == doctest::Approx(2 * std::atanh(0.99) / 0.1));
    // inside the validity band
    CHECK(l > pi / std::sqrt(0.6));
    CHECK(l * l * l < 4 * pi * pi / (3 * 0.1 * 1e-4));
    CHECK(default_window(0.2, 0.0, 100.0) == doctest::Approx(2 * std::atanh(0.99) / 0.2));
    CHECK(default_window(0.01, 0.0, 100.0) == doctest::Approx(50.0));
}

TEST_CASE("position estimator") {
    const Grid g = make_grid(628.32, 4096);
    SUBCASE("noiseless soliton") {
        const auto phi = soliton_profile({0.2, 0.3, 100.0}, 0.0, g);
        for (double l : {40.0, 60.0, 120.0}) {
            const auto e = estimate_position(phi, 100.0, {l, 0.0, 0.2});
            CHECK(std::abs(e.value - 100.0) <= 1e-6);
            CHECK_FALSE(e.low_confidence);
        }
        // an off-centre window is biased; locating removes the bias
        CHECK(std::abs(estimate_position(phi, 103.0, {40.0, 0.0, 0.2}).value - 100.0) > 1e-3);
        CHECK(std::abs(locate_soliton(phi, 103.0, {40.0, 0.0, 0.2}).value - 100.0) <= 1e-6);
    }
    SUBCASE("soliton straddling the seam") {
        const double X = 314.0;
        const auto phi = soliton_profile({0.2, 0.0, X}, 0.0, g);
        const auto e = estimate_position(phi, X, {60.0, 0.0, 0.2});
        CHECK(std::abs(e.value - X) <= 1e-6);
        // same offset from the nodes, half a domain away from the seam
        const double Xc = X - 0.5 * g.length();
        const auto centred = estimate_position(soliton_profile({0.2, 0.0, Xc}, 0.0, g), Xc, {60.0, 0.0, 0.2});
        CHECK(std::abs((e.value - X) - (centred.value - Xc)) <= 1e-10);
    }
    SUBCASE("low confidence when the window misses the soliton") {
        const auto phi = soliton_profile({0.2, 0.0, 0.0}, 0.0, g);
        CHECK(estimate_position(phi, 200.0, {40.0, 0.0, 0.2}).low_confidence);
    }
    SUBCASE("window larger than the domain") {
        const auto phi = soliton_profile({0.2, 0.0, 0.0}, 0.0, g);
        CHECK_THROWS_AS(estimate_position(phi, 0.0, {700.0, 0.0, 0.2}), ConfigError);
        CHECK_THROWS_AS(estimate_position(phi, 0.0, {0.0, 0.0, 0.2}), ConfigError);
    }
}

TEST_CASE("position estimator is unbiased under noise") {
    // <X> -> X_s over 500 realizations within 3 standard errors
    const Grid g = make_grid(1256.636, 1024);
    const double w = 0.1, eps = 0.01, Xs = 3.3;
    const auto base = soliton_profile({w, 0.0, Xs}, 0.0, g);
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd(0.0, eps / std::sqrt(2.0));
    const WindowSpec win{default_window(w, eps, g.length()), eps, w};
    double sum = 0.0, sum2 = 0.0;
    const int n = 500;
    for (int r = 0; r < n; ++r) {
        ComplexField phi = base;
        for (auto& z : phi.values) z += cplx{nd(rng), nd(rng)};
        const double d = estimate_position(phi, Xs, win).value - Xs;
        sum += d;
        sum2 += d * d;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::abs(mean) <= 3 * se);
}

TEST_CASE("velocity estimator") {
    const Grid g = make_grid(628.32, 4096);
    SUBCASE("noiseless soliton recovers v0") {
        for (double v0 : {0.1, -0.25, 1.0}) {
            const auto phi = soliton_profile({0.2, v0, -50.0}, 0.0, g);
            for (double l : {20.0, 60.0, 100.0, 200.0}) {
                CHECK(std::abs(estimate_velocity(phi, -50.0, {l, 0.0, 0.2}).value - v0) <= 1e-6);
            }
        }
    }
    SUBCASE("stationary soliton") {
        const auto phi = soliton_profile({0.2, 0.0, 10.0}, 0.0, g);
        CHECK(std::abs(estimate_velocity(phi, 10.0, {100.0, 0.0, 0.2}).value) <= 1e-12);
    }
}

TEST_CASE("tracker follows a free soliton across the seam") {
    const Grid g = make_grid(200.0, 1024);
    const SolitonParams p{0.3, 0.5, 80.0};
    EvolutionConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 80.0;
    cfg.output_stride = 200;
    SolitonTracker tracker(g, p.position, {default_window(0.3, 0.0, g.length()), 0.0, 0.3});
    evolve(soliton_profile(p, 0.0, g), RealField(g), cfg, [&](double t, const ComplexField& phi) { tracker.observe(t, phi); });
    const auto track = tracker.finish();
    REQUIRE(track.size() == 41);
    for (std::size_t i = 0; i < track.size(); ++i) {
        CHECK(std::abs(track.X[i] - (80.0 + 0.5 * track.t[i])) <= 1e-6);
        CHECK(std::abs(track.v[i] - 0.5) <= 1e-6);
        CHECK(std::abs(track.a[i]) <= 1e-6);
    }
    // unwrapped: final position 120 lies beyond L/2 = 100
    CHECK(track.X.back() > 100.0);
}

TEST_CASE("track CSV") {
    SolitonTrack t;
    t.t = {0.0, 1.0};
    t.X = {1.0, 2.0};
    t.v = {1.0, 1.0};
    t.compute_accelerations();
    std::ostringstream os;
    write_track_csv(os, t);
    CHECK(os.str() == "t,X,v,a\n0,1,1,0\n1,2,1,0\n");
}
