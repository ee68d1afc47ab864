// End-to-end runs of each experiment kind at toy sizes.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gcsge/config.hpp"
#include "gcsge/errors.hpp"
#include "gcsge/experiments.hpp"

using namespace gcsge;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("gcsge_exp_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::string> column(const fs::path& csv, std::size_t col) {
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> out;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::string cell;
        for (std::size_t c = 0; c <= col; ++c) std::getline(ls, cell, ',');
        out.push_back(cell);
    }
    return out;
}

const char* kTunneling = R"(
experiment: tunneling
name: toy_tunneling
grid: {length: 1256.636, points: 1024}
soliton: {amplitude: 0.1, velocity: 0.0604, position: -110}
potential: {type: gaussian, height: 1.0e-3, width: 20}
noise: {amplitude: 0.01, seed: 5}
evolution: {dt: 0.2, t_end: 40, snapshots: [0, 40]}
ensemble: {realizations: 3, observation_times: [0, 20, 40]}
schrodinger: {t_end: 40, transmission_time: 40}
)";

}  // namespace

TEST_CASE("newton: free soliton keeps its velocity") {
    auto c = parse_config(R"(
experiment: newton
grid: {length: 200, points: 2048}
soliton: {amplitude: 0.2, velocity: 0.1, position: -10}
potential: {type: none}
evolution: {dt: 0.05, t_end: 50, snapshots: [0, 50]}
)");
    const auto dir = scratch("newton_free");
    ProductWriter out(dir);
    const auto r = run_newton(c, &out);
    out.finish();
    // L = 200 keeps the seam tail at 1e-9; at L = 100 it is 1e-5 and the
    // radiation it sheds moves v at the 1e-6 level
    CHECK(r.passed);
    CHECK(r.max_abs_acceleration <= 1e-8);
    CHECK(r.segments.empty());
    CHECK(std::abs(r.track.v.back() - 0.1) <= 1e-6);
    CHECK(std::abs(r.track.X.back() - (-10.0 + 0.1 * 50.0)) <= 1e-5);
    CHECK(r.energy_drift <= 1e-6);
    for (auto f : {"track.csv", "energy.csv", "segments.csv", "summary.yaml", "potential.grsf",
                   "snapshots/phi_0000.gcsf", "snapshots/phi_0001.gcsf", "manifest.txt"}) {
        CHECK_MESSAGE(fs::exists(dir / f), f);
    }

    SUBCASE("a shape tolerance that cannot be met withholds the verdict") {
        c.newton.shape_tolerance = 1e-12;
        const auto w = run_newton(c, nullptr);
        CHECK(w.verdict_withheld);
        CHECK_FALSE(w.passed);
    }
    fs::remove_all(dir);
}

TEST_CASE("newton: constant slope gives a = -dV_p/dX / m") {
    const auto c = parse_config(R"(
experiment: newton
grid: {length: 200, points: 1024}
soliton: {amplitude: 0.2, velocity: 0.0, position: 0}
potential:
  type: piecewise_linear
  knots: [[-60, 0], [60, 6.0e-3]]
evolution: {dt: 0.05, t_end: 60}
newton: {segment_margin: 20}
)");
    const auto r = run_newton(c, nullptr);
    REQUIRE(r.segments.size() == 2);
    const auto& s = r.segments[0];
    CHECK(s.checked);
    CHECK(s.slope == doctest::Approx(5e-5));
    // uniform slope g: a = -2g for the charge weighting
    CHECK(s.a_expected == doctest::Approx(-1e-4).epsilon(1e-3));
    CHECK(s.rel_error <= 0.02);
    CHECK(r.energy_drift <= 0.01);
    CHECK(r.passed);
}

TEST_CASE("chaotic background moments and products") {
    const auto c = parse_config(R"(
experiment: chaotic_background
grid: {length: 1256.636, points: 1024}
soliton: {amplitude: 0.2, velocity: 1.0, position: -300}
noise: {amplitude: 0.02, seed: 3}
evolution: {dt: 0.1, t_end: 20, snapshots: [0, 20]}
)");
    const auto dir = scratch("background");
    ProductWriter out(dir);
    const auto r = run_chaotic_background(c, &out);
    out.finish();
    CHECK_FALSE(r.failed);
    REQUIRE(r.t.size() == 21);
    // band-limited noise of spectral density eps^2 keeps 2/3 of the band
    CHECK(r.m2.front() == doctest::Approx(2.0 / 3.0 * 4e-4).epsilon(0.15));
    // complex Gaussian background: <|eta|^4> / <|eta|^2>^2 = 2
    CHECK(r.kurtosis.front() == doctest::Approx(2.0).epsilon(0.15));
    CHECK(r.track.X.back() - r.track.X.front() == doctest::Approx(20.0).epsilon(0.05));
    CHECK(fs::exists(dir / "background.csv"));
    fs::remove_all(dir);
}

TEST_CASE("tunneling pipeline writes matching overlays and is reproducible") {
    const auto c = parse_config(kTunneling);
    const auto d1 = scratch("tun1"), d2 = scratch("tun2");
    const auto m1 = run_experiment(c, d1, RunOptions{1, {}});
    const auto m2 = run_experiment(c, d2, RunOptions{3, {}});
    CHECK(slurp(d1 / "manifest.txt") == slurp(d2 / "manifest.txt"));

    for (std::size_t k = 0; k < 3; ++k) {
        const auto ens = d1 / "ensemble" / numbered("density", k, "csv");
        const auto se = d1 / "se" / numbered("density", k, "csv");
        const auto ov = d1 / "overlay" / numbered("overlay", k, "csv");
        REQUIRE(fs::exists(ens));
        REQUIRE(fs::exists(se));
        REQUIRE(fs::exists(ov));
        CHECK(column(ens, 0) == column(se, 0));  // same bin grid
        CHECK(column(ens, 0) == column(ov, 0));
    }
    for (auto f : {"ensemble/records.csv", "ensemble/spread.csv", "ensemble/moments.csv", "se/transmission.csv",
                   "se/psi_0000.gcsf", "potential.grsf", "summary.yaml", "observations.csv"}) {
        CHECK_MESSAGE(fs::exists(d1 / f), f);
    }
    // every listed product exists with the recorded size
    for (const auto& e : read_manifest(d1 / "manifest.txt")) CHECK(fs::file_size(d1 / e.path) == e.bytes);

    const auto r = run_tunneling(c, nullptr);
    CHECK(r.stats.reflected == 3);  // still 110 from the crest, beyond the 60 margin
    CHECK(r.T_se < 1e-6);
    CHECK(r.overlays.size() == 3);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("measurement dependence: noiseless legs stay apart, control is bit-identical") {
    const auto c = parse_config(R"(
experiment: measurement_dependence
grid: {length: 1256.636, points: 1024}
soliton: {amplitude: 0.1, velocity: 0.0604, position: -110}
potential: {type: gaussian, height: 1.0e-3, width: 20}
noise: {amplitude: 0}
evolution: {dt: 0.2, t_end: 100, snapshots: [0, 100]}
probe: {position: -450, realizations: [1], front_threshold: 1.0e-10}
)");
    const auto dir = scratch("meas0");
    ProductWriter out(dir);
    const auto r = run_measurement_dependence(c, &out);
    out.finish();
    REQUIRE(r.pairs.size() == 1);
    const auto& p = r.pairs[0];
    REQUIRE(p.control_identical.has_value());
    CHECK(*p.control_identical);
    for (const auto& f : p.front) CHECK(f.peak <= 1e-10);
    CHECK(std::abs(p.X_a - p.X_b) <= 1e-9);
    CHECK(p.a == p.b);
    CHECK_FALSE(p.flipped);
    CHECK(fs::exists(dir / "pair_00" / "front.csv"));
    CHECK(fs::exists(dir / "pair_00" / "delta_0001.grsf"));
    fs::remove_all(dir);
}

TEST_CASE("measurement dependence: the difference starts at the probe") {
    const auto c = parse_config(R"(
experiment: measurement_dependence
grid: {length: 1256.636, points: 1024}
soliton: {amplitude: 0.1, velocity: 0.0604, position: -110}
potential: {type: gaussian, height: 1.0e-3, width: 20}
noise: {amplitude: 0.01, seed: 0}
evolution: {dt: 0.2, t_end: 200}
probe: {position: -450, realizations: [3], front_interval: 10, control: false}
)");
    const auto r = run_measurement_dependence(c, nullptr);
    const auto& p = r.pairs.at(0);
    CHECK_FALSE(p.control_identical.has_value());
    REQUIRE(p.front.size() == 21);
    CHECK(p.front[0].peak <= 1e-15);
    // support stays near the probe early on and grows at a finite speed
    CHECK(p.front[2].radius > 0.0);
    CHECK(p.front[2].radius < 120.0);
    CHECK(p.front.back().radius > p.front[2].radius);
    CHECK(p.front_speed > 0.5);
    CHECK(p.front_speed < 4.0);
}

TEST_CASE("uncertainty window products") {
    const auto c = parse_config(R"(
experiment: uncertainty_window
soliton: {amplitude: 0.18}
noise: {amplitude: 0.0064, seed: 1}
uncertainty: {windows: [10, 40], realizations: 20}
)");
    const auto dir = scratch("unc");
    run_experiment(c, dir);
    const auto l = column(dir / "uncertainty.csv", 0);
    CHECK(l == std::vector<std::string>{"10", "40"});
    CHECK(slurp(dir / "summary.yaml").find("theory_product") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("stability scan rows") {
    const auto c = parse_config(R"(
experiment: stability_scan
grid: {length: 628.3185307179586, points: 128}
evolution: {dt: 0.1, t_end: 900}
stability: {amplitude: 0.1, q: [0.14, 0.3], spectrum_points: 10}
)");
    const auto dir = scratch("stab");
    ProductWriter out(dir);
    const auto r = run_stability_scan(c, &out);
    out.finish();
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].passed);
    CHECK(r.rows[0].rel_error <= 0.05);
    CHECK(r.rows[1].passed);
    CHECK_FALSE(r.rows[1].measured.growing);
    CHECK(column(dir / "spectrum.csv", 0).size() == 10);
    CHECK(fs::exists(dir / "growth" / "mode_0001.csv"));
    fs::remove_all(dir);
}

TEST_CASE("a config error is thrown before any output is written") {
    auto c = parse_config(kTunneling);
    c.ensemble.observation_times = {0, 13.3};
    const auto dir = scratch("bad");
    CHECK_THROWS_AS(run_experiment(c, dir), ConfigError);
    CHECK_FALSE(fs::exists(dir));
}
