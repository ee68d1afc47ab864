#include "gcsge/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "gcsge/errors.hpp"
#include "gcsge/integrator.hpp"

namespace gcsge {

using std::numbers::pi;

void SolitonParams::validate() const {
    if (!(amplitude > 0.0 && amplitude < 1.0)) {
        throw ParameterError(fmt::format("soliton amplitude must lie in (0, 1), got {}", amplitude));
    }
    if (!std::isfinite(velocity) || !std::isfinite(position)) {
        throw ParameterError("soliton velocity and position must be finite");
    }
}

double SolitonParams::width() const { return pi / std::sqrt(6.0 * amplitude); }

std::optional<double> SolitonParams::wavelength() const {
    if (velocity == 0.0) return std::nullopt;
    return 4.0 * pi / std::abs(velocity);
}

double soliton_mass(double amplitude) {
    if (!(amplitude > 0.0 && amplitude < 1.0)) throw ParameterError("soliton amplitude must lie in (0, 1)");
    return std::asin(amplitude) / std::sqrt(1.0 - amplitude * amplitude);
}

ComplexField soliton_profile(const SolitonParams& p, double t, const Grid& grid) {
    p.validate();
    const double w = p.amplitude;
    const double X = p.position + p.velocity * t;
    const double k = 0.5 * p.velocity;
    const double temporal = p.frequency() * t;
    ComplexField out(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double d = grid.displacement(grid.x(j), X);
        out[j] = std::polar(w / std::cosh(w * d), k * d + temporal);
    }
    return out;
}

RealField momentum_density(const ComplexField& phi) {
    const double amax = max_abs(phi.span());
    if (!(amax < kSingularAmplitude)) {
        throw SingularStateError(fmt::format("max|phi| = {:.6g} is singular", amax), 0.0, amax);
    }
    const ComplexField phix = spectral_derivative(phi, 1);
    RealField p(phi.grid);
    for (std::size_t j = 0; j < phi.size(); ++j) {
        p[j] = (std::conj(phi[j]) * phix[j]).imag() / (1.0 - std::norm(phi[j]));
    }
    return p;
}

namespace {

double weight(double s, PotentialWeighting w) {
    return w == PotentialWeighting::charge ? s / (1.0 - s) : s;
}

}  // namespace

double potential_energy(const RealField& V, const SolitonParams& p, PotentialWeighting weighting) {
    p.validate();
    const Grid& g = V.grid;
    const double w = p.amplitude;
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double d = g.displacement(g.x(j), p.position);
        const double s = std::pow(w / std::cosh(w * d), 2);
        acc += weight(s, weighting) * V[j];
    }
    return acc * g.dx();
}

RealField potential_energy_field(const RealField& V, double amplitude, PotentialWeighting weighting) {
    SolitonParams{amplitude, 0.0, 0.0}.validate();
    const Grid& g = V.grid;
    RealField kernel(g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double s = std::pow(amplitude / std::cosh(amplitude * g.x(j)), 2);
        kernel[j] = weight(s, weighting);
    }
    // The soliton weight is even, so correlation and convolution coincide.
    return periodic_convolution(V, kernel);
}

double default_window(double amplitude, double noise, double domain_length) {
    const double lower = pi / std::sqrt(6.0 * amplitude);
    double l = 2.0 * std::atanh(0.99) / amplitude;
    if (noise > 0.0) {
        const double upper = std::cbrt(4.0 * pi * pi / (3.0 * amplitude * noise * noise));
        l = std::min(l, 0.5 * upper);
    }
    l = std::max(l, 2.0 * lower);
    return std::min(l, 0.5 * domain_length);
}

namespace {

void check_window(const Grid& g, const WindowSpec& w) {
    if (!(w.length > 0.0) || w.length > g.length()) {
        throw ConfigError(fmt::format("window length {} must lie in (0, L = {}]", w.length, g.length()));
    }
    if (!(w.amplitude > 0.0 && w.amplitude < 1.0)) throw ParameterError("window amplitude must lie in (0, 1)");
}

// Calls f(j, d, weight) for every node contributing to the integral over
// [-l/2, l/2] around center. Weights integrate the piecewise-linear
// interpolant exactly up to the window edges (in units of dx), so the
// estimate varies smoothly with center and interior nodes get weight 1.
template <typename F>
void for_window(const Grid& g, double center, double length, F&& f) {
    const double half = 0.5 * length;
    const double dx = g.dx();
    // int_a^b (c - x) dx for the falling hat, int_a^b (x - c) dx for the rising one
    auto falling = [](double c, double a, double b) { return c * (b - a) - 0.5 * (b * b - a * a); };
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double d = g.displacement(g.x(j), center);
        double wt = 0.0;
        const double rl = std::max(d, -half), rh = std::min(d + dx, half);
        if (rh > rl) wt += falling(d + dx, rl, rh);
        const double ll = std::max(d - dx, -half), lh = std::min(d, half);
        if (lh > ll) wt -= falling(d - dx, ll, lh);
        if (wt > 0.0) f(j, d, wt / (dx * dx));
    }
}

}  // namespace

Estimate estimate_position(const ComplexField& phi, double center, const WindowSpec& w) {
    const Grid& g = phi.grid;
    check_window(g, w);
    const double eps2 = w.noise * w.noise;
    double moment = 0.0;
    double smax = 0.0;
    for_window(g, center, w.length, [&](std::size_t j, double d, double wt) {
        const double s = std::norm(phi[j]);
        smax = std::max(smax, s);
        moment += wt * d * (s - eps2);
    });
    const double value = center + moment * g.dx() / (2.0 * w.amplitude);
    return {value, smax < 0.25 * w.amplitude * w.amplitude};
}

Estimate locate_soliton(const ComplexField& phi, double guess, const WindowSpec& w, int max_iterations) {
    const double tol = 1e-9 * phi.grid.dx();
    Estimate e{guess, false};
    for (int i = 0; i < max_iterations; ++i) {
        const double prev = e.value;
        e = estimate_position(phi, prev, w);
        if (std::abs(e.value - prev) <= tol) break;
    }
    return e;
}

Estimate estimate_velocity(const ComplexField& phi, const ComplexField& phi_x, double center,
                           const WindowSpec& w) {
    const Grid& g = phi.grid;
    check_window(g, w);
    const double floor = w.amp_floor < 0.0 ? w.noise : w.amp_floor;
    const double a = w.amplitude;
    double acc = 0.0;
    double smax = 0.0;
    double captured = 0.0;  // window quadrature of |phi_s|^2 centred on the window
    for_window(g, center, w.length, [&](std::size_t j, double d, double wt) {
        captured += wt * std::pow(a / std::cosh(a * d), 2);
        const double s = std::norm(phi[j]);
        smax = std::max(smax, s);
        if (s <= floor * floor || s == 0.0) return;
        const double grad = (std::conj(phi[j]) * phi_x[j]).imag() / s;
        // no eps^2 offset here: the background carries no mean phase gradient,
        // so subtracting eps^2 times the soliton's gradient would bias v low
        acc += wt * grad * s;
    });
    return {2.0 * acc / captured, smax < 0.25 * a * a};
}

Estimate estimate_velocity(const ComplexField& phi, double center, const WindowSpec& w) {
    return estimate_velocity(phi, spectral_derivative(phi, 1), center, w);
}

void SolitonTrack::compute_accelerations() {
    const std::size_t n = t.size();
    a.assign(n, 0.0);
    if (n < 2) return;
    a[0] = (v[1] - v[0]) / (t[1] - t[0]);
    a[n - 1] = (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) a[i] = (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]);
}

SolitonTracker::SolitonTracker(const Grid& grid, double initial_position, WindowSpec window)
    : fft_(grid.size()), phix_(grid), hat_(grid.size()), window_(window), center_(initial_position) {
    check_window(grid, window_);
}

void SolitonTracker::observe(double t, const ComplexField& phi) {
    const Grid& g = phi.grid;
    const auto fine = locate_soliton(phi, center_, window_);
    fft_.forward(phi.values, hat_);
    for (std::size_t n = 0; n < g.size(); ++n) {
        hat_[n] *= g.is_nyquist(n) ? cplx{0.0, 0.0} : cplx{0.0, g.wavenumber(n)};
    }
    fft_.inverse(hat_, phix_.values);
    const auto vel = estimate_velocity(phi, phix_, fine.value, window_);
    center_ = fine.value;
    track_.t.push_back(t);
    track_.X.push_back(fine.value);
    track_.v.push_back(vel.value);
    track_.low_confidence.push_back(fine.low_confidence);
}

SolitonTrack SolitonTracker::finish() {
    track_.compute_accelerations();
    return track_;
}

void write_track_csv(std::ostream& os, const SolitonTrack& track) {
    os << "t,X,v,a\n";
    for (std::size_t i = 0; i < track.size(); ++i) {
        const double a = i < track.a.size() ? track.a[i] : 0.0;
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", track.t[i], track.X[i], track.v[i], a);
    }
}

}  // namespace gcsge
