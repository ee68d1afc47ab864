#include "gcsge/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <fmt/format.h>

#include "gcsge/errors.hpp"

namespace gcsge {

using std::numbers::pi;

double effective_hbar(double noise) { return 2.0 / 3.0 * pi * noise * noise; }

double position_spread(double amplitude, double noise) {
    return std::sqrt(noise * noise * pi * pi / (12.0 * amplitude * amplitude * amplitude));
}

double momentum_spread(double amplitude, double noise) {
    return std::sqrt(4.0 / 3.0 * amplitude * amplitude * amplitude * noise * noise);
}

double Wavefunction::norm() const {
    double s = 0.0;
    for (const auto& z : psi.values) s += std::norm(z);
    return s * psi.grid.dx();
}

RealField gaussian_density(const Grid& grid, double center, double sigma) {
    if (!(sigma > 0.0)) throw ConfigError(fmt::format("Gaussian width must be > 0, got {}", sigma));
    RealField rho(grid);
    const double c = 1.0 / (std::sqrt(2.0 * pi) * sigma);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double d = grid.displacement(grid.x(j), center);
        rho[j] = c * std::exp(-d * d / (2.0 * sigma * sigma));
    }
    return rho;
}

double phase_wavenumber(double v0, double amplitude, double noise) {
    return amplitude * v0 / effective_hbar(noise);
}

Wavefunction build_initial(const RealField& rho0, double v0, double amplitude, double noise, const WarningFn& warn) {
    if (!(amplitude > 0.0 && amplitude < 1.0)) throw ParameterError(fmt::format("w' must lie in (0, 1), got {}", amplitude));
    if (!(noise > 0.0)) throw ConfigError("the soliton Schrodinger equation needs eps > 0");
    for (double r : rho0.values) {
        if (!(r >= 0.0)) throw ConfigError("initial density must be non-negative");
    }
    const double mass = integrate(rho0);
    if (!(mass > 0.0)) throw ConfigError("initial density has zero mass");
    double scale = 1.0;
    if (std::abs(mass - 1.0) > 1e-12) {
        const auto msg = fmt::format("initial density integrates to {:.12g}; normalizing", mass);
        if (warn) warn(msg);
        else fmt::print(stderr, "warning: {}\n", msg);
        scale = 1.0 / mass;
    }

    Wavefunction w;
    w.amplitude = amplitude;
    w.noise = noise;
    w.psi = ComplexField(rho0.grid);
    const double k = phase_wavenumber(v0, amplitude, noise);
    const Grid& g = rho0.grid;
    for (std::size_t j = 0; j < g.size(); ++j) {
        w.psi[j] = std::sqrt(scale * rho0[j]) * std::polar(1.0, k * g.x(j));
    }
    return w;
}

double rms_wavenumber(const ComplexField& psi) {
    const auto spec = forward_transform(psi);
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < spec.size(); ++n) {
        const double p = std::norm(spec[n]);
        const double k = psi.grid.wavenumber(n);
        num += k * k * p;
        den += p;
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

void SeConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError(fmt::format("dt must be > 0, got {}", dt));
    if (!(t_end >= 0.0)) throw ConfigError("t_end must be >= 0");
    steps_for(t_end, dt);
    double prev = -1.0;
    for (double t : snapshot_times) {
        if (!(t >= 0.0 && t <= t_end * (1 + 1e-12))) {
            throw ConfigError(fmt::format("snapshot time {} outside [0, t_end = {}]", t, t_end));
        }
        if (!(t > prev)) throw ConfigError("snapshot times must be strictly increasing");
        steps_for(t, dt);
        prev = t;
    }
}

std::vector<Wavefunction> evolve_se(const Wavefunction& psi0, const RealField& Vp, const SeConfig& cfg) {
    cfg.validate();
    const Grid& g = psi0.psi.grid;
    if (!(Vp.grid == g)) throw ConfigError("V_p is sampled on a different grid than psi");
    const double krms = rms_wavenumber(psi0.psi);
    if (krms > 0.0) {
        const double ppw = 2.0 * pi / (krms * g.dx());
        if (ppw < cfg.min_points_per_wavelength) {
            throw ConfigError(fmt::format("phase under-resolved: {:.3g} points per wavelength (need >= {})", ppw,
                                          cfg.min_points_per_wavelength));
        }
    }

    const std::size_t n = g.size();
    const double w = psi0.amplitude, eps2 = psi0.noise * psi0.noise;
    const double kin_coef = pi * eps2 / (3.0 * w);
    const double pot_coef = 3.0 / (2.0 * pi * eps2);
    ComplexBuffer kinetic(n), half(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double k = g.wavenumber(m);
        kinetic[m] = std::polar(1.0, -kin_coef * k * k * cfg.dt);
        half[m] = std::polar(1.0, -0.5 * pot_coef * Vp[m] * cfg.dt);
    }

    Spectral fft(n);
    ComplexBuffer a = psi0.psi.values, b(n);
    std::vector<std::size_t> snaps;
    for (double t : cfg.snapshot_times) snaps.push_back(steps_for(t, cfg.dt));
    const std::size_t total = steps_for(cfg.t_end, cfg.dt);

    std::vector<Wavefunction> out;
    auto emit = [&](std::size_t s) {
        Wavefunction wf = psi0;
        wf.psi.values = a;
        wf.t = psi0.t + static_cast<double>(s) * cfg.dt;
        out.push_back(std::move(wf));
    };
    std::size_t next = 0;
    for (std::size_t s = 0;; ++s) {
        while (next < snaps.size() && snaps[next] == s) {
            emit(s);
            ++next;
        }
        if (s == total) break;
        for (std::size_t j = 0; j < n; ++j) a[j] *= half[j];
        fft.forward(a, b);
        for (std::size_t m = 0; m < n; ++m) b[m] *= kinetic[m];
        fft.inverse(b, a);
        for (std::size_t j = 0; j < n; ++j) a[j] *= half[j];
    }
    return out;
}

MadelungFields madelung(const Wavefunction& w, double mask_fraction) {
    const Grid& g = w.psi.grid;
    const ComplexField dpsi = spectral_derivative(w.psi, 1);
    const double floor = mask_fraction * max_abs(w.psi.span());
    const double c = w.hbar() / w.amplitude;
    MadelungFields m{RealField(g), RealField(g), RealField(g), std::vector<bool>(g.size(), false)};
    for (std::size_t j = 0; j < g.size(); ++j) {
        const cplx z = w.psi[j];
        const double r = std::norm(z);
        m.rho[j] = r;
        m.current[j] = c * std::imag(std::conj(z) * dpsi[j]);
        if (std::abs(z) <= floor) m.masked[j] = true;
        else m.u[j] = m.current[j] / r;
    }
    return m;
}

BinnedDensity bin_madelung(const MadelungFields& m, const BinGrid& bins) {
    const Grid& g = m.rho.grid;
    BinnedDensity d;
    d.bins = bins;
    d.rho.assign(bins.count, 0.0);
    d.u.assign(bins.count, 0.0);
    d.count.assign(bins.count, 0);
    d.rho_se.assign(bins.count, 0.0);
    d.u_se.assign(bins.count, 0.0);
    std::vector<double> mass(bins.count, 0.0), flux(bins.count, 0.0);
    std::vector<bool> live(bins.count, false);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const std::size_t b = bins.index(g.x(j));
        mass[b] += m.rho[j];
        flux[b] += m.current[j];
        ++d.count[b];
        if (!m.masked[j]) live[b] = true;
    }
    for (std::size_t b = 0; b < bins.count; ++b) {
        d.rho[b] = mass[b] * g.dx() / bins.width;
        if (live[b] && mass[b] > 0.0) d.u[b] = flux[b] / mass[b];
    }
    return d;
}

}  // namespace gcsge
