#include "gcsge/stability.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "gcsge/errors.hpp"

namespace gcsge {

void PlaneWaveParams::validate() const {
    if (!(amplitude > 0.0 && amplitude < 1.0)) {
        throw ParameterError(fmt::format("plane wave amplitude must lie in (0, 1), got {}", amplitude));
    }
    if (!std::isfinite(wavenumber)) throw ParameterError("plane wave wavenumber must be finite");
}

double PlaneWaveParams::frequency() const {
    const double w2 = amplitude * amplitude;
    return 1.0 - 2.0 * w2 + w2 * w2 + wavenumber * wavenumber;
}

GrowthPair growth_rate(const PlaneWaveParams& p, double q) {
    p.validate();
    const double w = p.amplitude;
    const double disc = 4.0 * w * w - q * q;
    const cplx root = disc >= 0.0 ? cplx{std::sqrt(disc), 0.0} : cplx{0.0, std::sqrt(-disc)};
    const cplx branch = (1.0 - w * w) * q * root;
    const cplx drift{0.0, -2.0 * p.wavenumber * q};
    return {branch + drift, -branch + drift};
}

MaxGrowth max_growth(const PlaneWaveParams& p) {
    p.validate();
    const double w = p.amplitude;
    return {std::numbers::sqrt2 * w, 2.0 * w * w * (1.0 - w * w)};
}

GrowthSpectrum growth_spectrum(const PlaneWaveParams& p, const std::vector<double>& qs) {
    GrowthSpectrum s;
    s.q = qs;
    s.lambda.reserve(qs.size());
    for (double q : qs) s.lambda.push_back(growth_rate(p, q));
    return s;
}

bool has_unstable_mode(const PlaneWaveParams& p, const Grid& grid) {
    p.validate();
    const double dq = 2.0 * std::numbers::pi / grid.length();
    for (std::size_t n = 1; n <= grid.size() / 2; ++n) {
        if (growth_rate(p, dq * static_cast<double>(n)).plus.real() > 0.0) return true;
    }
    return false;
}

ComplexField seeded_plane_wave(const PlaneWaveParams& p, double q, double delta, const Grid& grid) {
    p.validate();
    ComplexField phi(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double x = grid.x(j);
        phi[j] = std::polar(p.amplitude * (1.0 + delta * std::cos(q * x)), p.wavenumber * x);
    }
    return phi;
}

cplx modulus_mode(const ComplexField& phi, double q) {
    const Grid& g = phi.grid;
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < g.size(); ++j) acc += std::abs(phi[j]) * std::polar(1.0, -q * g.x(j));
    return 2.0 * acc / static_cast<double>(g.size());
}

namespace {

bool on_grid(const Grid& g, double q) {
    const double n = q * g.length() / (2.0 * std::numbers::pi);
    return q > 0.0 && std::abs(n - std::round(n)) <= 1e-9 * std::max(1.0, n) && q <= g.k_max();
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

GrowthMeasurement measure_growth(const PlaneWaveParams& p, double q, double delta, const Grid& grid,
                                 const EvolutionConfig& cfg) {
    p.validate();
    if (!on_grid(grid, q)) {
        throw ConfigError(fmt::format("q = {} is not a resolved wavenumber of the grid (L = {})", q, grid.length()));
    }
    if (!(delta >= 0.0 && delta < 1e-2)) throw ConfigError("seed modulation delta must lie in [0, 1e-2)");

    GrowthMeasurement m;
    std::vector<cplx> modes;
    evolve(seeded_plane_wave(p, q, delta, grid), RealField(grid), cfg, [&](double t, const ComplexField& phi) {
        const cplx c = modulus_mode(phi, q);
        m.t.push_back(t);
        m.amplitude.push_back(std::abs(c));
        // undo the -2ikq rotation of both branches
        modes.push_back(c * std::polar(1.0, 2.0 * p.wavenumber * q * t));
    });

    if (delta == 0.0) return m;
    const double base = delta * p.amplitude;
    const double lo = 10.0 * base, hi = 1e3 * base;
    std::size_t cross = m.t.size();
    double peak = 0.0;
    for (std::size_t i = 0; i < m.t.size(); ++i) {
        peak = std::max(peak, m.amplitude[i]);
        if (m.amplitude[i] > hi) {
            cross = i;
            break;
        }
    }

    if (cross < m.t.size()) {
        std::vector<double> ts, logs;
        for (std::size_t i = 0; i < cross; ++i) {
            if (m.amplitude[i] > 0.1 * p.amplitude) throw FitWindowError("mode left the linear regime before the fit");
            if (m.amplitude[i] >= lo) {
                ts.push_back(m.t[i]);
                logs.push_back(std::log(m.amplitude[i]));
            }
        }
        if (ts.size() < 3) {
            throw FitWindowError(fmt::format("only {} samples in the fit window; reduce output_stride", ts.size()));
        }
        m.growing = true;
        m.rate = fit_slope(ts, logs);
        m.fit_begin = ts.front();
        m.fit_end = ts.back();
        return m;
    }

    if (peak > lo) {
        throw FitWindowError("mode grew past 10 delta w' but not to 1e3 delta w'; extend t_end");
    }
    // Zero crossings of the demodulated mode, linearly interpolated.
    std::vector<double> crossings;
    for (std::size_t i = 1; i < modes.size(); ++i) {
        const double a = modes[i - 1].real(), b = modes[i].real();
        if ((a < 0.0) != (b < 0.0)) crossings.push_back(m.t[i - 1] + (m.t[i] - m.t[i - 1]) * a / (a - b));
    }
    if (crossings.size() >= 3) {
        m.frequency = std::numbers::pi * static_cast<double>(crossings.size() - 1) /
                      (crossings.back() - crossings.front());
    }
    return m;
}

void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows) {
    os << "q,re_lambda,im_lambda,measured_rate\n";
    for (const auto& r : rows) {
        os << fmt::format("{:.17g},{:.17g},{:.17g},", r.q, r.lambda.plus.real(), r.lambda.plus.imag());
        if (r.measured) os << fmt::format("{:.17g}", *r.measured);
        os << '\n';
    }
}

}  // namespace gcsge
