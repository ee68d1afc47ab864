#include "gcsge/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "gcsge/errors.hpp"

namespace gcsge {

NoiseConvention parse_noise_convention(const std::string& name) {
    if (name == "pointwise") return NoiseConvention::pointwise;
    if (name == "delta") return NoiseConvention::delta;
    throw ConfigError(fmt::format("unknown noise convention '{}' (expected pointwise or delta)", name));
}

const char* to_string(NoiseConvention c) { return c == NoiseConvention::pointwise ? "pointwise" : "delta"; }

ComplexField sample_noise(const NoiseSpec& spec, const Grid& grid) {
    if (!(spec.amplitude >= 0.0)) throw ConfigError("noise amplitude must be >= 0");
    ComplexField out(grid);
    if (spec.amplitude == 0.0) return out;
    double var = spec.amplitude * spec.amplitude;
    if (spec.convention == NoiseConvention::delta) var /= grid.dx();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5 * var));
    for (auto& z : out.values) {
        const double re = nd(rng);
        const double im = nd(rng);
        z = {re, im};
    }
    return out;
}

std::uint64_t realization_seed(std::uint64_t base_seed, std::uint64_t index) {
    std::uint64_t z = base_seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t BinGrid::index(double x) const {
    const double f = std::floor((x - origin) / width);
    if (f < 0.0) return 0;
    return std::min(static_cast<std::size_t>(f), count - 1);
}

BinGrid make_bins(const Grid& grid, double requested_width) {
    if (!(requested_width > 0.0) || requested_width > grid.length()) {
        throw ConfigError(fmt::format("bin width {} must lie in (0, L]", requested_width));
    }
    const auto count = static_cast<std::size_t>(std::max(1.0, std::round(grid.length() / requested_width)));
    return {-0.5 * grid.length(), grid.length() / static_cast<double>(count), count};
}

double BinnedDensity::mass_beyond(double x_crest) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < bins.count; ++i) {
        const double lo = bins.origin + static_cast<double>(i) * bins.width;
        const double hi = lo + bins.width;
        if (hi <= x_crest) continue;
        const double frac = lo >= x_crest ? 1.0 : (hi - x_crest) / bins.width;
        acc += frac * rho[i] * bins.width;
    }
    return acc;
}

void write_density_csv(std::ostream& os, const BinnedDensity& d) {
    os << "x_bin_center,rho,u\n";
    for (std::size_t i = 0; i < d.bins.count; ++i) {
        os << fmt::format("{:.17g},{:.17g},{:.17g}\n", d.bins.center(i), d.rho[i], d.u[i]);
    }
}

double transmission(const RealField& rho, double x_crest) {
    const Grid& g = rho.grid;
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = g.x(j);
        if (x > x_crest) acc += rho[j];
        else if (x == x_crest) acc += 0.5 * rho[j];
    }
    return acc * g.dx();
}

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::reflected: return "reflected";
        case Outcome::transmitted: return "transmitted";
        case Outcome::undecided: return "undecided";
        case Outcome::failed: return "failed";
    }
    return "?";
}

namespace {

template <typename It>
double sample_std(It first, It last) {
    const double n = static_cast<double>(std::distance(first, last));
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (auto it = first; it != last; ++it) mean += *it;
    mean /= n;
    double ss = 0.0;
    for (auto it = first; it != last; ++it) ss += (*it - mean) * (*it - mean);
    return std::sqrt(ss / (n - 1));
}

// Runs body(i) for i in [0, n) on `workers` threads; the first exception in
// index order is rethrown after all work finishes.
template <typename Body>
void parallel_for(std::size_t n, int workers, const ProgressFn& progress, Body&& body) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> done{0};
    const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, workers))
    for (long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
        const std::size_t d = ++done;
        if (progress) {
#pragma omp critical(gcsge_progress)
            progress(d, n);
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

void background_moments(const ComplexField& phi, double X, double half, double& m2, double& m4) {
    const Grid& g = phi.grid;
    double s2 = 0.0, s4 = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        if (std::abs(g.displacement(g.x(j), X)) <= half) continue;
        const double s = std::norm(phi[j]);
        s2 += s;
        s4 += s * s;
        ++n;
    }
    m2 = n ? s2 / static_cast<double>(n) : 0.0;
    m4 = n ? s4 / static_cast<double>(n) : 0.0;
}

std::size_t steps_for(double t, double dt) {
    const double n = t / dt;
    const double r = std::round(n);
    if (std::abs(n - r) > 1e-9 * std::max(1.0, r)) {
        throw ConfigError(fmt::format("observation time {} is not a multiple of dt = {}", t, dt));
    }
    return static_cast<std::size_t>(r);
}

void EnsembleConfig::validate() const {
    soliton.validate();
    evolution.validate();
    if (!(potential.grid == grid)) throw ConfigError("potential is sampled on a different grid");
    if (realizations < 1) throw ConfigError("at least one realization is required");
    if (!(noise >= 0.0)) throw ConfigError("noise amplitude must be >= 0");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (observation_times.empty()) throw ConfigError("at least one observation time is required");
    double prev = -1.0;
    for (double t : observation_times) {
        if (!(t >= 0.0 && t <= evolution.t_end * (1 + 1e-12))) {
            throw ConfigError(fmt::format("observation time {} outside [0, t_end = {}]", t, evolution.t_end));
        }
        if (!(t > prev)) throw ConfigError("observation times must be strictly increasing");
        steps_for(t, evolution.dt);
        prev = t;
    }
    if (!(window.length > 0.0) || window.length > grid.length()) throw ConfigError("window length must lie in (0, L]");
    make_bins(grid, bin_width);
    if (barrier && !(barrier->margin >= 0.0)) throw ConfigError("barrier margin must be >= 0");
}

ComplexField initial_field(const EnsembleConfig& cfg, std::size_t index) {
    const Grid& g = cfg.grid;
    ComplexField phi = soliton_profile(cfg.soliton, 0.0, g);
    const ComplexField noise = sample_noise({cfg.noise, cfg.convention, realization_seed(cfg.base_seed, index)}, g);
    for (std::size_t j = 0; j < g.size(); ++j) phi[j] += noise[j];
    return phi;
}

RealizationRecord run_realization(const EnsembleConfig& cfg, std::size_t index, const Observer& observer,
                                  SolitonTrack* track) {
    RealizationRecord rec;
    rec.index = index;
    rec.seed = realization_seed(cfg.base_seed, index);
    const Grid& g = cfg.grid;

    ComplexField phi = initial_field(cfg, index);

    EvolutionConfig evo = cfg.evolution;
    evo.exec = kernels::Exec::serial;
    GcsgeIntegrator integrator(g, cfg.potential, evo);
    integrator.project(phi);
    SolitonTracker tracker(g, cfg.soliton.position, cfg.window);

    std::vector<std::size_t> obs;
    for (double t : cfg.observation_times) obs.push_back(steps_for(t, evo.dt));
    const std::size_t total = obs.back();
    std::size_t next = 0;
    try {
        for (std::size_t s = 0;; ++s) {
            const double t = static_cast<double>(s) * evo.dt;
            const bool observe = next < obs.size() && obs[next] == s;
            if (observe || s % evo.output_stride == 0) tracker.observe(t, phi);
            if (observe) {
                const auto& tr = tracker.track();
                rec.X.push_back(tr.X.back());
                rec.v.push_back(tr.v.back());
                double m2 = 0.0, m4 = 0.0;
                background_moments(phi, tr.X.back(), 0.5 * cfg.window.length, m2, m4);
                rec.background_m2.push_back(m2);
                rec.background_m4.push_back(m4);
                if (observer) observer(t, phi);
                ++next;
            }
            if (s == total) break;
            integrator.step(phi, t);
        }
    } catch (const SingularStateError& e) {
        rec.outcome = Outcome::failed;
        rec.failure_time = e.time();
        rec.X.clear();
        rec.v.clear();
        rec.background_m2.clear();
        rec.background_m4.clear();
        if (track) *track = tracker.finish();
        return rec;
    }
    if (track) *track = tracker.finish();

    rec.outcome = Outcome::undecided;
    if (cfg.barrier) {
        const double d = rec.X.back() - cfg.barrier->crest;
        if (d > cfg.barrier->margin) rec.outcome = Outcome::transmitted;
        else if (d < -cfg.barrier->margin) rec.outcome = Outcome::reflected;
    }
    return rec;
}

std::vector<RealizationRecord> run_realizations(const EnsembleConfig& cfg, const ProgressFn& progress) {
    cfg.validate();
    std::vector<RealizationRecord> out(cfg.realizations);
    parallel_for(cfg.realizations, cfg.workers, progress,
                 [&](std::size_t i) { out[i] = run_realization(cfg, i); });
    return out;
}

double EnsembleStats::transmission() const {
    const std::size_t decided = transmitted + reflected;
    if (decided == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(transmitted) / static_cast<double>(decided);
}

double EnsembleStats::transmission_error() const {
    const std::size_t decided = transmitted + reflected;
    if (decided == 0) return std::numeric_limits<double>::quiet_NaN();
    const double T = transmission();
    return std::sqrt(T * (1.0 - T) / static_cast<double>(decided));
}

EnsembleStats reduce(const EnsembleConfig& cfg, const std::vector<RealizationRecord>& records) {
    EnsembleStats s;
    s.times = cfg.observation_times;
    const std::size_t nt = s.times.size();
    std::vector<const RealizationRecord*> ok;
    for (const auto& r : records) {
        switch (r.outcome) {
            case Outcome::failed: ++s.failed; continue;
            case Outcome::transmitted: ++s.transmitted; break;
            case Outcome::reflected: ++s.reflected; break;
            case Outcome::undecided: ++s.undecided; break;
        }
        ok.push_back(&r);
    }
    const BinGrid bins = make_bins(cfg.grid, cfg.bin_width);
    const double n = static_cast<double>(ok.size());
    const double w = cfg.soliton.amplitude;

    for (std::size_t k = 0; k < nt; ++k) {
        BinnedDensity d;
        d.bins = bins;
        d.rho.assign(bins.count, 0.0);
        d.u.assign(bins.count, 0.0);
        d.count.assign(bins.count, 0);
        d.rho_se.assign(bins.count, 0.0);
        d.u_se.assign(bins.count, 0.0);
        std::vector<double> sum_v(bins.count, 0.0), sum_v2(bins.count, 0.0);
        std::vector<double> xs, vs;
        double m2 = 0.0, m4 = 0.0;
        for (const auto* r : ok) {
            const std::size_t b = bins.index(cfg.grid.wrap(r->X[k]));
            ++d.count[b];
            sum_v[b] += r->v[k];
            sum_v2[b] += r->v[k] * r->v[k];
            xs.push_back(r->X[k]);
            vs.push_back(r->v[k]);
            m2 += r->background_m2[k];
            m4 += r->background_m4[k];
        }
        for (std::size_t b = 0; b < bins.count; ++b) {
            const double c = static_cast<double>(d.count[b]);
            if (c == 0.0) continue;
            const double p = c / n;
            d.rho[b] = p / bins.width;
            d.rho_se[b] = std::sqrt(p * (1.0 - p) / n) / bins.width;
            d.u[b] = sum_v[b] / c;
            if (c >= 2.0) {
                const double var = std::max(0.0, (sum_v2[b] - c * d.u[b] * d.u[b]) / (c - 1.0));
                d.u_se[b] = std::sqrt(var / c);
            }
        }
        s.density.push_back(std::move(d));
        double mx = 0.0, mv = 0.0;
        for (double x : xs) mx += x;
        for (double v : vs) mv += v;
        s.mean_X.push_back(n > 0 ? mx / n : 0.0);
        s.mean_v.push_back(n > 0 ? mv / n : 0.0);
        s.sigma_X.push_back(sample_std(xs.begin(), xs.end()));
        s.sigma_P.push_back(w * sample_std(vs.begin(), vs.end()));
        m2 = n > 0 ? m2 / n : 0.0;
        m4 = n > 0 ? m4 / n : 0.0;
        s.background_m2.push_back(m2);
        s.background_kurtosis.push_back(m2 > 0.0 ? m4 / (m2 * m2) : 0.0);
    }
    return s;
}

EnsembleStats run_ensemble(const EnsembleConfig& cfg, const ProgressFn& progress) {
    return reduce(cfg, run_realizations(cfg, progress));
}

void write_records_csv(std::ostream& os, const std::vector<double>& times,
                       const std::vector<RealizationRecord>& records) {
    os << "index,seed,outcome";
    for (double t : times) os << fmt::format(",X_{0:g},v_{0:g}", t);
    os << '\n';
    for (const auto& r : records) {
        os << fmt::format("{},{},{}", r.index, r.seed, to_string(r.outcome));
        for (std::size_t k = 0; k < times.size(); ++k) {
            if (k < r.X.size()) os << fmt::format(",{:.17g},{:.17g}", r.X[k], r.v[k]);
            else os << ",,";
        }
        os << '\n';
    }
}

void write_summary_csv(std::ostream& os, const EnsembleStats& s) {
    os << "t,sigma_X,sigma_P,product\n";
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", s.times[k], s.sigma_X[k], s.sigma_P[k],
                          s.sigma_X[k] * s.sigma_P[k]);
    }
}

void write_moments_csv(std::ostream& os, const EnsembleStats& s) {
    os << "t,mean_X,mean_v,background_m2,background_kurtosis\n";
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.times[k], s.mean_X[k], s.mean_v[k],
                          s.background_m2[k], s.background_kurtosis[k]);
    }
}

void UncertaintyConfig::validate() const {
    SolitonParams{amplitude, 0.0, 0.0}.validate();
    if (!(noise > 0.0)) throw ConfigError("uncertainty scan needs noise > 0");
    if (realizations < 2) throw ConfigError("uncertainty scan needs at least two realizations");
    if (windows.empty()) throw ConfigError("uncertainty scan needs at least one window length");
    for (double l : windows) {
        if (!(l > 0.0) || l > grid.length()) throw ConfigError(fmt::format("window length {} outside (0, L]", l));
    }
    if (!(measure_time >= 0.0)) throw ConfigError("measure_time must be >= 0");
    if (measure_time > 0.0) {
        EvolutionConfig e = evolution;
        e.t_end = measure_time;
        e.validate();
    }
    if (workers < 1) throw ConfigError("workers must be >= 1");
}

UncertaintyResult uncertainty_scan(const UncertaintyConfig& cfg, const ProgressFn& progress) {
    cfg.validate();
    const Grid& g = cfg.grid;
    const double w = cfg.amplitude, eps = cfg.noise;
    const std::size_t nl = cfg.windows.size(), n = cfg.realizations;
    const double lw = default_window(w, eps, g.length());

    // per realization: X_fixed(l), X_located(l) for every l, then X at lw and v
    std::vector<std::vector<double>> samples(n);
    parallel_for(n, cfg.workers, progress, [&](std::size_t i) {
        ComplexField phi = soliton_profile({w, 0.0, 0.0}, 0.0, g);
        const ComplexField noise = sample_noise({eps, cfg.convention, realization_seed(cfg.base_seed, i)}, g);
        for (std::size_t j = 0; j < g.size(); ++j) phi[j] += noise[j];
        EvolutionConfig evo = cfg.evolution;
        evo.exec = kernels::Exec::serial;
        evo.t_end = cfg.measure_time;
        GcsgeIntegrator integrator(g, RealField(g), evo);
        integrator.project(phi);
        const std::size_t steps = cfg.measure_time > 0.0 ? evo.step_count() : 0;
        for (std::size_t s = 0; s < steps; ++s) integrator.step(phi, static_cast<double>(s) * evo.dt);

        auto& out = samples[i];
        for (double l : cfg.windows) {
            const WindowSpec win{l, eps, w};
            out.push_back(estimate_position(phi, 0.0, win).value);
            out.push_back(locate_soliton(phi, 0.0, win).value);
        }
        const WindowSpec win{lw, eps, w};
        out.push_back(estimate_position(phi, 0.0, win).value);
        const double X = locate_soliton(phi, 0.0, win).value;
        out.push_back(estimate_velocity(phi, X, win).value);
    });

    UncertaintyResult r;
    r.theory_var_X = eps * eps * std::numbers::pi * std::numbers::pi / (12.0 * w * w * w);
    r.theory_sigma_P = std::sqrt(4.0 / 3.0 * w * w * w * eps * eps);
    r.window = lw;
    const double dn = static_cast<double>(n);
    for (std::size_t il = 0; il < nl; ++il) {
        double sf = 0.0, sl = 0.0;
        for (const auto& s : samples) {
            sf += s[2 * il] * s[2 * il];
            sl += s[2 * il + 1] * s[2 * il + 1];
        }
        r.rows.push_back({cfg.windows[il], sf / dn, sl / dn});
    }
    double sx = 0.0;
    std::vector<double> vs;
    for (const auto& s : samples) {
        sx += s[2 * nl] * s[2 * nl];
        vs.push_back(s[2 * nl + 1]);
    }
    r.sigma_X = std::sqrt(sx / dn);
    r.sigma_P = w * sample_std(vs.begin(), vs.end());
    return r;
}

void write_uncertainty_csv(std::ostream& os, const UncertaintyResult& r) {
    os << "l,var_X,var_X_located,theory\n";
    for (const auto& row : r.rows) {
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", row.l, row.var_fixed, row.var_located, r.theory_var_X);
    }
}

}  // namespace gcsge
