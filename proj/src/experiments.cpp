#include "gcsge/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "gcsge/errors.hpp"
#include "gcsge/integrator.hpp"
#include "gcsge/potential.hpp"
#include "gcsge/schrodinger.hpp"

namespace gcsge {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

using Summary = std::vector<std::pair<std::string, std::string>>;

void write_summary(ProductWriter* out, const Summary& s) {
    if (!out) return;
    out->text("summary.yaml", [&](std::ostream& os) {
        for (const auto& [k, v] : s) os << k << ": " << v << '\n';
    });
}

void log(const RunOptions& opt, const std::string& msg) {
    if (opt.log) opt.log(msg);
}

int workers_of(const ExperimentConfig& cfg, const RunOptions& opt) { return opt.workers > 0 ? opt.workers : cfg.workers; }

ProgressFn progress_logger(const RunOptions& opt, std::string what) {
    if (!opt.log) return {};
    return [opt, what](std::size_t done, std::size_t total) {
        const std::size_t step = std::max<std::size_t>(1, total / 20);
        if (done % step == 0 || done == total) opt.log(fmt::format("{}: {}/{}", what, done, total));
    };
}

// Steps the integrator to evo.t_end, calling on_track every output_stride
// steps (and at the end) and on_snapshot at each requested time.
template <class Track, class Snap>
void evolve_tracked(GcsgeIntegrator& integ, ComplexField& phi, const EvolutionConfig& evo,
                    const std::vector<double>& snapshots, Track&& on_track, Snap&& on_snapshot,
                    const RunOptions& opt) {
    const std::size_t total = evo.step_count();
    std::vector<std::size_t> snaps;
    for (double t : snapshots) snaps.push_back(steps_for(t, evo.dt));
    std::size_t next = 0;
    const std::size_t report = std::max<std::size_t>(1, total / 10);
    for (std::size_t s = 0;; ++s) {
        const double t = static_cast<double>(s) * evo.dt;
        if (s % evo.output_stride == 0 || s == total) on_track(t, phi);
        while (next < snaps.size() && snaps[next] == s) {
            on_snapshot(next, t, phi);
            ++next;
        }
        if (s == total) break;
        integ.step(phi, t);
        if ((s + 1) % report == 0) log(opt, fmt::format("t = {:g} / {:g}", (s + 1) * evo.dt, evo.t_end));
    }
}

double shape_error(const ComplexField& phi, double X, double w, double l) {
    const Grid& g = phi.grid;
    double num2 = 0.0, den = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double d = g.displacement(g.x(j), X);
        if (std::abs(d) > 0.5 * l) continue;
        const double ideal = w / std::cosh(w * d);
        const double diff = std::abs(phi[j]) - ideal;
        num2 += diff * diff;
        den += ideal * ideal;
    }
    return den > 0.0 ? std::sqrt(num2 / den) : 0.0;
}

// Offset of x past the start of a segment along the periodic axis, in [0, L).
double offset_in(double x, double begin, double L) {
    double o = std::fmod(x - begin, L);
    if (o < 0.0) o += L;
    return o;
}

Outcome label(double X, const std::optional<Barrier>& b) {
    if (!b) return Outcome::undecided;
    const double d = X - b->crest;
    if (d > b->margin) return Outcome::transmitted;
    if (d < -b->margin) return Outcome::reflected;
    return Outcome::undecided;
}

std::optional<Barrier> barrier_of(const PotentialSpec& spec, std::optional<double> margin) {
    const auto* gb = std::get_if<GaussianBarrier>(&spec);
    if (!gb) return std::nullopt;
    return Barrier{gb->center, margin.value_or(3.0 * gb->width)};
}

std::vector<double> union_times(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end(), [](double x, double y) { return std::abs(x - y) < 1e-9; }), a.end());
    return a;
}

}  // namespace

// ---------------------------------------------------------------- newton

NewtonReport run_newton(const ExperimentConfig& cfg, ProductWriter* out, const RunOptions& opt) {
    cfg.validate();
    const Grid g = cfg.grid.make();
    const RealField V = make_potential(cfg.potential, g);
    const auto evo = cfg.evolution.make();
    const double w = cfg.soliton.amplitude, m = soliton_mass(w);
    const WindowSpec win{default_window(w, 0.0, g.length()), 0.0, w};

    GcsgeIntegrator integ(g, V, evo);
    ComplexField phi = soliton_profile(cfg.soliton, 0.0, g);
    integ.project(phi);
    SolitonTracker tracker(g, cfg.soliton.position, win);

    NewtonReport r;
    evolve_tracked(
        integ, phi, evo, cfg.evolution.snapshots,
        [&](double t, const ComplexField& f) {
            tracker.observe(t, f);
            r.shape_error = std::max(r.shape_error, shape_error(f, tracker.position(), w, win.length));
        },
        [&](std::size_t i, double t, const ComplexField& f) {
            if (out) out->snapshot("snapshots/" + numbered("phi", i, "gcsf"), f, t);
        },
        opt);
    r.track = tracker.finish();

    auto Vp = [&](double X) { return potential_energy(V, {w, 0.0, X}); };
    const double h = 0.5;
    auto a_expected = [&](double X) { return -(Vp(X + h) - Vp(X - h)) / (2.0 * h) / m; };

    for (std::size_t i = 0; i < r.track.size(); ++i) {
        r.kinetic.push_back(0.5 * m * r.track.v[i] * r.track.v[i]);
        r.potential.push_back(Vp(r.track.X[i]));
        r.max_abs_acceleration = std::max(r.max_abs_acceleration, std::abs(r.track.a[i]));
    }
    const double E0 = r.kinetic[0] + r.potential[0];
    double scale = std::abs(E0);
    if (scale == 0.0) scale = *std::max_element(r.kinetic.begin(), r.kinetic.end());
    for (std::size_t i = 0; i < r.track.size(); ++i) {
        const double E = r.kinetic[i] + r.potential[i];
        if (scale > 0.0) r.energy_drift = std::max(r.energy_drift, std::abs(E - E0) / scale);
    }

    if (const auto* pl = std::get_if<PiecewiseLinear>(&cfg.potential)) {
        const auto& k = pl->knots;
        const double L = g.length();
        for (std::size_t s = 0; s < k.size(); ++s) {
            SegmentCheck seg;
            const auto& a = k[s];
            const auto& b = s + 1 < k.size() ? k[s + 1] : std::pair{k[0].first + L, k[0].second};
            seg.x_begin = a.first;
            seg.x_end = b.first;
            seg.slope = (b.second - a.second) / (b.first - a.first);
            const double len = b.first - a.first;
            double am = 0.0, ae = 0.0;
            for (std::size_t i = 0; i < r.track.size(); ++i) {
                const double o = offset_in(r.track.X[i], a.first, L);
                if (o < cfg.newton.segment_margin || o > len - cfg.newton.segment_margin) continue;
                ++seg.samples;
                am += r.track.a[i];
                ae += a_expected(r.track.X[i]);
            }
            if (seg.samples > 0) {
                seg.a_measured = am / static_cast<double>(seg.samples);
                seg.a_expected = ae / static_cast<double>(seg.samples);
            }
            seg.checked = seg.slope != 0.0 && seg.samples >= 3;
            if (seg.checked) seg.rel_error = std::abs(seg.a_measured - seg.a_expected) / std::abs(seg.a_expected);
            r.segments.push_back(seg);
        }
    }

    r.verdict_withheld = r.shape_error > cfg.newton.shape_tolerance;
    bool any = false, ok = true;
    for (const auto& s : r.segments) {
        if (!s.checked) continue;
        any = true;
        ok = ok && s.rel_error <= cfg.newton.tolerance;
    }
    if (std::holds_alternative<std::monostate>(cfg.potential)) {
        any = true;
        ok = r.max_abs_acceleration <= 1e-8;
    }
    r.passed = !r.verdict_withheld && any && ok && r.energy_drift <= cfg.newton.energy_tolerance;

    if (out) {
        out->snapshot("potential.grsf", V, 0.0);
        out->text("track.csv", [&](std::ostream& os) { write_track_csv(os, r.track); });
        out->text("energy.csv", [&](std::ostream& os) {
            os << "t,X,v,kinetic,potential,total\n";
            for (std::size_t i = 0; i < r.track.size(); ++i) {
                os << fmt::format("{},{},{},{},{},{}\n", num(r.track.t[i]), num(r.track.X[i]), num(r.track.v[i]),
                                  num(r.kinetic[i]), num(r.potential[i]), num(r.kinetic[i] + r.potential[i]));
            }
        });
        out->text("segments.csv", [&](std::ostream& os) {
            os << "x_begin,x_end,slope,samples,a_measured,a_expected,rel_error,checked\n";
            for (const auto& s : r.segments) {
                os << fmt::format("{},{},{},{},{},{},{},{}\n", num(s.x_begin), num(s.x_end), num(s.slope), s.samples,
                                  num(s.a_measured), num(s.a_expected), num(s.rel_error), s.checked ? 1 : 0);
            }
        });
        write_summary(out, {{"experiment", "newton"},
                            {"mass", num(m)},
                            {"energy_drift", num(r.energy_drift)},
                            {"shape_error", num(r.shape_error)},
                            {"max_abs_acceleration", num(r.max_abs_acceleration)},
                            {"verdict", r.verdict_withheld ? "withheld" : (r.passed ? "pass" : "fail")}});
    }
    return r;
}

// ---------------------------------------------------- chaotic background

BackgroundReport run_chaotic_background(const ExperimentConfig& cfg, ProductWriter* out, const RunOptions& opt) {
    cfg.validate();
    const Grid g = cfg.grid.make();
    const RealField V = make_potential(cfg.potential, g);
    const auto evo = cfg.evolution.make();
    const double w = cfg.soliton.amplitude, eps = cfg.noise.amplitude;
    const WindowSpec win{default_window(w, eps, g.length()), eps, w};

    EnsembleConfig ec;
    ec.grid = g;
    ec.soliton = cfg.soliton;
    ec.noise = eps;
    ec.convention = cfg.noise.convention;
    ec.base_seed = cfg.noise.seed;
    ComplexField phi = initial_field(ec, 0);

    GcsgeIntegrator integ(g, V, evo);
    integ.project(phi);
    SolitonTracker tracker(g, cfg.soliton.position, win);
    BackgroundReport r;
    try {
        evolve_tracked(
            integ, phi, evo, cfg.evolution.snapshots,
            [&](double t, const ComplexField& f) {
                tracker.observe(t, f);
                double m2 = 0.0, m4 = 0.0;
                background_moments(f, tracker.position(), 0.5 * win.length, m2, m4);
                r.t.push_back(t);
                r.m2.push_back(m2);
                r.kurtosis.push_back(m2 > 0.0 ? m4 / (m2 * m2) : 0.0);
            },
            [&](std::size_t i, double t, const ComplexField& f) {
                if (out) out->snapshot("snapshots/" + numbered("phi", i, "gcsf"), f, t);
            },
            opt);
    } catch (const SingularStateError& e) {
        r.failed = true;
        log(opt, fmt::format("singular state at t = {}", e.time()));
    }
    r.track = tracker.finish();
    for (double v : r.track.v) r.mean_v += v;
    if (r.track.size()) r.mean_v /= static_cast<double>(r.track.size());

    if (out) {
        out->text("track.csv", [&](std::ostream& os) { write_track_csv(os, r.track); });
        out->text("background.csv", [&](std::ostream& os) {
            os << "t,m2,kurtosis\n";
            for (std::size_t i = 0; i < r.t.size(); ++i) {
                os << fmt::format("{},{},{}\n", num(r.t[i]), num(r.m2[i]), num(r.kurtosis[i]));
            }
        });
        write_summary(out, {{"experiment", "chaotic_background"},
                            {"mean_v", num(r.mean_v)},
                            {"displacement_velocity", num(r.track.size() > 1 ? (r.track.X.back() - r.track.X.front()) /
                                                                                   (r.track.t.back() - r.track.t.front())
                                                                             : 0.0)},
                            {"window", num(win.length)},
                            {"failed", r.failed ? "true" : "false"}});
    }
    if (r.failed) throw NumericalError("chaotic_background run reached the singular threshold");
    return r;
}

// -------------------------------------------------------------- tunneling

EnsembleConfig tunneling_ensemble(const ExperimentConfig& cfg, int workers) {
    const Grid g = cfg.grid.make();
    EnsembleConfig ec;
    ec.grid = g;
    ec.soliton = cfg.soliton;
    ec.potential = make_potential(cfg.potential, g);
    ec.evolution = cfg.evolution.make();
    ec.observation_times = cfg.ensemble.observation_times;
    const double eps = cfg.noise.amplitude, w = cfg.soliton.amplitude;
    ec.window = {cfg.ensemble.window.value_or(default_window(w, eps, g.length())), eps, w};
    ec.bin_width = cfg.ensemble.bin_width;
    ec.realizations = cfg.ensemble.realizations;
    ec.base_seed = cfg.noise.seed;
    ec.noise = eps;
    ec.convention = cfg.noise.convention;
    ec.barrier = barrier_of(cfg.potential, cfg.ensemble.margin);
    ec.workers = workers;
    return ec;
}

TunnelingReport run_tunneling(const ExperimentConfig& cfg, ProductWriter* out, const RunOptions& opt) {
    cfg.validate();
    const EnsembleConfig ec = tunneling_ensemble(cfg, workers_of(cfg, opt));
    const auto& sc = cfg.schrodinger;
    const double crest = ec.barrier->crest;

    log(opt, fmt::format("ensemble: {} realizations on {} workers", ec.realizations, ec.workers));
    const auto records = run_realizations(ec, progress_logger(opt, "realizations"));
    TunnelingReport r;
    r.stats = reduce(ec, records);
    r.T_ensemble = r.stats.transmission();
    r.T_error = r.stats.transmission_error();
    for (const auto& rec : records) {
        if (rec.outcome == Outcome::reflected && !r.reflected_example) r.reflected_example = rec.index;
        if (rec.outcome == Outcome::transmitted && !r.transmitted_example) r.transmitted_example = rec.index;
    }

    // Schrodinger equation from the matched initial condition
    log(opt, "schrodinger equation");
    const Grid gs = sc.grid.make();
    const double w = cfg.soliton.amplitude, eps = cfg.noise.amplitude;
    const RealField Vs = make_potential(cfg.potential, gs);
    const RealField Vp = potential_energy_field(Vs, w, sc.weighting);
    const auto psi0 = build_initial(gaussian_density(gs, cfg.soliton.position, position_spread(w, eps)),
                                    cfg.soliton.velocity, w, eps, [&](const std::string& m) { log(opt, m); });
    std::vector<double> overlay_times;
    for (double t : ec.observation_times) {
        if (t <= sc.t_end) overlay_times.push_back(t);
    }
    std::vector<double> regular;
    for (double t = 0.0; t <= sc.t_end + 1e-9; t += 100.0) {
        if (std::abs(std::round(t / sc.dt) * sc.dt - t) < 1e-9) regular.push_back(t);
    }
    SeConfig se{sc.dt, sc.t_end, union_times(union_times(overlay_times, regular), {sc.transmission_time}), 4.0};
    const auto series = evolve_se(psi0, Vp, se);

    const BinGrid bins = make_bins(ec.grid, ec.bin_width);
    std::size_t occ_total = 0, agree_total = 0, k_overlay = 0;
    for (const auto& s : series) {
        RealField rho(gs);
        for (std::size_t j = 0; j < gs.size(); ++j) rho[j] = std::norm(s.psi[j]);
        const double T = transmission(rho, crest);
        r.se_times.push_back(s.t);
        r.se_transmission.push_back(T);
        if (std::abs(s.t - sc.transmission_time) < 1e-9) r.T_se = T;

        const auto it = std::find_if(overlay_times.begin(), overlay_times.end(),
                                     [&](double t) { return std::abs(t - s.t) < 1e-9; });
        if (it == overlay_times.end()) continue;
        const std::size_t k = static_cast<std::size_t>(it - overlay_times.begin());
        const auto fields = madelung(s, sc.mask_fraction);
        const BinnedDensity dse = bin_madelung(fields, bins);
        const BinnedDensity& den = r.stats.density[k];

        OverlayCheck oc;
        oc.t = s.t;
        for (std::size_t b = 0; b < bins.count; ++b) {
            if (den.count[b] == 0) continue;
            ++oc.occupied;
            const bool rho_ok = std::abs(den.rho[b] - dse.rho[b]) <= 3.0 * den.rho_se[b];
            const bool u_ok = den.count[b] < 2 || std::abs(den.u[b] - dse.u[b]) <= 3.0 * den.u_se[b];
            if (rho_ok && u_ok) ++oc.agreeing;
        }
        occ_total += oc.occupied;
        agree_total += oc.agreeing;
        r.overlays.push_back(oc);

        if (out) {
            out->snapshot("se/" + numbered("psi", k, "gcsf"), s.psi, s.t);
            out->text("se/" + numbered("density", k, "csv"), [&](std::ostream& os) { write_density_csv(os, dse); });
            out->text("overlay/" + numbered("overlay", k, "csv"), [&](std::ostream& os) {
                os << "x_bin_center,rho_ensemble,u_ensemble,rho_se,u_se,rho_err,u_err,count\n";
                for (std::size_t b = 0; b < bins.count; ++b) {
                    os << fmt::format("{},{},{},{},{},{},{},{}\n", num(bins.center(b)), num(den.rho[b]), num(den.u[b]),
                                      num(dse.rho[b]), num(dse.u[b]), num(den.rho_se[b]), num(den.u_se[b]),
                                      den.count[b]);
                }
            });
        }
        ++k_overlay;
    }
    r.overlay_fraction = occ_total ? static_cast<double>(agree_total) / static_cast<double>(occ_total) : 0.0;

    if (out) {
        out->snapshot("potential.grsf", ec.potential, 0.0);
        out->snapshot("se/potential_energy.grsf", Vp, 0.0);
        out->text("observations.csv", [&](std::ostream& os) {
            os << "index,t\n";
            for (std::size_t k = 0; k < ec.observation_times.size(); ++k) {
                os << fmt::format("{},{}\n", k, num(ec.observation_times[k]));
            }
        });
        for (std::size_t k = 0; k < r.stats.density.size(); ++k) {
            out->text("ensemble/" + numbered("density", k, "csv"),
                      [&](std::ostream& os) { write_density_csv(os, r.stats.density[k]); });
        }
        out->text("ensemble/records.csv", [&](std::ostream& os) { write_records_csv(os, ec.observation_times, records); });
        out->text("ensemble/spread.csv", [&](std::ostream& os) { write_summary_csv(os, r.stats); });
        out->text("ensemble/moments.csv", [&](std::ostream& os) { write_moments_csv(os, r.stats); });
        out->text("se/transmission.csv", [&](std::ostream& os) {
            os << "t,T\n";
            for (std::size_t i = 0; i < r.se_times.size(); ++i) {
                os << fmt::format("{},{}\n", num(r.se_times[i]), num(r.se_transmission[i]));
            }
        });

        // single trajectories for the bounce and tunnel figures
        auto example = [&](std::size_t index, const std::string& dir) {
            EnsembleConfig one = ec;
            one.observation_times = union_times(cfg.evolution.snapshots, {cfg.evolution.t_end});
            std::size_t i = 0;
            SolitonTrack track;
            run_realization(
                one, index,
                [&](double t, const ComplexField& f) { out->snapshot(dir + "/" + numbered("phi", i++, "gcsf"), f, t); },
                &track);
            out->text(dir + "/track.csv", [&](std::ostream& os) { write_track_csv(os, track); });
        };
        if (r.reflected_example) example(*r.reflected_example, "example_reflected");
        if (r.transmitted_example) example(*r.transmitted_example, "example_transmitted");

        write_summary(out, {{"experiment", "tunneling"},
                            {"realizations", std::to_string(ec.realizations)},
                            {"transmitted", std::to_string(r.stats.transmitted)},
                            {"reflected", std::to_string(r.stats.reflected)},
                            {"undecided", std::to_string(r.stats.undecided)},
                            {"failed", std::to_string(r.stats.failed)},
                            {"T_ensemble", num(r.T_ensemble)},
                            {"T_ensemble_error", num(r.T_error)},
                            {"T_se", num(r.T_se)},
                            {"T_difference", num(r.T_ensemble - r.T_se)},
                            {"overlay_agreement", num(r.overlay_fraction)},
                            {"margin", num(ec.barrier->margin)},
                            {"window", num(ec.window.length)}});
    }
    return r;
}

// ------------------------------------------------ measurement dependence

MeasurementReport run_measurement_dependence(const ExperimentConfig& cfg, ProductWriter* out, const RunOptions& opt) {
    cfg.validate();
    const Grid g = cfg.grid.make();
    const RealField V = make_potential(cfg.potential, g);
    const auto evo = cfg.evolution.make();
    const double w = cfg.soliton.amplitude, eps = cfg.noise.amplitude;
    const WindowSpec win{default_window(w, eps, g.length()), eps, w};
    const SolitonParams probe{cfg.probe.amplitude.value_or(w), 0.0, cfg.probe.position};
    const auto barrier = barrier_of(cfg.potential, cfg.probe.margin);
    const std::size_t front_stride = steps_for(cfg.probe.front_interval, evo.dt);
    const double theta = cfg.probe.front_threshold;

    MeasurementReport rep;
    for (std::size_t p = 0; p < cfg.probe.realizations.size(); ++p) {
        const std::size_t index = cfg.probe.realizations[p];
        log(opt, fmt::format("pair {} (realization {})", p, index));
        EnsembleConfig ec;
        ec.grid = g;
        ec.soliton = cfg.soliton;
        ec.noise = eps;
        ec.convention = cfg.noise.convention;
        ec.base_seed = cfg.noise.seed;
        ComplexField a = initial_field(ec, index);
        ComplexField pr = soliton_profile(probe, 0.0, g);
        ComplexField b = a;
        for (std::size_t j = 0; j < g.size(); ++j) b[j] += pr[j];
        ComplexField c = a;

        GcsgeIntegrator ia(g, V, evo), ib(g, V, evo), ip(g, V, evo), ic(g, V, evo);
        ia.project(a);
        ib.project(b);
        ip.project(pr);
        ic.project(c);
        SolitonTracker ta(g, cfg.soliton.position, win), tb(g, cfg.soliton.position, win);

        PairOutcome po;
        po.realization = index;
        po.seed = realization_seed(cfg.noise.seed, index);
        bool identical = true;
        bool failed_a = false, failed_b = false;
        const std::size_t total = evo.step_count();
        std::vector<std::size_t> snaps;
        for (double t : cfg.evolution.snapshots) snaps.push_back(steps_for(t, evo.dt));
        std::size_t next = 0;
        const std::string dir = fmt::format("pair_{:02d}", p);
        RealField delta(g), resid(g);

        for (std::size_t s = 0;; ++s) {
            const double t = static_cast<double>(s) * evo.dt;
            if (s % evo.output_stride == 0 || s == total) {
                if (!failed_a) ta.observe(t, a);
                if (!failed_b) tb.observe(t, b);
            }
            const bool snap = next < snaps.size() && snaps[next] == s;
            if (s % front_stride == 0 || s == total || snap) {
                FrontSample fs;
                fs.t = t;
                bool any = false;
                for (std::size_t j = 0; j < g.size(); ++j) {
                    delta[j] = std::abs(b[j] - a[j]);
                    resid[j] = std::abs(b[j] - a[j] - pr[j]);
                    fs.peak = std::max(fs.peak, resid[j]);
                    if (resid[j] <= theta) continue;
                    const double d = g.displacement(g.x(j), probe.position);
                    if (!any) fs.lower = fs.upper = d;
                    fs.lower = std::min(fs.lower, d);
                    fs.upper = std::max(fs.upper, d);
                    any = true;
                }
                fs.radius = std::max(std::abs(fs.lower), std::abs(fs.upper));
                const double half = 0.5 * *std::max_element(delta.values.begin(), delta.values.end());
                const auto above = std::count_if(delta.values.begin(), delta.values.end(),
                                                 [&](double d) { return d >= half; });
                fs.half_max_width = static_cast<double>(above) * g.dx();
                if (s % front_stride == 0 || s == total) po.front.push_back(fs);
            }
            while (snap && next < snaps.size() && snaps[next] == s) {
                if (out) {
                    out->snapshot(dir + "/" + numbered("phi_a", next, "gcsf"), a, t);
                    out->snapshot(dir + "/" + numbered("phi_b", next, "gcsf"), b, t);
                    out->snapshot(dir + "/" + numbered("delta", next, "grsf"), delta, t);
                }
                ++next;
            }
            if (s == total) break;
            if (!failed_a) {
                try {
                    ia.step(a, t);
                    if (cfg.probe.control) {
                        ic.step(c, t);
                        identical = identical && c.values == a.values;
                    }
                } catch (const SingularStateError&) {
                    failed_a = true;
                }
            }
            if (!failed_b) {
                try {
                    ib.step(b, t);
                } catch (const SingularStateError&) {
                    failed_b = true;
                }
            }
            ip.step(pr, t);
            if ((s + 1) % std::max<std::size_t>(1, total / 10) == 0) log(opt, fmt::format("t = {:g}", (s + 1) * evo.dt));
        }
        if (cfg.probe.control) po.control_identical = identical;
        const auto tra = ta.finish(), trb = tb.finish();
        po.X_a = tra.X.back();
        po.X_b = trb.X.back();
        po.a = failed_a ? Outcome::failed : label(po.X_a, barrier);
        po.b = failed_b ? Outcome::failed : label(po.X_b, barrier);
        po.flipped = po.a != po.b && po.a != Outcome::failed && po.b != Outcome::failed && po.a != Outcome::undecided &&
                     po.b != Outcome::undecided;
        if (po.flipped && !rep.flipping_realization) rep.flipping_realization = index;

        // front speed: least squares over the expanding stage
        double st = 0, sr = 0, stt = 0, str = 0;
        std::size_t n = 0;
        for (const auto& f : po.front) {
            if (!(f.radius > 0.0 && f.radius < 0.45 * g.length())) continue;
            st += f.t;
            sr += f.radius;
            stt += f.t * f.t;
            str += f.t * f.radius;
            ++n;
        }
        if (n >= 2) {
            const double dn = static_cast<double>(n);
            const double den = dn * stt - st * st;
            if (den > 0.0) po.front_speed = (dn * str - st * sr) / den;
        }

        if (out) {
            out->text(dir + "/track_a.csv", [&](std::ostream& os) { write_track_csv(os, tra); });
            out->text(dir + "/track_b.csv", [&](std::ostream& os) { write_track_csv(os, trb); });
            out->text(dir + "/front.csv", [&](std::ostream& os) {
                os << "t,lower,upper,radius,peak,half_max_width\n";
                for (const auto& f : po.front) {
                    os << fmt::format("{},{},{},{},{},{}\n", num(f.t), num(f.lower), num(f.upper), num(f.radius),
                                      num(f.peak), num(f.half_max_width));
                }
            });
        }
        rep.pairs.push_back(std::move(po));
    }

    if (out) {
        out->snapshot("potential.grsf", V, 0.0);
        out->text("pairs.csv", [&](std::ostream& os) {
            os << "pair,realization,seed,outcome_a,outcome_b,X_a,X_b,flipped,control_identical,front_speed\n";
            for (std::size_t p = 0; p < rep.pairs.size(); ++p) {
                const auto& q = rep.pairs[p];
                os << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", p, q.realization, q.seed, to_string(q.a), to_string(q.b), num(q.X_a),
                                  num(q.X_b), q.flipped ? 1 : 0,
                                  q.control_identical ? (*q.control_identical ? "1" : "0") : "", num(q.front_speed));
            }
        });
        write_summary(out, {{"experiment", "measurement_dependence"},
                            {"pairs", std::to_string(rep.pairs.size())},
                            {"noise_seed", std::to_string(cfg.noise.seed)},
                            {"flipping_realization",
                             rep.flipping_realization ? std::to_string(*rep.flipping_realization) : "none"},
                            {"probe_position", num(probe.position)},
                            {"front_threshold", num(theta)}});
    }
    return rep;
}

// ---------------------------------------------------- uncertainty window

UncertaintyConfig uncertainty_config(const ExperimentConfig& cfg, int workers) {
    UncertaintyConfig u;
    if (cfg.grid.points != 0) u.grid = cfg.grid.make();
    u.amplitude = cfg.soliton.amplitude;
    u.noise = cfg.noise.amplitude;
    u.convention = cfg.noise.convention;
    u.windows = cfg.uncertainty.windows;
    u.realizations = cfg.uncertainty.realizations;
    u.base_seed = cfg.noise.seed;
    u.measure_time = cfg.uncertainty.measure_time;
    if (u.measure_time > 0.0) u.evolution = cfg.evolution.make();
    u.workers = workers;
    return u;
}

UncertaintyResult run_uncertainty_window(const ExperimentConfig& cfg, ProductWriter* out, const RunOptions& opt) {
    cfg.validate();
    const auto u = uncertainty_config(cfg, workers_of(cfg, opt));
    const auto r = uncertainty_scan(u, progress_logger(opt, "realizations"));
    if (out) {
        out->text("uncertainty.csv", [&](std::ostream& os) { write_uncertainty_csv(os, r); });
        const double theory_product = std::numbers::pi * u.noise * u.noise / 3.0;
        write_summary(out, {{"experiment", "uncertainty_window"},
                            {"realizations", std::to_string(u.realizations)},
                            {"theory_var_X", num(r.theory_var_X)},
                            {"theory_sigma_P", num(r.theory_sigma_P)},
                            {"window", num(r.window)},
                            {"sigma_X", num(r.sigma_X)},
                            {"sigma_P", num(r.sigma_P)},
                            {"product", num(r.product())},
                            {"theory_product", num(theory_product)}});
    }
    return r;
}

// -------------------------------------------------------- stability scan

StabilityReport run_stability_scan(const ExperimentConfig& cfg, ProductWriter* out, const RunOptions& opt) {
    cfg.validate();
    const Grid g = cfg.grid.make();
    const auto& sc = cfg.stability;
    const PlaneWaveParams pw{sc.amplitude, sc.wavenumber};
    auto evo = cfg.evolution.make();
    evo.output_stride = steps_for(sc.sample_interval, evo.dt);

    StabilityReport rep;
    for (std::size_t i = 0; i < sc.q.size(); ++i) {
        const double q = sc.q[i];
        log(opt, fmt::format("q = {}", q));
        StabilityRow row;
        row.q = q;
        row.predicted = growth_rate(pw, q);
        row.measured = measure_growth(pw, q, sc.delta, g, evo);
        const double re = row.predicted.plus.real();
        if (q < 2.0 * sc.amplitude) {
            row.rel_error = row.measured.growing ? std::abs(row.measured.rate - re) / re : 1.0;
            row.passed = row.measured.growing && row.rel_error <= 0.05;
        } else {
            row.passed = !row.measured.growing;
        }
        rep.rows.push_back(std::move(row));
    }

    if (out) {
        std::vector<SpectrumRow> analytic;
        for (std::size_t i = 1; i <= sc.spectrum_points; ++i) {
            const double q = 3.0 * sc.amplitude * static_cast<double>(i) / static_cast<double>(sc.spectrum_points);
            analytic.push_back({q, growth_rate(pw, q), std::nullopt});
        }
        out->text("spectrum.csv", [&](std::ostream& os) { write_spectrum_csv(os, analytic); });
        std::vector<SpectrumRow> measured;
        for (const auto& r : rep.rows) measured.push_back({r.q, r.predicted, r.measured.rate});
        out->text("measured.csv", [&](std::ostream& os) { write_spectrum_csv(os, measured); });
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
            const auto& m = rep.rows[i].measured;
            out->text("growth/" + numbered("mode", i, "csv"), [&](std::ostream& os) {
                os << "t,amplitude\n";
                for (std::size_t k = 0; k < m.t.size(); ++k) os << fmt::format("{},{}\n", num(m.t[k]), num(m.amplitude[k]));
            });
        }
        Summary s{{"experiment", "stability_scan"}, {"max_growth_q", num(max_growth(pw).q)},
                  {"max_growth_rate", num(max_growth(pw).rate)}};
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
            const auto& r = rep.rows[i];
            s.emplace_back(fmt::format("q_{}", i), num(r.q));
            s.emplace_back(fmt::format("predicted_{}", i), num(r.predicted.plus.real()));
            s.emplace_back(fmt::format("measured_{}", i), num(r.measured.rate));
            if (r.measured.frequency) s.emplace_back(fmt::format("frequency_{}", i), num(*r.measured.frequency));
            s.emplace_back(fmt::format("passed_{}", i), r.passed ? "true" : "false");
        }
        write_summary(out, s);
    }
    return rep;
}

// ---------------------------------------------------------------- dispatch

std::vector<ManifestEntry> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                          const RunOptions& opt, const std::optional<std::filesystem::path>& config_file) {
    cfg.validate();
    ProductWriter out(out_dir);
    if (config_file) out.copy("config.yaml", *config_file);
    switch (cfg.kind) {
        case ExperimentKind::newton: run_newton(cfg, &out, opt); break;
        case ExperimentKind::chaotic_background: run_chaotic_background(cfg, &out, opt); break;
        case ExperimentKind::tunneling: run_tunneling(cfg, &out, opt); break;
        case ExperimentKind::measurement_dependence: run_measurement_dependence(cfg, &out, opt); break;
        case ExperimentKind::uncertainty_window: run_uncertainty_window(cfg, &out, opt); break;
        case ExperimentKind::stability_scan: run_stability_scan(cfg, &out, opt); break;
    }
    return out.finish();
}

}  // namespace gcsge
