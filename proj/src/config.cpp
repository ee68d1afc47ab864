#include "gcsge/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "gcsge/errors.hpp"
#include "gcsge/schrodinger.hpp"

namespace gcsge {

namespace {

struct KindName {
    ExperimentKind kind;
    const char* name;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::newton, "newton"},
    {ExperimentKind::chaotic_background, "chaotic_background"},
    {ExperimentKind::tunneling, "tunneling"},
    {ExperimentKind::measurement_dependence, "measurement_dependence"},
    {ExperimentKind::uncertainty_window, "uncertainty_window"},
    {ExperimentKind::stability_scan, "stability_scan"},
};

// A YAML mapping whose keys are checked off as they are read; finish()
// rejects whatever is left.
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (!node_.IsMap()) throw ConfigError(fmt::format("{}: expected a mapping", label()));
    }

    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

    template <class T>
    T get(const std::string& key) {
        if (!has(key)) throw ConfigError(fmt::format("{}: missing required key '{}'", label(), key));
        return convert<T>(key);
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        return has(key) ? convert<T>(key) : fallback;
    }

    template <class T>
    std::optional<T> optional(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return convert<T>(key);
    }

    Section child(const std::string& key) {
        if (!has(key)) throw ConfigError(fmt::format("{}: missing required section '{}'", label(), key));
        used_.insert(key);
        return Section(node_[key], path_.empty() ? key : path_ + "." + key);
    }

    YAML::Node raw(const std::string& key) {
        used_.insert(key);
        return node_[key];
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!used_.count(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", label(), key));
        }
    }

private:
    std::string label() const { return path_.empty() ? "config" : path_; }

    template <class T>
    T convert(const std::string& key) {
        used_.insert(key);
        const YAML::Node n = node_[key];
        try {
            if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
                // reject negative and fractional values that yaml-cpp would wrap or truncate
                const auto s = n.as<std::string>();
                if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
                    throw ConfigError(fmt::format("{}: expected a non-negative integer, got '{}'", where(key), s));
                }
            }
            return n.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(fmt::format("{}: cannot read value", where(key)));
        }
    }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

GridSpec read_grid(Section s) {
    GridSpec g{s.get<double>("length"), s.get<std::size_t>("points")};
    s.finish();
    return g;
}

SolitonParams read_soliton(Section s) {
    SolitonParams p;
    p.amplitude = s.get<double>("amplitude");
    p.velocity = s.get<double>("velocity", 0.0);
    p.position = s.get<double>("position", 0.0);
    s.finish();
    return p;
}

PotentialSpec read_potential(Section s) {
    const auto type = s.get<std::string>("type");
    PotentialSpec out;
    if (type == "none") {
    } else if (type == "gaussian") {
        out = GaussianBarrier{s.get<double>("height"), s.get<double>("width"), s.get<double>("center", 0.0)};
    } else if (type == "piecewise_linear") {
        PiecewiseLinear p;
        const YAML::Node knots = s.raw("knots");
        if (!knots || !knots.IsSequence()) throw ConfigError(fmt::format("{}: expected a list of [x, V] pairs", s.where("knots")));
        for (const auto& k : knots) {
            if (!k.IsSequence() || k.size() != 2) throw ConfigError(fmt::format("{}: each knot is [x, V]", s.where("knots")));
            try {
                p.knots.emplace_back(k[0].as<double>(), k[1].as<double>());
            } catch (const YAML::Exception&) {
                throw ConfigError(fmt::format("{}: knot values must be numbers", s.where("knots")));
            }
        }
        out = std::move(p);
    } else {
        throw ConfigError(fmt::format("{}: unknown potential type '{}' (none, gaussian, piecewise_linear)", s.where("type"), type));
    }
    s.finish();
    return out;
}

NoiseSettings read_noise(Section s) {
    NoiseSettings n;
    n.amplitude = s.get<double>("amplitude");
    n.convention = parse_noise_convention(s.get<std::string>("convention", "delta"));
    n.seed = s.get<std::uint64_t>("seed", 0);
    s.finish();
    return n;
}

EvolutionSettings read_evolution(Section s) {
    EvolutionSettings e;
    e.dt = s.get<double>("dt");
    e.t_end = s.get<double>("t_end");
    e.track_interval = s.get<double>("track_interval", e.dt * std::max(1.0, std::round(1.0 / e.dt)));
    e.dealias = s.get<double>("dealias", 2.0 / 3.0);
    e.snapshots = s.get<std::vector<double>>("snapshots", {});
    s.finish();
    return e;
}

NewtonSettings read_newton(Section s) {
    NewtonSettings n;
    n.shape_tolerance = s.get<double>("shape_tolerance", n.shape_tolerance);
    n.segment_margin = s.get<double>("segment_margin", n.segment_margin);
    n.tolerance = s.get<double>("tolerance", n.tolerance);
    n.energy_tolerance = s.get<double>("energy_tolerance", n.energy_tolerance);
    s.finish();
    return n;
}

std::optional<double> auto_or_number(Section& s, const std::string& key) {
    if (!s.has(key)) return std::nullopt;
    const YAML::Node n = s.raw(key);
    if (n.IsScalar() && n.Scalar() == "auto") return std::nullopt;
    try {
        return n.as<double>();
    } catch (const YAML::Exception&) {
        throw ConfigError(fmt::format("{}: expected a number or 'auto'", s.where(key)));
    }
}

EnsembleSettings read_ensemble(Section s) {
    EnsembleSettings e;
    e.realizations = s.get<std::size_t>("realizations");
    e.observation_times = s.get<std::vector<double>>("observation_times");
    e.bin_width = s.get<double>("bin_width", e.bin_width);
    e.window = auto_or_number(s, "window");
    e.margin = auto_or_number(s, "margin");
    s.finish();
    return e;
}

SchrodingerSettings read_schrodinger(Section s) {
    SchrodingerSettings se;
    if (s.has("grid")) se.grid = read_grid(s.child("grid"));
    se.dt = s.get<double>("dt", se.dt);
    se.t_end = s.get<double>("t_end", se.t_end);
    se.transmission_time = s.get<double>("transmission_time", se.transmission_time);
    se.mask_fraction = s.get<double>("mask_fraction", se.mask_fraction);
    const auto w = s.get<std::string>("weighting", "intensity");
    if (w == "intensity") se.weighting = PotentialWeighting::intensity;
    else if (w == "charge") se.weighting = PotentialWeighting::charge;
    else throw ConfigError(fmt::format("{}: expected intensity or charge", s.where("weighting")));
    s.finish();
    return se;
}

ProbeSettings read_probe(Section s) {
    ProbeSettings p;
    p.position = s.get<double>("position", p.position);
    p.amplitude = s.optional<double>("amplitude");
    p.front_threshold = s.get<double>("front_threshold", p.front_threshold);
    p.front_interval = s.get<double>("front_interval", p.front_interval);
    p.realizations = s.get<std::vector<std::size_t>>("realizations");
    p.control = s.get<bool>("control", p.control);
    p.margin = auto_or_number(s, "margin");
    s.finish();
    return p;
}

UncertaintySettings read_uncertainty(Section s) {
    UncertaintySettings u;
    u.windows = s.get<std::vector<double>>("windows");
    u.realizations = s.get<std::size_t>("realizations", u.realizations);
    u.measure_time = s.get<double>("measure_time", u.measure_time);
    s.finish();
    return u;
}

StabilitySettings read_stability(Section s) {
    StabilitySettings st;
    st.amplitude = s.get<double>("amplitude");
    st.wavenumber = s.get<double>("wavenumber", 0.0);
    st.q = s.get<std::vector<double>>("q");
    st.delta = s.get<double>("delta", st.delta);
    st.spectrum_points = s.get<std::size_t>("spectrum_points", st.spectrum_points);
    st.sample_interval = s.get<double>("sample_interval", st.sample_interval);
    s.finish();
    return st;
}

struct Sections {
    std::set<std::string> required, optional;
};

Sections sections_for(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::newton:
            return {{"grid", "soliton", "potential", "evolution"}, {"newton"}};
        case ExperimentKind::chaotic_background:
            return {{"grid", "soliton", "noise", "evolution"}, {"potential"}};
        case ExperimentKind::tunneling:
            return {{"grid", "soliton", "potential", "noise", "evolution", "ensemble", "schrodinger"}, {}};
        case ExperimentKind::measurement_dependence:
            return {{"grid", "soliton", "potential", "noise", "evolution", "probe"}, {}};
        case ExperimentKind::uncertainty_window:
            return {{"soliton", "noise", "uncertainty"}, {"grid", "evolution"}};
        case ExperimentKind::stability_scan:
            return {{"grid", "evolution", "stability"}, {}};
    }
    return {};
}

void check_times(const std::vector<double>& ts, double dt, double t_end, const char* what) {
    double prev = -1.0;
    for (double t : ts) {
        if (!(t >= 0.0 && t <= t_end * (1 + 1e-12))) {
            throw ConfigError(fmt::format("{} time {} outside [0, t_end = {}]", what, t, t_end));
        }
        if (!(t > prev)) throw ConfigError(fmt::format("{} times must be strictly increasing", what));
        steps_for(t, dt);
        prev = t;
    }
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
    for (const auto& k : kKinds) {
        if (name == k.name) return k.kind;
    }
    throw ConfigError(fmt::format("unknown experiment kind '{}'", name));
}

const char* to_string(ExperimentKind k) {
    for (const auto& e : kKinds) {
        if (e.kind == k) return e.name;
    }
    return "?";
}

EvolutionConfig EvolutionSettings::make() const {
    EvolutionConfig c;
    c.dt = dt;
    c.t_end = t_end;
    c.dealias = dealias;
    if (!(dt > 0.0)) throw ConfigError(fmt::format("dt must be > 0, got {}", dt));
    c.output_stride = steps_for(track_interval, dt);
    if (c.output_stride == 0) throw ConfigError("track_interval must be at least dt");
    return c;
}

void ExperimentConfig::validate() const {
    if (workers < 1) throw ConfigError("workers must be >= 1");
    const bool uses_grid = kind != ExperimentKind::uncertainty_window || grid.points != 0;
    const Grid g = uses_grid ? grid.make() : make_grid(1256.636, 1024);
    auto evolution_checks = [&] {
        const auto c = evolution.make();
        c.validate();
        check_times(evolution.snapshots, evolution.dt, evolution.t_end, "snapshot");
    };

    switch (kind) {
        case ExperimentKind::newton:
            soliton.validate();
            validate_potential(potential, g);
            evolution_checks();
            if (!(newton.tolerance > 0.0 && newton.energy_tolerance > 0.0 && newton.shape_tolerance > 0.0)) {
                throw ConfigError("newton tolerances must be > 0");
            }
            if (!(newton.segment_margin >= 0.0)) throw ConfigError("newton.segment_margin must be >= 0");
            break;
        case ExperimentKind::chaotic_background:
            soliton.validate();
            validate_potential(potential, g);
            evolution_checks();
            if (!(noise.amplitude >= 0.0)) throw ConfigError("noise amplitude must be >= 0");
            break;
        case ExperimentKind::tunneling: {
            soliton.validate();
            if (!std::holds_alternative<GaussianBarrier>(potential)) {
                throw ConfigError("tunneling needs a gaussian potential barrier");
            }
            validate_potential(potential, g);
            evolution_checks();
            if (!(noise.amplitude > 0.0)) throw ConfigError("tunneling needs noise amplitude > 0");
            if (ensemble.realizations < 1) throw ConfigError("ensemble.realizations must be >= 1");
            if (ensemble.observation_times.empty()) throw ConfigError("ensemble.observation_times must not be empty");
            check_times(ensemble.observation_times, evolution.dt, evolution.t_end, "observation");
            make_bins(g, ensemble.bin_width);
            schrodinger.grid.make();
            SeConfig se{schrodinger.dt, schrodinger.t_end, {}, 4.0};
            se.validate();
            check_times({schrodinger.transmission_time}, schrodinger.dt, schrodinger.t_end, "transmission");
            if (!(schrodinger.mask_fraction >= 0.0 && schrodinger.mask_fraction < 1.0)) {
                throw ConfigError("schrodinger.mask_fraction must lie in [0, 1)");
            }
            break;
        }
        case ExperimentKind::measurement_dependence: {
            soliton.validate();
            validate_potential(potential, g);
            evolution_checks();
            if (!(noise.amplitude >= 0.0)) throw ConfigError("noise amplitude must be >= 0");
            if (probe.realizations.empty()) throw ConfigError("probe.realizations must not be empty");
            SolitonParams{probe.amplitude.value_or(soliton.amplitude), 0.0, 0.0}.validate();
            if (!(probe.front_threshold > 0.0)) throw ConfigError("probe.front_threshold must be > 0");
            if (steps_for(probe.front_interval, evolution.dt) == 0) throw ConfigError("probe.front_interval must be at least dt");
            break;
        }
        case ExperimentKind::uncertainty_window: {
            UncertaintyConfig u;
            u.grid = g;
            u.amplitude = soliton.amplitude;
            u.noise = noise.amplitude;
            u.windows = uncertainty.windows;
            u.realizations = uncertainty.realizations;
            u.measure_time = uncertainty.measure_time;
            if (uncertainty.measure_time > 0.0) u.evolution = evolution.make();
            u.validate();
            break;
        }
        case ExperimentKind::stability_scan: {
            if (!(stability.amplitude > 0.0 && stability.amplitude < 1.0)) {
                throw ParameterError(fmt::format("stability.amplitude must lie in (0, 1), got {}", stability.amplitude));
            }
            if (stability.q.empty()) throw ConfigError("stability.q must not be empty");
            for (double q : stability.q) {
                if (!(q > 0.0)) throw ConfigError("stability.q values must be > 0");
            }
            if (!(stability.delta >= 0.0)) throw ConfigError("stability.delta must be >= 0");
            evolution_checks();
            steps_for(stability.sample_interval, evolution.dt);
            break;
        }
    }
}

ExperimentConfig parse_config(const std::string& text, const std::string& default_name) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(fmt::format("YAML syntax error: {}", e.what()));
    }
    if (!root || !root.IsMap()) throw ConfigError("config must be a YAML mapping");
    Section top(root, "");

    ExperimentConfig c;
    c.kind = parse_experiment_kind(top.get<std::string>("experiment"));
    c.name = top.get<std::string>("name", default_name);
    c.output = top.optional<std::string>("output");
    c.workers = top.get<int>("workers", 1);

    const Sections allowed = sections_for(c.kind);
    const std::set<std::string> all = {"grid", "soliton", "potential", "noise", "evolution", "newton", "ensemble",
                                       "schrodinger", "probe", "uncertainty", "stability"};
    for (const auto& s : all) {
        const bool req = allowed.required.count(s) > 0, opt = allowed.optional.count(s) > 0;
        if (!top.has(s)) {
            if (req) throw ConfigError(fmt::format("experiment '{}' requires section '{}'", to_string(c.kind), s));
            continue;
        }
        if (!req && !opt) throw ConfigError(fmt::format("section '{}' does not apply to experiment '{}'", s, to_string(c.kind)));
    }

    if (top.has("grid")) c.grid = read_grid(top.child("grid"));
    if (top.has("soliton")) c.soliton = read_soliton(top.child("soliton"));
    if (top.has("potential")) c.potential = read_potential(top.child("potential"));
    if (top.has("noise")) c.noise = read_noise(top.child("noise"));
    if (top.has("evolution")) c.evolution = read_evolution(top.child("evolution"));
    if (top.has("newton")) c.newton = read_newton(top.child("newton"));
    if (top.has("ensemble")) c.ensemble = read_ensemble(top.child("ensemble"));
    if (top.has("schrodinger")) c.schrodinger = read_schrodinger(top.child("schrodinger"));
    if (top.has("probe")) c.probe = read_probe(top.child("probe"));
    if (top.has("uncertainty")) c.uncertainty = read_uncertainty(top.child("uncertainty"));
    if (top.has("stability")) c.stability = read_stability(top.child("stability"));
    top.finish();

    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.stem().string());
}

}  // namespace gcsge
