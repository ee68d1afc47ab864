#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gcsge/ensemble.hpp"
#include "gcsge/potential.hpp"
#include "gcsge/soliton.hpp"

namespace gcsge {

enum class ExperimentKind {
    newton,
    chaotic_background,
    tunneling,
    measurement_dependence,
    uncertainty_window,
    stability_scan,
};

ExperimentKind parse_experiment_kind(const std::string& name);  ///< throws ConfigError
const char* to_string(ExperimentKind k);

struct GridSpec {
    double length = 0.0;
    std::size_t points = 0;
    Grid make() const { return make_grid(length, points); }
};

struct NoiseSettings {
    double amplitude = 0.0;
    NoiseConvention convention = NoiseConvention::delta;
    std::uint64_t seed = 0;
};

struct EvolutionSettings {
    double dt = 0.01;
    double t_end = 0.0;
    double track_interval = 1.0;  ///< soliton tracking cadence, a multiple of dt
    double dealias = 2.0 / 3.0;
    std::vector<double> snapshots;  ///< numbered field snapshots

    EvolutionConfig make() const;  ///< output_stride from track_interval
};

struct NewtonSettings {
    double shape_tolerance = 0.01;  ///< max relative |phi| deviation from sech before the verdict is withheld
    double segment_margin = 10.0;   ///< distance kept from each knot when fitting a segment
    double tolerance = 0.02;
    double energy_tolerance = 0.01;
};

struct EnsembleSettings {
    std::size_t realizations = 1;
    std::vector<double> observation_times;
    double bin_width = 2.0;
    std::optional<double> window;  ///< default_window when empty
    std::optional<double> margin;  ///< 3 sigma_V when empty
};

struct SchrodingerSettings {
    GridSpec grid{628.32, 16384};
    double dt = 0.5;
    double t_end = 6000.0;
    double transmission_time = 5000.0;
    double mask_fraction = 1e-3;
    PotentialWeighting weighting = PotentialWeighting::intensity;
};

struct ProbeSettings {
    double position = -450.0;
    std::optional<double> amplitude;  ///< soliton amplitude when empty
    double front_threshold = 1e-4;    ///< support of |phi_B - phi_A - phi_probe| above this
    double front_interval = 5.0;      ///< sampling cadence of the front, a multiple of dt
    std::vector<std::size_t> realizations;  ///< ensemble indices (under noise.seed) replayed as pairs
    bool control = true;               ///< also rerun leg A to check bit-identity
    std::optional<double> margin;
};

struct UncertaintySettings {
    std::vector<double> windows;
    std::size_t realizations = 1000;
    double measure_time = 0.0;
};

struct StabilitySettings {
    double amplitude = 0.1;
    double wavenumber = 0.0;
    std::vector<double> q;  ///< measured wavenumbers
    double delta = 1e-6;
    std::size_t spectrum_points = 200;
    double sample_interval = 1.0;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::newton;
    std::string name;
    std::optional<std::string> output;
    int workers = 1;

    GridSpec grid;
    SolitonParams soliton;
    PotentialSpec potential;
    NoiseSettings noise;
    EvolutionSettings evolution;

    NewtonSettings newton;
    EnsembleSettings ensemble;
    SchrodingerSettings schrodinger;
    ProbeSettings probe;
    UncertaintySettings uncertainty;
    StabilitySettings stability;

    /// Kind-specific consistency checks; throws ConfigError.
    void validate() const;
};

/// Parses the YAML text of an experiment. Every mapping is checked for
/// unknown keys and for the sections the experiment kind requires; sections
/// the kind does not use are rejected as well. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text, const std::string& default_name = "experiment");

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace gcsge
