#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gcsge/config.hpp"
#include "gcsge/ensemble.hpp"
#include "gcsge/products.hpp"
#include "gcsge/soliton.hpp"
#include "gcsge/stability.hpp"

namespace gcsge {

using LogFn = std::function<void(const std::string&)>;

struct RunOptions {
    int workers = 1;  ///< overrides the config's workers when > 0
    LogFn log;        ///< progress lines; silent when empty
};

// ---- newton ----

struct SegmentCheck {
    double x_begin = 0.0, x_end = 0.0;
    double slope = 0.0;        ///< dV/dx of the raw potential
    std::size_t samples = 0;   ///< track points inside the segment (margin removed)
    double a_measured = 0.0;   ///< mean over those points
    double a_expected = 0.0;   ///< mean of -dV_p/dX / m at the same points
    double rel_error = 0.0;
    bool checked = false;      ///< nonzero slope with at least three samples
};

struct NewtonReport {
    SolitonTrack track;
    std::vector<double> kinetic, potential;  ///< (1/2) m v^2 and V_p(X) along the track
    std::vector<SegmentCheck> segments;
    double energy_drift = 0.0;  ///< max |E - E0| / |E0|
    double shape_error = 0.0;   ///< max relative L2 deviation of |phi| from the sech envelope
    double max_abs_acceleration = 0.0;
    bool verdict_withheld = false;
    bool passed = false;
};

NewtonReport run_newton(const ExperimentConfig& cfg, ProductWriter* out, const RunOptions& opt = {});

// ---- chaotic background ----

struct BackgroundReport {
    SolitonTrack track;
    std::vector<double> t, m2, kurtosis;  ///< background outside the soliton window
    double mean_v = 0.0;
    bool failed = false;
};

BackgroundReport run_chaotic_background(const ExperimentConfig& cfg, ProductWriter* out, const RunOptions& opt = {});

// ---- tunneling ----

struct OverlayCheck {
    double t = 0.0;
    std::size_t occupied = 0;  ///< ensemble bins with at least one soliton
    std::size_t agreeing = 0;  ///< rho and u within 3 standard errors
};

struct TunnelingReport {
    EnsembleStats stats;
    double T_ensemble = 0.0, T_error = 0.0;
    double T_se = 0.0;
    std::vector<double> se_times, se_transmission;
    std::vector<OverlayCheck> overlays;
    double overlay_fraction = 0.0;  ///< agreeing / occupied over all overlay times
    std::optional<std::size_t> reflected_example, transmitted_example;
};

/// The ensemble configuration a tunneling experiment runs.
EnsembleConfig tunneling_ensemble(const ExperimentConfig& cfg, int workers);

TunnelingReport run_tunneling(const ExperimentConfig& cfg, ProductWriter* out, const RunOptions& opt = {});

// ---- measurement dependence ----

struct FrontSample {
    double t = 0.0;
    double lower = 0.0, upper = 0.0;  ///< signed extent of the support about x_probe; 0 when empty
    double radius = 0.0;              ///< max(|lower|, |upper|)
    double peak = 0.0;                ///< max |phi_B - phi_A - phi_P|
    double half_max_width = 0.0;      ///< support of |phi_B - phi_A| >= half its maximum
};

struct PairOutcome {
    std::size_t realization = 0;
    std::uint64_t seed = 0;  ///< noise seed of that realization
    Outcome a = Outcome::undecided, b = Outcome::undecided;
    double X_a = 0.0, X_b = 0.0;
    bool flipped = false;
    std::optional<bool> control_identical;  ///< leg A rerun bit-identical
    std::vector<FrontSample> front;
    double front_speed = 0.0;  ///< least-squares slope of radius(t) while 0 < radius < 0.45 L
};

struct MeasurementReport {
    std::vector<PairOutcome> pairs;
    std::optional<std::size_t> flipping_realization;  ///< first realization whose outcome differs
};

/// For each listed realization: leg A (soliton + noise, as in the ensemble), leg B (A plus a static probe
/// soliton at x_probe), and leg P (the probe alone, noiseless), all on the
/// same integrator settings. The front is the support of
/// |phi_B - phi_A - phi_P| above the threshold, which vanishes identically
/// until the probe interacts with the background.
MeasurementReport run_measurement_dependence(const ExperimentConfig& cfg, ProductWriter* out,
                                             const RunOptions& opt = {});

// ---- uncertainty window ----

UncertaintyConfig uncertainty_config(const ExperimentConfig& cfg, int workers);

UncertaintyResult run_uncertainty_window(const ExperimentConfig& cfg, ProductWriter* out, const RunOptions& opt = {});

// ---- stability scan ----

struct StabilityRow {
    double q = 0.0;
    GrowthPair predicted;
    GrowthMeasurement measured;
    double rel_error = 0.0;  ///< |rate - Re lambda| / Re lambda for unstable q
    bool passed = false;     ///< within 5% when q < 2w'; not growing when q > 2w'
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
};

StabilityReport run_stability_scan(const ExperimentConfig& cfg, ProductWriter* out, const RunOptions& opt = {});

/// Dispatches on cfg.kind, writes every product and the manifest.
/// Returns the manifest entries.
std::vector<ManifestEntry> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                          const RunOptions& opt = {},
                                          const std::optional<std::filesystem::path>& config_file = std::nullopt);

}  // namespace gcsge
