#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gcsge/grid.hpp"
#include "gcsge/integrator.hpp"
#include "gcsge/soliton.hpp"

namespace gcsge {

enum class NoiseConvention {
    pointwise,  ///< <|zeta_j|^2> = eps^2 on every node
    delta,      ///< <|zeta_j|^2> = eps^2 / dx, the sampled form of eps^2 delta(x - x')
};

NoiseConvention parse_noise_convention(const std::string& name);  ///< throws ConfigError
const char* to_string(NoiseConvention c);

struct NoiseSpec {
    double amplitude = 0.0;  ///< eps >= 0
    NoiseConvention convention = NoiseConvention::delta;
    std::uint64_t seed = 0;
};

/// Complex Gaussian noise, independent on every node, real and imaginary parts
/// each of variance <|zeta_j|^2>/2 (so <zeta_j zeta_j> = 0). Drawn from
/// mt19937_64 seeded with spec.seed; identical (spec, grid) gives identical bits.
ComplexField sample_noise(const NoiseSpec& spec, const Grid& grid);

/// Seed of realization `index`: splitmix64(base + (index + 1) * 0x9e3779b97f4a7c15),
/// where splitmix64 is the finalizer z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
/// z ^= z >> 27; z *= 0x94d049bb133111eb; z ^= z >> 31.
std::uint64_t realization_seed(std::uint64_t base_seed, std::uint64_t index);

/// Histogram bins tiling [-L/2, L/2). The width is adjusted so an integer
/// number of bins covers the domain exactly.
struct BinGrid {
    double origin = 0.0;
    double width = 1.0;
    std::size_t count = 0;

    double center(std::size_t i) const { return origin + (static_cast<double>(i) + 0.5) * width; }
    /// Bin of a position already wrapped into [-L/2, L/2).
    std::size_t index(double x) const;
};

BinGrid make_bins(const Grid& grid, double requested_width);

/// Density and local mean velocity on a bin grid, plus the per-bin standard
/// errors used for comparisons (binomial for rho, sample for u).
struct BinnedDensity {
    BinGrid bins;
    std::vector<double> rho;
    std::vector<double> u;  ///< 0 in empty bins
    std::vector<std::size_t> count;
    std::vector<double> rho_se;
    std::vector<double> u_se;  ///< 0 in bins with fewer than two samples

    /// sum rho * width over bins right of x_crest; a bin straddling the crest
    /// contributes its right-hand fraction.
    double mass_beyond(double x_crest) const;
};

/// CSV with header x_bin_center,rho,u.
void write_density_csv(std::ostream& os, const BinnedDensity& d);

/// int_{x > x_crest} rho dx on the grid nodes (right of the crest up to the
/// seam); a node exactly at the crest counts half.
double transmission(const RealField& rho, double x_crest);

/// Mean |phi|^2 and |phi|^4 over the nodes farther than `half` from X.
void background_moments(const ComplexField& phi, double X, double half, double& m2, double& m4);

/// Number of dt steps that reach t; throws ConfigError unless t is a multiple of dt.
std::size_t steps_for(double t, double dt);

enum class Outcome { reflected, transmitted, undecided, failed };
const char* to_string(Outcome o);

struct Barrier {
    double crest = 0.0;
    double margin = 0.0;  ///< |X - crest| must exceed this to decide (3 sigma_V)
};

struct EnsembleConfig {
    Grid grid = make_grid(2.0 * 3.141592653589793, 8);
    SolitonParams soliton;
    RealField potential{grid};
    EvolutionConfig evolution;  ///< t_end, dt; output_stride sets the tracking cadence
    std::vector<double> observation_times;  ///< multiples of dt within [0, t_end]
    WindowSpec window;
    double bin_width = 2.0;
    std::size_t realizations = 1;
    std::uint64_t base_seed = 0;
    double noise = 0.0;
    NoiseConvention convention = NoiseConvention::delta;
    std::optional<Barrier> barrier;
    int workers = 1;

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

struct RealizationRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    Outcome outcome = Outcome::undecided;
    std::vector<double> X;  ///< unwrapped track position at each observation time
    std::vector<double> v;
    std::optional<double> failure_time;
    /// <|eta|^2> and <|eta|^4> outside the soliton window at each observation time
    std::vector<double> background_m2, background_m4;
};

struct EnsembleStats {
    std::vector<double> times;
    std::vector<BinnedDensity> density;  ///< one per observation time
    std::vector<double> mean_X, sigma_X, mean_v, sigma_P;
    std::vector<double> background_m2, background_kurtosis;  ///< <|eta|^4>/<|eta|^2>^2
    std::size_t transmitted = 0, reflected = 0, undecided = 0, failed = 0;

    std::size_t survivors() const { return transmitted + reflected + undecided; }
    /// Transmitted fraction among decided realizations (NaN if none decided).
    double transmission() const;
    /// Binomial standard error of transmission().
    double transmission_error() const;
};

/// Runs one realization: phi(x,0) = phi_s + zeta, evolve, track. A singular
/// state marks the record failed; other errors propagate. `observer` sees
/// the field at every observation time; `track` receives the full track.
RealizationRecord run_realization(const EnsembleConfig& cfg, std::size_t index, const Observer& observer = {},
                                  SolitonTrack* track = nullptr);

/// Initial field of realization `index` (soliton plus noise, unprojected).
ComplexField initial_field(const EnsembleConfig& cfg, std::size_t index);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// All realizations, computed on cfg.workers OpenMP threads and returned in
/// index order, so the result does not depend on scheduling.
std::vector<RealizationRecord> run_realizations(const EnsembleConfig& cfg, const ProgressFn& progress = {});

/// Reduce records (in index order) to ensemble statistics.
EnsembleStats reduce(const EnsembleConfig& cfg, const std::vector<RealizationRecord>& records);

EnsembleStats run_ensemble(const EnsembleConfig& cfg, const ProgressFn& progress = {});

/// CSV: index,seed,outcome,X_<t>,v_<t>,... with empty fields for failed runs.
void write_records_csv(std::ostream& os, const std::vector<double>& times,
                       const std::vector<RealizationRecord>& records);

/// CSV: t,sigma_X,sigma_P,product.
void write_summary_csv(std::ostream& os, const EnsembleStats& s);

/// CSV: t,mean_X,mean_v,background_m2,background_kurtosis.
void write_moments_csv(std::ostream& os, const EnsembleStats& s);

enum class WindowCentering {
    fixed,    ///< window centred on the launch position X_s
    located,  ///< window re-centred on its own estimate (locate_soliton)
};

struct UncertaintyConfig {
    Grid grid = make_grid(1256.636, 1024);
    double amplitude = 0.18;
    double noise = 0.0064;
    NoiseConvention convention = NoiseConvention::delta;
    std::vector<double> windows;  ///< l values for the Var X curve
    std::size_t realizations = 1000;
    std::uint64_t base_seed = 0;
    double measure_time = 0.0;  ///< evolve this long before measuring (0: initial state)
    EvolutionConfig evolution;  ///< dt used when measure_time > 0
    int workers = 1;

    void validate() const;
};

struct UncertaintyRow {
    double l = 0.0;
    double var_fixed = 0.0;
    double var_located = 0.0;
};

struct UncertaintyResult {
    std::vector<UncertaintyRow> rows;
    double theory_var_X = 0.0;  ///< eps^2 pi^2 / (12 w'^3)
    double theory_sigma_P = 0.0;  ///< sqrt(4/3 w'^3 eps^2)
    double window = 0.0;  ///< l used for sigma_X and sigma_P
    double sigma_X = 0.0;  ///< fixed centring at `window`
    double sigma_P = 0.0;  ///< w' std(v)
    double product() const { return sigma_X * sigma_P; }
};

/// n noise realizations around a stationary soliton at x = 0: Var X(l) about
/// X_s = 0 for both centrings, and sigma_X, sigma_P at the default window.
UncertaintyResult uncertainty_scan(const UncertaintyConfig& cfg, const ProgressFn& progress = {});

/// CSV: l,var_X,var_X_located,theory.
void write_uncertainty_csv(std::ostream& os, const UncertaintyResult& r);

}  // namespace gcsge
