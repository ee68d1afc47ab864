#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gcsge/ensemble.hpp"
#include "gcsge/grid.hpp"

namespace gcsge {

/// Effective Planck constant of a soliton in a background of noise eps:
/// hbar = (2/3) pi eps^2. The soliton mass plays m = w'.
double effective_hbar(double noise);

/// sigma_X = sqrt(eps^2 pi^2 / (12 w'^3)), the position spread of a soliton in noise.
double position_spread(double amplitude, double noise);

/// sigma_P = sqrt(4 w'^3 eps^2 / 3).
double momentum_spread(double amplitude, double noise);

/// psi(x, t) of the soliton's Schrodinger equation
///   d_t psi = i (pi eps^2 / 3w') psi_xx - i (3 / 2 pi eps^2) V_p psi.
struct Wavefunction {
    ComplexField psi;
    double amplitude = 0.1;  ///< w'
    double noise = 0.01;     ///< eps
    double t = 0.0;

    double hbar() const { return effective_hbar(noise); }
    double norm() const;  ///< int |psi|^2 dx
};

/// Normalized Gaussian density centred at x0 (minimal-image distance).
RealField gaussian_density(const Grid& grid, double center, double sigma);

using WarningFn = std::function<void(const std::string&)>;

/// psi = sqrt(rho0) exp(i k x) with k = w' v0 / hbar = 3 w' v0 / (2 pi eps^2).
/// rho0 is rescaled to unit mass if needed, reporting through `warn`
/// (stderr when empty). Throws ConfigError on negative or zero rho0.
Wavefunction build_initial(const RealField& rho0, double v0, double amplitude, double noise,
                           const WarningFn& warn = {});

/// Phase wavenumber w' v0 / hbar of build_initial.
double phase_wavenumber(double v0, double amplitude, double noise);

/// sqrt(<k^2>) of psi's spectrum; used for the resolution check.
double rms_wavenumber(const ComplexField& psi);

struct SeConfig {
    double dt = 0.5;
    double t_end = 0.0;
    std::vector<double> snapshot_times;  ///< multiples of dt within [0, t_end]
    double min_points_per_wavelength = 4.0;

    void validate() const;
};

/// Strang split-step: half potential phase, exact kinetic step
/// exp(-i (pi eps^2 / 3w') k^2 dt) in Fourier space, half potential phase.
/// Returns psi at each snapshot time. Throws ConfigError when the initial
/// state has fewer than min_points_per_wavelength grid points per
/// 2 pi / k_rms, or when V_p lives on another grid.
std::vector<Wavefunction> evolve_se(const Wavefunction& psi0, const RealField& Vp, const SeConfig& cfg);

struct MadelungFields {
    RealField rho;
    RealField u;              ///< 0 where masked
    RealField current;        ///< rho u = (hbar / w') Im(conj(psi) psi_x), defined everywhere
    std::vector<bool> masked;  ///< |psi| <= mask_floor
};

/// rho = |psi|^2, u = (hbar / w') Im(conj(psi) psi_x) / |psi|^2 with psi_x
/// spectral; u is masked where |psi| <= mask_fraction * max|psi|.
MadelungFields madelung(const Wavefunction& w, double mask_fraction = 1e-3);

/// Box average onto ensemble bins: node j goes to the bin holding x_j;
/// rho_bin = sum rho_j dx / width and u_bin = sum (rho u)_j / sum rho_j.
/// u is left 0 in bins whose nodes are all masked. The standard-error
/// columns are zero and count holds the nodes per bin.
BinnedDensity bin_madelung(const MadelungFields& m, const BinGrid& bins);

}  // namespace gcsge
