#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "gcsge/grid.hpp"
#include "gcsge/kernels.hpp"

namespace gcsge {

/// Threshold on max|phi| beyond which the model is treated as singular.
inline constexpr double kSingularAmplitude = 0.999;

struct EvolutionConfig {
    double dt = 0.01;
    double dealias = 2.0 / 3.0;  ///< fraction of |k| <= k_max retained in nonlinear products
    double t_end = 0.0;
    std::size_t output_stride = 100;
    kernels::Exec exec = kernels::Exec::serial;

    /// Throws ConfigError on dt <= 0, dealias outside (0,1], t_end < 0,
    /// output_stride == 0, or t_end not an integer multiple of dt.
    void validate() const;
    std::size_t step_count() const;
};

struct Diagnostics {
    double t = 0.0;
    double Q = 0.0;        ///< Noether charge
    double P = 0.0;        ///< total momentum
    double max_amp = 0.0;  ///< max |phi|
};

using Observer = std::function<void(double t, const ComplexField& phi)>;

struct EvolutionResult {
    ComplexField final_field;
    std::vector<Diagnostics> diagnostics;
};

/// Integrating-factor RK4 for the Galilean complex sine-Gordon equation
/// (m' = 1/2):
///
///   d_t phi = -i(1-|phi|^2)^2 phi + i(1-|phi|^2) phi_xx + i conj(phi) phi_x^2 - i V phi
///
/// The linear part i(d_xx - 1) is integrated exactly through its spectral
/// multiplier exp(-i(k^2+1) t). The remainder, including the potential, is
/// formed pointwise and masked to |k| <= dealias * k_max before use.
class GcsgeIntegrator {
public:
    GcsgeIntegrator(const Grid& grid, RealField potential, EvolutionConfig cfg);

    const Grid& grid() const noexcept { return grid_; }
    const EvolutionConfig& config() const noexcept { return cfg_; }
    const RealField& potential() const noexcept { return V_; }

    /// d_t phi in physical space (linear + masked nonlinear part).
    ComplexField rhs(const ComplexField& phi, double t = 0.0);

    /// Advance one step of size cfg.dt in place. t is used only for error reports.
    void step(ComplexField& phi, double t = 0.0);

    /// Evolve to cfg.t_end. The initial state is projected onto the retained
    /// modes first. Observers and diagnostics fire at t = 0 and every
    /// output_stride steps, and always at t_end.
    EvolutionResult evolve(const ComplexField& phi0, const Observer& observer = {});

    /// Keep only modes with |k| <= dealias * k_max.
    void project(ComplexField& phi);

private:
    void step_spectral(ComplexBuffer& u, double t);
    // Masked spectral nonlinear term of the state u_hat; returns nothing but
    // throws SingularStateError if max|phi| >= kSingularAmplitude.
    void nonlinear(const ComplexBuffer& u_hat, ComplexBuffer& out_hat, double t);

    Grid grid_;
    RealField V_;
    EvolutionConfig cfg_;
    Spectral fft_;
    ComplexBuffer ik_, mk2_, mask_, e_half_, e_full_;
    ComplexBuffer phi_, phix_, phixx_, work_, nl_;
    ComplexBuffer k1_, k2_, k3_, k4_, stage_;
};

/// Convenience wrapper: d_t phi for potential V with default dealiasing.
ComplexField rhs(const ComplexField& phi, const RealField& V);

/// One IF-RK4 step of size dt (no projection of the input).
ComplexField step(const ComplexField& phi, const RealField& V, double dt);

EvolutionResult evolve(const ComplexField& phi0, const RealField& V, const EvolutionConfig& cfg,
                       const Observer& observer = {});

/// Q = int |phi|^2 / (1 - |phi|^2) dx. Throws SingularStateError if max|phi| >= kSingularAmplitude.
double noether_charge(const ComplexField& phi);

/// P = int Im(conj(phi) phi_x) / (1 - |phi|^2) dx.
double total_momentum(const ComplexField& phi);

Diagnostics diagnose(const ComplexField& phi, double t);

/// CSV with header t,Q,P,max_amp and 17 significant digits.
void write_diagnostics_csv(std::ostream& os, const std::vector<Diagnostics>& series);

}  // namespace gcsge
