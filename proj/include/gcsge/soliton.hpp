#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "gcsge/grid.hpp"

namespace gcsge {

/// Boosted soliton of the GCSGE:
///   phi_s = w' sech[w'(x - X)] exp(i v/2 (x - X)) exp(i(-1 + w'^2 + v^2/4) t),  X = X0 + v t.
struct SolitonParams {
    double amplitude = 0.1;  ///< w', in (0, 1)
    double velocity = 0.0;   ///< v0
    double position = 0.0;   ///< X_s at t = 0

    void validate() const;  ///< throws ParameterError unless 0 < w' < 1
    double width() const;   ///< pi / sqrt(6 w')
    /// Internal carrier wavelength 4 pi / v0; nullopt when v0 == 0.
    std::optional<double> wavelength() const;
    double wavenumber() const { return 0.5 * velocity; }
    double frequency() const { return -1.0 + amplitude * amplitude + 0.25 * velocity * velocity; }
};

/// Closed form m(w') = (1/2) int |phi_s|^2/(1 - |phi_s|^2) dx = asin(w') / sqrt(1 - w'^2).
double soliton_mass(double amplitude);

/// Samples phi_s at time t on the grid using minimal-image distance to X,
/// so a soliton near the seam wraps smoothly.
ComplexField soliton_profile(const SolitonParams& p, double t, const Grid& grid);

/// p(x) = Im(conj(phi) phi_x) / (1 - |phi|^2); phi_x spectral.
RealField momentum_density(const ComplexField& phi);

enum class PotentialWeighting {
    charge,     ///< |phi_s|^2 / (1 - |phi_s|^2): the exact particle potential energy
    intensity,  ///< |phi_s|^2: the small-w' form used by the soliton Schrodinger equation
};

/// V_p(X_s) = int weight(phi_s(x - X_s)) V(x) dx.
double potential_energy(const RealField& V, const SolitonParams& p,
                        PotentialWeighting weighting = PotentialWeighting::charge);

/// V_p(x) on every grid node, by periodic convolution with the soliton weight.
RealField potential_energy_field(const RealField& V, double amplitude,
                                 PotentialWeighting weighting = PotentialWeighting::charge);

struct Estimate {
    double value = 0.0;
    bool low_confidence = false;  ///< window max |phi|^2 < (w'/2)^2
};

struct WindowSpec {
    double length = 0.0;      ///< l
    double noise = 0.0;       ///< epsilon
    double amplitude = 0.1;   ///< w'
    double amp_floor = -1.0;  ///< |phi| threshold of the phase gradient; < 0 means epsilon
};

/// Window length capturing 99% of the soliton's |phi_s|^2 (l = 2 atanh(0.99)/w'),
/// clipped into the band pi/sqrt(6 w') << l << (4 pi^2 / (3 w' eps^2))^(1/3)
/// (upper end taken at half the bound) and to L/2.
double default_window(double amplitude, double noise, double domain_length);

/// X = center + (1/2w') int_{|x-center| <= l/2} (x - center)(|phi|^2 - eps^2) dx.
/// Boundary cells enter with their overlapped fraction.
/// Throws ConfigError if l is not in (0, L].
Estimate estimate_position(const ComplexField& phi, double center, const WindowSpec& w);

/// Re-centres the window on its own estimate until the shift falls below
/// 1e-9 dx or max_iterations is reached. An off-centre window shrinks the
/// offset only by the fraction of the soliton left outside, so one pass is
/// not enough for a fast-moving soliton.
Estimate locate_soliton(const ComplexField& phi, double guess, const WindowSpec& w, int max_iterations = 50);

/// v = 2 int_window d_x(arg phi) |phi|^2 dx / int_window |phi_s|^2 dx,
/// with phi_s the soliton of amplitude w' centred on the window (the
/// denominator is 2 w' tanh(w' l/2), here taken with the same quadrature),
/// and the phase gradient Im(conj(phi) phi_x)/|phi|^2 taken as zero where
/// |phi| <= amp_floor. An exact soliton gives v0 for any l. Unlike the
/// position estimator there is no eps^2 offset: noise adds no mean gradient.
Estimate estimate_velocity(const ComplexField& phi, double center, const WindowSpec& w);

/// Same as above with a precomputed phi_x.
Estimate estimate_velocity(const ComplexField& phi, const ComplexField& phi_x, double center,
                           const WindowSpec& w);

struct SolitonTrack {
    std::vector<double> t;
    std::vector<double> X;
    std::vector<double> v;
    std::vector<double> a;
    std::vector<bool> low_confidence;

    std::size_t size() const noexcept { return t.size(); }
    /// Fill a by centered differences of v (one-sided at the ends).
    void compute_accelerations();
};

/// Follows one soliton through a sequence of snapshots. Each call locates the
/// soliton starting from the previous position, then measures v in the
/// window centred there.
class SolitonTracker {
public:
    SolitonTracker(const Grid& grid, double initial_position, WindowSpec window);

    void observe(double t, const ComplexField& phi);
    const SolitonTrack& track() const noexcept { return track_; }
    SolitonTrack finish();
    double position() const noexcept { return center_; }

private:
    Spectral fft_;
    ComplexField phix_;
    ComplexBuffer hat_;
    WindowSpec window_;
    double center_;
    SolitonTrack track_;
};

/// CSV header t,X,v,a.
void write_track_csv(std::ostream& os, const SolitonTrack& track);

}  // namespace gcsge
