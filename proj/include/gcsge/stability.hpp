#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "gcsge/grid.hpp"
#include "gcsge/integrator.hpp"

namespace gcsge {

/// Plane wave phi = w' exp(i(kx - omega t)), omega = 1 - 2w'^2 + w'^4 + k^2.
struct PlaneWaveParams {
    double amplitude = 0.1;  ///< w', in (0, 1)
    double wavenumber = 0.0;  ///< k

    void validate() const;  ///< throws ParameterError unless 0 < w' < 1
    double frequency() const;
};

/// Both branches of the linearized modulus/phase eigenproblem at perturbation wavenumber q.
struct GrowthPair {
    cplx plus;
    cplx minus;
};

/// lambda(q) = +-(1 - w'^2) q sqrt(4w'^2 - q^2) - 2ikq. For q > 2w' the root is
/// imaginary and both branches oscillate.
GrowthPair growth_rate(const PlaneWaveParams& p, double q);

struct MaxGrowth {
    double q = 0.0;
    double rate = 0.0;
};

/// q_u = sqrt(2) w', Re lambda(q_u) = 2 w'^2 (1 - w'^2).
MaxGrowth max_growth(const PlaneWaveParams& p);

struct GrowthSpectrum {
    std::vector<double> q;
    std::vector<GrowthPair> lambda;
};

GrowthSpectrum growth_spectrum(const PlaneWaveParams& p, const std::vector<double>& qs);

/// True if some grid wavenumber 2 pi n / L (n >= 1, |q| <= k_max) has Re lambda > 0.
bool has_unstable_mode(const PlaneWaveParams& p, const Grid& grid);

/// phi = w' exp(ikx) (1 + delta cos(qx)).
ComplexField seeded_plane_wave(const PlaneWaveParams& p, double q, double delta, const Grid& grid);

/// Complex amplitude of the modulus perturbation at wavenumber q:
/// (2/N) sum_j |phi_j| exp(-i q x_j).
cplx modulus_mode(const ComplexField& phi, double q);

struct GrowthMeasurement {
    bool growing = false;
    double rate = 0.0;                    ///< fitted Re lambda; 0 when not growing
    std::optional<double> frequency;      ///< |Im lambda| from zero crossings when not growing
    double fit_begin = 0.0, fit_end = 0.0;
    std::vector<double> t;
    std::vector<double> amplitude;  ///< |modulus_mode| at each sample
};

/// Seeds a plane wave with a cosine modulation of relative size delta at
/// wavenumber q, evolves to cfg.t_end and samples the q mode every
/// output_stride steps.
///
/// If the mode crosses 1e3 delta w', the rate is a least-squares fit of
/// log|mode| over the samples with amplitude in [10 delta w', 1e3 delta w'].
/// If it never exceeds 10 delta w', the run counts as not growing and the
/// oscillation frequency is taken from zero crossings of the mode with the
/// -2ikq drift removed. With delta = 0 only the samples are returned.
///
/// Throws ConfigError if q is not a grid wavenumber or delta w' is not small,
/// and FitWindowError if the mode grows but leaves fewer than three samples
/// in the fit window or crosses w'/10 before it.
GrowthMeasurement measure_growth(const PlaneWaveParams& p, double q, double delta, const Grid& grid,
                                 const EvolutionConfig& cfg);

struct SpectrumRow {
    double q = 0.0;
    GrowthPair lambda;
    std::optional<double> measured;
};

/// CSV with header q,re_lambda,im_lambda,measured_rate; the last column is
/// empty when not measured.
void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows);

}  // namespace gcsge
