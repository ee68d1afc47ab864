#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "gcsge/grid.hpp"

namespace gcsge {

/// V(x) = V0 exp(-(x - center)^2 / (2 sigma^2)), with minimal-image distance.
struct GaussianBarrier {
    double height = 0.0;  ///< V0 >= 0
    double width = 1.0;   ///< sigma_V > 0
    double center = 0.0;
};

/// Linear interpolation between (x, V) knots, continued periodically: the last
/// knot connects to the first one shifted by L. Knots must be strictly
/// increasing and span less than L.
struct PiecewiseLinear {
    std::vector<std::pair<double, double>> knots;
};

using PotentialSpec = std::variant<std::monostate, GaussianBarrier, PiecewiseLinear>;

/// Throws ConfigError for V0 < 0, sigma <= 0, fewer than two knots, non-increasing
/// knots, or knots spanning L or more.
void validate_potential(const PotentialSpec& spec, const Grid& grid);

/// Samples V on the grid. Piecewise-linear potentials are smoothed with the
/// periodic [1/4, 1/2, 1/4] stencil (support 2 dx) so the kinks do not ring
/// in the spectral derivative.
RealField make_potential(const PotentialSpec& spec, const Grid& grid);

/// Crest position of a Gaussian barrier; nullopt for other potentials.
std::optional<double> barrier_crest(const PotentialSpec& spec);

}  // namespace gcsge
