#include "gcsge/potential.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gcsge/errors.hpp"

namespace gcsge {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Value of the periodic interpolant at x, for knots already validated.
double interpolate(const std::vector<std::pair<double, double>>& k, double L, double x) {
    const double x0 = k.front().first;
    // shift x into [x0, x0 + L)
    const double xs = x0 + std::fmod(std::fmod(x - x0, L) + L, L);
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
        if (xs < k[i + 1].first) {
            const double f = (xs - k[i].first) / (k[i + 1].first - k[i].first);
            return k[i].second + f * (k[i + 1].second - k[i].second);
        }
    }
    const auto& last = k.back();
    const double f = (xs - last.first) / (x0 + L - last.first);
    return last.second + f * (k.front().second - last.second);
}

}  // namespace

void validate_potential(const PotentialSpec& spec, const Grid& grid) {
    std::visit(overloaded{
                   [](std::monostate) {},
                   [](const GaussianBarrier& g) {
                       if (!(g.height >= 0.0)) throw ConfigError(fmt::format("barrier height must be >= 0, got {}", g.height));
                       if (!(g.width > 0.0)) throw ConfigError(fmt::format("barrier width must be > 0, got {}", g.width));
                   },
                   [&](const PiecewiseLinear& p) {
                       if (p.knots.size() < 2) throw ConfigError("piecewise-linear potential needs at least two knots");
                       for (std::size_t i = 1; i < p.knots.size(); ++i) {
                           if (!(p.knots[i].first > p.knots[i - 1].first)) {
                               throw ConfigError("piecewise-linear knots must be strictly increasing in x");
                           }
                       }
                       if (!(p.knots.back().first - p.knots.front().first < grid.length())) {
                           throw ConfigError("piecewise-linear knots must span less than the domain length");
                       }
                   },
               },
               spec);
}

RealField make_potential(const PotentialSpec& spec, const Grid& grid) {
    validate_potential(spec, grid);
    RealField V(grid);
    std::visit(overloaded{
                   [](std::monostate) {},
                   [&](const GaussianBarrier& g) {
                       for (std::size_t j = 0; j < grid.size(); ++j) {
                           const double d = grid.displacement(grid.x(j), g.center);
                           V[j] = g.height * std::exp(-d * d / (2.0 * g.width * g.width));
                       }
                   },
                   [&](const PiecewiseLinear& p) {
                       RealField raw(grid);
                       for (std::size_t j = 0; j < grid.size(); ++j) raw[j] = interpolate(p.knots, grid.length(), grid.x(j));
                       const std::size_t n = grid.size();
                       for (std::size_t j = 0; j < n; ++j) {
                           V[j] = 0.25 * raw[(j + n - 1) % n] + 0.5 * raw[j] + 0.25 * raw[(j + 1) % n];
                       }
                   },
               },
               spec);
    return V;
}

std::optional<double> barrier_crest(const PotentialSpec& spec) {
    if (const auto* g = std::get_if<GaussianBarrier>(&spec)) return g->center;
    return std::nullopt;
}

}  // namespace gcsge
