#pragma once

#include <filesystem>
#include <iosfwd>

#include "gcsge/grid.hpp"

namespace gcsge {

/// Binary field snapshots.
///
/// Complex: "GCSF1" | N (u64) | L (f64) | t (f64) | N x (re f64, im f64)
/// Real:    "GRSF1" | N (u64) | L (f64) | t (f64) | N x f64
/// All numbers little-endian.
struct ComplexSnapshot {
    ComplexField field;
    double t = 0.0;
};

struct RealSnapshot {
    RealField field;
    double t = 0.0;
};

void write_snapshot(std::ostream& os, const ComplexField& f, double t);
void write_snapshot(std::ostream& os, const RealField& f, double t);
void write_snapshot(const std::filesystem::path& p, const ComplexField& f, double t);
void write_snapshot(const std::filesystem::path& p, const RealField& f, double t);

/// Throws ConfigError on bad magic, truncated data, or an invalid grid.
ComplexSnapshot read_complex_snapshot(std::istream& is);
RealSnapshot read_real_snapshot(std::istream& is);
ComplexSnapshot read_complex_snapshot(const std::filesystem::path& p);
RealSnapshot read_real_snapshot(const std::filesystem::path& p);

}  // namespace gcsge
