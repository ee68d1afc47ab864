#include "gcsge/field_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "gcsge/errors.hpp"

namespace gcsge {

namespace {

constexpr std::string_view kComplexMagic = "GCSF1";
constexpr std::string_view kRealMagic = "GRSF1";

void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b.data(), 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& is) {
    std::array<unsigned char, 8> b{};
    is.read(reinterpret_cast<char*>(b.data()), 8);
    if (!is) throw ConfigError("snapshot truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

void write_header(std::ostream& os, std::string_view magic, const Grid& g, double t) {
    os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
    put_u64(os, g.size());
    put_f64(os, g.length());
    put_f64(os, t);
}

struct Header {
    Grid grid;
    double t;
};

Header read_header(std::istream& is, std::string_view magic) {
    std::array<char, 5> m{};
    is.read(m.data(), 5);
    if (!is || std::string_view(m.data(), 5) != magic) {
        throw ConfigError("snapshot magic mismatch, expected " + std::string(magic));
    }
    const auto n = get_u64(is);
    const double L = get_f64(is);
    const double t = get_f64(is);
    return {make_grid(L, static_cast<std::size_t>(n)), t};
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + p.string() + " for writing");
    return os;
}

std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + p.string());
    return is;
}

}  // namespace

void write_snapshot(std::ostream& os, const ComplexField& f, double t) {
    write_header(os, kComplexMagic, f.grid, t);
    for (const auto& z : f.values) {
        put_f64(os, z.real());
        put_f64(os, z.imag());
    }
}

void write_snapshot(std::ostream& os, const RealField& f, double t) {
    write_header(os, kRealMagic, f.grid, t);
    for (double v : f.values) put_f64(os, v);
}

void write_snapshot(const std::filesystem::path& p, const ComplexField& f, double t) {
    auto os = open_out(p);
    write_snapshot(os, f, t);
}

void write_snapshot(const std::filesystem::path& p, const RealField& f, double t) {
    auto os = open_out(p);
    write_snapshot(os, f, t);
}

ComplexSnapshot read_complex_snapshot(std::istream& is) {
    auto h = read_header(is, kComplexMagic);
    ComplexSnapshot s{ComplexField(h.grid), h.t};
    for (auto& z : s.field.values) {
        const double re = get_f64(is);
        const double im = get_f64(is);
        z = {re, im};
    }
    return s;
}

RealSnapshot read_real_snapshot(std::istream& is) {
    auto h = read_header(is, kRealMagic);
    RealSnapshot s{RealField(h.grid), h.t};
    for (auto& v : s.field.values) v = get_f64(is);
    return s;
}

ComplexSnapshot read_complex_snapshot(const std::filesystem::path& p) {
    auto is = open_in(p);
    return read_complex_snapshot(is);
}

RealSnapshot read_real_snapshot(const std::filesystem::path& p) {
    auto is = open_in(p);
    return read_real_snapshot(is);
}

}  // namespace gcsge
