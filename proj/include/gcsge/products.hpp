#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gcsge/grid.hpp"

namespace gcsge {

/// Lower-case hex SHA-256 of a byte string or a file.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& p);

struct ManifestEntry {
    std::string path;  ///< relative to the output directory, '/' separated
    std::uint64_t bytes = 0;
    std::string sha256;
};

/// Writes the data products of one run under a root directory and records
/// each one. The manifest (manifest.txt, "sha256  bytes  path" per line,
/// sorted by path) carries no timestamps or host details, so identical
/// products give an identical manifest.
class ProductWriter {
public:
    explicit ProductWriter(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }

    /// Creates parent directories and writes through `fill`.
    void text(const std::string& rel, const std::function<void(std::ostream&)>& fill);
    void snapshot(const std::string& rel, const ComplexField& f, double t);
    void snapshot(const std::string& rel, const RealField& f, double t);
    void copy(const std::string& rel, const std::filesystem::path& source);

    /// Writes manifest.txt and returns the entries.
    std::vector<ManifestEntry> finish();

private:
    std::filesystem::path prepare(const std::string& rel);
    void record(const std::string& rel);

    std::filesystem::path root_;
    std::vector<std::string> files_;
};

/// Reads a manifest.txt back. Throws ConfigError on malformed lines.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& p);

/// Snapshot file name: prefix_0003.ext.
std::string numbered(const std::string& prefix, std::size_t i, const std::string& ext);

}  // namespace gcsge
