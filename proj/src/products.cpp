#include "gcsge/products.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "gcsge/errors.hpp"
#include "gcsge/field_io.hpp"

namespace gcsge {

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw std::runtime_error("SHA-256 initialisation failed");
        }
    }
    void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
        std::string out;
        for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", p.string()));
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

ProductWriter::ProductWriter(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
}

std::filesystem::path ProductWriter::prepare(const std::string& rel) {
    const auto p = root_ / rel;
    std::filesystem::create_directories(p.parent_path());
    return p;
}

void ProductWriter::record(const std::string& rel) {
    if (std::find(files_.begin(), files_.end(), rel) == files_.end()) files_.push_back(rel);
}

void ProductWriter::text(const std::string& rel, const std::function<void(std::ostream&)>& fill) {
    const auto p = prepare(rel);
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
    fill(os);
    if (!os) throw std::runtime_error(fmt::format("write failed for '{}'", p.string()));
    record(rel);
}

void ProductWriter::snapshot(const std::string& rel, const ComplexField& f, double t) {
    write_snapshot(prepare(rel), f, t);
    record(rel);
}

void ProductWriter::snapshot(const std::string& rel, const RealField& f, double t) {
    write_snapshot(prepare(rel), f, t);
    record(rel);
}

void ProductWriter::copy(const std::string& rel, const std::filesystem::path& source) {
    const auto p = prepare(rel);
    std::filesystem::copy_file(source, p, std::filesystem::copy_options::overwrite_existing);
    record(rel);
}

std::vector<ManifestEntry> ProductWriter::finish() {
    std::vector<ManifestEntry> out;
    auto files = files_;
    std::sort(files.begin(), files.end());
    for (const auto& rel : files) {
        const auto p = root_ / rel;
        out.push_back({rel, std::filesystem::file_size(p), sha256_file(p)});
    }
    std::ofstream os(root_ / "manifest.txt", std::ios::binary | std::ios::trunc);
    for (const auto& e : out) os << e.sha256 << "  " << e.bytes << "  " << e.path << '\n';
    return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open manifest '{}'", p.string()));
    std::vector<ManifestEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        ManifestEntry e;
        if (!(ls >> e.sha256 >> e.bytes >> e.path) || e.sha256.size() != 64) {
            throw ConfigError(fmt::format("malformed manifest line: '{}'", line));
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::string numbered(const std::string& prefix, std::size_t i, const std::string& ext) {
    return fmt::format("{}_{:04d}.{}", prefix, i, ext);
}

}  // namespace gcsge
