#include "bff/bff_io.hpp"

#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "binary_io.hpp"

namespace bff {

namespace fs = std::filesystem;
using detail::ByteReader;
using detail::ByteWriter;

namespace {

constexpr std::string_view kBff1Magic = "BFF1";
constexpr std::string_view kCountsMagic = "BFFC";
constexpr std::string_view kAnnotationMagic = "ANNO";

std::size_t payload_entries(std::uint64_t w, std::uint64_t h, std::uint64_t k, std::size_t elem,
                            std::size_t available, std::string_view what) {
    if (w == 0 || h == 0 || k == 0) {
        throw InputError(std::string(what) + ": zero-sized header field");
    }
    const std::uint64_t cap = available / elem;
    if (w > cap || h > cap / w || k > cap / (w * h)) {
        throw InputError(std::string(what) + ": truncated file");
    }
    return static_cast<std::size_t>(w * h * k);
}

void put_geometry(ByteWriter& out, const GridGeometry& g, std::size_t k) {
    const auto u32 = [](std::size_t v) {
        if (v > std::numeric_limits<std::uint32_t>::max()) {
            throw ValidationError("grid dimension exceeds 32 bits");
        }
        return static_cast<std::uint32_t>(v);
    };
    out.put(u32(g.width));
    out.put(u32(g.height));
    out.put(u32(k));
    out.put(g.resolution);
    out.put(g.origin_x);
    out.put(g.origin_y);
}

std::string annotation_value(const std::string& annotation, std::string_view key) {
    std::istringstream in(annotation);
    std::string line;
    const std::string prefix = std::string(key) + ":";
    while (std::getline(in, line)) {
        if (line.rfind(prefix, 0) == 0) {
            auto value = line.substr(prefix.size());
            const auto first = value.find_first_not_of(" \t");
            const auto last = value.find_last_not_of(" \t\r");
            return first == std::string::npos ? std::string() : value.substr(first, last - first + 1);
        }
    }
    return {};
}

}  // namespace

std::string read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw InputError("write failed for " + path.string());
    }
}

std::string encode_bff1(const Bff1File& file) {
    if (file.probs.size() != file.geometry.cell_count() * file.k) {
        throw ValidationError("BFF1 payload does not match its header");
    }
    ByteWriter out;
    out.magic(kBff1Magic);
    put_geometry(out, file.geometry, file.k);
    for (float p : file.probs) {
        out.put(p);
    }
    if (!file.annotation.empty()) {
        out.magic(kAnnotationMagic);
        out.put(static_cast<std::uint32_t>(file.annotation.size()));
        out.raw(file.annotation);
    }
    return out.take();
}

Bff1File decode_bff1(const std::string& bytes) {
    ByteReader in(bytes, "BFF1");
    in.expect_magic(kBff1Magic);
    Bff1File file;
    const auto w = in.get<std::uint32_t>();
    const auto h = in.get<std::uint32_t>();
    const auto k = in.get<std::uint32_t>();
    file.geometry.width = w;
    file.geometry.height = h;
    file.k = k;
    file.geometry.resolution = in.get<double>();
    file.geometry.origin_x = in.get<double>();
    file.geometry.origin_y = in.get<double>();
    const std::size_t n = payload_entries(w, h, k, sizeof(float), in.remaining(), "BFF1");
    file.probs.resize(n);
    for (auto& p : file.probs) {
        p = in.get<float>();
    }
    if (in.remaining() > 0) {
        in.expect_magic(kAnnotationMagic);
        const auto len = in.get<std::uint32_t>();
        file.annotation = std::string(in.raw(len));
        if (in.remaining() != 0) {
            throw InputError("BFF1: trailing bytes after annotation");
        }
    }
    try {
        file.geometry.validate();
    } catch (const ValidationError& e) {
        throw InputError(std::string("BFF1: ") + e.what());
    }
    return file;
}

void write_bff1(const Bff1File& file, const fs::path& path) { write_file_bytes(path, encode_bff1(file)); }

Bff1File read_bff1(const fs::path& path) { return decode_bff1(read_file_bytes(path)); }

void write_directional_grid(const DirectionalGrid& grid, const fs::path& path) {
    Bff1File file;
    file.geometry = grid.geometry();
    file.k = grid.k();
    file.probs.assign(grid.probs().begin(), grid.probs().end());
    file.annotation = "provenance: " + std::string(to_string(grid.provenance())) + "\n";
    write_bff1(file, path);
}

DirectionalGrid read_directional_grid(const fs::path& path, double tolerance) {
    Bff1File file = read_bff1(path);
    const std::string tag = annotation_value(file.annotation, "provenance");
    const Provenance provenance = tag.empty() ? Provenance::prior : provenance_from_string(tag);
    return DirectionalGrid(file.geometry, file.k, std::vector<double>(file.probs.begin(), file.probs.end()),
                           provenance, tolerance);
}

void write_counts(const CountGrid& counts, const fs::path& path) {
    ByteWriter out;
    out.magic(kCountsMagic);
    put_geometry(out, counts.geometry(), counts.k());
    out.put(counts.binning().offset);
    out.put(counts.skipped_out_of_bounds());
    out.put(counts.skipped_no_heading());
    for (std::uint64_t q : counts.counts()) {
        out.put(q);
    }
    write_file_bytes(path, out.take());
}

CountGrid read_counts(const fs::path& path) {
    const std::string bytes = read_file_bytes(path);
    ByteReader in(bytes, "counts sidecar");
    in.expect_magic(kCountsMagic);
    GridGeometry g;
    const auto w = in.get<std::uint32_t>();
    const auto h = in.get<std::uint32_t>();
    const auto k = in.get<std::uint32_t>();
    g.width = w;
    g.height = h;
    g.resolution = in.get<double>();
    g.origin_x = in.get<double>();
    g.origin_y = in.get<double>();
    const double offset = in.get<double>();
    const auto oob = in.get<std::uint64_t>();
    const auto no_heading = in.get<std::uint64_t>();
    const std::size_t n = payload_entries(w, h, k, sizeof(std::uint64_t), in.remaining(), "counts sidecar");
    std::vector<std::uint64_t> counts(n);
    for (auto& q : counts) {
        q = in.get<std::uint64_t>();
    }
    if (in.remaining() != 0) {
        throw InputError("counts sidecar: trailing bytes");
    }
    return CountGrid::from_counts(g, BinningSpec(k, offset), std::move(counts), oob, no_heading);
}

}  // namespace bff
