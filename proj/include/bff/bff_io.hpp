#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bff/mod_core.hpp"

namespace bff {

/// BFF1 layout, all little-endian:
///   "BFF1" | u32 width | u32 height | u32 k | f64 resolution | f64 origin_x | f64 origin_y
///   | width*height*k f32 probabilities (row-major, row 0 = lowest y, direction fastest)
///   | optional annotation: "ANNO" | u32 byte length | UTF-8 text of "key: value" lines
/// The annotation carries `provenance: <name>`.
struct Bff1File {
    GridGeometry geometry;
    std::size_t k = 0;
    std::vector<float> probs;
    std::string annotation;  // empty when absent
};

std::string encode_bff1(const Bff1File& file);
Bff1File decode_bff1(const std::string& bytes);

void write_bff1(const Bff1File& file, const std::filesystem::path& path);
Bff1File read_bff1(const std::filesystem::path& path);

/// Writes `grid` as BFF1 with its provenance annotation. Probabilities are narrowed to f32.
void write_directional_grid(const DirectionalGrid& grid, const std::filesystem::path& path);

/// Reads a BFF1 file and checks the simplex at `tolerance`. Provenance comes
/// from the annotation, defaulting to `prior` when there is none.
DirectionalGrid read_directional_grid(const std::filesystem::path& path, double tolerance = 1e-6);

/// Counts sidecar, little-endian:
///   "BFFC" | u32 width | u32 height | u32 k | f64 resolution | f64 origin_x | f64 origin_y
///   | f64 bin offset | u64 skipped out of bounds | u64 skipped without heading
///   | width*height*k u64 counts
void write_counts(const CountGrid& counts, const std::filesystem::path& path);
CountGrid read_counts(const std::filesystem::path& path);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::string& bytes);

}  // namespace bff
