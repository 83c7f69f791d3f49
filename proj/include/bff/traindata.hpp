#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bff/gridmap.hpp"
#include "bff/mod_core.hpp"

namespace bff {

/// One supervised sample for the occupancy-to-dynamics network.
struct TrainingPair {
    std::vector<float> window;  // size * size, row 0 = lowest y
    std::vector<float> target;  // k probabilities

    friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

/// BFFT container, little-endian:
///   "BFFT" | u32 pair count | u32 window size | u32 k | f64 window resolution
///   | per pair: size*size f32 window, k f32 target
///   | optional "ANNO" | u32 length | text (`min_count: N`, ...)
struct TrainingSet {
    std::size_t window_size = kWindowSize;
    std::size_t k = 8;
    double window_resolution = 0.0;
    std::vector<TrainingPair> pairs;
    std::string annotation;
};

std::string encode_bfft(const TrainingSet& set);
TrainingSet decode_bfft(const std::string& bytes);
void write_bfft(const TrainingSet& set, const std::filesystem::path& path);
TrainingSet read_bfft(const std::filesystem::path& path);

inline constexpr std::uint64_t kDefaultMinCount = 10;

struct ExportOptions {
    double window_resolution = 0.0;
    std::uint64_t min_count = kDefaultMinCount;
    WindowOptions window;
};

/// Pairs (window around the cell center, floor-field target) for every cell
/// of `counts` with at least `min_count` observations, in row-major cell order.
TrainingSet make_training_set(const OccupancyGrid& occupancy, const CountGrid& counts, const ExportOptions& options);

/// make_training_set written to `out`; returns the pair count.
std::size_t export_pairs(const OccupancyGrid& occupancy, const CountGrid& counts, const ExportOptions& options,
                         const std::filesystem::path& out);

}  // namespace bff
