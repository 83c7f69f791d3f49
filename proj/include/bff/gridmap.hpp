#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "bff/geometry.hpp"

namespace bff {

/// Static occupancy probabilities on a metric grid, values in [0, 1].
class OccupancyGrid {
public:
    OccupancyGrid(GridGeometry geometry, std::vector<double> values);

    /// Every cell set to `value`.
    static OccupancyGrid filled(GridGeometry geometry, double value);

    const GridGeometry& geometry() const noexcept { return geometry_; }
    std::size_t width() const noexcept { return geometry_.width; }
    std::size_t height() const noexcept { return geometry_.height; }
    double resolution() const noexcept { return geometry_.resolution; }

    double at(CellIndex c) const noexcept { return values_[geometry_.flat(c)]; }
    std::span<const double> values() const noexcept { return values_; }

private:
    GridGeometry geometry_;
    std::vector<double> values_;
};

/// Contents of the map sidecar (`resolution`, `origin`, `negate`, optional `image`).
struct MapMetadata {
    double resolution = 0.0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    bool negate = false;
    std::filesystem::path image;  // empty when the sidecar names no image
};

MapMetadata read_map_metadata(const std::filesystem::path& sidecar);
void write_map_metadata(const MapMetadata& meta, const std::filesystem::path& sidecar);

/// Loads an 8-bit grayscale PGM (P5) or PNG. Occupancy is (255 - p) / 255, or
/// p / 255 with `negate`; image rows are flipped so row 0 is the lowest y.
OccupancyGrid load_occupancy(const std::filesystem::path& image, const MapMetadata& meta);

/// Accepts either the sidecar (which must name its image) or the image itself,
/// in which case `<stem>.yaml` next to it is used.
OccupancyGrid load_map(const std::filesystem::path& path);

/// Writes a P5 PGM with pixel = round(255 * (1 - occupancy)), top row first.
void write_pgm(const OccupancyGrid& grid, const std::filesystem::path& path);

/// PGM plus a `<stem>.yaml` sidecar with negate = 0.
void write_map(const OccupancyGrid& grid, const std::filesystem::path& pgm_path);

inline constexpr std::size_t kWindowSize = 64;
inline constexpr double kDefaultPadding = 0.5;

/// Bilinear sample of the grid at world (x, y), interpolating between cell
/// centers and clamping at the outer half-cells. Points outside the grid
/// extent return `padding`.
double sample_bilinear(const OccupancyGrid& grid, double x, double y, double padding = kDefaultPadding);

/// Square occupancy patch; values row-major with row 0 at the lowest y.
struct Window {
    std::size_t size = kWindowSize;
    double resolution = 0.0;
    double center_x = 0.0;
    double center_y = 0.0;
    std::vector<double> values;

    double at(std::size_t col, std::size_t row) const noexcept { return values[row * size + col]; }
};

struct WindowOptions {
    std::size_t size = kWindowSize;
    double padding = kDefaultPadding;
};

/// Sample (col, row) is taken at center + ((col - size/2), (row - size/2)) * resolution,
/// so pixel (size/2, size/2) lies exactly on the reference point.
Window extract_window(const OccupancyGrid& grid, double center_x, double center_y, double window_resolution,
                      const WindowOptions& options = {});
Window extract_window(const OccupancyGrid& grid, CellIndex center, double window_resolution,
                      const WindowOptions& options = {});

/// Occupancy resampled onto `target` by bilinear sampling at each target cell center.
OccupancyGrid resample(const OccupancyGrid& grid, const GridGeometry& target, double padding = kDefaultPadding);

}  // namespace bff
