#pragma once

#include <cstddef>
#include <optional>

#include "bff/errors.hpp"

namespace bff {

struct CellIndex {
    std::size_t col = 0;
    std::size_t row = 0;

    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Metric layout of a regular grid. Row 0 holds the smallest world y; cells
/// are stored row-major.
struct GridGeometry {
    std::size_t width = 0;
    std::size_t height = 0;
    double resolution = 0.0;  // meters per cell
    double origin_x = 0.0;    // world position of the lower-left corner of cell (0,0)
    double origin_y = 0.0;

    std::size_t cell_count() const noexcept { return width * height; }
    std::size_t flat(CellIndex c) const noexcept { return c.row * width + c.col; }
    CellIndex unflat(std::size_t index) const noexcept { return {index % width, index / width}; }

    double extent_x() const noexcept { return static_cast<double>(width) * resolution; }
    double extent_y() const noexcept { return static_cast<double>(height) * resolution; }

    /// Throws ValidationError unless width, height >= 1 and resolution > 0.
    void validate() const;

    /// Nullopt when (x, y) lies outside the grid.
    std::optional<CellIndex> try_cell(double x, double y) const noexcept;

    /// World coordinates of the center of `c`.
    double center_x(CellIndex c) const noexcept;
    double center_y(CellIndex c) const noexcept;

    /// Same as the geometry of this grid's area tiled at `new_resolution`,
    /// sharing the origin; partial cells at the far edges are included.
    GridGeometry with_resolution(double new_resolution) const;

    /// Equal sizes, with resolution and origin equal to within 1e-9 m.
    bool same_as(const GridGeometry& other) const noexcept;

    friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// col = floor((x - origin_x) / resolution), row likewise; throws OutOfBounds
/// outside the grid.
CellIndex world_to_cell(const GridGeometry& geometry, double x, double y);

}  // namespace bff
