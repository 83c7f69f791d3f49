#include "bff/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bff {

OutOfBounds::OutOfBounds(double x, double y)
    : std::out_of_range([&] {
          std::ostringstream msg;
          msg << "point (" << x << ", " << y << ") lies outside the grid";
          return msg.str();
      }()),
      x_(x),
      y_(y) {}

void GridGeometry::validate() const {
    if (width == 0 || height == 0) {
        throw ValidationError("grid must have at least one cell in each dimension");
    }
    if (!(resolution > 0.0) || !std::isfinite(resolution)) {
        throw ValidationError("grid resolution must be positive");
    }
    if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) {
        throw ValidationError("grid origin must be finite");
    }
}

std::optional<CellIndex> GridGeometry::try_cell(double x, double y) const noexcept {
    const double fx = std::floor((x - origin_x) / resolution);
    const double fy = std::floor((y - origin_y) / resolution);
    // Negated comparisons also reject NaN.
    if (!(fx >= 0.0) || !(fy >= 0.0)) {
        return std::nullopt;
    }
    if (fx >= static_cast<double>(width) || fy >= static_cast<double>(height)) {
        return std::nullopt;
    }
    return CellIndex{static_cast<std::size_t>(fx), static_cast<std::size_t>(fy)};
}

double GridGeometry::center_x(CellIndex c) const noexcept {
    return origin_x + (static_cast<double>(c.col) + 0.5) * resolution;
}

double GridGeometry::center_y(CellIndex c) const noexcept {
    return origin_y + (static_cast<double>(c.row) + 0.5) * resolution;
}

GridGeometry GridGeometry::with_resolution(double new_resolution) const {
    if (!(new_resolution > 0.0)) {
        throw ValidationError("resolution must be positive");
    }
    GridGeometry out = *this;
    out.resolution = new_resolution;
    // Shave a relative epsilon so exact multiples do not gain a phantom column.
    const auto cells = [&](double extent) {
        const double n = std::ceil(extent / new_resolution * (1.0 - 1e-12));
        return static_cast<std::size_t>(std::max(1.0, n));
    };
    out.width = cells(extent_x());
    out.height = cells(extent_y());
    return out;
}

bool GridGeometry::same_as(const GridGeometry& other) const noexcept {
    constexpr double tol = 1e-9;
    return width == other.width && height == other.height &&
           std::abs(resolution - other.resolution) <= tol &&
           std::abs(origin_x - other.origin_x) <= tol && std::abs(origin_y - other.origin_y) <= tol;
}

CellIndex world_to_cell(const GridGeometry& geometry, double x, double y) {
    if (auto cell = geometry.try_cell(x, y)) {
        return *cell;
    }
    throw OutOfBounds(x, y);
}

}  // namespace bff
