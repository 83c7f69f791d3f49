#pragma once

#include <cstddef>
#include <filesystem>

#include "bff/mod_core.hpp"

namespace bff {

/// Cells whose sum is within this distance of 1 (and have no negative entry)
/// are renormalized on load; anything worse is rejected.
inline constexpr double kPriorRepairTolerance = 1e-2;

/// Every cell 1/k.
DirectionalGrid uniform_prior(const GridGeometry& geometry, std::size_t k = 8);

struct PriorLoadReport {
    std::size_t repaired_cells = 0;
};

/// Loads a BFF1 prior, renormalizing slightly-off cells. Throws InputError on
/// container problems and ValidationError on cells beyond repair.
DirectionalGrid load_prior(const std::filesystem::path& path, PriorLoadReport* report = nullptr);

void write_prior(const DirectionalGrid& grid, const std::filesystem::path& path);

}  // namespace bff
