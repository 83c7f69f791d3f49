#pragma once

#include <string>
#include <vector>

#include "bff/evaluate.hpp"
#include "bff/gridmap.hpp"
#include "bff/mod_core.hpp"

namespace bff::tools {

/// One arrow of a quiver plot: cell center, bin, bin-center angle, probability.
struct QuiverEntry {
    double x = 0.0;
    double y = 0.0;
    std::size_t direction = 0;
    double angle = 0.0;
    double probability = 0.0;
};

/// Entries with probability >= min_prob, in cell then direction order.
std::vector<QuiverEntry> quiver_entries(const DirectionalGrid& model, const BinningSpec& spec, double min_prob);

/// Header `x,y,direction_index,angle,probability`.
std::string quiver_csv(const std::vector<QuiverEntry>& entries);

/// One <line class="arrow"> per entry, length proportional to probability,
/// drawn over the occupancy (resampled to the model grid) when `underlay` is given.
std::string quiver_svg(const DirectionalGrid& model, const std::vector<QuiverEntry>& entries,
                       const OccupancyGrid* underlay);

/// Likelihood-vs-n polyline with the upper bound as a dashed line.
std::string curve_svg(const CurveResult& curve);

}  // namespace bff::tools
