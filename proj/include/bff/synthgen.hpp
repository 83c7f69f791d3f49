#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "bff/gridmap.hpp"
#include "bff/mod_core.hpp"

namespace bff {

/// Portable deterministic generator, "bff-rng v1": a mt19937_64 engine seeded
/// through one splitmix64 step, with all distributions implemented here rather
/// than taken from <random> (whose distributions differ between standard
/// libraries).
class Rng {
public:
    static constexpr int kVersion = 1;

    explicit Rng(std::uint64_t seed);

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer in [0, n).
    std::size_t below(std::size_t n);
    double normal();
    /// Gamma(shape, 1), shape > 0.
    double gamma(double shape);
    /// Index drawn with probability proportional to weights[i].
    std::size_t categorical(std::span<const double> weights);

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Random map of dynamics with each cell drawn from a symmetric
/// Dirichlet(concentration). Small concentrations give peaked, corridor-like cells.
DirectionalGrid random_directional_grid(const GridGeometry& geometry, std::size_t k, double concentration,
                                        std::uint64_t seed);

/// Random walks through `model`.
///
/// Each walker starts on a uniformly drawn free cell (occupancy < 0.5). Per step
/// it draws a bin from the cell's distribution and emits an observation at the
/// cell center with the bin-center heading, then tries to move to the neighbor
/// in that direction. A blocked move (occupied or off the map) is redrawn, at
/// most 8 times, after which the walker stops. Every draw is emitted, so the
/// headings recorded at a cell are i.i.d. draws from that cell's distribution.
///
/// Walker w uses Rng(splitmix64(seed) ^ w); output is ordered by (walker, step) with
/// person_id = w and t = emitted-sample index.
ObservationSet sample_walks(const DirectionalGrid& model, const OccupancyGrid& occupancy, std::size_t n_walkers,
                            std::size_t steps_per_walker, std::uint64_t seed, const BinningSpec& spec = {});

}  // namespace bff
