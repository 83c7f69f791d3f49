#include "bff/synthgen.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bff/errors.hpp"

namespace bff {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t Rng::below(std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("Rng::below(0)");
    }
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = engine_();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
}

double Rng::normal() {
    // Marsaglia polar method; the spare value is discarded to keep state simple.
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0)) {
        throw std::invalid_argument("gamma shape must be positive");
    }
    if (shape < 1.0) {
        // Gamma(a) = Gamma(a + 1) * U^(1/a)
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    // Marsaglia & Tsang.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

std::size_t Rng::categorical(std::span<const double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) {
        throw std::invalid_argument("categorical weights must have positive mass");
    }
    const double target = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
            acc += weights[i];
            last_positive = i;
            if (target < acc) {
                return i;
            }
        }
    }
    return last_positive;
}

DirectionalGrid random_directional_grid(const GridGeometry& geometry, std::size_t k, double concentration,
                                        std::uint64_t seed) {
    geometry.validate();
    if (k < 2 || !(concentration > 0.0)) {
        throw ValidationError("random grid needs k >= 2 and a positive concentration");
    }
    Rng rng(seed);
    std::vector<double> probs(geometry.cell_count() * k);
    for (std::size_t c = 0; c < geometry.cell_count(); ++c) {
        double* cell = probs.data() + c * k;
        double sum = 0.0;
        // Tiny concentrations can underflow every draw to zero; redraw then.
        while (!(sum > 0.0)) {
            sum = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                cell[i] = rng.gamma(concentration);
                sum += cell[i];
            }
        }
        for (std::size_t i = 0; i < k; ++i) {
            cell[i] /= sum;
        }
    }
    return DirectionalGrid(geometry, k, std::move(probs), Provenance::prior);
}

ObservationSet sample_walks(const DirectionalGrid& model, const OccupancyGrid& occupancy, std::size_t n_walkers,
                            std::size_t steps_per_walker, std::uint64_t seed, const BinningSpec& spec) {
    const GridGeometry& g = model.geometry();
    if (!g.same_as(occupancy.geometry())) {
        throw ValidationError("model and occupancy geometry differ");
    }
    if (model.k() != spec.k) {
        throw ValidationError("model k does not match the binning");
    }
    std::vector<std::size_t> free_cells;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        if (occupancy.values()[c] < 0.5) {
            free_cells.push_back(c);
        }
    }
    if (free_cells.empty()) {
        throw ValidationError("occupancy grid has no free cells to start walkers on");
    }

    struct Move {
        double heading;
        long dx;
        long dy;
    };
    std::vector<Move> moves(spec.k);
    for (std::size_t i = 0; i < spec.k; ++i) {
        const double a = bin_center(i, spec);
        moves[i] = {a, std::lround(std::cos(a)), std::lround(std::sin(a))};
    }
    const auto free_at = [&](long col, long row) {
        if (col < 0 || row < 0 || col >= static_cast<long>(g.width) || row >= static_cast<long>(g.height)) {
            return false;
        }
        return occupancy.at({static_cast<std::size_t>(col), static_cast<std::size_t>(row)}) < 0.5;
    };

    constexpr int kMaxRedraws = 8;
    ObservationSet out;
    out.source = "synthetic(seed=" + std::to_string(seed) + ")";
    out.observations.reserve(n_walkers * steps_per_walker);
    for (std::size_t w = 0; w < n_walkers; ++w) {
        Rng rng(splitmix64(seed) ^ static_cast<std::uint64_t>(w));
        CellIndex cell = g.unflat(free_cells[rng.below(free_cells.size())]);
        std::size_t emitted = 0;
        int redraws = 0;
        while (emitted < steps_per_walker) {
            const std::size_t bin = rng.categorical(model.cell(g.flat(cell)));
            const Move& m = moves[bin];
            out.observations.push_back({static_cast<std::int64_t>(w), static_cast<double>(emitted), g.center_x(cell),
                                        g.center_y(cell), m.heading});
            ++emitted;
            const long col = static_cast<long>(cell.col) + m.dx;
            const long row = static_cast<long>(cell.row) + m.dy;
            if (free_at(col, row)) {
                cell = {static_cast<std::size_t>(col), static_cast<std::size_t>(row)};
                redraws = 0;
            } else if (++redraws > kMaxRedraws) {
                break;
            }
        }
    }
    return out;
}

}  // namespace bff
