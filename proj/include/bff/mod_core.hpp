#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "bff/geometry.hpp"
#include "bff/observation.hpp"

namespace bff {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps any finite angle into [0, 2pi).
double wrap_angle(double radians);

/// k equal angular bins. Bin i (0-based) covers
/// [offset + i*2pi/k, offset + (i+1)*2pi/k) modulo 2pi. The default offset of
/// -pi/k centers bin i on angle i*2pi/k, i.e. on the neighbor directions
/// (0 = east, 2 = north for k = 8). Offset 0 gives edges starting at angle 0.
struct BinningSpec {
    std::size_t k = 8;
    double offset = -std::numbers::pi / 8.0;

    BinningSpec() = default;
    explicit BinningSpec(std::size_t bins) : k(bins), offset(-std::numbers::pi / static_cast<double>(bins)) {}
    BinningSpec(std::size_t bins, double bin_offset) : k(bins), offset(bin_offset) {}

    void validate() const;
    double width() const noexcept { return kTwoPi / static_cast<double>(k); }
};

/// 0-based bin of heading `delta`. Throws std::invalid_argument on non-finite input.
std::size_t bin_direction(double delta, const BinningSpec& spec);

/// Center angle of bin `bin`, wrapped to [0, 2pi).
double bin_center(std::size_t bin, const BinningSpec& spec);

/// Per-cell integer heading counts.
class CountGrid {
public:
    CountGrid(GridGeometry geometry, BinningSpec spec);

    const GridGeometry& geometry() const noexcept { return geometry_; }
    const BinningSpec& binning() const noexcept { return spec_; }
    std::size_t k() const noexcept { return spec_.k; }

    /// Adds one observation; returns false (and tallies a skip) when it falls
    /// outside the grid or has no heading.
    bool accumulate(const Observation& obs);
    void accumulate(std::span<const Observation> observations);

    /// Direct increment, bypassing binning.
    void add(std::size_t cell, std::size_t bin, std::uint64_t n = 1);

    std::span<const std::uint64_t> cell(std::size_t cell) const noexcept {
        return {counts_.data() + cell * spec_.k, spec_.k};
    }
    std::uint64_t total(std::size_t cell) const noexcept { return totals_[cell]; }
    std::span<const std::uint64_t> counts() const noexcept { return counts_; }
    std::uint64_t observation_count() const noexcept;

    std::uint64_t skipped_out_of_bounds() const noexcept { return skipped_out_of_bounds_; }
    std::uint64_t skipped_no_heading() const noexcept { return skipped_no_heading_; }
    std::uint64_t skipped() const noexcept { return skipped_out_of_bounds_ + skipped_no_heading_; }

    /// Rebuilds from raw parts (used by the sidecar reader).
    static CountGrid from_counts(GridGeometry geometry, BinningSpec spec, std::vector<std::uint64_t> counts,
                                 std::uint64_t skipped_out_of_bounds, std::uint64_t skipped_no_heading);

    friend CountGrid merge(const CountGrid& a, const CountGrid& b);
    friend bool operator==(const CountGrid& a, const CountGrid& b);

private:
    GridGeometry geometry_;
    BinningSpec spec_;
    std::vector<std::uint64_t> counts_;
    std::vector<std::uint64_t> totals_;
    std::uint64_t skipped_out_of_bounds_ = 0;
    std::uint64_t skipped_no_heading_ = 0;
};

/// Elementwise sum. Throws ValidationError when geometry or binning differ.
CountGrid merge(const CountGrid& a, const CountGrid& b);

enum class Provenance { floor_field, bayesian, prior, uniform };

std::string_view to_string(Provenance p) noexcept;
Provenance provenance_from_string(std::string_view s);

/// Per-cell categorical heading distribution (a map of dynamics).
class DirectionalGrid {
public:
    /// Throws ValidationError when any cell is off the simplex by more than `tolerance`.
    DirectionalGrid(GridGeometry geometry, std::size_t k, std::vector<double> probs, Provenance provenance,
                    double tolerance = 1e-6);

    const GridGeometry& geometry() const noexcept { return geometry_; }
    std::size_t k() const noexcept { return k_; }
    Provenance provenance() const noexcept { return provenance_; }
    void set_provenance(Provenance p) noexcept { provenance_ = p; }

    std::span<const double> cell(std::size_t cell) const& noexcept { return {probs_.data() + cell * k_, k_}; }
    std::span<const double> cell(std::size_t cell) const&& = delete;
    double at(std::size_t cell, std::size_t bin) const noexcept { return probs_[cell * k_ + bin]; }
    // Spans into a temporary would dangle.
    std::span<const double> probs() const& noexcept { return probs_; }
    std::span<const double> probs() const&& = delete;

    friend bool operator==(const DirectionalGrid&, const DirectionalGrid&) = default;

private:
    GridGeometry geometry_;
    std::size_t k_;
    std::vector<double> probs_;
    Provenance provenance_;
};

/// Throws ValidationError unless every entry is in [0, 1] and every cell sums to 1 within `tolerance`.
void check_simplex(std::span<const double> probs, std::size_t k, double tolerance = 1e-6);

struct FusionParams {
    double alpha = 5.0;  // prior concentration; 0 reduces fusion to plain frequencies

    void validate() const;
};

/// Frequencies q / N; unvisited cells get the uniform vector.
DirectionalGrid floor_field(const CountGrid& counts);

/// Dirichlet posterior mean (q_i + alpha * prior_i) / (N + alpha), written to `out`.
/// Throws std::domain_error when alpha = 0 and N = 0; callers fall back to uniform.
void posterior_mean(std::span<const std::uint64_t> counts, std::span<const double> prior, double alpha,
                    std::span<double> out);
std::vector<double> posterior_mean(std::span<const std::uint64_t> counts, std::span<const double> prior,
                                   double alpha);

/// posterior_mean applied to every cell. With alpha = 0, unvisited cells are uniform,
/// matching floor_field.
DirectionalGrid build_bff(const CountGrid& counts, const DirectionalGrid& prior, const FusionParams& params);

}  // namespace bff
