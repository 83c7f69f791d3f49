#include "bff/mod_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bff {

double wrap_angle(double radians) {
    double r = std::fmod(radians, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    // -tiny + 2pi can round up to exactly 2pi.
    if (r >= kTwoPi) {
        r = 0.0;
    }
    return r;
}

void BinningSpec::validate() const {
    if (k < 2) {
        throw ValidationError("binning needs k >= 2");
    }
    if (!(std::abs(offset) < kTwoPi)) {
        throw ValidationError("bin offset must lie in (-2pi, 2pi)");
    }
}

std::size_t bin_direction(double delta, const BinningSpec& spec) {
    if (!std::isfinite(delta)) {
        throw std::invalid_argument("heading must be finite");
    }
    const double w = wrap_angle(delta - spec.offset);
    const auto bin = static_cast<std::size_t>(std::floor(w / spec.width()));
    return std::min(bin, spec.k - 1);
}

double bin_center(std::size_t bin, const BinningSpec& spec) {
    return wrap_angle(spec.offset + (static_cast<double>(bin) + 0.5) * spec.width());
}

// ---------------------------------------------------------------------------

CountGrid::CountGrid(GridGeometry geometry, BinningSpec spec) : geometry_(geometry), spec_(spec) {
    geometry_.validate();
    spec_.validate();
    counts_.assign(geometry_.cell_count() * spec_.k, 0);
    totals_.assign(geometry_.cell_count(), 0);
}

bool CountGrid::accumulate(const Observation& obs) {
    if (!obs.delta || !std::isfinite(*obs.delta)) {
        ++skipped_no_heading_;
        return false;
    }
    const auto cell = geometry_.try_cell(obs.x, obs.y);
    if (!cell) {
        ++skipped_out_of_bounds_;
        return false;
    }
    add(geometry_.flat(*cell), bin_direction(*obs.delta, spec_));
    return true;
}

void CountGrid::accumulate(std::span<const Observation> observations) {
    for (const auto& obs : observations) {
        accumulate(obs);
    }
}

void CountGrid::add(std::size_t cell, std::size_t bin, std::uint64_t n) {
    if (cell >= totals_.size() || bin >= spec_.k) {
        throw std::out_of_range("count index out of range");
    }
    counts_[cell * spec_.k + bin] += n;
    totals_[cell] += n;
}

std::uint64_t CountGrid::observation_count() const noexcept {
    return std::accumulate(totals_.begin(), totals_.end(), std::uint64_t{0});
}

CountGrid CountGrid::from_counts(GridGeometry geometry, BinningSpec spec, std::vector<std::uint64_t> counts,
                                 std::uint64_t skipped_out_of_bounds, std::uint64_t skipped_no_heading) {
    CountGrid grid(geometry, spec);
    if (counts.size() != grid.counts_.size()) {
        throw ValidationError("count payload does not match grid size");
    }
    grid.counts_ = std::move(counts);
    for (std::size_t c = 0; c < grid.totals_.size(); ++c) {
        const auto cell = grid.cell(c);
        grid.totals_[c] = std::accumulate(cell.begin(), cell.end(), std::uint64_t{0});
    }
    grid.skipped_out_of_bounds_ = skipped_out_of_bounds;
    grid.skipped_no_heading_ = skipped_no_heading;
    return grid;
}

CountGrid merge(const CountGrid& a, const CountGrid& b) {
    if (!a.geometry_.same_as(b.geometry_)) {
        throw ValidationError("cannot merge count grids with different geometry");
    }
    if (a.spec_.k != b.spec_.k || a.spec_.offset != b.spec_.offset) {
        throw ValidationError("cannot merge count grids with different binning");
    }
    CountGrid out = a;
    for (std::size_t i = 0; i < out.counts_.size(); ++i) {
        out.counts_[i] += b.counts_[i];
    }
    for (std::size_t i = 0; i < out.totals_.size(); ++i) {
        out.totals_[i] += b.totals_[i];
    }
    out.skipped_out_of_bounds_ += b.skipped_out_of_bounds_;
    out.skipped_no_heading_ += b.skipped_no_heading_;
    return out;
}

bool operator==(const CountGrid& a, const CountGrid& b) {
    return a.geometry_.same_as(b.geometry_) && a.spec_.k == b.spec_.k && a.spec_.offset == b.spec_.offset &&
           a.counts_ == b.counts_ && a.skipped_out_of_bounds_ == b.skipped_out_of_bounds_ &&
           a.skipped_no_heading_ == b.skipped_no_heading_;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::floor_field:
            return "floor_field";
        case Provenance::bayesian:
            return "bayesian";
        case Provenance::prior:
            return "prior";
        case Provenance::uniform:
            return "uniform";
    }
    return "unknown";
}

Provenance provenance_from_string(std::string_view s) {
    for (auto p : {Provenance::floor_field, Provenance::bayesian, Provenance::prior, Provenance::uniform}) {
        if (to_string(p) == s) {
            return p;
        }
    }
    throw InputError("unknown provenance '" + std::string(s) + "'");
}

void check_simplex(std::span<const double> probs, std::size_t k, double tolerance) {
    if (k == 0 || probs.size() % k != 0) {
        throw ValidationError("probability payload is not a whole number of cells");
    }
    for (std::size_t c = 0; c < probs.size() / k; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double p = probs[c * k + i];
            if (!(p >= 0.0 && p <= 1.0)) {
                throw ValidationError("cell " + std::to_string(c) + " has probability " + std::to_string(p) +
                                      " outside [0, 1]");
            }
            sum += p;
        }
        if (!(std::abs(sum - 1.0) <= tolerance)) {
            throw ValidationError("cell " + std::to_string(c) + " sums to " + std::to_string(sum));
        }
    }
}

DirectionalGrid::DirectionalGrid(GridGeometry geometry, std::size_t k, std::vector<double> probs,
                                 Provenance provenance, double tolerance)
    : geometry_(geometry), k_(k), probs_(std::move(probs)), provenance_(provenance) {
    geometry_.validate();
    if (k_ < 2) {
        throw ValidationError("directional grid needs k >= 2");
    }
    if (probs_.size() != geometry_.cell_count() * k_) {
        throw ValidationError("probability payload does not match grid size");
    }
    check_simplex(probs_, k_, tolerance);
}

void FusionParams::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw ValidationError("alpha must be a finite nonnegative number");
    }
}

DirectionalGrid floor_field(const CountGrid& counts) {
    const std::size_t k = counts.k();
    const std::size_t cells = counts.geometry().cell_count();
    std::vector<double> probs(cells * k, 1.0 / static_cast<double>(k));
    for (std::size_t c = 0; c < cells; ++c) {
        const std::uint64_t n = counts.total(c);
        if (n == 0) {
            continue;
        }
        const auto q = counts.cell(c);
        for (std::size_t i = 0; i < k; ++i) {
            probs[c * k + i] = static_cast<double>(q[i]) / static_cast<double>(n);
        }
    }
    return DirectionalGrid(counts.geometry(), k, std::move(probs), Provenance::floor_field);
}

void posterior_mean(std::span<const std::uint64_t> counts, std::span<const double> prior, double alpha,
                    std::span<double> out) {
    if (counts.size() != prior.size() || out.size() != prior.size()) {
        throw std::invalid_argument("posterior_mean: counts, prior and output lengths differ");
    }
    if (!(alpha >= 0.0)) {
        throw std::invalid_argument("posterior_mean: alpha must be nonnegative");
    }
    const std::uint64_t n = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (n == 0 && alpha == 0.0) {
        throw std::domain_error("posterior_mean: alpha = 0 with no observations is undefined; use a uniform cell");
    }
    if (n == 0) {
        // (0 + alpha * p) / alpha can be off by an ulp; the exact answer is the prior.
        std::copy(prior.begin(), prior.end(), out.begin());
        return;
    }
    const double denom = static_cast<double>(n) + alpha;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out[i] = (static_cast<double>(counts[i]) + alpha * prior[i]) / denom;
    }
}

std::vector<double> posterior_mean(std::span<const std::uint64_t> counts, std::span<const double> prior,
                                   double alpha) {
    std::vector<double> out(prior.size());
    posterior_mean(counts, prior, alpha, out);
    return out;
}

DirectionalGrid build_bff(const CountGrid& counts, const DirectionalGrid& prior, const FusionParams& params) {
    params.validate();
    if (!counts.geometry().same_as(prior.geometry())) {
        throw ValidationError("prior geometry does not match the count grid");
    }
    if (counts.k() != prior.k()) {
        throw ValidationError("prior has k = " + std::to_string(prior.k()) + " but counts use k = " +
                              std::to_string(counts.k()));
    }
    const std::size_t k = counts.k();
    const std::size_t cells = counts.geometry().cell_count();
    std::vector<double> probs(cells * k, 1.0 / static_cast<double>(k));
    for (std::size_t c = 0; c < cells; ++c) {
        if (params.alpha == 0.0 && counts.total(c) == 0) {
            continue;
        }
        posterior_mean(counts.cell(c), prior.cell(c), params.alpha, std::span<double>(probs).subspan(c * k, k));
    }
    return DirectionalGrid(counts.geometry(), k, std::move(probs), Provenance::bayesian);
}

}  // namespace bff
