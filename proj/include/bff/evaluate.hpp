#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bff/mod_core.hpp"

namespace bff {

/// Probability the model assigns to the observation's heading bin, or nullopt
/// when the observation is outside the map or has no heading.
std::optional<double> point_likelihood(const DirectionalGrid& model, const Observation& obs, const BinningSpec& spec);

struct LikelihoodResult {
    double mean = 0.0;         // average point likelihood over scored observations
    std::size_t scored = 0;
    std::size_t skipped = 0;   // outside the map or without heading
};

/// Observations of one dataset pre-resolved to flat (cell * k + bin) indices,
/// so the same set can be scored against many models cheaply.
class EvaluationIndex {
public:
    EvaluationIndex(std::span<const Observation> observations, const GridGeometry& geometry, const BinningSpec& spec);

    const GridGeometry& geometry() const noexcept { return geometry_; }
    std::size_t k() const noexcept { return k_; }
    std::size_t scored() const noexcept { return entries_.size(); }
    std::size_t skipped() const noexcept { return skipped_; }

    /// Mean of model entries over the indexed observations. Partial sums are
    /// taken over fixed blocks and combined in block order, so the result does
    /// not depend on `threads`. Throws ValidationError when nothing is scored
    /// or the model geometry differs.
    LikelihoodResult evaluate(const DirectionalGrid& model, unsigned threads = 1) const;

private:
    GridGeometry geometry_;
    std::size_t k_;
    std::vector<std::size_t> entries_;
    std::size_t skipped_ = 0;
};

/// Average likelihood of `observations` under `model`.
LikelihoodResult dataset_likelihood(const DirectionalGrid& model, std::span<const Observation> observations,
                                    const BinningSpec& spec, unsigned threads = 1);

/// Likelihood of a dataset under the floor field built from that same dataset.
LikelihoodResult upper_bound(std::span<const Observation> observations, const GridGeometry& geometry,
                             const BinningSpec& spec);

struct CurvePoint {
    std::size_t n = 0;
    double likelihood = 0.0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct CurveResult {
    std::vector<CurvePoint> points;
    std::string prior_id;
    double alpha = 0.0;
    std::size_t chunk_size = 0;
    std::string dataset_id;
    std::size_t skipped = 0;
    std::optional<double> upper_bound;
};

struct CurveOptions {
    std::size_t chunk_size = 2000;
    std::optional<std::size_t> max_n;  // stop once n exceeds this
    bool with_upper_bound = true;
    std::string prior_id;
    std::string dataset_id;
    unsigned threads = 1;
};

/// Grows the model one chunk at a time and scores the full set after each step:
/// n = 0, chunk, 2 * chunk, ..., and finally the full size. With a prior the
/// model is the posterior BFF(prior, D[n]); with `prior == nullptr` it is the
/// floor field FF(D[n]). Counts are carried across steps, not rebuilt.
CurveResult likelihood_curve(const DirectionalGrid* prior, std::span<const Observation> observations,
                             const GridGeometry& geometry, const BinningSpec& spec, const FusionParams& params,
                             const CurveOptions& options = {});

/// `# key: value` header lines (prior, alpha, chunk, dataset, skipped,
/// upper_bound) followed by `n,L` rows.
std::string format_curve_csv(const CurveResult& curve);
void write_curve_csv(const CurveResult& curve, const std::filesystem::path& path);
CurveResult parse_curve_csv(const std::string& text);

}  // namespace bff
