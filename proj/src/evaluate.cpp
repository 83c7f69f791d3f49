#include "bff/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <thread>

#include "bff/errors.hpp"

namespace bff {

namespace {

constexpr std::size_t kBlock = 4096;

std::string number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::optional<double> point_likelihood(const DirectionalGrid& model, const Observation& obs, const BinningSpec& spec) {
    if (model.k() != spec.k) {
        throw ValidationError("model k does not match the binning");
    }
    if (!obs.delta) {
        return std::nullopt;
    }
    const auto cell = model.geometry().try_cell(obs.x, obs.y);
    if (!cell) {
        return std::nullopt;
    }
    return model.at(model.geometry().flat(*cell), bin_direction(*obs.delta, spec));
}

EvaluationIndex::EvaluationIndex(std::span<const Observation> observations, const GridGeometry& geometry,
                                 const BinningSpec& spec)
    : geometry_(geometry), k_(spec.k) {
    spec.validate();
    entries_.reserve(observations.size());
    for (const auto& obs : observations) {
        const auto cell = obs.delta ? geometry_.try_cell(obs.x, obs.y) : std::nullopt;
        if (!cell) {
            ++skipped_;
            continue;
        }
        entries_.push_back(geometry_.flat(*cell) * k_ + bin_direction(*obs.delta, spec));
    }
}

LikelihoodResult EvaluationIndex::evaluate(const DirectionalGrid& model, unsigned threads) const {
    if (!model.geometry().same_as(geometry_) || model.k() != k_) {
        throw ValidationError("model geometry or k differs from the evaluation grid");
    }
    if (entries_.empty()) {
        throw ValidationError("no observations left to score (" + std::to_string(skipped_) + " skipped)");
    }
    const auto probs = model.probs();
    const std::size_t blocks = (entries_.size() + kBlock - 1) / kBlock;
    std::vector<double> partial(blocks, 0.0);
    const auto sum_blocks = [&](std::size_t first, std::size_t last) {
        for (std::size_t b = first; b < last; ++b) {
            const std::size_t end = std::min(entries_.size(), (b + 1) * kBlock);
            double s = 0.0;
            for (std::size_t j = b * kBlock; j < end; ++j) {
                s += probs[entries_[j]];
            }
            partial[b] = s;
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(threads, 1, blocks);
    if (workers == 1) {
        sum_blocks(0, blocks);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t per = (blocks + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t first = w * per;
            const std::size_t last = std::min(blocks, first + per);
            if (first < last) {
                pool.emplace_back(sum_blocks, first, last);
            }
        }
    }

    double total = 0.0;
    for (double s : partial) {
        total += s;
    }
    return {total / static_cast<double>(entries_.size()), entries_.size(), skipped_};
}

LikelihoodResult dataset_likelihood(const DirectionalGrid& model, std::span<const Observation> observations,
                                    const BinningSpec& spec, unsigned threads) {
    if (model.k() != spec.k) {
        throw ValidationError("model k does not match the binning");
    }
    return EvaluationIndex(observations, model.geometry(), spec).evaluate(model, threads);
}

LikelihoodResult upper_bound(std::span<const Observation> observations, const GridGeometry& geometry,
                             const BinningSpec& spec) {
    CountGrid counts(geometry, spec);
    counts.accumulate(observations);
    return dataset_likelihood(floor_field(counts), observations, spec);
}

CurveResult likelihood_curve(const DirectionalGrid* prior, std::span<const Observation> observations,
                             const GridGeometry& geometry, const BinningSpec& spec, const FusionParams& params,
                             const CurveOptions& options) {
    if (options.chunk_size == 0) {
        throw std::invalid_argument("chunk size must be at least 1");
    }
    params.validate();
    if (prior && (!prior->geometry().same_as(geometry) || prior->k() != spec.k)) {
        throw ValidationError("prior geometry or k does not match the model grid");
    }

    const EvaluationIndex index(observations, geometry, spec);
    CurveResult curve;
    curve.prior_id = options.prior_id.empty() ? (prior ? std::string(to_string(prior->provenance())) : "none")
                                              : options.prior_id;
    curve.alpha = prior ? params.alpha : 0.0;
    curve.chunk_size = options.chunk_size;
    curve.dataset_id = options.dataset_id;
    curve.skipped = index.skipped();

    CountGrid counts(geometry, spec);
    const auto model_at = [&]() { return prior ? build_bff(counts, *prior, params) : floor_field(counts); };

    const std::size_t total = observations.size();
    const std::size_t limit = options.max_n ? std::min(*options.max_n, total) : total;
    std::size_t n = 0;
    curve.points.push_back({0, index.evaluate(model_at(), options.threads).mean});
    while (n < limit) {
        const std::size_t next = std::min(n + options.chunk_size, limit);
        counts.accumulate(observations.subspan(n, next - n));
        n = next;
        curve.points.push_back({n, index.evaluate(model_at(), options.threads).mean});
    }

    if (options.with_upper_bound) {
        CountGrid full(geometry, spec);
        full.accumulate(observations);
        curve.upper_bound = index.evaluate(floor_field(full), options.threads).mean;
    }
    return curve;
}

// ---------------------------------------------------------------------------

std::string format_curve_csv(const CurveResult& curve) {
    std::ostringstream out;
    out << "# prior: " << curve.prior_id << '\n';
    out << "# alpha: " << number(curve.alpha) << '\n';
    out << "# chunk: " << curve.chunk_size << '\n';
    out << "# dataset: " << curve.dataset_id << '\n';
    out << "# skipped: " << curve.skipped << '\n';
    out << "# upper_bound: " << (curve.upper_bound ? number(*curve.upper_bound) : std::string("nan")) << '\n';
    out << "n,L\n";
    for (const auto& p : curve.points) {
        out << p.n << ',' << number(p.likelihood) << '\n';
    }
    return out.str();
}

void write_curve_csv(const CurveResult& curve, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out << format_curve_csv(curve);
}

CurveResult parse_curve_csv(const std::string& text) {
    CurveResult curve;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    const auto parse_double = [](const std::string& s) {
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc()) {
            throw InputError("curve CSV: bad number '" + s + "'");
        }
        return v;
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line.starts_with("# ")) {
            const auto colon = line.find(':');
            if (colon == std::string::npos) {
                continue;
            }
            const std::string key = line.substr(2, colon - 2);
            std::string value = line.substr(colon + 1);
            value.erase(0, value.find_first_not_of(' '));
            if (key == "prior") {
                curve.prior_id = value;
            } else if (key == "alpha") {
                curve.alpha = parse_double(value);
            } else if (key == "chunk") {
                curve.chunk_size = std::stoul(value);
            } else if (key == "dataset") {
                curve.dataset_id = value;
            } else if (key == "skipped") {
                curve.skipped = std::stoul(value);
            } else if (key == "upper_bound" && value != "nan") {
                curve.upper_bound = parse_double(value);
            }
            continue;
        }
        if (!header) {
            if (line != "n,L") {
                throw InputError("curve CSV: expected 'n,L' header");
            }
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InputError("curve CSV: malformed row '" + line + "'");
        }
        curve.points.push_back({std::stoul(line.substr(0, comma)), parse_double(line.substr(comma + 1))});
    }
    return curve;
}

}  // namespace bff
