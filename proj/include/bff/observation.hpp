#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bff {

/// One pedestrian sample: position in meters, heading in radians wrapped to [0, 2pi).
/// `delta` is empty when the source carried no heading (see derive_headings).
struct Observation {
    std::int64_t person_id = 0;
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    std::optional<double> delta;

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct ParseIssue {
    std::size_t line = 0;
    std::string message;
};

/// Observations in source order. Order matters: curve prefixes are file-order prefixes.
struct ObservationSet {
    std::vector<Observation> observations;
    std::string source;
    std::vector<ParseIssue> issues;  // rows skipped in lenient mode

    std::size_t size() const noexcept { return observations.size(); }
    bool empty() const noexcept { return observations.empty(); }
};

}  // namespace bff
