#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bff/observation.hpp"

namespace bff {

enum class ParseMode {
    lenient,  // malformed rows are skipped and recorded in ObservationSet::issues
    strict,   // the first malformed row throws InputError
};

/// Canonical CSV: header `person_id,t,x,y,delta`; an empty delta means "no heading".
ObservationSet parse_canonical(const std::filesystem::path& path, ParseMode mode = ParseMode::lenient);
ObservationSet parse_canonical_text(const std::string& text, const std::string& source,
                                    ParseMode mode = ParseMode::lenient);

/// Writes the canonical CSV using shortest round-trip float formatting.
void write_canonical(std::span<const Observation> observations, const std::filesystem::path& path);
std::string format_canonical(std::span<const Observation> observations);

/// Column layout for delimiter-separated trajectory dumps such as the ATC mall
/// recordings. Indices are 0-based. The defaults follow the published ATC layout
/// (time, person, x, y, z, velocity, motion angle, facing angle; millimeters).
struct AdapterConfig {
    char delimiter = ',';
    std::size_t time_column = 0;
    std::size_t person_column = 1;
    std::size_t x_column = 2;
    std::size_t y_column = 3;
    std::optional<std::size_t> angle_column = 6;  // nullopt: derive headings later
    double scale = 0.001;                          // source units to meters
    bool has_header = false;

    void validate() const;
};

/// Reads `key: value` lines (delimiter, time_column, person_column, x_column,
/// y_column, angle_column (-1 or "none" to disable), scale, has_header).
/// Keys not present keep their defaults.
AdapterConfig load_adapter_config(const std::filesystem::path& path);

ObservationSet parse_atc(const std::filesystem::path& path, const AdapterConfig& config = {},
                         ParseMode mode = ParseMode::lenient);
ObservationSet parse_atc_text(const std::string& text, const std::string& source, const AdapterConfig& config = {},
                              ParseMode mode = ParseMode::lenient);

inline constexpr double kDefaultMinStep = 0.05;

/// Assigns each point the heading atan2(dy, dx) toward the next point of the
/// same person (next in file order). Pairs moving less than `min_step` meters
/// and each person's final point are dropped. Output keeps file order.
ObservationSet derive_headings(const ObservationSet& set, double min_step = kDefaultMinStep);

/// Consecutive slices of at most `size` observations; the last may be short.
std::vector<std::span<const Observation>> chunk(std::span<const Observation> observations, std::size_t size);

/// First min(n, size) observations.
std::span<const Observation> prefix(std::span<const Observation> observations, std::size_t n) noexcept;

}  // namespace bff
