#include "bff/ingest.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "bff/errors.hpp"
#include "bff/mod_core.hpp"

namespace bff {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kCanonicalHeader = "person_id,t,x,y,delta";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return fields;
}

std::optional<double> to_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::optional<std::int64_t> to_int(std::string_view s) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc() && ptr == s.data() + s.size()) {
        return value;
    }
    // Some dumps write ids as floats ("123.0").
    if (auto d = to_double(s); d && std::floor(*d) == *d && std::abs(*d) < 9.0e15) {
        return static_cast<std::int64_t>(*d);
    }
    return std::nullopt;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Line-by-line driver shared by the parsers; records or throws on bad rows.
class RowSink {
public:
    RowSink(ObservationSet& set, ParseMode mode) : set_(set), mode_(mode) {}

    void reject(std::size_t line, const std::string& why) {
        const std::string msg = set_.source + ":" + std::to_string(line) + ": " + why;
        if (mode_ == ParseMode::strict) {
            throw InputError(msg);
        }
        set_.issues.push_back({line, msg});
    }

private:
    ObservationSet& set_;
    ParseMode mode_;
};

template <typename RowFn>
void for_each_line(const std::string& text, RowFn&& fn) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    const std::string_view all(text);
    while (start <= all.size()) {
        auto end = all.find('\n', start);
        if (end == std::string_view::npos) {
            end = all.size();
        }
        ++line_no;
        fn(line_no, all.substr(start, end - start));
        start = end + 1;
    }
}

void append_number(std::string& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Canonical CSV

ObservationSet parse_canonical_text(const std::string& text, const std::string& source, ParseMode mode) {
    ObservationSet set;
    set.source = source;
    RowSink sink(set, mode);
    bool header_seen = false;

    for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
        std::string_view line = trim(raw);
        if (!header_seen) {
            if (line.starts_with("\xEF\xBB\xBF")) {
                line.remove_prefix(3);
            }
            if (line.empty()) {
                return;
            }
            std::string compact;
            for (char ch : line) {
                if (ch != ' ' && ch != '\t') {
                    compact.push_back(ch);
                }
            }
            if (compact != kCanonicalHeader) {
                throw InputError(source + ": expected header '" + std::string(kCanonicalHeader) + "'");
            }
            header_seen = true;
            return;
        }
        if (line.empty()) {
            return;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 5) {
            sink.reject(line_no, "expected 5 fields, found " + std::to_string(fields.size()));
            return;
        }
        Observation obs;
        const auto id = to_int(fields[0]);
        const auto t = to_double(fields[1]);
        const auto x = to_double(fields[2]);
        const auto y = to_double(fields[3]);
        if (!id || !t || !x || !y) {
            sink.reject(line_no, "unparseable number");
            return;
        }
        obs.person_id = *id;
        obs.t = *t;
        obs.x = *x;
        obs.y = *y;
        if (!fields[4].empty()) {
            const auto delta = to_double(fields[4]);
            if (!delta) {
                sink.reject(line_no, "unparseable heading");
                return;
            }
            obs.delta = wrap_angle(*delta);
        }
        set.observations.push_back(obs);
    });
    if (!header_seen) {
        throw InputError(source + ": missing header '" + std::string(kCanonicalHeader) + "'");
    }
    return set;
}

ObservationSet parse_canonical(const fs::path& path, ParseMode mode) {
    return parse_canonical_text(read_text(path), path.string(), mode);
}

std::string format_canonical(std::span<const Observation> observations) {
    std::string out(kCanonicalHeader);
    out.push_back('\n');
    for (const auto& obs : observations) {
        out += std::to_string(obs.person_id);
        out.push_back(',');
        append_number(out, obs.t);
        out.push_back(',');
        append_number(out, obs.x);
        out.push_back(',');
        append_number(out, obs.y);
        out.push_back(',');
        if (obs.delta) {
            append_number(out, *obs.delta);
        }
        out.push_back('\n');
    }
    return out;
}

void write_canonical(std::span<const Observation> observations, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out << format_canonical(observations);
}

// ---------------------------------------------------------------------------
// Adapter layouts

void AdapterConfig::validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw ValidationError("adapter scale must be positive");
    }
}

AdapterConfig load_adapter_config(const fs::path& path) {
    AdapterConfig config;
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw InputError("cannot read adapter config " + path.string() + ": " + e.what());
    }
    try {
        if (const auto d = root["delimiter"]) {
            const auto s = d.as<std::string>();
            if (s == "tab" || s == "\\t") {
                config.delimiter = '\t';
            } else if (s == "space") {
                config.delimiter = ' ';
            } else if (s.size() == 1) {
                config.delimiter = s[0];
            } else {
                throw InputError("adapter delimiter must be a single character, 'tab' or 'space'");
            }
        }
        const auto column = [&](const char* key, std::size_t& field) {
            if (const auto n = root[key]) {
                field = n.as<std::size_t>();
            }
        };
        column("time_column", config.time_column);
        column("person_column", config.person_column);
        column("x_column", config.x_column);
        column("y_column", config.y_column);
        if (const auto n = root["angle_column"]) {
            const auto s = n.as<std::string>();
            if (s == "none" || s == "-1") {
                config.angle_column.reset();
            } else {
                config.angle_column = n.as<std::size_t>();
            }
        }
        if (const auto n = root["scale"]) {
            config.scale = n.as<double>();
        }
        if (const auto n = root["has_header"]) {
            config.has_header = n.as<bool>();
        }
    } catch (const YAML::Exception& e) {
        throw InputError("bad adapter config " + path.string() + ": " + e.what());
    }
    config.validate();
    return config;
}

ObservationSet parse_atc_text(const std::string& text, const std::string& source, const AdapterConfig& config,
                              ParseMode mode) {
    config.validate();
    ObservationSet set;
    set.source = source;
    RowSink sink(set, mode);
    std::size_t needed = std::max({config.time_column, config.person_column, config.x_column, config.y_column});
    if (config.angle_column) {
        needed = std::max(needed, *config.angle_column);
    }
    ++needed;
    bool skip_header = config.has_header;

    for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
        const std::string_view line = trim(raw);
        if (line.empty()) {
            return;
        }
        if (skip_header) {
            skip_header = false;
            return;
        }
        std::vector<std::string_view> fields = split(line, config.delimiter);
        if (config.delimiter == ' ' || config.delimiter == '\t') {
            std::erase_if(fields, [](std::string_view f) { return f.empty(); });
        }
        if (fields.size() < needed) {
            sink.reject(line_no, "expected at least " + std::to_string(needed) + " fields, found " +
                                     std::to_string(fields.size()));
            return;
        }
        const auto t = to_double(fields[config.time_column]);
        const auto id = to_int(fields[config.person_column]);
        const auto x = to_double(fields[config.x_column]);
        const auto y = to_double(fields[config.y_column]);
        if (!t || !id || !x || !y) {
            sink.reject(line_no, "unparseable number");
            return;
        }
        Observation obs{*id, *t, *x * config.scale, *y * config.scale, std::nullopt};
        if (config.angle_column) {
            const auto angle = to_double(fields[*config.angle_column]);
            if (!angle) {
                sink.reject(line_no, "unparseable motion angle");
                return;
            }
            obs.delta = wrap_angle(*angle);
        }
        set.observations.push_back(obs);
    });
    return set;
}

ObservationSet parse_atc(const fs::path& path, const AdapterConfig& config, ParseMode mode) {
    return parse_atc_text(read_text(path), path.string(), config, mode);
}

// ---------------------------------------------------------------------------

ObservationSet derive_headings(const ObservationSet& set, double min_step) {
    const auto& obs = set.observations;
    std::vector<std::optional<double>> heading(obs.size());
    std::unordered_map<std::int64_t, std::size_t> pending;  // person -> index awaiting its successor
    pending.reserve(obs.size() / 16 + 1);

    for (std::size_t j = 0; j < obs.size(); ++j) {
        const auto [it, inserted] = pending.try_emplace(obs[j].person_id, j);
        if (inserted) {
            continue;
        }
        const std::size_t i = it->second;
        const double dx = obs[j].x - obs[i].x;
        const double dy = obs[j].y - obs[i].y;
        if (std::hypot(dx, dy) >= min_step) {
            heading[i] = wrap_angle(std::atan2(dy, dx));
        }
        it->second = j;
    }

    ObservationSet out;
    out.source = set.source;
    out.issues = set.issues;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (heading[i]) {
            Observation o = obs[i];
            o.delta = heading[i];
            out.observations.push_back(o);
        }
    }
    return out;
}

std::vector<std::span<const Observation>> chunk(std::span<const Observation> observations, std::size_t size) {
    if (size == 0) {
        throw std::invalid_argument("chunk size must be at least 1");
    }
    std::vector<std::span<const Observation>> chunks;
    for (std::size_t start = 0; start < observations.size(); start += size) {
        chunks.push_back(observations.subspan(start, std::min(size, observations.size() - start)));
    }
    return chunks;
}

std::span<const Observation> prefix(std::span<const Observation> observations, std::size_t n) noexcept {
    return observations.first(std::min(n, observations.size()));
}

}  // namespace bff
