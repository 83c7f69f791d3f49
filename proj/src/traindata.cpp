#include "bff/traindata.hpp"

#include <limits>

#include "binary_io.hpp"
#include "bff/bff_io.hpp"

namespace bff {

using detail::ByteReader;
using detail::ByteWriter;

namespace {
constexpr std::string_view kMagic = "BFFT";
constexpr std::string_view kAnnotationMagic = "ANNO";
}  // namespace

std::string encode_bfft(const TrainingSet& set) {
    if (set.pairs.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw ValidationError("too many training pairs for BFFT");
    }
    ByteWriter out;
    out.magic(kMagic);
    out.put(static_cast<std::uint32_t>(set.pairs.size()));
    out.put(static_cast<std::uint32_t>(set.window_size));
    out.put(static_cast<std::uint32_t>(set.k));
    out.put(set.window_resolution);
    for (const auto& pair : set.pairs) {
        if (pair.window.size() != set.window_size * set.window_size || pair.target.size() != set.k) {
            throw ValidationError("training pair does not match the container header");
        }
        for (float v : pair.window) {
            out.put(v);
        }
        for (float v : pair.target) {
            out.put(v);
        }
    }
    if (!set.annotation.empty()) {
        out.magic(kAnnotationMagic);
        out.put(static_cast<std::uint32_t>(set.annotation.size()));
        out.raw(set.annotation);
    }
    return out.take();
}

TrainingSet decode_bfft(const std::string& bytes) {
    ByteReader in(bytes, "BFFT");
    in.expect_magic(kMagic);
    TrainingSet set;
    const auto count = in.get<std::uint32_t>();
    set.window_size = in.get<std::uint32_t>();
    set.k = in.get<std::uint32_t>();
    set.window_resolution = in.get<double>();
    if (set.window_size == 0 || set.k == 0) {
        throw InputError("BFFT: zero window size or k");
    }
    const std::uint64_t per_pair = (static_cast<std::uint64_t>(set.window_size) * set.window_size + set.k) * 4;
    if (count > 0 && per_pair > in.remaining() / count) {
        throw InputError("BFFT: truncated file");
    }
    set.pairs.resize(count);
    for (auto& pair : set.pairs) {
        pair.window.resize(set.window_size * set.window_size);
        pair.target.resize(set.k);
        for (auto& v : pair.window) {
            v = in.get<float>();
        }
        for (auto& v : pair.target) {
            v = in.get<float>();
        }
    }
    if (in.remaining() > 0) {
        in.expect_magic(kAnnotationMagic);
        const auto len = in.get<std::uint32_t>();
        set.annotation = std::string(in.raw(len));
        if (in.remaining() != 0) {
            throw InputError("BFFT: trailing bytes after annotation");
        }
    }
    return set;
}

void write_bfft(const TrainingSet& set, const std::filesystem::path& path) {
    write_file_bytes(path, encode_bfft(set));
}

TrainingSet read_bfft(const std::filesystem::path& path) { return decode_bfft(read_file_bytes(path)); }

TrainingSet make_training_set(const OccupancyGrid& occupancy, const CountGrid& counts, const ExportOptions& options) {
    if (!(options.window_resolution > 0.0)) {
        throw ValidationError("window resolution must be positive");
    }
    const DirectionalGrid gold = floor_field(counts);
    const GridGeometry& g = counts.geometry();

    TrainingSet set;
    set.window_size = options.window.size;
    set.k = counts.k();
    set.window_resolution = options.window_resolution;
    set.annotation = "min_count: " + std::to_string(options.min_count) + "\n";
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        if (counts.total(c) == 0 || counts.total(c) < options.min_count) {
            continue;
        }
        const CellIndex cell = g.unflat(c);
        const Window w = extract_window(occupancy, g.center_x(cell), g.center_y(cell), options.window_resolution,
                                        options.window);
        TrainingPair pair;
        pair.window.assign(w.values.begin(), w.values.end());
        const auto target = gold.cell(c);
        pair.target.assign(target.begin(), target.end());
        set.pairs.push_back(std::move(pair));
    }
    return set;
}

std::size_t export_pairs(const OccupancyGrid& occupancy, const CountGrid& counts, const ExportOptions& options,
                         const std::filesystem::path& out) {
    const TrainingSet set = make_training_set(occupancy, counts, options);
    write_bfft(set, out);
    return set.pairs.size();
}

}  // namespace bff
