#include "bff/gridmap.hpp"

#include <png.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace bff {

namespace fs = std::filesystem;

OccupancyGrid::OccupancyGrid(GridGeometry geometry, std::vector<double> values)
    : geometry_(geometry), values_(std::move(values)) {
    geometry_.validate();
    if (values_.size() != geometry_.cell_count()) {
        throw ValidationError("occupancy value count does not match grid size");
    }
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError("occupancy values must lie in [0, 1]");
        }
    }
}

OccupancyGrid OccupancyGrid::filled(GridGeometry geometry, double value) {
    return OccupancyGrid(geometry, std::vector<double>(geometry.cell_count(), value));
}

// ---------------------------------------------------------------------------
// Sidecar

MapMetadata read_map_metadata(const fs::path& sidecar) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(sidecar.string());
    } catch (const YAML::Exception& e) {
        throw InputError("cannot read map metadata " + sidecar.string() + ": " + e.what());
    }
    MapMetadata meta;
    try {
        if (!root["resolution"]) {
            throw InputError("map metadata " + sidecar.string() + " has no resolution");
        }
        meta.resolution = root["resolution"].as<double>();
        if (const auto origin = root["origin"]) {
            if (!origin.IsSequence() || origin.size() < 2) {
                throw InputError("map metadata origin must be a list [x, y, ...]");
            }
            meta.origin_x = origin[0].as<double>();
            meta.origin_y = origin[1].as<double>();
        }
        if (const auto negate = root["negate"]) {
            meta.negate = negate.as<int>() != 0;
        }
        if (const auto image = root["image"]) {
            fs::path img = image.as<std::string>();
            meta.image = img.is_relative() ? sidecar.parent_path() / img : img;
        }
    } catch (const YAML::Exception& e) {
        throw InputError("bad map metadata " + sidecar.string() + ": " + e.what());
    }
    if (!(meta.resolution > 0.0)) {
        throw ValidationError("map resolution must be positive");
    }
    return meta;
}

void write_map_metadata(const MapMetadata& meta, const fs::path& sidecar) {
    std::ofstream out(sidecar);
    if (!out) {
        throw InputError("cannot write " + sidecar.string());
    }
    out.precision(17);
    if (!meta.image.empty()) {
        out << "image: " << meta.image.filename().string() << '\n';
    }
    out << "resolution: " << meta.resolution << '\n';
    out << "origin: [" << meta.origin_x << ", " << meta.origin_y << ", 0.0]\n";
    out << "negate: " << (meta.negate ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------------------
// Image decoding

namespace {

struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // top row first, as stored in the file
};

bool has_png_signature(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), 8);
    return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

std::string next_pgm_token(std::istream& in) {
    std::string token;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!token.empty()) {
                break;
            }
            continue;
        }
        token.push_back(static_cast<char>(ch));
    }
    return token;
}

GrayImage read_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    const std::string magic = next_pgm_token(in);
    if (magic != "P5") {
        throw InputError(path.string() + ": not a binary grayscale PGM (P5)");
    }
    GrayImage img;
    long maxval = 0;
    try {
        img.width = std::stoul(next_pgm_token(in));
        img.height = std::stoul(next_pgm_token(in));
        maxval = std::stol(next_pgm_token(in));
    } catch (const std::exception&) {
        throw InputError(path.string() + ": malformed PGM header");
    }
    if (maxval <= 0 || maxval > 255) {
        throw InputError(path.string() + ": only 8-bit PGM is supported");
    }
    if (img.width == 0 || img.height == 0) {
        throw InputError(path.string() + ": empty image");
    }
    img.pixels.resize(img.width * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
        throw InputError(path.string() + ": truncated PGM payload");
    }
    return img;
}

GrayImage read_png(const fs::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.string().c_str(), "rb"), &std::fclose);
    if (!file) {
        throw InputError("cannot open " + path.string());
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError("libpng initialisation failed");
    }
    GrayImage img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError(path.string() + ": corrupt PNG");
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError(path.string() + ": PNG must be 8-bit grayscale");
    }
    img.width = png_get_image_width(png, info);
    img.height = png_get_image_height(png, info);
    img.pixels.resize(img.width * img.height);
    rows.resize(img.height);
    for (std::size_t r = 0; r < img.height; ++r) {
        rows[r] = img.pixels.data() + r * img.width;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

}  // namespace

OccupancyGrid load_occupancy(const fs::path& image, const MapMetadata& meta) {
    if (!(meta.resolution > 0.0)) {
        throw ValidationError("map resolution must be positive");
    }
    if (!fs::exists(image)) {
        throw InputError("map image not found: " + image.string());
    }
    const GrayImage img = has_png_signature(image) ? read_png(image) : read_pgm(image);

    GridGeometry geometry{img.width, img.height, meta.resolution, meta.origin_x, meta.origin_y};
    std::vector<double> values(geometry.cell_count());
    for (std::size_t r = 0; r < img.height; ++r) {
        const std::size_t src_row = img.height - 1 - r;
        for (std::size_t c = 0; c < img.width; ++c) {
            const double p = img.pixels[src_row * img.width + c];
            values[r * img.width + c] = meta.negate ? p / 255.0 : (255.0 - p) / 255.0;
        }
    }
    return OccupancyGrid(geometry, std::move(values));
}

OccupancyGrid load_map(const fs::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".yaml" || ext == ".yml") {
        const MapMetadata meta = read_map_metadata(path);
        if (meta.image.empty()) {
            throw InputError(path.string() + " does not name an image");
        }
        return load_occupancy(meta.image, meta);
    }
    fs::path sidecar = path;
    sidecar.replace_extension(".yaml");
    if (!fs::exists(sidecar)) {
        throw InputError("no metadata sidecar found for " + path.string() + " (expected " + sidecar.string() + ")");
    }
    return load_occupancy(path, read_map_metadata(sidecar));
}

void write_pgm(const OccupancyGrid& grid, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
    std::vector<std::uint8_t> row(grid.width());
    for (std::size_t r = grid.height(); r-- > 0;) {
        for (std::size_t c = 0; c < grid.width(); ++c) {
            row[c] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - grid.at({c, r}))));
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
}

void write_map(const OccupancyGrid& grid, const fs::path& pgm_path) {
    write_pgm(grid, pgm_path);
    MapMetadata meta;
    meta.resolution = grid.resolution();
    meta.origin_x = grid.geometry().origin_x;
    meta.origin_y = grid.geometry().origin_y;
    meta.image = pgm_path;
    fs::path sidecar = pgm_path;
    sidecar.replace_extension(".yaml");
    write_map_metadata(meta, sidecar);
}

// ---------------------------------------------------------------------------
// Resampling

double sample_bilinear(const OccupancyGrid& grid, double x, double y, double padding) {
    const GridGeometry& g = grid.geometry();
    const double gx = (x - g.origin_x) / g.resolution;
    const double gy = (y - g.origin_y) / g.resolution;
    if (!(gx >= 0.0 && gx < static_cast<double>(g.width) && gy >= 0.0 && gy < static_cast<double>(g.height))) {
        return padding;
    }
    // Continuous coordinates with integer values on cell centers.
    const double u = gx - 0.5;
    const double v = gy - 0.5;
    const double u0 = std::floor(u);
    const double v0 = std::floor(v);
    const double fu = u - u0;
    const double fv = v - v0;

    const auto clamp_index = [](double i, std::size_t n) {
        return static_cast<std::size_t>(std::clamp(i, 0.0, static_cast<double>(n - 1)));
    };
    const std::size_t c0 = clamp_index(u0, g.width);
    const std::size_t c1 = clamp_index(u0 + 1.0, g.width);
    const std::size_t r0 = clamp_index(v0, g.height);
    const std::size_t r1 = clamp_index(v0 + 1.0, g.height);

    const double bottom = (1.0 - fu) * grid.at({c0, r0}) + fu * grid.at({c1, r0});
    const double top = (1.0 - fu) * grid.at({c0, r1}) + fu * grid.at({c1, r1});
    return std::clamp((1.0 - fv) * bottom + fv * top, 0.0, 1.0);
}

Window extract_window(const OccupancyGrid& grid, double center_x, double center_y, double window_resolution,
                      const WindowOptions& options) {
    if (!(window_resolution > 0.0)) {
        throw ValidationError("window resolution must be positive");
    }
    if (options.size == 0) {
        throw ValidationError("window size must be positive");
    }
    if (!(options.padding >= 0.0 && options.padding <= 1.0)) {
        throw ValidationError("window padding must lie in [0, 1]");
    }
    Window w;
    w.size = options.size;
    w.resolution = window_resolution;
    w.center_x = center_x;
    w.center_y = center_y;
    w.values.resize(options.size * options.size);
    const double half = static_cast<double>(options.size / 2);
    for (std::size_t r = 0; r < options.size; ++r) {
        const double y = center_y + (static_cast<double>(r) - half) * window_resolution;
        for (std::size_t c = 0; c < options.size; ++c) {
            const double x = center_x + (static_cast<double>(c) - half) * window_resolution;
            w.values[r * options.size + c] = sample_bilinear(grid, x, y, options.padding);
        }
    }
    return w;
}

Window extract_window(const OccupancyGrid& grid, CellIndex center, double window_resolution,
                      const WindowOptions& options) {
    const GridGeometry& g = grid.geometry();
    if (center.col >= g.width || center.row >= g.height) {
        throw OutOfBounds(g.center_x(center), g.center_y(center));
    }
    return extract_window(grid, g.center_x(center), g.center_y(center), window_resolution, options);
}

OccupancyGrid resample(const OccupancyGrid& grid, const GridGeometry& target, double padding) {
    target.validate();
    std::vector<double> values(target.cell_count());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const CellIndex c = target.unflat(i);
        values[i] = sample_bilinear(grid, target.center_x(c), target.center_y(c), padding);
    }
    return OccupancyGrid(target, std::move(values));
}

}  // namespace bff
