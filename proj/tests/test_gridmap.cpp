#include <doctest.h>
#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "bff/gridmap.hpp"
#include "test_support.hpp"

using namespace bff;
namespace fs = std::filesystem;

namespace {

void write_raw_pgm(const fs::path& path, std::size_t w, std::size_t h, const std::vector<std::uint8_t>& top_first) {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# test image\n" << w << ' ' << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(top_first.data()), static_cast<std::streamsize>(top_first.size()));
}

void write_png(const fs::path& path, std::size_t w, std::size_t h, int color_type, const std::vector<std::uint8_t>& px) {
    FILE* f = std::fopen(path.string().c_str(), "wb");
    REQUIRE(f);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    png_init_io(png, f);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    for (std::size_t r = 0; r < h; ++r) {
        png_write_row(png, const_cast<png_bytep>(px.data() + r * w * channels));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
}

MapMetadata meta(double res = 0.05, bool negate = false) {
    MapMetadata m;
    m.resolution = res;
    m.negate = negate;
    return m;
}

}  // namespace

TEST_CASE("load_occupancy maps pixel intensity to occupancy") {
    test::TempDir dir("gridmap");

    SUBCASE("all white is free") {
        write_raw_pgm(dir / "w.pgm", 3, 2, std::vector<std::uint8_t>(6, 255));
        const auto g = load_occupancy(dir / "w.pgm", meta());
        for (double v : g.values()) {
            CHECK(v == 0.0);
        }
    }
    SUBCASE("all black is occupied") {
        write_raw_pgm(dir / "b.pgm", 3, 2, std::vector<std::uint8_t>(6, 0));
        const auto g = load_occupancy(dir / "b.pgm", meta());
        for (double v : g.values()) {
            CHECK(v == 1.0);
        }
    }
    SUBCASE("2x1 image keeps the left pixel at column 0") {
        write_raw_pgm(dir / "p.pgm", 2, 1, {255, 0});
        const auto g = load_occupancy(dir / "p.pgm", meta());
        CHECK(g.at({0, 0}) == 0.0);
        CHECK(g.at({1, 0}) == 1.0);
    }
    SUBCASE("negate reads pixel / 255") {
        write_raw_pgm(dir / "n.pgm", 2, 1, {255, 51});
        const auto g = load_occupancy(dir / "n.pgm", meta(0.05, true));
        CHECK(g.at({0, 0}) == 1.0);
        CHECK(g.at({1, 0}) == doctest::Approx(0.2));
    }
    SUBCASE("top image row becomes the highest grid row") {
        write_raw_pgm(dir / "v.pgm", 1, 2, {0, 255});  // top black, bottom white
        const auto g = load_occupancy(dir / "v.pgm", meta());
        CHECK(g.at({0, 0}) == 0.0);
        CHECK(g.at({0, 1}) == 1.0);
    }
    SUBCASE("grayscale PNG matches the PGM reading") {
        write_png(dir / "g.png", 2, 2, PNG_COLOR_TYPE_GRAY, {0, 255, 128, 255});
        const auto g = load_occupancy(dir / "g.png", meta());
        CHECK(g.at({0, 1}) == 1.0);
        CHECK(g.at({1, 1}) == 0.0);
        CHECK(g.at({0, 0}) == doctest::Approx(127.0 / 255.0));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(load_occupancy(dir / "missing.pgm", meta()), InputError);
        write_png(dir / "rgb.png", 1, 1, PNG_COLOR_TYPE_RGB, {1, 2, 3});
        CHECK_THROWS_AS(load_occupancy(dir / "rgb.png", meta()), InputError);
        write_raw_pgm(dir / "ok.pgm", 1, 1, {0});
        CHECK_THROWS_AS(load_occupancy(dir / "ok.pgm", meta(0.0)), ValidationError);
        CHECK_THROWS_AS(load_occupancy(dir / "ok.pgm", meta(-1.0)), ValidationError);
        std::ofstream(dir / "p2.pgm") << "P2\n1 1\n255\n0\n";
        CHECK_THROWS_AS(load_occupancy(dir / "p2.pgm", meta()), InputError);
        std::ofstream(dir / "short.pgm", std::ios::binary) << "P5\n4 4\n255\n\x01\x02";
        CHECK_THROWS_AS(load_occupancy(dir / "short.pgm", meta()), InputError);
    }
}

TEST_CASE("map sidecar carries resolution, origin, negate and image") {
    test::TempDir dir("sidecar");
    write_raw_pgm(dir / "m.pgm", 4, 3, std::vector<std::uint8_t>(12, 255));
    std::ofstream(dir / "m.yaml") << "image: m.pgm\nresolution: 0.05\norigin: [-1.5, 2.25, 0.0]\nnegate: 0\n"
                                     "occupied_thresh: 0.65\nfree_thresh: 0.196\n";
    const auto meta = read_map_metadata(dir / "m.yaml");
    CHECK(meta.resolution == 0.05);
    CHECK(meta.origin_x == -1.5);
    CHECK(meta.origin_y == 2.25);
    CHECK_FALSE(meta.negate);

    const auto from_sidecar = load_map(dir / "m.yaml");
    const auto from_image = load_map(dir / "m.pgm");
    CHECK(from_sidecar.width() == 4);
    CHECK(from_sidecar.height() == 3);
    CHECK(from_sidecar.geometry().origin_x == -1.5);
    CHECK(from_image.geometry().same_as(from_sidecar.geometry()));

    std::ofstream(dir / "bad.yaml") << "origin: [0, 0]\n";
    CHECK_THROWS_AS(read_map_metadata(dir / "bad.yaml"), InputError);
    std::ofstream(dir / "zero.yaml") << "resolution: 0\n";
    CHECK_THROWS_AS(read_map_metadata(dir / "zero.yaml"), ValidationError);
}

TEST_CASE("written maps reload within one gray level, and the round trip is idempotent") {
    test::TempDir dir("roundtrip");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GridGeometry g{13, 9, 0.1, -2.0, 3.0};
    std::vector<double> values(g.cell_count());
    for (auto& v : values) {
        v = u(rng);
    }
    const OccupancyGrid original(g, values);
    write_map(original, dir / "a.pgm");
    const auto once = load_map(dir / "a.pgm");
    CHECK(once.geometry().same_as(g));
    for (std::size_t i = 0; i < values.size(); ++i) {
        CHECK(std::abs(once.values()[i] - values[i]) <= 1.0 / 255.0);
    }
    write_map(once, dir / "b.pgm");
    const auto twice = load_map(dir / "b.pgm");
    for (std::size_t i = 0; i < values.size(); ++i) {
        CHECK(twice.values()[i] == once.values()[i]);
    }
}

TEST_CASE("world_to_cell") {
    GridGeometry unit{10, 10, 1.0, 0.0, 0.0};
    CHECK(world_to_cell(unit, 0.5, 0.5) == CellIndex{0, 0});
    GridGeometry fine{10, 10, 0.4, 0.0, 0.0};
    CHECK(world_to_cell(fine, 1.0, 0.0) == CellIndex{2, 0});
    CHECK_THROWS_AS(world_to_cell(unit, -0.1, 0.0), OutOfBounds);
    CHECK_THROWS_AS(world_to_cell(unit, 10.0, 5.0), OutOfBounds);
    CHECK_THROWS_AS(world_to_cell(unit, 5.0, std::nan("")), OutOfBounds);
    try {
        world_to_cell(unit, -0.1, 0.0);
    } catch (const OutOfBounds& e) {
        CHECK(e.x() == -0.1);
    }
}

TEST_CASE("world_to_cell inverts cell centers on every cell") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> origin(-50.0, 50.0);
    for (double res : {0.05, 0.4, 0.8, 1.0, 0.3}) {
        GridGeometry g{17, 23, res, origin(rng), origin(rng)};
        for (std::size_t i = 0; i < g.cell_count(); ++i) {
            const CellIndex c = g.unflat(i);
            REQUIRE(world_to_cell(g, g.center_x(c), g.center_y(c)) == c);
        }
    }
}

TEST_CASE("with_resolution tiles the same area") {
    GridGeometry g{200, 100, 0.05, 1.0, 2.0};  // 10 m x 5 m
    const auto coarse = g.with_resolution(0.4);
    CHECK(coarse.width == 25);
    CHECK(coarse.height == 13);  // 12.5 cells rounded up
    CHECK(coarse.origin_x == 1.0);
    const auto exact = g.with_resolution(1.0);
    CHECK(exact.width == 10);
    CHECK(exact.height == 5);
}

TEST_CASE("extract_window") {
    SUBCASE("constant grid gives the constant away from padding") {
        const auto grid = OccupancyGrid::filled({100, 100, 0.05, 0.0, 0.0}, 1.0);
        const auto w = extract_window(grid, 2.5, 2.5, 0.05);
        CHECK(w.size == 64);
        CHECK(w.values.size() == 64 * 64);
        for (double v : w.values) {
            CHECK(v == 1.0);
        }
    }
    SUBCASE("corner center pads the outer quadrant with 0.5") {
        const auto grid = OccupancyGrid::filled({100, 100, 0.05, 0.0, 0.0}, 1.0);
        const auto w = extract_window(grid, CellIndex{0, 0}, 0.05);
        // Sample (col, row) sits at center + (col - 32, row - 32) * res; the cell-0 center is 0.025.
        CHECK(w.at(0, 0) == 0.5);
        CHECK(w.at(31, 31) == 0.5);
        CHECK(w.at(31, 40) == 0.5);
        CHECK(w.at(32, 32) == 1.0);
        CHECK(w.at(63, 63) == 1.0);
    }
    SUBCASE("coarser window over a constant-zero map stays zero") {
        const auto grid = OccupancyGrid::filled({1000, 1000, 0.05, 0.0, 0.0}, 0.0);
        const auto w = extract_window(grid, 25.0, 25.0, 0.4);
        CHECK(w.resolution == 0.4);
        for (double v : w.values) {
            CHECK(v == 0.0);
        }
    }
    SUBCASE("one interior sample matches a hand bilinear computation") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        GridGeometry g{8, 8, 1.0, 0.0, 0.0};
        std::vector<double> v(64);
        for (auto& x : v) {
            x = u(rng);
        }
        const OccupancyGrid grid(g, v);
        const auto w = extract_window(grid, 3.3, 4.6, 0.5);
        // Pixel (33, 31) sits at (3.3 + 0.5, 4.6 - 0.5) = (3.8, 4.1). Neighboring
        // cell centers are x in {3.5, 4.5} (cols 3, 4) and y in {3.5, 4.5} (rows 3, 4),
        // so the weights are tx = 0.3, ty = 0.6.
        const auto at = [&](int col, int row) { return v[static_cast<std::size_t>(row * 8 + col)]; };
        const double expected = 0.7 * 0.4 * at(3, 3) + 0.3 * 0.4 * at(4, 3) + 0.7 * 0.6 * at(3, 4) +
                                0.3 * 0.6 * at(4, 4);
        CHECK(w.at(33, 31) == doctest::Approx(expected).epsilon(1e-12));
        // Exactly on a cell center the sample is that cell's value.
        const auto on_center = extract_window(grid, 2.5, 5.5, 1.0);
        CHECK(on_center.at(32, 32) == doctest::Approx(at(2, 5)).epsilon(1e-15));
    }
    SUBCASE("values stay in [0, 1] on random maps") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        GridGeometry g{40, 30, 0.1, 0.0, 0.0};
        std::vector<double> v(g.cell_count());
        for (auto& x : v) {
            x = u(rng);
        }
        const OccupancyGrid grid(g, v);
        for (int trial = 0; trial < 20; ++trial) {
            const auto w = extract_window(grid, u(rng) * 4.0, u(rng) * 3.0, 0.05 + u(rng));
            for (double x : w.values) {
                REQUIRE(x >= 0.0);
                REQUIRE(x <= 1.0);
            }
        }
    }
    SUBCASE("padding is configurable and validated") {
        const auto grid = OccupancyGrid::filled({4, 4, 1.0, 0.0, 0.0}, 0.0);
        WindowOptions opts;
        opts.padding = 1.0;
        const auto w = extract_window(grid, 0.5, 0.5, 1.0, opts);
        CHECK(w.at(0, 0) == 1.0);
        CHECK_THROWS_AS(extract_window(grid, 0.5, 0.5, 0.0), ValidationError);
        opts.padding = 2.0;
        CHECK_THROWS_AS(extract_window(grid, 0.5, 0.5, 1.0, opts), ValidationError);
    }
}

TEST_CASE("OccupancyGrid rejects values outside [0, 1]") {
    CHECK_THROWS_AS(OccupancyGrid({1, 1, 1.0, 0, 0}, {1.5}), ValidationError);
    CHECK_THROWS_AS(OccupancyGrid({2, 1, 1.0, 0, 0}, {0.5}), ValidationError);
}
