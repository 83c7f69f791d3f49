#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "bff/bff_io.hpp"
#include "bff/evaluate.hpp"
#include "bff/ingest.hpp"
#include "bff/priors.hpp"
#include "bff/traindata.hpp"
#include "test_support.hpp"

using namespace bff;
using std::numbers::pi;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run bffmap(const test::TempDir& dir, const std::string& args) {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + BFFMAP_PATH + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

// Value after "key: " in key/value output.
std::string field(const std::string& text, const std::string& key) {
    const auto pos = text.find(key + ": ");
    REQUIRE(pos != std::string::npos);
    const auto start = pos + key.size() + 2;
    return text.substr(start, text.find('\n', start) - start);
}

// 2 m x 2 m free world at 0.1 m, origin (0, 0); the model grid at 0.5 m is 4 x 4.
void write_world(const test::TempDir& dir, double wall_value = 0.0) {
    std::vector<double> v(400, 0.0);
    for (std::size_t i = 0; i < 20; ++i) {
        v[i] = wall_value;  // bottom row
    }
    write_map(OccupancyGrid({20, 20, 0.1, 0.0, 0.0}, v), dir / "world.pgm");
}

std::vector<Observation> random_walkers(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 2.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::uniform_real_distribution<double> a(0.0, 2 * pi);
    std::vector<Observation> obs;
    for (std::size_t i = 0; i < n; ++i) {
        obs.push_back({static_cast<std::int64_t>(i % 10), static_cast<double>(i), u(rng), u(rng), a(rng)});
    }
    return obs;
}

}  // namespace

TEST_CASE("build-ff matches a hand tally") {
    test::TempDir dir("cli_ff");
    write_world(dir);
    auto obs = random_walkers(3000, 1, -0.2, 2.2);
    obs.push_back({1, 0, 1.0, 1.0, std::nullopt});
    write_canonical(obs, dir / "a.csv");
    const auto r = bffmap(dir, "build-ff --map " + q(dir / "world.yaml") + " --resolution 0.5 --traj " +
                                   q(dir / "a.csv") + " --out " + q(dir / "ff.bff"));
    REQUIRE_MESSAGE(r.code == 0, r.err);

    const GridGeometry g{4, 4, 0.5, 0.0, 0.0};
    std::vector<double> tally(16 * 8, 0.0);
    std::size_t outside = 0;
    for (const auto& o : obs) {
        if (!o.delta) {
            continue;
        }
        if (o.x < 0 || o.y < 0 || o.x >= 2.0 || o.y >= 2.0) {
            ++outside;
            continue;
        }
        const auto col = static_cast<std::size_t>(o.x / 0.5), row = static_cast<std::size_t>(o.y / 0.5);
        double a = *o.delta + pi / 8;
        if (a >= 2 * pi) {
            a -= 2 * pi;
        }
        tally[(row * 4 + col) * 8 + static_cast<std::size_t>(a / (pi / 4))] += 1;
    }
    const auto model = read_directional_grid(dir / "ff.bff");
    CHECK(model.geometry() == g);
    CHECK(model.provenance() == Provenance::floor_field);
    for (std::size_t c = 0; c < 16; ++c) {
        double total = 0;
        for (std::size_t i = 0; i < 8; ++i) {
            total += tally[c * 8 + i];
        }
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(model.at(c, i) == doctest::Approx(tally[c * 8 + i] / total).epsilon(1e-6));
        }
    }
    CHECK(field(r.out, "skipped_out_of_bounds") == std::to_string(outside));
    CHECK(field(r.out, "skipped_no_heading") == "1");
    const auto counts = read_counts(dir / "ff.bff.counts");
    CHECK(counts.observation_count() == obs.size() - 1 - outside);

    SUBCASE("JSON stats") {
        const auto j = bffmap(dir, "build-ff --json-stats --map " + q(dir / "world.pgm") + " --resolution 0.5 --traj " +
                                       q(dir / "a.csv") + " --out " + q(dir / "ff2.bff"));
        REQUIRE(j.code == 0);
        CHECK(j.out.find("\"visited_cells\": 16") != std::string::npos);
        CHECK(read_file_bytes(dir / "ff.bff") == read_file_bytes(dir / "ff2.bff"));
    }
}

TEST_CASE("build-ff edge cases") {
    test::TempDir dir("cli_ff_edge");
    write_world(dir);
    write_canonical({}, dir / "empty.csv");
    SUBCASE("empty trajectories give a uniform grid") {
        const auto r = bffmap(dir, "build-ff --map " + q(dir / "world.yaml") + " --resolution 0.5 --traj " +
                                       q(dir / "empty.csv") + " --out " + q(dir / "u.bff"));
        REQUIRE(r.code == 0);
        CHECK(r.err.find("warning") != std::string::npos);
        const auto model = read_directional_grid(dir / "u.bff");
        for (double p : model.probs()) {
            CHECK(p == 0.125);
        }
    }
    SUBCASE("trajectories in another frame") {
        write_canonical(random_walkers(100, 2, 100.0, 110.0), dir / "far.csv");
        const auto r = bffmap(dir, "build-ff --map " + q(dir / "world.yaml") + " --resolution 0.5 --traj " +
                                       q(dir / "far.csv") + " --out " + q(dir / "x.bff"));
        CHECK(r.code == 2);
        CHECK(r.err.find("fall on the map") != std::string::npos);
    }
    SUBCASE("missing input files") {
        CHECK(bffmap(dir, "build-ff --map " + q(dir / "nope.yaml") + " --resolution 0.5 --out " + q(dir / "x.bff"))
                  .code == 1);
        CHECK(bffmap(dir, "build-ff --map " + q(dir / "world.yaml") + " --resolution 0.5 --traj " +
                              q(dir / "nope.csv") + " --out " + q(dir / "x.bff"))
                  .code == 1);
        CHECK(bffmap(dir, "eval --model " + q(dir / "nope.bff")).code == 1);
        CHECK(bffmap(dir, "no-such-command").code == 1);
    }
}

TEST_CASE("build-bff") {
    test::TempDir dir("cli_bff");
    write_world(dir);
    write_canonical(random_walkers(2000, 3), dir / "a.csv");
    write_canonical({}, dir / "empty.csv");
    const std::string base = "--map " + q(dir / "world.yaml") + " --resolution 0.5 ";
    REQUIRE(bffmap(dir, "build-ff " + base + "--traj " + q(dir / "a.csv") + " --out " + q(dir / "ff.bff")).code == 0);

    // A non-uniform prior on the model grid.
    const GridGeometry g{4, 4, 0.5, 0.0, 0.0};
    std::vector<double> p(16 * 8, 0.0);
    for (std::size_t c = 0; c < 16; ++c) {
        p[c * 8 + c % 8] = 0.6;
        p[c * 8 + (c + 1) % 8] = 0.4;
    }
    write_prior(DirectionalGrid(g, 8, p, Provenance::prior), dir / "prior.bff");

    SUBCASE("alpha 0 reproduces the floor field") {
        REQUIRE(bffmap(dir, "build-bff " + base + "--traj " + q(dir / "a.csv") + " --prior " + q(dir / "prior.bff") +
                                " --alpha 0 --out " + q(dir / "b.bff"))
                    .code == 0);
        const auto a = read_bff1(dir / "ff.bff");
        const auto b = read_bff1(dir / "b.bff");
        CHECK(a.probs == b.probs);
    }
    SUBCASE("no trajectories reproduce the prior") {
        REQUIRE(bffmap(dir, "build-bff " + base + "--traj " + q(dir / "empty.csv") + " --prior " +
                                q(dir / "prior.bff") + " --out " + q(dir / "b.bff"))
                    .code == 0);
        CHECK(read_bff1(dir / "b.bff").probs == read_bff1(dir / "prior.bff").probs);
    }
    SUBCASE("uniform prior with no data") {
        REQUIRE(bffmap(dir, "build-bff " + base + "--traj " + q(dir / "empty.csv") + " --uniform-prior --out " +
                                q(dir / "b.bff"))
                    .code == 0);
        const auto m = read_directional_grid(dir / "b.bff");
        CHECK(m.provenance() == Provenance::bayesian);
        for (double v : m.probs()) {
            CHECK(v == 0.125);
        }
    }
    SUBCASE("matches the library posterior") {
        REQUIRE(bffmap(dir, "build-bff " + base + "--traj " + q(dir / "a.csv") + " --prior " + q(dir / "prior.bff") +
                                " --alpha 5 --out " + q(dir / "b.bff"))
                    .code == 0);
        const auto expected = build_bff(read_counts(dir / "ff.bff.counts"), load_prior(dir / "prior.bff"), {5.0});
        const auto got = read_directional_grid(dir / "b.bff");
        for (std::size_t i = 0; i < got.probs().size(); ++i) {
            CHECK(got.probs()[i] == doctest::Approx(expected.probs()[i]).epsilon(1e-6));
        }
    }
    SUBCASE("prior on a different grid") {
        write_prior(uniform_prior({5, 4, 0.5, 0.0, 0.0}), dir / "wrong.bff");
        CHECK(bffmap(dir, "build-bff " + base + "--traj " + q(dir / "a.csv") + " --prior " + q(dir / "wrong.bff") +
                              " --out " + q(dir / "b.bff"))
                  .code == 2);
    }
    SUBCASE("prior is required") {
        CHECK(bffmap(dir, "build-bff " + base + "--traj " + q(dir / "a.csv") + " --out " + q(dir / "b.bff")).code ==
              1);
    }
}

TEST_CASE("eval, upper-bound and curve") {
    test::TempDir dir("cli_curve");
    write_world(dir);
    write_canonical(random_walkers(5000, 4, -0.5, 2.5), dir / "a.csv");
    const std::string base = "--map " + q(dir / "world.yaml") + " --resolution 0.5 ";
    write_prior(uniform_prior({4, 4, 0.5, 0.0, 0.0}), dir / "u.bff");

    const auto e = bffmap(dir, "eval --model " + q(dir / "u.bff") + " --traj " + q(dir / "a.csv"));
    REQUIRE_MESSAGE(e.code == 0, e.err);
    CHECK(field(e.out, "likelihood") == "0.125");
    const auto obs = parse_canonical(dir / "a.csv").observations;
    std::size_t outside = 0;
    for (const auto& o : obs) {
        outside += (o.x < 0 || o.y < 0 || o.x >= 2.0 || o.y >= 2.0) ? 1 : 0;
    }
    CHECK(field(e.out, "skipped") == std::to_string(outside));

    const auto c = bffmap(dir, "curve " + base + "--traj " + q(dir / "a.csv") + " --prior " + q(dir / "u.bff") +
                                   " --alpha 3 --chunk 700 --out " + q(dir / "c.csv") + " --svg " + q(dir / "c.svg"));
    REQUIRE_MESSAGE(c.code == 0, c.err);
    const auto curve = parse_curve_csv(read_file_bytes(dir / "c.csv"));
    CHECK(curve.alpha == 3.0);
    CHECK(curve.chunk_size == 700);
    CHECK(curve.prior_id == "u.bff");
    REQUIRE(curve.points.size() == 9);
    CHECK(curve.points[0].n == 0);
    CHECK(curve.points[0].likelihood == 0.125);
    CHECK(curve.points.back().n == 5000);
    CHECK(slurp(dir / "c.svg").find("<polyline") != std::string::npos);

    const auto u = bffmap(dir, "upper-bound " + base + "--traj " + q(dir / "a.csv"));
    REQUIRE(u.code == 0);
    REQUIRE(curve.upper_bound.has_value());
    CHECK(std::stod(field(u.out, "upper_bound")) == doctest::Approx(*curve.upper_bound).epsilon(1e-12));

    CHECK(bffmap(dir, "curve " + base + "--traj " + q(dir / "a.csv") + " --out " + q(dir / "c.csv")).code == 1);
    const auto ff = bffmap(dir, "curve " + base + "--traj " + q(dir / "a.csv") + " --no-prior --max-n 1400 --out " +
                                    q(dir / "f.csv"));
    REQUIRE(ff.code == 0);
    const auto fcurve = parse_curve_csv(read_file_bytes(dir / "f.csv"));
    CHECK(fcurve.prior_id == "none");
    CHECK(fcurve.points.back().n == 1400);
}

TEST_CASE("export-quiver") {
    test::TempDir dir("cli_quiver");
    const GridGeometry g{2, 2, 1.0, 0.0, 0.0};
    std::vector<double> p(32, 0.0);
    for (std::size_t c = 0; c < 4; ++c) {
        p[c * 8 + 2 * c] = 1.0;
    }
    write_directional_grid(DirectionalGrid(g, 8, p, Provenance::floor_field), dir / "m.bff");
    const auto r = bffmap(dir, "export-quiver --model " + q(dir / "m.bff") + " --min-prob 0.5 --out " +
                                   q(dir / "q.csv"));
    REQUIRE(r.code == 0);
    CHECK(field(r.out, "arrows") == "4");
    const auto csv = slurp(dir / "q.csv");
    CHECK(csv.rfind("x,y,direction_index,angle,probability\n0.5,0.5,0,0,1\n", 0) == 0);
    REQUIRE(bffmap(dir, "export-quiver --model " + q(dir / "m.bff") + " --out " + q(dir / "q.svg")).code == 0);
    CHECK(slurp(dir / "q.svg").find("class=\"arrow\"") != std::string::npos);
}

TEST_CASE("make-training-data") {
    test::TempDir dir("cli_train");
    write_world(dir, 1.0);
    write_canonical(random_walkers(400, 6, 0.0, 2.0), dir / "a.csv");
    const std::string base = "--map " + q(dir / "world.yaml");
    const auto r = bffmap(dir, "make-training-data " + base + " --resolution 0.5 --traj " + q(dir / "a.csv") +
                                   " --window-resolution 0.05 --min-count 15 --out " + q(dir / "t.bfft"));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto set = read_bfft(dir / "t.bfft");
    CHECK(std::to_string(set.pairs.size()) == field(r.out, "pairs"));
    CHECK(set.window_resolution == 0.05);

    // Same result from a counts sidecar.
    REQUIRE(bffmap(dir, "build-ff " + base + " --resolution 0.5 --traj " + q(dir / "a.csv") + " --out " +
                            q(dir / "ff.bff"))
                .code == 0);
    REQUIRE(bffmap(dir, "make-training-data " + base + " --counts " + q(dir / "ff.bff.counts") +
                            " --window-resolution 0.05 --min-count 15 --out " + q(dir / "t2.bfft"))
                .code == 0);
    CHECK(read_file_bytes(dir / "t.bfft") == read_file_bytes(dir / "t2.bfft"));

    ExportOptions opt;
    opt.window_resolution = 0.05;
    opt.min_count = 15;
    CHECK(set.pairs == make_training_set(load_map(dir / "world.yaml"), read_counts(dir / "ff.bff.counts"), opt).pairs);
}

TEST_CASE("synth") {
    test::TempDir dir("cli_synth");
    const std::string args = "synth --random-model --width 6 --height 5 --walkers 30 --steps 10 ";
    REQUIRE(bffmap(dir, args + "--seed 7 --out " + q(dir / "a.csv") + " --model-out " + q(dir / "m.bff")).code == 0);
    REQUIRE(bffmap(dir, args + "--seed 7 --out " + q(dir / "b.csv")).code == 0);
    REQUIRE(bffmap(dir, args + "--seed 8 --out " + q(dir / "c.csv")).code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.csv") != slurp(dir / "c.csv"));
    const auto obs = parse_canonical(dir / "a.csv", ParseMode::strict).observations;
    CHECK(obs.size() <= 300);
    CHECK(read_directional_grid(dir / "m.bff").geometry() == GridGeometry{6, 5, 1.0, 0.0, 0.0});

    // Sampling a saved model reproduces the same walks.
    REQUIRE(bffmap(dir, "synth --model " + q(dir / "m.bff") + " --walkers 30 --steps 10 --seed 7 --out " +
                            q(dir / "d.csv"))
                .code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "d.csv"));
    CHECK(bffmap(dir, "synth --out " + q(dir / "e.csv")).code == 1);
}
