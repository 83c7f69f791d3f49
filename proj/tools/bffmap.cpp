// bffmap: command-line front end for building and evaluating maps of dynamics.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bff/bff_io.hpp"
#include "bff/evaluate.hpp"
#include "bff/gridmap.hpp"
#include "bff/ingest.hpp"
#include "bff/mod_core.hpp"
#include "bff/priors.hpp"
#include "bff/synthgen.hpp"
#include "bff/traindata.hpp"
#include "render.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kInputError = 1, kValidationFailure = 2 };

struct Common {
    std::vector<std::string> traj;
    std::string format = "canonical";
    std::string atc_config;
    bool derive = false;
    double min_step = bff::kDefaultMinStep;
    bool strict = false;
    std::size_t k = 8;
    std::optional<double> bin_offset;
    bool json_stats = false;
    unsigned threads = 1;

    bff::BinningSpec binning() const {
        return bin_offset ? bff::BinningSpec(k, *bin_offset) : bff::BinningSpec(k);
    }
};

void add_trajectory_options(CLI::App* cmd, Common& c, bool required) {
    auto* t = cmd->add_option("--traj", c.traj, "Trajectory files (read in the given order)");
    if (required) {
        t->required();
    }
    cmd->add_option("--format", c.format, "Trajectory format")->check(CLI::IsMember({"canonical", "atc"}));
    cmd->add_option("--atc-config", c.atc_config, "Column layout for --format atc")->check(CLI::ExistingFile);
    cmd->add_flag("--derive-headings", c.derive, "Compute headings from consecutive positions");
    cmd->add_option("--min-step", c.min_step, "Minimum displacement (m) for derived headings");
    cmd->add_flag("--strict", c.strict, "Fail on the first malformed row");
}

void add_binning_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--k", c.k, "Number of direction bins")->check(CLI::Range(2, 1 << 16));
    cmd->add_option("--bin-offset", c.bin_offset, "Start angle of bin 0 in radians (default -pi/k)");
    cmd->add_flag("--json-stats", c.json_stats, "Print statistics as JSON");
}

bff::ObservationSet load_trajectories(const Common& c) {
    const auto mode = c.strict ? bff::ParseMode::strict : bff::ParseMode::lenient;
    const bff::AdapterConfig adapter = c.atc_config.empty() ? bff::AdapterConfig{} : bff::load_adapter_config(c.atc_config);
    bff::ObservationSet all;
    for (const auto& path : c.traj) {
        bff::ObservationSet set =
            c.format == "atc" ? bff::parse_atc(path, adapter, mode) : bff::parse_canonical(path, mode);
        for (const auto& issue : set.issues) {
            std::cerr << "warning: " << issue.message << '\n';
        }
        if (c.derive) {
            set = bff::derive_headings(set, c.min_step);
        }
        all.source += (all.source.empty() ? "" : "+") + fs::path(path).filename().string();
        all.observations.insert(all.observations.end(), set.observations.begin(), set.observations.end());
        all.issues.insert(all.issues.end(), set.issues.begin(), set.issues.end());
    }
    return all;
}

void emit(const Common& c, const json& stats) {
    if (c.json_stats) {
        std::cout << stats.dump(2) << '\n';
        return;
    }
    for (const auto& [key, value] : stats.items()) {
        std::cout << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
    }
}

json count_stats(const bff::CountGrid& counts, std::size_t parsed) {
    std::size_t visited = 0;
    for (std::size_t cell = 0; cell < counts.geometry().cell_count(); ++cell) {
        visited += counts.total(cell) > 0 ? 1 : 0;
    }
    return {{"width", counts.geometry().width},
            {"height", counts.geometry().height},
            {"resolution", counts.geometry().resolution},
            {"cells", counts.geometry().cell_count()},
            {"visited_cells", visited},
            {"observations", parsed},
            {"accumulated", counts.observation_count()},
            {"skipped_out_of_bounds", counts.skipped_out_of_bounds()},
            {"skipped_no_heading", counts.skipped_no_heading()}};
}

/// Counts on the map at the requested resolution. Throws ValidationError when
/// observations exist but none landed on the map.
bff::CountGrid accumulate_on_map(const bff::GridGeometry& geometry, const bff::ObservationSet& set,
                                 const bff::BinningSpec& spec) {
    bff::CountGrid counts(geometry, spec);
    counts.accumulate(set.observations);
    if (set.empty()) {
        std::cerr << "warning: no observations; every cell stays uniform\n";
    } else if (counts.observation_count() == 0) {
        throw bff::ValidationError("none of the " + std::to_string(set.size()) +
                                   " observations fall on the map; check the map and trajectory frames");
    }
    return counts;
}

void write_text(const fs::path& path, const std::string& text) {
    bff::write_file_bytes(path, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Build, fuse and evaluate maps of pedestrian dynamics on occupancy grids"};
    app.require_subcommand(1);
    Common c;

    // build-ff -------------------------------------------------------------
    std::string map_path, out_path, prior_path, model_path, counts_path;
    double resolution = 0.0;
    double alpha = 5.0;
    bool uniform_prior = false, no_prior = false;

    auto* build_ff = app.add_subcommand("build-ff", "Floor field from trajectories");
    build_ff->add_option("--map", map_path, "Occupancy map (image or sidecar)")->required();
    build_ff->add_option("--resolution", resolution, "Model resolution in m per cell")->required();
    build_ff->add_option("--out", out_path, "Output BFF1 file; counts go to <out>.counts")->required();
    add_trajectory_options(build_ff, c, false);
    add_binning_options(build_ff, c);

    auto* build_bff = app.add_subcommand("build-bff", "Bayesian floor field: prior fused with trajectories");
    build_bff->add_option("--map", map_path, "Occupancy map (image or sidecar)")->required();
    build_bff->add_option("--resolution", resolution, "Model resolution in m per cell")->required();
    build_bff->add_option("--out", out_path, "Output BFF1 file")->required();
    auto* bff_prior = build_bff->add_option("--prior", prior_path, "Prior BFF1 file");
    auto* bff_uniform = build_bff->add_flag("--uniform-prior", uniform_prior, "Use the uniform prior");
    bff_prior->excludes(bff_uniform);
    build_bff->add_option("--alpha", alpha, "Prior concentration")->check(CLI::NonNegativeNumber);
    add_trajectory_options(build_bff, c, false);
    add_binning_options(build_bff, c);

    // curve ----------------------------------------------------------------
    std::size_t chunk = 2000;
    std::optional<std::size_t> max_n;
    std::string svg_path, dataset_id, prior_id;
    auto* curve = app.add_subcommand("curve", "Likelihood as a function of the number of observations");
    curve->add_option("--map", map_path, "Occupancy map (image or sidecar)")->required();
    curve->add_option("--resolution", resolution, "Model resolution in m per cell")->required();
    auto* curve_prior = curve->add_option("--prior", prior_path, "Prior BFF1 file");
    auto* curve_uniform = curve->add_flag("--uniform-prior", uniform_prior, "Use the uniform prior");
    auto* curve_none = curve->add_flag("--no-prior", no_prior, "Plain floor field");
    curve_prior->excludes(curve_uniform)->excludes(curve_none);
    curve_uniform->excludes(curve_none);
    curve->add_option("--alpha", alpha, "Prior concentration")->check(CLI::NonNegativeNumber);
    curve->add_option("--chunk", chunk, "Observations per step")->check(CLI::PositiveNumber);
    curve->add_option("--max-n", max_n, "Stop after this many observations");
    curve->add_option("--out", out_path, "Curve CSV")->required();
    curve->add_option("--svg", svg_path, "Also render the curve as SVG");
    curve->add_option("--dataset-id", dataset_id, "Dataset label for the CSV header");
    curve->add_option("--prior-id", prior_id, "Prior label for the CSV header");
    curve->add_option("--threads", c.threads, "Threads for likelihood sums")->check(CLI::Range(1u, 256u));
    add_trajectory_options(curve, c, true);
    add_binning_options(curve, c);

    // eval / upper-bound ---------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Average likelihood of trajectories under a model");
    eval->add_option("--model", model_path, "Model BFF1 file")->required()->check(CLI::ExistingFile);
    add_trajectory_options(eval, c, true);
    add_binning_options(eval, c);

    auto* upper = app.add_subcommand("upper-bound", "Likelihood of trajectories under their own floor field");
    upper->add_option("--map", map_path, "Occupancy map (image or sidecar)")->required();
    upper->add_option("--resolution", resolution, "Model resolution in m per cell")->required();
    add_trajectory_options(upper, c, true);
    add_binning_options(upper, c);

    // export-quiver --------------------------------------------------------
    double min_prob = 0.0;
    auto* quiver = app.add_subcommand("export-quiver", "Per-cell arrows as CSV or SVG");
    quiver->add_option("--model", model_path, "Model BFF1 file")->required()->check(CLI::ExistingFile);
    quiver->add_option("--out", out_path, "Output .csv or .svg")->required();
    quiver->add_option("--min-prob", min_prob, "Only entries with at least this probability");
    quiver->add_option("--map", map_path, "Occupancy underlay for SVG output");
    add_binning_options(quiver, c);

    // make-training-data ---------------------------------------------------
    std::optional<double> window_resolution;
    std::uint64_t min_count = bff::kDefaultMinCount;
    auto* training = app.add_subcommand("make-training-data", "Export (occupancy window, transition) pairs as BFFT");
    training->add_option("--map", map_path, "Occupancy map (image or sidecar)")->required();
    training->add_option("--resolution", resolution, "Model resolution in m per cell (with --traj)");
    training->add_option("--counts", counts_path, "Counts sidecar from build-ff instead of --traj");
    training->add_option("--window-resolution", window_resolution, "Window m per cell (default: model resolution)");
    training->add_option("--min-count", min_count, "Minimum observations for a cell to be exported");
    training->add_option("--out", out_path, "Output BFFT file")->required();
    add_trajectory_options(training, c, false);
    add_binning_options(training, c);

    // synth ----------------------------------------------------------------
    std::size_t walkers = 100, steps = 100, width = 20, height = 20;
    std::uint64_t seed = 1;
    double concentration = 0.1;
    bool random_model = false;
    std::string model_out;
    auto* synth = app.add_subcommand("synth", "Synthetic trajectories sampled from a model");
    auto* synth_model = synth->add_option("--model", model_path, "Model BFF1 to sample from");
    auto* synth_random = synth->add_flag("--random-model", random_model, "Draw a random Dirichlet model");
    synth_model->excludes(synth_random);
    synth->add_option("--concentration", concentration, "Dirichlet concentration for --random-model");
    synth->add_option("--map", map_path, "Occupancy map (walls block walkers)");
    synth->add_option("--resolution", resolution, "Model resolution for --random-model");
    synth->add_option("--width", width, "Open-world width in cells when no map is given");
    synth->add_option("--height", height, "Open-world height in cells when no map is given");
    synth->add_option("--walkers", walkers, "Number of walkers");
    synth->add_option("--steps", steps, "Observations per walker");
    synth->add_option("--seed", seed, "Random seed");
    synth->add_option("--out", out_path, "Output canonical CSV")->required();
    synth->add_option("--model-out", model_out, "Write the sampled model as BFF1");
    add_binning_options(synth, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        const bff::BinningSpec spec = c.binning();
        spec.validate();

        const auto model_geometry = [&]() {
            const bff::OccupancyGrid map = bff::load_map(map_path);
            if (!(resolution > 0.0)) {
                throw bff::ValidationError("--resolution must be positive");
            }
            return std::pair{map, map.geometry().with_resolution(resolution)};
        };

        if (build_ff->parsed() || build_bff->parsed()) {
            const auto [map, geometry] = model_geometry();
            const bff::ObservationSet set = load_trajectories(c);
            const bff::CountGrid counts = accumulate_on_map(geometry, set, spec);
            json stats = count_stats(counts, set.size());
            if (build_ff->parsed()) {
                bff::write_directional_grid(bff::floor_field(counts), out_path);
                bff::write_counts(counts, out_path + ".counts");
                stats["counts"] = out_path + ".counts";
            } else {
                if (prior_path.empty() && !uniform_prior) {
                    throw bff::InputError("build-bff needs --prior or --uniform-prior");
                }
                bff::PriorLoadReport report;
                const bff::DirectionalGrid prior =
                    uniform_prior ? bff::uniform_prior(geometry, spec.k) : bff::load_prior(prior_path, &report);
                if (report.repaired_cells > 0) {
                    std::cerr << "warning: renormalized " << report.repaired_cells << " prior cells\n";
                }
                const bff::DirectionalGrid model = bff::build_bff(counts, prior, bff::FusionParams{alpha});
                bff::write_directional_grid(model, out_path);
                stats["alpha"] = alpha;
                stats["prior"] = uniform_prior ? "uniform" : prior_path;
            }
            stats["out"] = out_path;
            emit(c, stats);
            return kOk;
        }

        if (curve->parsed()) {
            if (prior_path.empty() && !uniform_prior && !no_prior) {
                throw bff::InputError("curve needs one of --prior, --uniform-prior or --no-prior");
            }
            const auto [map, geometry] = model_geometry();
            const bff::ObservationSet set = load_trajectories(c);
            std::optional<bff::DirectionalGrid> prior;
            if (uniform_prior) {
                prior = bff::uniform_prior(geometry, spec.k);
            } else if (!prior_path.empty()) {
                prior = bff::load_prior(prior_path);
            }
            bff::CurveOptions options;
            options.chunk_size = chunk;
            options.max_n = max_n;
            options.prior_id = !prior_id.empty() ? prior_id
                               : uniform_prior   ? "uniform"
                               : no_prior        ? "none"
                                                 : fs::path(prior_path).filename().string();
            options.dataset_id = dataset_id.empty() ? set.source : dataset_id;
            options.threads = c.threads;
            const bff::CurveResult result = bff::likelihood_curve(prior ? &*prior : nullptr, set.observations, geometry,
                                                                  spec, bff::FusionParams{alpha}, options);
            bff::write_curve_csv(result, out_path);
            if (!svg_path.empty()) {
                write_text(svg_path, bff::tools::curve_svg(result));
            }
            emit(c, {{"points", result.points.size()},
                     {"L_at_0", result.points.front().likelihood},
                     {"L_final", result.points.back().likelihood},
                     {"upper_bound", result.upper_bound.value_or(NAN)},
                     {"skipped", result.skipped},
                     {"out", out_path}});
            return kOk;
        }

        if (eval->parsed()) {
            const bff::DirectionalGrid model = bff::read_directional_grid(model_path);
            const bff::ObservationSet set = load_trajectories(c);
            const auto r = bff::dataset_likelihood(model, set.observations, spec);
            emit(c, {{"likelihood", r.mean}, {"scored", r.scored}, {"skipped", r.skipped}});
            return kOk;
        }

        if (upper->parsed()) {
            const auto [map, geometry] = model_geometry();
            const bff::ObservationSet set = load_trajectories(c);
            const auto r = bff::upper_bound(set.observations, geometry, spec);
            emit(c, {{"upper_bound", r.mean}, {"scored", r.scored}, {"skipped", r.skipped}});
            return kOk;
        }

        if (quiver->parsed()) {
            const bff::DirectionalGrid model = bff::read_directional_grid(model_path);
            const auto entries = bff::tools::quiver_entries(model, spec, min_prob);
            const bool svg = fs::path(out_path).extension() == ".svg";
            if (svg) {
                std::optional<bff::OccupancyGrid> underlay;
                if (!map_path.empty()) {
                    underlay = bff::load_map(map_path);
                }
                write_text(out_path, bff::tools::quiver_svg(model, entries, underlay ? &*underlay : nullptr));
            } else {
                write_text(out_path, bff::tools::quiver_csv(entries));
            }
            emit(c, {{"arrows", entries.size()}, {"out", out_path}});
            return kOk;
        }

        if (training->parsed()) {
            const bff::OccupancyGrid map = bff::load_map(map_path);
            std::optional<bff::CountGrid> counts;
            if (!counts_path.empty()) {
                counts = bff::read_counts(counts_path);
            } else {
                if (!(resolution > 0.0)) {
                    throw bff::InputError("make-training-data needs --counts or --traj with --resolution");
                }
                const bff::ObservationSet set = load_trajectories(c);
                counts = accumulate_on_map(map.geometry().with_resolution(resolution), set, spec);
            }
            bff::ExportOptions options;
            options.window_resolution = window_resolution.value_or(counts->geometry().resolution);
            options.min_count = min_count;
            const std::size_t pairs = bff::export_pairs(map, *counts, options, out_path);
            emit(c, {{"pairs", pairs},
                     {"min_count", min_count},
                     {"window_resolution", options.window_resolution},
                     {"out", out_path}});
            return kOk;
        }

        if (synth->parsed()) {
            std::optional<bff::OccupancyGrid> occupancy;
            std::optional<bff::DirectionalGrid> model;
            if (!model_path.empty()) {
                model = bff::read_directional_grid(model_path);
            }
            bff::GridGeometry geometry;
            if (model) {
                geometry = model->geometry();
            } else if (!map_path.empty()) {
                if (!(resolution > 0.0)) {
                    throw bff::InputError("--random-model with --map needs --resolution");
                }
                geometry = bff::load_map(map_path).geometry().with_resolution(resolution);
            } else {
                geometry = {width, height, resolution > 0.0 ? resolution : 1.0, 0.0, 0.0};
            }
            if (!model) {
                if (!random_model) {
                    throw bff::InputError("synth needs --model or --random-model");
                }
                model = bff::random_directional_grid(geometry, spec.k, concentration, seed);
            }
            occupancy = map_path.empty() ? bff::OccupancyGrid::filled(geometry, 0.0)
                                         : bff::resample(bff::load_map(map_path), geometry);
            const bff::ObservationSet set = bff::sample_walks(*model, *occupancy, walkers, steps, seed, spec);
            bff::write_canonical(set.observations, out_path);
            if (!model_out.empty()) {
                bff::write_directional_grid(*model, model_out);
            }
            emit(c, {{"observations", set.size()}, {"walkers", walkers}, {"seed", seed}, {"out", out_path}});
            return kOk;
        }
    } catch (const bff::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidationFailure;
    } catch (const bff::OutOfBounds& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidationFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kOk;
}
