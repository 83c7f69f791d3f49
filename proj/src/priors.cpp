#include "bff/priors.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "bff/bff_io.hpp"

namespace bff {

namespace {
// Sums already this close to 1 are left bitwise untouched.
constexpr double kSimplexTolerance = 1e-6;
}  // namespace

DirectionalGrid uniform_prior(const GridGeometry& geometry, std::size_t k) {
    geometry.validate();
    if (k < 2) {
        throw ValidationError("uniform prior needs k >= 2");
    }
    return DirectionalGrid(geometry, k, std::vector<double>(geometry.cell_count() * k, 1.0 / static_cast<double>(k)),
                           Provenance::uniform);
}

DirectionalGrid load_prior(const std::filesystem::path& path, PriorLoadReport* report) {
    const Bff1File file = read_bff1(path);
    if (file.k < 2) {
        throw ValidationError(path.string() + ": prior needs k >= 2");
    }
    std::vector<double> probs(file.probs.begin(), file.probs.end());
    std::size_t repaired = 0;
    for (std::size_t c = 0; c < file.geometry.cell_count(); ++c) {
        double* cell = probs.data() + c * file.k;
        double sum = 0.0;
        for (std::size_t i = 0; i < file.k; ++i) {
            if (!(cell[i] >= 0.0) || !std::isfinite(cell[i])) {
                throw ValidationError(path.string() + ": cell " + std::to_string(c) + " has invalid probability " +
                                      std::to_string(cell[i]));
            }
            sum += cell[i];
        }
        if (std::abs(sum - 1.0) <= kSimplexTolerance) {
            continue;
        }
        if (std::abs(sum - 1.0) > kPriorRepairTolerance) {
            throw ValidationError(path.string() + ": cell " + std::to_string(c) + " sums to " + std::to_string(sum) +
                                  ", beyond repair tolerance");
        }
        for (std::size_t i = 0; i < file.k; ++i) {
            cell[i] /= sum;
        }
        ++repaired;
    }
    if (report) {
        report->repaired_cells = repaired;
    }
    return DirectionalGrid(file.geometry, file.k, std::move(probs), Provenance::prior);
}

void write_prior(const DirectionalGrid& grid, const std::filesystem::path& path) {
    write_directional_grid(grid, path);
}

}  // namespace bff
