#include "render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bff::tools {

namespace {

std::string fmt(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::vector<QuiverEntry> quiver_entries(const DirectionalGrid& model, const BinningSpec& spec, double min_prob) {
    if (model.k() != spec.k) {
        throw ValidationError("model k does not match the binning");
    }
    const GridGeometry& g = model.geometry();
    std::vector<QuiverEntry> entries;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const CellIndex cell = g.unflat(c);
        for (std::size_t i = 0; i < model.k(); ++i) {
            const double p = model.at(c, i);
            if (p >= min_prob && p > 0.0) {
                entries.push_back({g.center_x(cell), g.center_y(cell), i, bin_center(i, spec), p});
            }
        }
    }
    return entries;
}

std::string quiver_csv(const std::vector<QuiverEntry>& entries) {
    std::ostringstream out;
    out << "x,y,direction_index,angle,probability\n";
    for (const auto& e : entries) {
        out << fmt(e.x, 10) << ',' << fmt(e.y, 10) << ',' << e.direction << ',' << fmt(e.angle, 10) << ','
            << fmt(e.probability, 9) << '\n';
    }
    return out.str();
}

std::string quiver_svg(const DirectionalGrid& model, const std::vector<QuiverEntry>& entries,
                       const OccupancyGrid* underlay) {
    const GridGeometry& g = model.geometry();
    // Pixels per cell, capped so large maps stay a manageable size.
    const double px = std::clamp(1200.0 / static_cast<double>(std::max(g.width, g.height)), 4.0, 40.0);
    const double width = px * static_cast<double>(g.width);
    const double height = px * static_cast<double>(g.height);
    const auto sx = [&](double x) { return (x - g.origin_x) / g.resolution * px; };
    const auto sy = [&](double y) { return height - (y - g.origin_y) / g.resolution * px; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
        << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (underlay) {
        const OccupancyGrid occ = resample(*underlay, g);
        out << "<g class=\"map\" stroke=\"none\">\n";
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            const double v = occ.values()[c];
            if (v < 0.02) {
                continue;
            }
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
            const CellIndex cell = g.unflat(c);
            out << "<rect x=\"" << fmt(static_cast<double>(cell.col) * px) << "\" y=\""
                << fmt(height - static_cast<double>(cell.row + 1) * px) << "\" width=\"" << fmt(px)
                << "\" height=\"" << fmt(px) << "\" fill=\"rgb(" << shade << ',' << shade << ',' << shade
                << ")\"/>\n";
        }
        out << "</g>\n";
    }
    out << "<g stroke=\"#1f77b4\" stroke-linecap=\"round\">\n";
    for (const auto& e : entries) {
        const double len = 0.5 * g.resolution * e.probability;
        const double x1 = e.x + len * std::cos(e.angle);
        const double y1 = e.y + len * std::sin(e.angle);
        out << "<line class=\"arrow\" x1=\"" << fmt(sx(e.x)) << "\" y1=\"" << fmt(sy(e.y)) << "\" x2=\""
            << fmt(sx(x1)) << "\" y2=\"" << fmt(sy(y1)) << "\" stroke-width=\"" << fmt(std::max(0.5, px * 0.06))
            << "\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

std::string curve_svg(const CurveResult& curve) {
    constexpr double W = 640, H = 400, left = 60, right = 20, top = 20, bottom = 50;
    double max_n = 1.0;
    double lo = 1.0, hi = 0.0;
    for (const auto& p : curve.points) {
        max_n = std::max(max_n, static_cast<double>(p.n));
        lo = std::min(lo, p.likelihood);
        hi = std::max(hi, p.likelihood);
    }
    if (curve.upper_bound) {
        lo = std::min(lo, *curve.upper_bound);
        hi = std::max(hi, *curve.upper_bound);
    }
    if (!(hi > lo)) {
        lo -= 0.01;
        hi += 0.01;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    const auto sx = [&](double n) { return left + n / max_n * (W - left - right); };
    const auto sy = [&](double l) { return top + (hi - l) / (hi - lo) * (H - top - bottom); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#eaeaf2\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
        << "\" stroke=\"#262626\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
        << "\" stroke=\"#262626\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
        << "number of observations n (max " << static_cast<std::size_t>(max_n) << ")</text>\n";
    out << "<text x=\"14\" y=\"" << top + 10 << "\" font-size=\"11\">" << fmt(hi, 4) << "</text>\n";
    out << "<text x=\"14\" y=\"" << H - bottom << "\" font-size=\"11\">" << fmt(lo, 4) << "</text>\n";
    if (curve.upper_bound) {
        out << "<line class=\"upper-bound\" x1=\"" << left << "\" y1=\"" << fmt(sy(*curve.upper_bound)) << "\" x2=\""
            << W - right << "\" y2=\"" << fmt(sy(*curve.upper_bound))
            << "\" stroke=\"#585858\" stroke-dasharray=\"6,4\"/>\n";
    }
    out << "<polyline class=\"curve\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : curve.points) {
        out << fmt(sx(static_cast<double>(p.n))) << ',' << fmt(sy(p.likelihood)) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - right << "\" y=\"" << top + 12 << "\" text-anchor=\"end\" font-size=\"12\">prior "
        << xml_escape(curve.prior_id) << ", alpha " << fmt(curve.alpha) << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace bff::tools
