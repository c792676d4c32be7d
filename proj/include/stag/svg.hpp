#pragma once

// Deterministic SVG rendering of rule grids and month-hour heatmaps.
// Output is plain text with fixed number formatting so identical inputs
// produce byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "stag/mining.hpp"
#include "stag/temporal.hpp"

namespace stag::svg {

namespace detail {

inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
}

inline std::string rgb(double r, double g, double b) {
    auto clamp255 = [](double x) { return std::clamp(int(std::lround(x)), 0, 255); };
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", clamp255(r), clamp255(g), clamp255(b));
    return std::string(buf);
}

// Diverging green-white-red ramp over t in [-1, 1].
inline std::string diverging_color(double t) {
    t = std::clamp(t, -1.0, 1.0);
    if (t >= 0) return rgb(180 + 0 * t, 180 - 150 * t, 180 - 150 * t + 0);
    return rgb(180 + 150 * t, 180, 180 + 150 * t);
}

// Confidence ramp: white (0) toward a saturated base color (1).
inline std::string confidence_color(double c, double base_r, double base_g, double base_b) {
    c = std::clamp(c, 0.0, 1.0);
    return rgb(255 + (base_r - 255) * c, 255 + (base_g - 255) * c, 255 + (base_b - 255) * c);
}

inline const char* month_name(int m) {
    static const char* names[12] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    return names[m - 1];
}

}  // namespace detail

inline constexpr double kCell = 22.0;
inline constexpr double kLeft = 46.0;
inline constexpr double kTop = 34.0;

// 12x24 dot grid for the rules of one cluster/segment/kind and one
// consequent type. Dot color encodes confidence, dot radius encodes lift
// (linear between the rule set's extremes); a legend states the scale.
inline std::string render_rule_grid(std::span<const AttentionRule> rules, const std::string& title) {
    double min_lift = 0, max_lift = 0;
    for (size_t i = 0; i < rules.size(); ++i) {
        if (i == 0) {
            min_lift = max_lift = rules[i].lift;
        } else {
            min_lift = std::min(min_lift, rules[i].lift);
            max_lift = std::max(max_lift, rules[i].lift);
        }
    }
    const double r_min = 3.0, r_max = 9.0;
    auto radius = [&](double lift) {
        if (max_lift == min_lift) return (r_min + r_max) / 2;
        return r_min + (lift - min_lift) / (max_lift - min_lift) * (r_max - r_min);
    };

    double width = kLeft + 24 * kCell + 20;
    double height = kTop + 12 * kCell + 58;
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(width) +
           "\" height=\"" + detail::num(height) + "\">\n";
    out += "<text x=\"" + detail::num(kLeft) + "\" y=\"16\" font-size=\"13\" class=\"title\">" +
           title + "</text>\n";
    // grid frame
    for (int m = 0; m <= 12; ++m) {
        double y = kTop + m * kCell;
        out += "<line x1=\"" + detail::num(kLeft) + "\" y1=\"" + detail::num(y) + "\" x2=\"" +
               detail::num(kLeft + 24 * kCell) + "\" y2=\"" + detail::num(y) +
               "\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n";
    }
    for (int h = 0; h <= 24; ++h) {
        double x = kLeft + h * kCell;
        out += "<line x1=\"" + detail::num(x) + "\" y1=\"" + detail::num(kTop) + "\" x2=\"" +
               detail::num(x) + "\" y2=\"" + detail::num(kTop + 12 * kCell) +
               "\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n";
    }
    for (int m = 1; m <= 12; ++m) {
        out += "<text x=\"6\" y=\"" + detail::num(kTop + (m - 0.5) * kCell + 4) +
               "\" font-size=\"10\" class=\"month\">" + detail::month_name(m) + "</text>\n";
    }
    for (int h = 0; h < 24; h += 2) {
        out += "<text x=\"" + detail::num(kLeft + (h + 0.5) * kCell - 4) + "\" y=\"" +
               detail::num(kTop - 6) + "\" font-size=\"10\" class=\"hour\">" + std::to_string(h) +
               "</text>\n";
    }
    for (const auto& r : rules) {
        double cx = kLeft + (r.hour + 0.5) * kCell;
        double cy = kTop + (r.month - 0.5) * kCell;
        out += "<circle class=\"rule\" cx=\"" + detail::num(cx) + "\" cy=\"" + detail::num(cy) +
               "\" r=\"" + detail::num(radius(r.lift)) + "\" fill=\"" +
               detail::confidence_color(r.confidence, 200, 30, 60) + "\"><title>" +
               detail::month_name(r.month) + " " + std::to_string(r.hour) + ":00 C=" +
               detail::num(r.confidence) + " L=" + detail::num(r.lift) + "</title></circle>\n";
    }
    double ly = kTop + 12 * kCell + 22;
    out += "<text x=\"" + detail::num(kLeft) + "\" y=\"" + detail::num(ly) +
           "\" font-size=\"11\" class=\"legend\">dot color: confidence (white 0 to dark 1); dot radius: lift " +
           detail::num(min_lift) + " to " + detail::num(max_lift) + "</text>\n";
    out += "<text x=\"" + detail::num(kLeft) + "\" y=\"" + detail::num(ly + 18) +
           "\" font-size=\"11\" class=\"legend\">rules shown: " + std::to_string(rules.size()) +
           "</text>\n";
    out += "</svg>\n";
    return out;
}

// 12x24 heatmap with a diverging scale centered at the grid mean.
inline std::string render_heatmap(const TemporalGrid& grid, const std::string& title = "") {
    double mean = grid.total / double(kGridSpots);
    double max_dev = 0;
    for (int m = 1; m <= 12; ++m) {
        for (int h = 0; h < 24; ++h) {
            max_dev = std::max(max_dev, std::abs(double(grid.at(m, h)) - mean));
        }
    }
    double width = kLeft + 24 * kCell + 20;
    double height = kTop + 12 * kCell + 40;
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(width) +
           "\" height=\"" + detail::num(height) + "\">\n";
    if (!title.empty()) {
        out += "<text x=\"" + detail::num(kLeft) + "\" y=\"16\" font-size=\"13\" class=\"title\">" +
               title + "</text>\n";
    }
    for (int m = 1; m <= 12; ++m) {
        for (int h = 0; h < 24; ++h) {
            double t = max_dev == 0 ? 0.0 : (double(grid.at(m, h)) - mean) / max_dev;
            out += "<rect class=\"cell\" x=\"" + detail::num(kLeft + h * kCell) + "\" y=\"" +
                   detail::num(kTop + (m - 1) * kCell) + "\" width=\"" + detail::num(kCell) +
                   "\" height=\"" + detail::num(kCell) + "\" fill=\"" + detail::diverging_color(t) +
                   "\"/>\n";
        }
    }
    for (int m = 1; m <= 12; ++m) {
        out += "<text x=\"6\" y=\"" + detail::num(kTop + (m - 0.5) * kCell + 4) +
               "\" font-size=\"10\" class=\"month\">" + detail::month_name(m) + "</text>\n";
    }
    for (int h = 0; h < 24; h += 2) {
        out += "<text x=\"" + detail::num(kLeft + (h + 0.5) * kCell - 4) + "\" y=\"" +
               detail::num(kTop - 6) + "\" font-size=\"10\" class=\"hour\">" + std::to_string(h) +
               "</text>\n";
    }
    out += "<text x=\"" + detail::num(kLeft) + "\" y=\"" + detail::num(kTop + 12 * kCell + 22) +
           "\" font-size=\"11\" class=\"legend\">diverging scale centered at mean " +
           detail::num(mean) + "; darkest at deviation " + detail::num(max_dev) + "</text>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace stag::svg
