#pragma once

// Static PNG figures. Convenience only: every plotted number is also in a CSV.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sastirap::cli {

struct Series {
    std::string label;
    std::vector<double> y;
    int color;  // 0xRRGGBB
};

struct LinePlot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<double> x;
    std::vector<Series> series;
    std::optional<std::pair<double, double>> ylim;
};

void write_line_plot(const std::filesystem::path& path, const LinePlot& plot);

// Values on an nx-by-ny grid, index = ix * ny + iy (first axis slowest).
// NaN cells render grey. `contour` (same layout) is drawn as black iso-lines.
struct Heatmap {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::string zlabel;
    int nx = 0;
    int ny = 0;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    std::vector<double> z;
    std::optional<std::pair<double, double>> zlim;
    std::vector<double> contour;
    std::vector<double> contour_levels;
};

void write_heatmap(const std::filesystem::path& path, const Heatmap& map);

// Roughly n evenly spaced round numbers covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int n = 5);

}  // namespace sastirap::cli
