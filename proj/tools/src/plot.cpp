#include "sastirap_cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace sastirap::cli {

namespace {

constexpr int kWidth = 900;
constexpr int kHeight = 640;
constexpr int kLeft = 90;
constexpr int kRight = 150;
constexpr int kTop = 50;
constexpr int kBottom = 70;
const cv::Scalar kBlack(0, 0, 0);
const cv::Scalar kGrey(170, 170, 170);
const cv::Scalar kWhite(255, 255, 255);
constexpr int kFont = cv::FONT_HERSHEY_SIMPLEX;

cv::Scalar bgr(int rgb) { return cv::Scalar(rgb & 0xff, (rgb >> 8) & 0xff, (rgb >> 16) & 0xff); }

std::string tick_label(double v) {
    char buf[32];
    if (std::abs(v) < 1e-12) v = 0.0;
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void text(cv::Mat& img, const std::string& s, cv::Point at, double scale = 0.45, bool center = false) {
    int base = 0;
    const cv::Size sz = cv::getTextSize(s, kFont, scale, 1, &base);
    if (center) at.x -= sz.width / 2;
    cv::putText(img, s, at, kFont, scale, kBlack, 1, cv::LINE_AA);
}

void vertical_text(cv::Mat& img, const std::string& s, cv::Point center) {
    int base = 0;
    const cv::Size sz = cv::getTextSize(s, kFont, 0.5, 1, &base);
    cv::Mat strip(sz.height + base + 4, sz.width + 4, img.type(), kWhite);
    cv::putText(strip, s, {2, sz.height + 1}, kFont, 0.5, kBlack, 1, cv::LINE_AA);
    cv::Mat rotated;
    cv::rotate(strip, rotated, cv::ROTATE_90_COUNTERCLOCKWISE);
    const int x = std::clamp(center.x - rotated.cols / 2, 0, img.cols - rotated.cols);
    const int y = std::clamp(center.y - rotated.rows / 2, 0, img.rows - rotated.rows);
    rotated.copyTo(img(cv::Rect(x, y, rotated.cols, rotated.rows)));
}

struct Frame {
    cv::Rect area;
    double x0, x1, y0, y1;

    double px(double x) const { return area.x + (x - x0) / (x1 - x0) * area.width; }
    double py(double y) const { return area.y + area.height - (y - y0) / (y1 - y0) * area.height; }
};

void draw_axes(cv::Mat& img, const Frame& f, const std::string& title, const std::string& xlabel,
               const std::string& ylabel) {
    cv::rectangle(img, f.area, kBlack, 1);
    for (double t : nice_ticks(f.x0, f.x1)) {
        const int x = static_cast<int>(std::lround(f.px(t)));
        cv::line(img, {x, f.area.br().y}, {x, f.area.br().y + 5}, kBlack);
        text(img, tick_label(t), {x, f.area.br().y + 20}, 0.42, true);
    }
    for (double t : nice_ticks(f.y0, f.y1)) {
        const int y = static_cast<int>(std::lround(f.py(t)));
        cv::line(img, {f.area.x - 5, y}, {f.area.x, y}, kBlack);
        int base = 0;
        const std::string s = tick_label(t);
        const cv::Size sz = cv::getTextSize(s, kFont, 0.42, 1, &base);
        text(img, s, {f.area.x - 9 - sz.width, y + 5}, 0.42);
    }
    text(img, title, {f.area.x + f.area.width / 2, 30}, 0.6, true);
    text(img, xlabel, {f.area.x + f.area.width / 2, f.area.br().y + 50}, 0.5, true);
    vertical_text(img, ylabel, {22, f.area.y + f.area.height / 2});
}

void save(const std::filesystem::path& path, const cv::Mat& img) {
    if (!cv::imwrite(path.string(), img)) throw std::runtime_error("cannot write " + path.string());
}

// Bilinear interpolation on the grid; NaN if any corner is NaN.
double sample(const std::vector<double>& z, int nx, int ny, double gx, double gy) {
    const int ix = std::clamp(static_cast<int>(std::floor(gx)), 0, std::max(nx - 2, 0));
    const int iy = std::clamp(static_cast<int>(std::floor(gy)), 0, std::max(ny - 2, 0));
    const double fx = nx > 1 ? std::clamp(gx - ix, 0.0, 1.0) : 0.0;
    const double fy = ny > 1 ? std::clamp(gy - iy, 0.0, 1.0) : 0.0;
    auto at = [&](int i, int j) { return z[static_cast<std::size_t>(std::min(i, nx - 1) * ny + std::min(j, ny - 1))]; };
    return (1 - fx) * (1 - fy) * at(ix, iy) + fx * (1 - fy) * at(ix + 1, iy) +
           (1 - fx) * fy * at(ix, iy + 1) + fx * fy * at(ix + 1, iy + 1);
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int n) {
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / n;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + 1e-9 * step; t += step) ticks.push_back(t);
    return ticks;
}

void write_line_plot(const std::filesystem::path& path, const LinePlot& plot) {
    if (plot.x.size() < 2) throw std::invalid_argument("line plot needs at least two points");
    cv::Mat img(kHeight, kWidth, CV_8UC3, kWhite);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Series& s : plot.series) {
        for (double v : s.y) {
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (plot.ylim) std::tie(lo, hi) = *plot.ylim;
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi <= lo) hi = lo + 1.0;
    const double pad = plot.ylim ? 0.0 : 0.05 * (hi - lo);
    Frame f{{kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom},
            plot.x.front(), plot.x.back(), lo - pad, hi + pad};
    draw_axes(img, f, plot.title, plot.xlabel, plot.ylabel);

    int legend_y = kTop + 10;
    for (const Series& s : plot.series) {
        std::vector<cv::Point> pts;
        auto flush = [&] {
            if (pts.size() > 1) cv::polylines(img, pts, false, bgr(s.color), 2, cv::LINE_AA);
            pts.clear();
        };
        for (std::size_t i = 0; i < plot.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            pts.emplace_back(static_cast<int>(std::lround(f.px(plot.x[i]))),
                             static_cast<int>(std::lround(f.py(std::clamp(s.y[i], f.y0, f.y1)))));
        }
        flush();
        const int lx = f.area.br().x + 12;
        cv::line(img, {lx, legend_y}, {lx + 22, legend_y}, bgr(s.color), 2, cv::LINE_AA);
        text(img, s.label, {lx + 28, legend_y + 5}, 0.45);
        legend_y += 22;
    }
    save(path, img);
}

void write_heatmap(const std::filesystem::path& path, const Heatmap& map) {
    if (map.nx < 1 || map.ny < 1 || map.z.size() != static_cast<std::size_t>(map.nx * map.ny)) {
        throw std::invalid_argument("heatmap: value count does not match the grid");
    }
    cv::Mat img(kHeight, kWidth, CV_8UC3, kWhite);
    Frame f{{kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom}, map.x0, map.x1, map.y0, map.y1};
    if (!(f.x1 > f.x0)) f.x1 = f.x0 + 1.0;
    if (!(f.y1 > f.y0)) f.y1 = f.y0 + 1.0;

    double lo = 0.0;
    double hi = 1.0;
    if (map.zlim) {
        std::tie(lo, hi) = *map.zlim;
    } else {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (double v : map.z) {
            if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
        }
        if (!std::isfinite(lo)) lo = 0, hi = 1;
        if (hi <= lo) hi = lo + 1e-12;
    }

    const int w = f.area.width;
    const int h = f.area.height;
    cv::Mat level(h, w, CV_8UC1);
    cv::Mat missing(h, w, CV_8UC1, cv::Scalar(0));
    cv::Mat iso(h, w, CV_32SC1, cv::Scalar(std::numeric_limits<int>::min()));
    const bool contours = !map.contour.empty() && !map.contour_levels.empty();
    for (int r = 0; r < h; ++r) {
        const double gy = (1.0 - (r + 0.5) / h) * (map.ny - 1);
        for (int c = 0; c < w; ++c) {
            const double gx = (c + 0.5) / w * (map.nx - 1);
            const double v = sample(map.z, map.nx, map.ny, gx, gy);
            if (!std::isfinite(v)) {
                missing.at<unsigned char>(r, c) = 1;
                level.at<unsigned char>(r, c) = 0;
            } else {
                level.at<unsigned char>(r, c) =
                    static_cast<unsigned char>(std::lround(255.0 * std::clamp((v - lo) / (hi - lo), 0.0, 1.0)));
            }
            if (contours) {
                const double t = sample(map.contour, map.nx, map.ny, gx, gy);
                if (std::isfinite(t)) {
                    iso.at<int>(r, c) = static_cast<int>(
                        std::upper_bound(map.contour_levels.begin(), map.contour_levels.end(), t) -
                        map.contour_levels.begin());
                }
            }
        }
    }
    cv::Mat colored;
    cv::applyColorMap(level, colored, cv::COLORMAP_VIRIDIS);
    colored.setTo(kGrey, missing);
    if (contours) {
        constexpr int kUnset = std::numeric_limits<int>::min();
        for (int r = 0; r + 1 < h; ++r) {
            for (int c = 0; c + 1 < w; ++c) {
                const int a = iso.at<int>(r, c);
                const int b = iso.at<int>(r, c + 1);
                const int d = iso.at<int>(r + 1, c);
                if (a == kUnset) continue;
                if ((b != kUnset && b != a) || (d != kUnset && d != a)) {
                    colored.at<cv::Vec3b>(r, c) = cv::Vec3b(0, 0, 0);
                }
            }
        }
    }
    colored.copyTo(img(f.area));

    // Frame ticks refer to grid values, which sit at cell centres of the raster.
    draw_axes(img, f, map.title, map.xlabel, map.ylabel);

    const cv::Rect bar(f.area.br().x + 25, f.area.y, 20, f.area.height);
    cv::Mat ramp(bar.height, 1, CV_8UC1);
    for (int r = 0; r < bar.height; ++r) {
        ramp.at<unsigned char>(r, 0) = static_cast<unsigned char>(255 - r * 255 / std::max(bar.height - 1, 1));
    }
    cv::Mat ramp_c;
    cv::applyColorMap(ramp, ramp_c, cv::COLORMAP_VIRIDIS);
    cv::resize(ramp_c, ramp_c, bar.size(), 0, 0, cv::INTER_NEAREST);
    ramp_c.copyTo(img(bar));
    cv::rectangle(img, bar, kBlack, 1);
    for (double t : nice_ticks(lo, hi)) {
        const int y = bar.y + bar.height - static_cast<int>(std::lround((t - lo) / (hi - lo) * bar.height));
        cv::line(img, {bar.br().x, y}, {bar.br().x + 4, y}, kBlack);
        text(img, tick_label(t), {bar.br().x + 7, y + 5}, 0.4);
    }
    text(img, map.zlabel, {bar.x + bar.width / 2, bar.y - 10}, 0.45, true);
    save(path, img);
}

}  // namespace sastirap::cli
