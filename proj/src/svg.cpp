#include "pedcross/svg.hpp"

#include <cmath>
#include <cstdio>

namespace pedcross {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 52.0;
constexpr int kTicks = 5;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

LineChart::LineChart(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void LineChart::set_x_domain(double lo, double hi) {
    x_lo_ = lo;
    x_hi_ = hi == lo ? lo + 1.0 : hi;
}

void LineChart::set_y_domain(double lo, double hi) {
    y_lo_ = lo;
    y_hi_ = hi == lo ? lo + 1.0 : hi;
}

double LineChart::px(double x) const {
    return kLeft + (x - x_lo_) / (x_hi_ - x_lo_) * (kWidth - kLeft - kRight);
}

double LineChart::py(double y) const {
    return kHeight - kBottom - (y - y_lo_) / (y_hi_ - y_lo_) * (kHeight - kTop - kBottom);
}

void LineChart::add_band(const Points& lower, const Points& upper, const std::string& fill) {
    if (lower.empty() || upper.empty()) return;
    std::string d = "M";
    for (const auto& [x, y] : upper) d += " " + fmt(px(x)) + "," + fmt(py(y));
    for (auto it = lower.rbegin(); it != lower.rend(); ++it) {
        d += " " + fmt(px(it->first)) + "," + fmt(py(it->second));
    }
    d += " Z";
    shapes_.push_back("<path d=\"" + d + "\" fill=\"" + fill + "\" stroke=\"none\"/>");
}

void LineChart::add_line(const Points& points, const std::string& stroke) {
    if (points.empty()) return;
    std::string d;
    for (std::size_t i = 0; i < points.size(); ++i) {
        d += (i == 0 ? "M " : "L ") + fmt(px(points[i].first)) + "," + fmt(py(points[i].second)) +
             " ";
    }
    shapes_.push_back("<path d=\"" + d + "\" fill=\"none\" stroke=\"" + stroke +
                      "\" stroke-width=\"2\"/>");
}

void LineChart::add_step(const Points& points, const std::string& stroke) {
    if (points.empty()) return;
    std::string d = "M " + fmt(px(points[0].first)) + "," + fmt(py(points[0].second)) + " ";
    for (std::size_t i = 1; i < points.size(); ++i) {
        d += "L " + fmt(px(points[i].first)) + "," + fmt(py(points[i - 1].second)) + " ";
        d += "L " + fmt(px(points[i].first)) + "," + fmt(py(points[i].second)) + " ";
    }
    shapes_.push_back("<path d=\"" + d + "\" fill=\"none\" stroke=\"" + stroke +
                      "\" stroke-width=\"2\"/>");
}

void LineChart::add_vline(double x, const std::string& stroke) {
    shapes_.push_back("<line x1=\"" + fmt(px(x)) + "\" y1=\"" + fmt(py(y_lo_)) + "\" x2=\"" +
                      fmt(px(x)) + "\" y2=\"" + fmt(py(y_hi_)) + "\" stroke=\"" + stroke +
                      "\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>");
}

std::string LineChart::render() const {
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
           fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes with ticks and grid lines.
    for (int i = 0; i <= kTicks; ++i) {
        const double fx = x_lo_ + (x_hi_ - x_lo_) * i / kTicks;
        const double fy = y_lo_ + (y_hi_ - y_lo_) * i / kTicks;
        out += "<line x1=\"" + fmt(px(fx)) + "\" y1=\"" + fmt(py(y_lo_)) + "\" x2=\"" + fmt(px(fx)) +
               "\" y2=\"" + fmt(py(y_hi_)) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out += "<line x1=\"" + fmt(px(x_lo_)) + "\" y1=\"" + fmt(py(fy)) + "\" x2=\"" +
               fmt(px(x_hi_)) + "\" y2=\"" + fmt(py(fy)) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + fmt(px(fx)) + "\" y=\"" + fmt(kHeight - kBottom + 18.0) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + fmt(fx) + "</text>\n";
        out += "<text x=\"" + fmt(kLeft - 8.0) + "\" y=\"" + fmt(py(fy) + 4.0) +
               "\" font-size=\"11\" text-anchor=\"end\">" + fmt(fy) + "</text>\n";
    }
    out += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" +
           fmt(kWidth - kLeft - kRight) + "\" height=\"" + fmt(kHeight - kTop - kBottom) +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    for (const std::string& shape : shapes_) out += shape + "\n";

    out += "<text x=\"" + fmt(kWidth / 2.0) + "\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">" +
           title_ + "</text>\n";
    out += "<text x=\"" + fmt(kWidth / 2.0) + "\" y=\"" + fmt(kHeight - 12.0) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + x_label_ + "</text>\n";
    out += "<text x=\"16\" y=\"" + fmt(kHeight / 2.0) +
           "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           fmt(kHeight / 2.0) + ")\">" + y_label_ + "</text>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace pedcross
