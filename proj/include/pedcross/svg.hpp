#pragma once

#include <string>
#include <utility>
#include <vector>

namespace pedcross {

/// Minimal self-contained SVG line chart: enough for probability curves with
/// a std band and step plots, with no external renderer.
class LineChart {
public:
    LineChart(std::string title, std::string x_label, std::string y_label);

    /// Domains map data to pixels; x may run high-to-low to flip the axis.
    void set_x_domain(double lo, double hi);
    void set_y_domain(double lo, double hi);

    using Points = std::vector<std::pair<double, double>>;

    /// Filled vertical band between (x, lower) and (x, upper).
    void add_band(const Points& lower, const Points& upper, const std::string& fill);
    void add_line(const Points& points, const std::string& stroke);
    /// Horizontal-then-vertical steps between consecutive points.
    void add_step(const Points& points, const std::string& stroke);
    void add_vline(double x, const std::string& stroke);

    std::string render() const;

private:
    double px(double x) const;
    double py(double y) const;

    std::string title_;
    std::string x_label_;
    std::string y_label_;
    double x_lo_ = 0.0, x_hi_ = 1.0, y_lo_ = 0.0, y_hi_ = 1.0;
    std::vector<std::string> shapes_;
};

}  // namespace pedcross
