#pragma once

#include <span>
#include <string>

namespace carl::svg {

struct Axes {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false; ///< non-positive values are dropped
};

/// Polyline plot; non-finite points break the line.
std::string line_plot(const Axes& axes, std::span<const double> x, std::span<const double> y);

/// One dot per point.
std::string scatter_plot(const Axes& axes, std::span<const double> x, std::span<const double> y);

} // namespace carl::svg
