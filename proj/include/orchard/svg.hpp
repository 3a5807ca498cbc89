#pragma once

#include <string>
#include <utility>
#include <vector>

namespace orchard::svg {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
    std::string colour = "#1f77b4";
    bool step = false;  // draw as a staircase
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    // Fixed axis ranges; computed from the data when lo == hi.
    double x_lo = 0.0, x_hi = 0.0;
    double y_lo = 0.0, y_hi = 0.0;
    int width = 640;
    int height = 480;

    [[nodiscard]] std::string render() const;
};

}  // namespace orchard::svg
