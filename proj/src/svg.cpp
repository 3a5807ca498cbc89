#include "orchard/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace orchard::svg {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::pair<double, double> padded(double lo, double hi) {
    if (!(hi > lo)) {
        return {lo - 0.5, lo + 0.5};
    }
    return {lo, hi};
}

}  // namespace

std::string LinePlot::render() const {
    constexpr double left = 70, right = 20, top = 40, bottom = 55;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double xl = x_lo, xh = x_hi, yl = y_lo, yh = y_hi;
    if (xl == xh || yl == yh) {
        double dx_lo = std::numeric_limits<double>::infinity(), dx_hi = -dx_lo;
        double dy_lo = dx_lo, dy_hi = -dx_lo;
        for (const auto& s : series) {
            for (const auto& [x, y] : s.points) {
                dx_lo = std::min(dx_lo, x);
                dx_hi = std::max(dx_hi, x);
                dy_lo = std::min(dy_lo, y);
                dy_hi = std::max(dy_hi, y);
            }
        }
        if (!std::isfinite(dx_lo)) {
            dx_lo = dy_lo = 0.0;
            dx_hi = dy_hi = 1.0;
        }
        if (xl == xh) {
            std::tie(xl, xh) = padded(dx_lo, dx_hi);
        }
        if (yl == yh) {
            std::tie(yl, yh) = padded(dy_lo, dy_hi);
        }
    }
    const auto sx = [&](double x) { return left + (x - xl) / (xh - xl) * plot_w; };
    const auto sy = [&](double y) { return top + (1.0 - (y - yl) / (yh - yl)) * plot_h; };

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
        "viewBox=\"0 0 {} {}\">\n",
        width, height, width, height);
    out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"16\">{}</text>\n",
        width / 2.0, escape(title));

    // Axes and ticks.
    out += fmt::format(
        "<g class=\"axes\" stroke=\"black\" fill=\"none\"><rect x=\"{}\" y=\"{}\" width=\"{}\" "
        "height=\"{}\"/></g>\n",
        left, top, plot_w, plot_h);
    out += "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xl + (xh - xl) * i / 5.0;
        const double fy = yl + (yh - yl) * i / 5.0;
        out += fmt::format(
            "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", sx(fx),
            top + plot_h + 16, fx);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n",
                           left - 6, sy(fy) + 4, fy);
    }
    out += "</g>\n";
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\">{}</text>\n",
        left + plot_w / 2.0, height - 12, escape(x_label));
    out += fmt::format(
        "<text transform=\"translate(16 {:.1f}) rotate(-90)\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
        top + plot_h / 2.0, escape(y_label));

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        std::string pts;
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            const auto [x, y] = s.points[i];
            if (s.step && i > 0) {
                pts += fmt::format("{:.2f},{:.2f} ", sx(x), sy(s.points[i - 1].second));
            }
            pts += fmt::format("{:.2f},{:.2f} ", sx(x), sy(y));
        }
        out += fmt::format(
            "<polyline class=\"series\" data-name=\"{}\" fill=\"none\" stroke=\"{}\" "
            "stroke-width=\"1.5\" points=\"{}\"/>\n",
            escape(s.name), s.colour, pts);
        out += fmt::format(
            "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" "
            "fill=\"{}\">{}</text>\n",
            left + plot_w - 150, top + 18 + 16.0 * static_cast<double>(k), s.colour,
            escape(s.name));
    }
    out += "</svg>\n";
    return out;
}

}  // namespace orchard::svg
