#include "orchard/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace orchard {

namespace {

void check_unit_interval(double value, const char* what) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1], got " +
                                    std::to_string(value));
    }
}

}  // namespace

bool BBox::valid() const noexcept {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
}

void BBox::validate() const {
    if (!valid()) {
        throw std::invalid_argument("invalid box (" + std::to_string(x_min) + ", " +
                                    std::to_string(y_min) + ", " + std::to_string(x_max) +
                                    ", " + std::to_string(y_max) + ")");
    }
}

double iou(const BBox& a, const BBox& b) {
    a.validate();
    b.validate();
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) {
        return 0.0;
    }
    return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<Detection> filter_confidence(std::span<const Detection> dets, double threshold) {
    check_unit_interval(threshold, "confidence threshold");
    std::vector<Detection> out;
    out.reserve(dets.size());
    std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
                 [threshold](const Detection& d) { return d.confidence >= threshold; });
    return out;
}

std::vector<std::size_t> confidence_order(std::span<const Detection> dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        return dets[lhs].confidence > dets[rhs].confidence;
    });
    return order;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold) {
    check_unit_interval(iou_threshold, "IoU threshold");
    const auto order = confidence_order(dets);
    std::vector<bool> suppressed(dets.size(), false);
    std::vector<Detection> kept;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const std::size_t i = order[rank];
        if (suppressed[i]) {
            continue;
        }
        kept.push_back(dets[i]);
        for (std::size_t later = rank + 1; later < order.size(); ++later) {
            const std::size_t j = order[later];
            if (!suppressed[j] && dets[j].class_id == dets[i].class_id &&
                iou(dets[i].box, dets[j].box) >= iou_threshold) {
                suppressed[j] = true;
            }
        }
    }
    return kept;
}

std::size_t count_fruits(std::span<const Detection> dets, double conf_threshold,
                         double iou_threshold) {
    return nms(filter_confidence(dets, conf_threshold), iou_threshold).size();
}

}  // namespace orchard
