#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace orchard {

/// Axis-aligned box in pixel coordinates. Zero-area boxes are legal.
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    [[nodiscard]] bool valid() const noexcept;
    [[nodiscard]] double width() const noexcept { return x_max - x_min; }
    [[nodiscard]] double height() const noexcept { return y_max - y_min; }
    [[nodiscard]] double area() const noexcept { return width() * height(); }

    /// Throws std::invalid_argument when min > max on either axis or a
    /// coordinate is not finite.
    void validate() const;

    friend bool operator==(const BBox&, const BBox&) = default;
};

struct Detection {
    BBox box;
    int class_id = 0;
    double confidence = 0.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct GroundTruthBox {
    BBox box;
    int class_id = 0;

    friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

/// Intersection over union. Returns 0 when the union is empty.
[[nodiscard]] double iou(const BBox& a, const BBox& b);

/// Detections with confidence >= threshold, input order preserved.
[[nodiscard]] std::vector<Detection> filter_confidence(std::span<const Detection> dets,
                                                       double threshold);

/// Indices of detections ordered by descending confidence, ties by index.
[[nodiscard]] std::vector<std::size_t> confidence_order(std::span<const Detection> dets);

/// Greedy per-class non-maximum suppression.
///
/// Repeatedly keeps the highest-confidence remaining detection and drops every
/// remaining detection of the same class whose IoU with it is >= iou_threshold.
/// Output is sorted by descending confidence; equal confidences keep input order.
[[nodiscard]] std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold);

/// Number of boxes left after confidence filtering followed by NMS.
[[nodiscard]] std::size_t count_fruits(std::span<const Detection> dets, double conf_threshold,
                                       double iou_threshold);

}  // namespace orchard
