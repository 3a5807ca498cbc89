#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "orchard/geometry.hpp"

namespace orchard {

struct MatchEntry {
    std::size_t detection_index = 0;
    double confidence = 0.0;
    std::optional<std::size_t> gt_index;  // set for true positives only

    friend bool operator==(const MatchEntry&, const MatchEntry&) = default;
};

/// Outcome of greedy one-to-one matching of predictions to ground truth.
/// Both lists are in confidence rank order.
struct MatchResult {
    std::vector<MatchEntry> true_positives;
    std::vector<MatchEntry> false_positives;
    std::size_t false_negative_count = 0;
};

struct PRPoint {
    double recall = 0.0;
    double precision = 0.0;

    friend bool operator==(const PRPoint&, const PRPoint&) = default;
};

using PRCurve = std::vector<PRPoint>;

/// Predictions are visited by descending confidence (ties: lower index
/// first). Each takes the unmatched same-class ground truth with the highest
/// IoU (ties: lower gt index) and becomes a true positive if that IoU is
/// >= iou_threshold.
[[nodiscard]] MatchResult match_detections(std::span<const Detection> preds,
                                           std::span<const GroundTruthBox> gts,
                                           double iou_threshold);

/// One point per prediction prefix in confidence rank order. Recall is 0
/// throughout when total_gt is 0.
[[nodiscard]] PRCurve precision_recall_curve(const MatchResult& match, std::size_t total_gt);

/// All-point interpolated AP: sum of recall steps times the maximum
/// precision at any recall at or beyond the step.
[[nodiscard]] double average_precision(const PRCurve& curve);

/// |predicted - truth| / truth. Throws std::domain_error when truth is 0.
[[nodiscard]] double relative_error(double predicted, double truth);

struct Scene {
    std::string image_id;
    std::vector<Detection> predictions;
    std::vector<GroundTruthBox> ground_truth;
};

struct SceneMetrics {
    std::string image_id;
    std::size_t gt_count = 0;
    std::size_t prediction_count = 0;  // after confidence filtering
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    double precision = 1.0;
    double recall = 0.0;
    double ap = 0.0;
    bool precision_undefined = false;  // no predictions; precision reported as 1
    bool recall_undefined = false;     // no ground truth; recall reported as 0
    PRCurve curve;
};

struct EvalReport {
    std::vector<SceneMetrics> scenes;
    std::size_t total_gt = 0;
    std::size_t total_predictions = 0;
    std::size_t total_true_positives = 0;
    std::size_t total_false_positives = 0;
    std::size_t total_false_negatives = 0;

    // Pooled over all scenes.
    double micro_precision = 1.0;
    double micro_recall = 0.0;
    bool micro_precision_undefined = true;
    bool micro_recall_undefined = true;

    // Unweighted means of the per-scene values.
    double macro_precision = 1.0;
    double macro_recall = 0.0;
    double mean_ap = 0.0;
    bool macro_undefined = true;
};

/// Metrics for one scene after confidence filtering.
[[nodiscard]] SceneMetrics evaluate_scene(const Scene& scene, double conf_threshold,
                                          double iou_threshold);

/// Per-scene evaluation runs in parallel; aggregation is a serial fold in
/// scene order.
[[nodiscard]] EvalReport evaluate_dataset(std::span<const Scene> scenes, double conf_threshold,
                                          double iou_threshold);

/// Fills the aggregate fields of a report from its scene list.
void aggregate_report(EvalReport& report);

}  // namespace orchard
