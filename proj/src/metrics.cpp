#include "orchard/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace orchard {

namespace {

void require_match_threshold(double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        throw std::invalid_argument("matching IoU threshold must lie in (0, 1]");
    }
}

}  // namespace

MatchResult match_detections(std::span<const Detection> preds,
                             std::span<const GroundTruthBox> gts, double iou_threshold) {
    require_match_threshold(iou_threshold);
    MatchResult result;
    std::vector<bool> taken(gts.size(), false);
    for (const std::size_t i : confidence_order(preds)) {
        const Detection& pred = preds[i];
        std::optional<std::size_t> best;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (taken[g] || gts[g].class_id != pred.class_id) {
                continue;
            }
            const double overlap = iou(pred.box, gts[g].box);
            if (overlap > best_iou) {
                best_iou = overlap;
                best = g;
            }
        }
        if (best && best_iou >= iou_threshold) {
            taken[*best] = true;
            result.true_positives.push_back({i, pred.confidence, best});
        } else {
            result.false_positives.push_back({i, pred.confidence, std::nullopt});
        }
    }
    result.false_negative_count =
        static_cast<std::size_t>(std::count(taken.begin(), taken.end(), false));
    return result;
}

PRCurve precision_recall_curve(const MatchResult& match, std::size_t total_gt) {
    struct Ranked {
        double confidence;
        std::size_t index;
        bool tp;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(match.true_positives.size() + match.false_positives.size());
    for (const auto& e : match.true_positives) {
        ranked.push_back({e.confidence, e.detection_index, true});
    }
    for (const auto& e : match.false_positives) {
        ranked.push_back({e.confidence, e.detection_index, false});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.confidence != b.confidence) {
            return a.confidence > b.confidence;
        }
        return a.index < b.index;
    });

    PRCurve curve;
    curve.reserve(ranked.size());
    std::size_t tp = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        tp += ranked[k].tp ? 1 : 0;
        const double recall =
            total_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(total_gt);
        const double precision = static_cast<double>(tp) / static_cast<double>(k + 1);
        curve.push_back({std::min(recall, 1.0), precision});
    }
    return curve;
}

double average_precision(const PRCurve& curve) {
    if (curve.empty()) {
        return 0.0;
    }
    // Precision envelope from the right.
    std::vector<double> envelope(curve.size());
    double running = 0.0;
    for (std::size_t k = curve.size(); k-- > 0;) {
        running = std::max(running, curve[k].precision);
        envelope[k] = running;
    }
    double ap = 0.0;
    double previous_recall = 0.0;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        const double step = curve[k].recall - previous_recall;
        if (step > 0.0) {
            ap += step * envelope[k];
            previous_recall = curve[k].recall;
        }
    }
    return std::clamp(ap, 0.0, 1.0);
}

double relative_error(double predicted, double truth) {
    if (truth == 0.0) {
        throw std::domain_error("relative error is undefined for a true value of 0");
    }
    return std::abs(predicted - truth) / std::abs(truth);
}

SceneMetrics evaluate_scene(const Scene& scene, double conf_threshold, double iou_threshold) {
    const auto kept = filter_confidence(scene.predictions, conf_threshold);
    const auto match = match_detections(kept, scene.ground_truth, iou_threshold);

    SceneMetrics m;
    m.image_id = scene.image_id;
    m.gt_count = scene.ground_truth.size();
    m.prediction_count = kept.size();
    m.true_positives = match.true_positives.size();
    m.false_positives = match.false_positives.size();
    m.false_negatives = match.false_negative_count;
    m.precision_undefined = kept.empty();
    m.precision = m.precision_undefined
                      ? 1.0
                      : static_cast<double>(m.true_positives) / static_cast<double>(kept.size());
    m.recall_undefined = m.gt_count == 0;
    m.recall = m.recall_undefined ? 0.0
                                  : static_cast<double>(m.true_positives) /
                                        static_cast<double>(m.gt_count);
    m.curve = precision_recall_curve(match, m.gt_count);
    m.ap = average_precision(m.curve);
    return m;
}

EvalReport evaluate_dataset(std::span<const Scene> scenes, double conf_threshold,
                            double iou_threshold) {
    if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
        throw std::invalid_argument("confidence threshold must lie in [0, 1]");
    }
    EvalReport report;
    report.scenes.resize(scenes.size());
    const auto n = static_cast<std::ptrdiff_t>(scenes.size());
    // Exceptions must not escape the parallel region.
    require_match_threshold(iou_threshold);
    for (const auto& scene : scenes) {
        for (const auto& d : scene.predictions) {
            d.box.validate();
        }
        for (const auto& g : scene.ground_truth) {
            g.box.validate();
        }
    }
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        report.scenes[static_cast<std::size_t>(i)] =
            evaluate_scene(scenes[static_cast<std::size_t>(i)], conf_threshold, iou_threshold);
    }
    aggregate_report(report);
    return report;
}

void aggregate_report(EvalReport& report) {
    report.total_gt = 0;
    report.total_predictions = 0;
    report.total_true_positives = 0;
    report.total_false_positives = 0;
    report.total_false_negatives = 0;
    double precision_sum = 0.0;
    double recall_sum = 0.0;
    double ap_sum = 0.0;
    for (const auto& s : report.scenes) {
        report.total_gt += s.gt_count;
        report.total_predictions += s.prediction_count;
        report.total_true_positives += s.true_positives;
        report.total_false_positives += s.false_positives;
        report.total_false_negatives += s.false_negatives;
        precision_sum += s.precision;
        recall_sum += s.recall;
        ap_sum += s.ap;
    }
    const auto tp = static_cast<double>(report.total_true_positives);
    report.micro_precision_undefined = report.total_predictions == 0;
    report.micro_precision = report.micro_precision_undefined
                                 ? 1.0
                                 : tp / static_cast<double>(report.total_predictions);
    report.micro_recall_undefined = report.total_gt == 0;
    report.micro_recall =
        report.micro_recall_undefined ? 0.0 : tp / static_cast<double>(report.total_gt);

    report.macro_undefined = report.scenes.empty();
    if (report.macro_undefined) {
        report.macro_precision = 1.0;
        report.macro_recall = 0.0;
        report.mean_ap = 0.0;
    } else {
        const auto n = static_cast<double>(report.scenes.size());
        report.macro_precision = precision_sum / n;
        report.macro_recall = recall_sum / n;
        report.mean_ap = ap_sum / n;
    }
}

}  // namespace orchard
