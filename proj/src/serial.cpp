#include "orchard/serial.hpp"

#include <stdexcept>

namespace orchard::serial {

Tensor3 focus_slice(const Tensor3& input) {
    if (input.height() % 2 != 0 || input.width() % 2 != 0) {
        throw std::invalid_argument("focus slicing needs even height and width");
    }
    const std::size_t c = input.channels();
    Tensor3 out(input.height() / 2, input.width() / 2, 4 * c);
    for (std::size_t y = 0; y < out.height(); ++y) {
        for (std::size_t x = 0; x < out.width(); ++x) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                out.at(y, x, ch) = input.at(2 * y, 2 * x, ch);
                out.at(y, x, c + ch) = input.at(2 * y + 1, 2 * x, ch);
                out.at(y, x, 2 * c + ch) = input.at(2 * y, 2 * x + 1, ch);
                out.at(y, x, 3 * c + ch) = input.at(2 * y + 1, 2 * x + 1, ch);
            }
        }
    }
    return out;
}

EvalReport evaluate_dataset(std::span<const Scene> scenes, double conf_threshold,
                            double iou_threshold) {
    EvalReport report;
    for (const auto& scene : scenes) {
        report.scenes.push_back(evaluate_scene(scene, conf_threshold, iou_threshold));
    }
    aggregate_report(report);
    return report;
}

BatchObjective distill_objective(const ToyNet& student,
                                 std::span<const std::vector<double>> teacher_logits,
                                 std::span<const LabeledSample> data, const DistillConfig& cfg) {
    cfg.validate();
    if (data.empty() || teacher_logits.size() != data.size()) {
        throw std::invalid_argument("need one teacher logit vector per sample");
    }
    BatchObjective out;
    out.gradient.assign(student.parameter_count(), 0.0);
    ToyNet::Trace trace;
    std::vector<double> logit_grad(student.output_size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto logits = student.forward_trace(data[i].features, trace);
        const auto l = classification_distill_loss(logits, teacher_logits[i], data[i].label, cfg);
        classification_distill_gradient(logits, teacher_logits[i], data[i].label, cfg,
                                        logit_grad);
        out.loss.total += l.total;
        out.loss.hard += l.hard;
        out.loss.soft += l.soft;
        student.backward(trace, logit_grad, out.gradient);
    }
    const double n = static_cast<double>(data.size());
    out.loss.total /= n;
    out.loss.hard /= n;
    out.loss.soft /= n;
    for (double& g : out.gradient) {
        g /= n;
    }
    return out;
}

}  // namespace orchard::serial
