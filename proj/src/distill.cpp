#include "orchard/distill.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace orchard {

namespace {

void require_temperature(double temperature) {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw std::domain_error("temperature must be positive, got " +
                                std::to_string(temperature));
    }
}

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

void require_same_shape(const HeadOutput& a, const HeadOutput& b) {
    if (a.cells != b.cells || a.classes != b.classes) {
        throw std::invalid_argument("head outputs differ in shape");
    }
}

void require_same_shape(const HeadOutput& a, const TargetSet& b) {
    if (a.cells != b.cells || a.classes != b.classes) {
        throw std::invalid_argument("head output and target differ in shape");
    }
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> temperature_log_softmax(std::span<const double> logits, double temperature) {
    require_temperature(temperature);
    std::vector<double> out(logits.size());
    if (logits.empty()) {
        return out;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = (logits[i] - top) / temperature;
        sum += std::exp(out[i]);
    }
    const double log_sum = std::log(sum);
    for (double& v : out) {
        v -= log_sum;
    }
    return out;
}

std::vector<double> temperature_softmax(std::span<const double> logits, double temperature) {
    require_temperature(temperature);
    std::vector<double> out(logits.size());
    if (logits.empty()) {
        return out;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp((logits[i] - top) / temperature);
        sum += out[i];
    }
    for (double& v : out) {
        v /= sum;
    }
    return out;
}

double softened_kl(std::span<const double> teacher_logits, std::span<const double> student_logits,
                   double temperature) {
    require_same_length(teacher_logits.size(), student_logits.size(), "softened KL");
    const auto log_p = temperature_log_softmax(teacher_logits, temperature);
    const auto log_q = temperature_log_softmax(student_logits, temperature);
    double kl = 0.0;
    for (std::size_t i = 0; i < log_p.size(); ++i) {
        kl += std::exp(log_p[i]) * (log_p[i] - log_q[i]);
    }
    return std::max(kl, 0.0);
}

double bce_with_logit(double logit, double target) {
    return softplus(logit) - logit * target;
}

double bernoulli_kl_with_logits(double teacher_logit, double student_logit) {
    const double p = sigmoid(teacher_logit);
    // log sigmoid(x) = -softplus(-x), log(1 - sigmoid(x)) = -softplus(x)
    const double kl = p * (softplus(-student_logit) - softplus(-teacher_logit)) +
                      (1.0 - p) * (softplus(student_logit) - softplus(teacher_logit));
    return std::max(kl, 0.0);
}

HeadOutput::HeadOutput(std::size_t cell_count, std::size_t class_count)
    : cells(cell_count), classes(class_count), objectness(cell_count, 0.0),
      class_logits(cell_count * class_count, 0.0), boxes(cell_count * 4, 0.0) {}

void HeadOutput::validate() const {
    if (objectness.size() != cells || class_logits.size() != cells * classes ||
        boxes.size() != cells * 4) {
        throw std::invalid_argument("head output arrays do not match its shape");
    }
    if (!all_finite(objectness) || !all_finite(class_logits) || !all_finite(boxes)) {
        throw std::invalid_argument("head output contains non-finite values");
    }
}

TargetSet::TargetSet(std::size_t cell_count, std::size_t class_count)
    : cells(cell_count), classes(class_count), objectness(cell_count, 0.0),
      class_onehot(cell_count * class_count, 0.0), boxes(cell_count * 4, 0.0) {}

void TargetSet::validate() const {
    if (objectness.size() != cells || class_onehot.size() != cells * classes ||
        boxes.size() != cells * 4) {
        throw std::invalid_argument("target arrays do not match its shape");
    }
    for (std::size_t c = 0; c < cells; ++c) {
        if (objectness[c] != 0.0 && objectness[c] != 1.0) {
            throw std::invalid_argument("target objectness must be 0 or 1");
        }
        if (!positive(c)) {
            continue;
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < classes; ++k) {
            sum += class_onehot[c * classes + k];
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw std::invalid_argument("class target of positive cell " + std::to_string(c) +
                                        " does not sum to 1");
        }
    }
}

void DistillConfig::validate() const {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw std::invalid_argument("temperature must be positive");
    }
    if (!(lambda_hard >= 0.0) || !(lambda_soft >= 0.0)) {
        throw std::invalid_argument("lambda_hard and lambda_soft must be non-negative");
    }
    if (!(lambda_hard + lambda_soft > 0.0)) {
        throw std::invalid_argument("lambda_hard + lambda_soft must be positive");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning_rate must be positive");
    }
}

LossBreakdown yolo_hard_loss(const HeadOutput& pred, const TargetSet& target) {
    require_same_shape(pred, target);
    pred.validate();
    target.validate();

    LossBreakdown loss;
    std::size_t positives = 0;
    for (std::size_t c = 0; c < pred.cells; ++c) {
        loss.objectness += bce_with_logit(pred.objectness[c], target.objectness[c]);
        if (!target.positive(c)) {
            continue;
        }
        ++positives;
        const auto log_q = temperature_log_softmax(pred.class_row(c), 1.0);
        for (std::size_t k = 0; k < pred.classes; ++k) {
            loss.classification -= target.class_onehot[c * pred.classes + k] * log_q[k];
        }
        for (std::size_t k = 0; k < 4; ++k) {
            const double d = pred.boxes[c * 4 + k] - target.boxes[c * 4 + k];
            loss.box += d * d;
        }
    }
    if (pred.cells > 0) {
        loss.objectness /= static_cast<double>(pred.cells);
    }
    if (positives > 0) {
        loss.classification /= static_cast<double>(positives);
        loss.box /= static_cast<double>(4 * positives);
    }
    loss.total = loss.objectness + loss.classification + loss.box;
    return loss;
}

HeadOutput yolo_hard_loss_gradient(const HeadOutput& pred, const TargetSet& target) {
    require_same_shape(pred, target);
    pred.validate();
    target.validate();

    HeadOutput grad(pred.cells, pred.classes);
    std::size_t positives = 0;
    for (std::size_t c = 0; c < pred.cells; ++c) {
        positives += target.positive(c) ? 1 : 0;
    }
    const double per_cell = pred.cells > 0 ? 1.0 / static_cast<double>(pred.cells) : 0.0;
    const double per_positive = positives > 0 ? 1.0 / static_cast<double>(positives) : 0.0;
    for (std::size_t c = 0; c < pred.cells; ++c) {
        grad.objectness[c] = (sigmoid(pred.objectness[c]) - target.objectness[c]) * per_cell;
        if (!target.positive(c)) {
            continue;
        }
        const auto q = temperature_softmax(pred.class_row(c), 1.0);
        for (std::size_t k = 0; k < pred.classes; ++k) {
            const std::size_t i = c * pred.classes + k;
            grad.class_logits[i] = (q[k] - target.class_onehot[i]) * per_positive;
        }
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t i = c * 4 + k;
            grad.boxes[i] = 2.0 * (pred.boxes[i] - target.boxes[i]) * per_positive / 4.0;
        }
    }
    return grad;
}

DistillLoss distillation_loss(const HeadOutput& student, const HeadOutput& teacher,
                              const TargetSet& target, const DistillConfig& cfg) {
    cfg.validate();
    require_same_shape(student, teacher);
    teacher.validate();

    DistillLoss loss;
    loss.hard = yolo_hard_loss(student, target);
    for (std::size_t c = 0; c < student.cells; ++c) {
        loss.soft_class += softened_kl(teacher.class_row(c), student.class_row(c), cfg.temperature);
        loss.soft_objectness +=
            bernoulli_kl_with_logits(teacher.objectness[c], student.objectness[c]);
    }
    if (student.cells > 0) {
        loss.soft_class /= static_cast<double>(student.cells);
        loss.soft_objectness /= static_cast<double>(student.cells);
    }
    const double t2 = cfg.temperature * cfg.temperature;
    loss.soft = t2 * (loss.soft_class + loss.soft_objectness);
    loss.total = cfg.lambda_hard * loss.hard.total + cfg.lambda_soft * loss.soft;
    return loss;
}

HeadOutput distillation_loss_gradient(const HeadOutput& student, const HeadOutput& teacher,
                                      const TargetSet& target, const DistillConfig& cfg) {
    cfg.validate();
    require_same_shape(student, teacher);
    teacher.validate();

    HeadOutput grad = yolo_hard_loss_gradient(student, target);
    for (double& g : grad.objectness) {
        g *= cfg.lambda_hard;
    }
    for (double& g : grad.class_logits) {
        g *= cfg.lambda_hard;
    }
    for (double& g : grad.boxes) {
        g *= cfg.lambda_hard;
    }
    if (student.cells == 0) {
        return grad;
    }
    const double t = cfg.temperature;
    const double scale = cfg.lambda_soft * t * t / static_cast<double>(student.cells);
    for (std::size_t c = 0; c < student.cells; ++c) {
        const auto p = temperature_softmax(teacher.class_row(c), t);
        const auto q = temperature_softmax(student.class_row(c), t);
        for (std::size_t k = 0; k < student.classes; ++k) {
            grad.class_logits[c * student.classes + k] += scale * (q[k] - p[k]) / t;
        }
        grad.objectness[c] +=
            scale * (sigmoid(student.objectness[c]) - sigmoid(teacher.objectness[c]));
    }
    return grad;
}

SampleLoss classification_distill_loss(std::span<const double> student_logits,
                                       std::span<const double> teacher_logits, std::size_t label,
                                       const DistillConfig& cfg) {
    require_same_length(student_logits.size(), teacher_logits.size(), "distillation loss");
    if (label >= student_logits.size()) {
        throw std::invalid_argument("label out of range");
    }
    SampleLoss loss;
    loss.hard = -temperature_log_softmax(student_logits, 1.0)[label];
    loss.soft = cfg.temperature * cfg.temperature *
                softened_kl(teacher_logits, student_logits, cfg.temperature);
    loss.total = cfg.lambda_hard * loss.hard + cfg.lambda_soft * loss.soft;
    return loss;
}

void classification_distill_gradient(std::span<const double> student_logits,
                                     std::span<const double> teacher_logits, std::size_t label,
                                     const DistillConfig& cfg, std::span<double> grad) {
    require_same_length(student_logits.size(), teacher_logits.size(), "distillation gradient");
    require_same_length(student_logits.size(), grad.size(), "distillation gradient");
    const auto p = temperature_softmax(student_logits, 1.0);
    const auto q_student = temperature_softmax(student_logits, cfg.temperature);
    const auto q_teacher = temperature_softmax(teacher_logits, cfg.temperature);
    for (std::size_t k = 0; k < grad.size(); ++k) {
        const double hard = p[k] - (k == label ? 1.0 : 0.0);
        const double soft = cfg.temperature * (q_student[k] - q_teacher[k]);
        grad[k] = cfg.lambda_hard * hard + cfg.lambda_soft * soft;
    }
}

}  // namespace orchard
