#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace orchard {

/// Softmax of z / T, computed with max subtraction.
/// Throws std::domain_error when T <= 0.
[[nodiscard]] std::vector<double> temperature_softmax(std::span<const double> logits,
                                                      double temperature);

/// log of temperature_softmax, without forming the probabilities first.
[[nodiscard]] std::vector<double> temperature_log_softmax(std::span<const double> logits,
                                                          double temperature);

/// KL(p || q) for p = softmax(teacher / T), q = softmax(student / T).
[[nodiscard]] double softened_kl(std::span<const double> teacher_logits,
                                 std::span<const double> student_logits, double temperature);

/// Binary cross-entropy of sigmoid(logit) against a target probability.
[[nodiscard]] double bce_with_logit(double logit, double target);

/// KL between Bernoulli(sigmoid(teacher)) and Bernoulli(sigmoid(student)).
[[nodiscard]] double bernoulli_kl_with_logits(double teacher_logit, double student_logit);

[[nodiscard]] double sigmoid(double x);

/// Detector head output over a flattened grid of cells.
/// class_logits is cells x classes, boxes is cells x 4, both row-major.
struct HeadOutput {
    std::size_t cells = 0;
    std::size_t classes = 0;
    std::vector<double> objectness;
    std::vector<double> class_logits;
    std::vector<double> boxes;

    HeadOutput() = default;
    HeadOutput(std::size_t cell_count, std::size_t class_count);

    [[nodiscard]] std::span<const double> class_row(std::size_t cell) const {
        return std::span<const double>(class_logits).subspan(cell * classes, classes);
    }
    [[nodiscard]] std::span<const double> box_row(std::size_t cell) const {
        return std::span<const double>(boxes).subspan(cell * 4, 4);
    }
    /// Throws std::invalid_argument when array lengths disagree with the
    /// shape or a value is not finite.
    void validate() const;
};

/// Ground truth per cell: objectness in {0, 1}, a one-hot class row and a
/// box. Class rows and boxes of negative cells are ignored.
struct TargetSet {
    std::size_t cells = 0;
    std::size_t classes = 0;
    std::vector<double> objectness;
    std::vector<double> class_onehot;
    std::vector<double> boxes;

    TargetSet() = default;
    TargetSet(std::size_t cell_count, std::size_t class_count);

    [[nodiscard]] bool positive(std::size_t cell) const { return objectness[cell] > 0.5; }
    void validate() const;
};

struct LossBreakdown {
    double objectness = 0.0;      // mean BCE over all cells
    double classification = 0.0;  // mean CE over positive cells
    double box = 0.0;             // mean squared error over positive-cell coordinates
    double total = 0.0;
};

struct DistillConfig {
    double temperature = 20.0;
    double lambda_hard = 0.5;
    double lambda_soft = 0.5;
    double learning_rate = 0.05;
    std::size_t epochs = 200;
    std::uint64_t seed = 42;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct DistillLoss {
    LossBreakdown hard;
    double soft_class = 0.0;       // mean softened KL over all cells
    double soft_objectness = 0.0;  // mean Bernoulli KL over all cells
    double soft = 0.0;             // T^2 * (soft_class + soft_objectness)
    double total = 0.0;            // lambda_hard * hard.total + lambda_soft * soft
};

/// Sum of objectness BCE, class CE and box MSE. Cells without objects
/// contribute to the objectness term only.
[[nodiscard]] LossBreakdown yolo_hard_loss(const HeadOutput& pred, const TargetSet& target);

/// Gradient of yolo_hard_loss().total with respect to every entry of pred.
[[nodiscard]] HeadOutput yolo_hard_loss_gradient(const HeadOutput& pred, const TargetSet& target);

/// Response-based distillation objective on a detector head.
///
/// The soft objectness term is the BCE against the teacher's sigmoid output
/// minus that target's entropy, so it vanishes when student and teacher agree
/// and has the same gradient as the plain BCE.
[[nodiscard]] DistillLoss distillation_loss(const HeadOutput& student, const HeadOutput& teacher,
                                            const TargetSet& target, const DistillConfig& cfg);

[[nodiscard]] HeadOutput distillation_loss_gradient(const HeadOutput& student,
                                                    const HeadOutput& teacher,
                                                    const TargetSet& target,
                                                    const DistillConfig& cfg);

/// Classification-only objective used by the toy trainer, for one sample.
struct SampleLoss {
    double hard = 0.0;  // cross-entropy against the label at T = 1
    double soft = 0.0;  // T^2 * softened KL
    double total = 0.0;
};

[[nodiscard]] SampleLoss classification_distill_loss(std::span<const double> student_logits,
                                                     std::span<const double> teacher_logits,
                                                     std::size_t label, const DistillConfig& cfg);

/// d total / d student_logits, written into grad.
void classification_distill_gradient(std::span<const double> student_logits,
                                     std::span<const double> teacher_logits, std::size_t label,
                                     const DistillConfig& cfg, std::span<double> grad);

}  // namespace orchard
