#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "orchard/distill.hpp"
#include "orchard/toynet.hpp"

namespace orchard {

struct LabeledSample {
    std::vector<double> features;
    std::size_t label = 0;
};

/// Dataset means of the classification distillation terms.
struct EpochLoss {
    double total = 0.0;
    double hard = 0.0;
    double soft = 0.0;

    friend bool operator==(const EpochLoss&, const EpochLoss&) = default;
};

struct BatchObjective {
    EpochLoss loss;
    std::vector<double> gradient;  // ToyNet::parameters() layout
};

struct TrainResult {
    ToyNet net;
    // Entry k is the loss after k full-batch updates; entry 0 is the
    // starting point, so the history has epochs + 1 entries.
    std::vector<EpochLoss> history;
};

/// Samples per reduction block. Block partial sums are combined in block
/// order, which makes results independent of the OpenMP thread count.
inline constexpr std::size_t kGradientBlock = 32;

[[nodiscard]] std::vector<std::vector<double>> batch_logits(const ToyNet& net,
                                                            std::span<const LabeledSample> data);

/// Mean distillation loss over the data and its gradient with respect to
/// the student parameters.
[[nodiscard]] BatchObjective distill_objective(const ToyNet& student,
                                               std::span<const std::vector<double>> teacher_logits,
                                               std::span<const LabeledSample> data,
                                               const DistillConfig& cfg);

/// Mean cross-entropy and its gradient.
[[nodiscard]] BatchObjective supervised_objective(const ToyNet& net,
                                                  std::span<const LabeledSample> data);

/// Full-batch gradient descent of the student on
/// lambda_hard * CE + lambda_soft * T^2 * KL(teacher_T || student_T).
[[nodiscard]] TrainResult train_student(const ToyNet& teacher, ToyNet student,
                                        std::span<const LabeledSample> data,
                                        const DistillConfig& cfg);

/// Full-batch gradient descent on cross-entropy alone.
[[nodiscard]] TrainResult train_supervised(ToyNet net, std::span<const LabeledSample> data,
                                           double learning_rate, std::size_t epochs);

[[nodiscard]] double accuracy(const ToyNet& net, std::span<const LabeledSample> data);

}  // namespace orchard
