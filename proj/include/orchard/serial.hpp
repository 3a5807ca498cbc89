#pragma once

// Single-threaded reference versions of the OpenMP kernels. They follow the
// plainest loop order and are kept for tests and benchmarks.

#include <span>
#include <vector>

#include "orchard/distill.hpp"
#include "orchard/focus.hpp"
#include "orchard/metrics.hpp"
#include "orchard/trainer.hpp"

namespace orchard::serial {

[[nodiscard]] Tensor3 focus_slice(const Tensor3& input);

[[nodiscard]] EvalReport evaluate_dataset(std::span<const Scene> scenes, double conf_threshold,
                                          double iou_threshold);

/// Accumulates sample by sample, so sums differ from the blocked kernel in
/// the last bits only.
[[nodiscard]] BatchObjective distill_objective(const ToyNet& student,
                                               std::span<const std::vector<double>> teacher_logits,
                                               std::span<const LabeledSample> data,
                                               const DistillConfig& cfg);

}  // namespace orchard::serial
