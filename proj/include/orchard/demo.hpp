#pragma once

#include <cstddef>
#include <vector>

#include "orchard/distill.hpp"
#include "orchard/random.hpp"
#include "orchard/trainer.hpp"

namespace orchard {

/// Two overlapping Gaussian blobs in the plane, labels 0 and 1, interleaved.
[[nodiscard]] std::vector<LabeledSample> make_blobs(std::size_t per_class, double separation,
                                                    double spread, Rng& rng);

/// Fixed settings of the toy teacher/student experiment.
struct DemoSetup {
    std::vector<std::size_t> teacher_layers{2, 32, 32, 2};
    std::vector<std::size_t> student_layers{2, 4, 2};
    std::size_t samples_per_class = 100;
    double separation = 1.5;
    double spread = 1.0;
    double teacher_learning_rate = 0.2;
    std::size_t teacher_epochs = 300;
};

struct DemoReport {
    DistillConfig config;
    DemoSetup setup;
    bool plain_supervised = false;  // lambda_soft == 0
    ToyNet teacher;
    TrainResult teacher_training;
    TrainResult distilled;
    TrainResult student_alone;  // same init, cross-entropy only
    double teacher_accuracy = 0.0;
    double distilled_accuracy = 0.0;
    double student_alone_accuracy = 0.0;
};

/// Generates the data, pre-trains the teacher, then trains the same student
/// initialisation with distillation and without it. Every draw comes from
/// one generator seeded with cfg.seed.
[[nodiscard]] DemoReport run_distill_demo(const DistillConfig& cfg,
                                          const DemoSetup& setup = DemoSetup{});

}  // namespace orchard
