#include "orchard/demo.hpp"

#include "orchard/random.hpp"

namespace orchard {

std::vector<LabeledSample> make_blobs(std::size_t per_class, double separation, double spread,
                                      Rng& rng) {
    std::vector<LabeledSample> samples;
    samples.reserve(2 * per_class);
    const double centre = separation / 2.0;
    for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t label = 0; label < 2; ++label) {
            const double sign = label == 0 ? -1.0 : 1.0;
            const double x = rng.normal(sign * centre, spread);
            const double y = rng.normal(sign * centre, spread);
            samples.push_back({{x, y}, label});
        }
    }
    return samples;
}

DemoReport run_distill_demo(const DistillConfig& cfg, const DemoSetup& setup) {
    cfg.validate();
    Rng rng(cfg.seed);
    DemoReport report;
    report.config = cfg;
    report.setup = setup;
    report.plain_supervised = cfg.lambda_soft == 0.0;

    const auto data = make_blobs(setup.samples_per_class, setup.separation, setup.spread, rng);
    const auto teacher_seed = rng.engine()();
    const auto student_seed = rng.engine()();

    report.teacher_training =
        train_supervised(ToyNet::initialized(setup.teacher_layers, teacher_seed), data,
                         setup.teacher_learning_rate, setup.teacher_epochs);
    report.teacher = report.teacher_training.net;

    const ToyNet student = ToyNet::initialized(setup.student_layers, student_seed);
    report.distilled = train_student(report.teacher, student, data, cfg);
    report.student_alone = train_supervised(student, data, cfg.learning_rate, cfg.epochs);

    report.teacher_accuracy = accuracy(report.teacher, data);
    report.distilled_accuracy = accuracy(report.distilled.net, data);
    report.student_alone_accuracy = accuracy(report.student_alone.net, data);
    return report;
}

}  // namespace orchard
