#include "orchard/trainer.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace orchard {

namespace {

void check_data(const ToyNet& net, std::span<const LabeledSample> data) {
    if (data.empty()) {
        throw std::invalid_argument("training data is empty");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].features.size() != net.input_size()) {
            throw std::invalid_argument("sample " + std::to_string(i) + " has " +
                                        std::to_string(data[i].features.size()) +
                                        " features, network expects " +
                                        std::to_string(net.input_size()));
        }
        if (data[i].label >= net.output_size()) {
            throw std::invalid_argument("sample " + std::to_string(i) + " label out of range");
        }
    }
}

// Per-sample loss and logit gradient.
template <typename SampleFn>
BatchObjective blocked_objective(const ToyNet& net, std::span<const LabeledSample> data,
                                 SampleFn&& sample_fn) {
    const std::size_t params = net.parameter_count();
    const std::size_t blocks = (data.size() + kGradientBlock - 1) / kGradientBlock;
    std::vector<std::vector<double>> block_grad(blocks, std::vector<double>(params, 0.0));
    std::vector<EpochLoss> block_loss(blocks);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bb = 0; bb < static_cast<std::ptrdiff_t>(blocks); ++bb) {
        const auto b = static_cast<std::size_t>(bb);
        ToyNet::Trace trace;
        std::vector<double> logit_grad(net.output_size());
        const std::size_t end = std::min(data.size(), (b + 1) * kGradientBlock);
        for (std::size_t i = b * kGradientBlock; i < end; ++i) {
            const auto logits = net.forward_trace(data[i].features, trace);
            const EpochLoss l = sample_fn(i, logits, logit_grad);
            block_loss[b].total += l.total;
            block_loss[b].hard += l.hard;
            block_loss[b].soft += l.soft;
            net.backward(trace, logit_grad, block_grad[b]);
        }
    }

    BatchObjective out;
    out.gradient.assign(params, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        out.loss.total += block_loss[b].total;
        out.loss.hard += block_loss[b].hard;
        out.loss.soft += block_loss[b].soft;
        for (std::size_t p = 0; p < params; ++p) {
            out.gradient[p] += block_grad[b][p];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(data.size());
    out.loss.total *= inv_n;
    out.loss.hard *= inv_n;
    out.loss.soft *= inv_n;
    for (double& g : out.gradient) {
        g *= inv_n;
    }
    return out;
}

void descend(ToyNet& net, const std::vector<double>& gradient, double learning_rate) {
    auto params = net.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
        params[p] -= learning_rate * gradient[p];
    }
    net.set_parameters(params);
}

}  // namespace

std::vector<std::vector<double>> batch_logits(const ToyNet& net,
                                              std::span<const LabeledSample> data) {
    for (const auto& s : data) {
        if (s.features.size() != net.input_size()) {
            throw std::invalid_argument("sample feature count does not match network input");
        }
    }
    std::vector<std::vector<double>> logits(data.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(data.size()); ++i) {
        logits[static_cast<std::size_t>(i)] = net.forward(data[static_cast<std::size_t>(i)].features);
    }
    return logits;
}

BatchObjective distill_objective(const ToyNet& student,
                                 std::span<const std::vector<double>> teacher_logits,
                                 std::span<const LabeledSample> data, const DistillConfig& cfg) {
    cfg.validate();
    check_data(student, data);
    if (teacher_logits.size() != data.size()) {
        throw std::invalid_argument("need one teacher logit vector per sample");
    }
    for (const auto& t : teacher_logits) {
        if (t.size() != student.output_size()) {
            throw std::invalid_argument("teacher and student output sizes differ");
        }
    }
    return blocked_objective(student, data,
                             [&](std::size_t i, const std::vector<double>& logits,
                                 std::vector<double>& logit_grad) {
                                 const auto l = classification_distill_loss(
                                     logits, teacher_logits[i], data[i].label, cfg);
                                 classification_distill_gradient(logits, teacher_logits[i],
                                                                 data[i].label, cfg, logit_grad);
                                 return EpochLoss{l.total, l.hard, l.soft};
                             });
}

BatchObjective supervised_objective(const ToyNet& net, std::span<const LabeledSample> data) {
    check_data(net, data);
    return blocked_objective(net, data,
                             [&](std::size_t i, const std::vector<double>& logits,
                                 std::vector<double>& logit_grad) {
                                 const auto p = temperature_softmax(logits, 1.0);
                                 const double ce =
                                     -temperature_log_softmax(logits, 1.0)[data[i].label];
                                 for (std::size_t k = 0; k < p.size(); ++k) {
                                     logit_grad[k] = p[k] - (k == data[i].label ? 1.0 : 0.0);
                                 }
                                 return EpochLoss{ce, ce, 0.0};
                             });
}

TrainResult train_student(const ToyNet& teacher, ToyNet student,
                          std::span<const LabeledSample> data, const DistillConfig& cfg) {
    cfg.validate();
    if (teacher.output_size() != student.output_size() ||
        teacher.input_size() != student.input_size()) {
        throw std::invalid_argument("teacher and student dimensions differ");
    }
    check_data(teacher, data);
    const auto teacher_logits = batch_logits(teacher, data);

    TrainResult result;
    result.history.reserve(cfg.epochs + 1);
    for (std::size_t epoch = 0;; ++epoch) {
        auto objective = distill_objective(student, teacher_logits, data, cfg);
        result.history.push_back(objective.loss);
        if (epoch == cfg.epochs) {
            break;
        }
        descend(student, objective.gradient, cfg.learning_rate);
    }
    result.net = std::move(student);
    return result;
}

TrainResult train_supervised(ToyNet net, std::span<const LabeledSample> data,
                             double learning_rate, std::size_t epochs) {
    if (!(learning_rate > 0.0)) {
        throw std::invalid_argument("learning rate must be positive");
    }
    TrainResult result;
    result.history.reserve(epochs + 1);
    for (std::size_t epoch = 0;; ++epoch) {
        auto objective = supervised_objective(net, data);
        result.history.push_back(objective.loss);
        if (epoch == epochs) {
            break;
        }
        descend(net, objective.gradient, learning_rate);
    }
    result.net = std::move(net);
    return result;
}

double accuracy(const ToyNet& net, std::span<const LabeledSample> data) {
    if (data.empty()) {
        return 0.0;
    }
    const auto logits = batch_logits(net, data);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto best = static_cast<std::size_t>(
            std::max_element(logits[i].begin(), logits[i].end()) - logits[i].begin());
        correct += best == data[i].label ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace orchard
