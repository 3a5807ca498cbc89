#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace orchard {

/// Fully connected layer; weights are outputs x inputs, row-major.
struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Small multilayer perceptron: ReLU on hidden layers, identity on the output.
class ToyNet {
public:
    /// Per-layer inputs and pre-activations recorded by forward_trace().
    struct Trace {
        std::vector<std::vector<double>> inputs;
        std::vector<std::vector<double>> pre_activations;
    };

    ToyNet() = default;
    explicit ToyNet(std::vector<DenseLayer> layers, std::uint64_t init_seed = 0);

    /// Uniform weights and biases in [-r, r], r = 1/sqrt(fan_in), drawn from
    /// a seeded mt19937_64 in layer order (weights before biases).
    [[nodiscard]] static ToyNet initialized(std::span<const std::size_t> layer_sizes,
                                            std::uint64_t seed);

    [[nodiscard]] std::size_t input_size() const noexcept;
    [[nodiscard]] std::size_t output_size() const noexcept;
    [[nodiscard]] std::size_t parameter_count() const noexcept;
    [[nodiscard]] std::uint64_t init_seed() const noexcept { return init_seed_; }
    [[nodiscard]] const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    [[nodiscard]] std::vector<std::size_t> layer_sizes() const;

    /// Flattened parameters: per layer, weights then bias.
    [[nodiscard]] std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);

    /// Throws std::invalid_argument on an input of the wrong length.
    [[nodiscard]] std::vector<double> forward(std::span<const double> input) const;
    [[nodiscard]] std::vector<double> forward_trace(std::span<const double> input,
                                                    Trace& trace) const;

    /// Adds d(loss)/d(parameters) to grad given d(loss)/d(logits) for the
    /// traced input. grad uses the parameters() layout.
    void backward(const Trace& trace, std::span<const double> logit_grad,
                  std::span<double> grad) const;

    friend bool operator==(const ToyNet&, const ToyNet&) = default;

private:
    void check_shapes() const;

    std::vector<DenseLayer> layers_;
    std::uint64_t init_seed_ = 0;
};

}  // namespace orchard
