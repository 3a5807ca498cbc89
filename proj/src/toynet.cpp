#include "orchard/toynet.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "orchard/random.hpp"

namespace orchard {

ToyNet::ToyNet(std::vector<DenseLayer> layers, std::uint64_t init_seed)
    : layers_(std::move(layers)), init_seed_(init_seed) {
    check_shapes();
}

void ToyNet::check_shapes() const {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.inputs == 0 || layer.outputs == 0 ||
            layer.weights.size() != layer.inputs * layer.outputs ||
            layer.bias.size() != layer.outputs) {
            throw std::invalid_argument("layer " + std::to_string(l) + " has inconsistent shape");
        }
        if (l > 0 && layers_[l - 1].outputs != layer.inputs) {
            throw std::invalid_argument("layer " + std::to_string(l) +
                                        " input size does not match previous layer");
        }
    }
}

ToyNet ToyNet::initialized(std::span<const std::size_t> layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) {
        throw std::invalid_argument("a network needs at least an input and an output size");
    }
    Rng rng(seed);
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        DenseLayer layer;
        layer.inputs = layer_sizes[l];
        layer.outputs = layer_sizes[l + 1];
        const double r = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, layer.inputs)));
        layer.weights.resize(layer.inputs * layer.outputs);
        layer.bias.resize(layer.outputs);
        for (double& w : layer.weights) {
            w = rng.uniform(-r, r);
        }
        for (double& b : layer.bias) {
            b = rng.uniform(-r, r);
        }
        layers.push_back(std::move(layer));
    }
    return ToyNet(std::move(layers), seed);
}

std::size_t ToyNet::input_size() const noexcept {
    return layers_.empty() ? 0 : layers_.front().inputs;
}

std::size_t ToyNet::output_size() const noexcept {
    return layers_.empty() ? 0 : layers_.back().outputs;
}

std::size_t ToyNet::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& layer : layers_) {
        n += layer.weights.size() + layer.bias.size();
    }
    return n;
}

std::vector<std::size_t> ToyNet::layer_sizes() const {
    std::vector<std::size_t> sizes;
    if (layers_.empty()) {
        return sizes;
    }
    sizes.push_back(layers_.front().inputs);
    for (const auto& layer : layers_) {
        sizes.push_back(layer.outputs);
    }
    return sizes;
}

std::vector<double> ToyNet::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& layer : layers_) {
        flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
        flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    }
    return flat;
}

void ToyNet::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw std::invalid_argument("parameter vector has length " + std::to_string(flat.size()) +
                                    ", expected " + std::to_string(parameter_count()));
    }
    std::size_t pos = 0;
    for (auto& layer : layers_) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), layer.weights.size(),
                    layer.weights.begin());
        pos += layer.weights.size();
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), layer.bias.size(),
                    layer.bias.begin());
        pos += layer.bias.size();
    }
}

std::vector<double> ToyNet::forward(std::span<const double> input) const {
    Trace trace;
    return forward_trace(input, trace);
}

std::vector<double> ToyNet::forward_trace(std::span<const double> input, Trace& trace) const {
    if (input.size() != input_size()) {
        throw std::invalid_argument("network expects " + std::to_string(input_size()) +
                                    " inputs, got " + std::to_string(input.size()));
    }
    trace.inputs.resize(layers_.size());
    trace.pre_activations.resize(layers_.size());
    std::vector<double> activation(input.begin(), input.end());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        trace.inputs[l] = activation;
        auto& pre = trace.pre_activations[l];
        pre.assign(layer.outputs, 0.0);
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            double sum = layer.bias[o];
            const double* row = &layer.weights[o * layer.inputs];
            for (std::size_t i = 0; i < layer.inputs; ++i) {
                sum += row[i] * activation[i];
            }
            pre[o] = sum;
        }
        activation = pre;
        if (l + 1 < layers_.size()) {
            for (double& a : activation) {
                a = std::max(a, 0.0);
            }
        }
    }
    return activation;
}

void ToyNet::backward(const Trace& trace, std::span<const double> logit_grad,
                      std::span<double> grad) const {
    if (logit_grad.size() != output_size() || grad.size() != parameter_count()) {
        throw std::invalid_argument("backward called with mismatched gradient buffers");
    }
    // Offsets of each layer's block in the flat parameter vector.
    std::vector<std::size_t> offsets(layers_.size());
    std::size_t pos = 0;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        offsets[l] = pos;
        pos += layers_[l].weights.size() + layers_[l].bias.size();
    }

    std::vector<double> delta(logit_grad.begin(), logit_grad.end());
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const auto& layer = layers_[l];
        const auto& in = trace.inputs[l];
        double* gw = &grad[offsets[l]];
        double* gb = gw + layer.weights.size();
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            gb[o] += delta[o];
            for (std::size_t i = 0; i < layer.inputs; ++i) {
                gw[o * layer.inputs + i] += delta[o] * in[i];
            }
        }
        if (l == 0) {
            break;
        }
        std::vector<double> previous(layer.inputs, 0.0);
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            const double* row = &layer.weights[o * layer.inputs];
            for (std::size_t i = 0; i < layer.inputs; ++i) {
                previous[i] += row[i] * delta[o];
            }
        }
        // ReLU derivative of the previous layer, taken as 0 at the kink.
        const auto& pre = trace.pre_activations[l - 1];
        for (std::size_t i = 0; i < layer.inputs; ++i) {
            if (!(pre[i] > 0.0)) {
                previous[i] = 0.0;
            }
        }
        delta = std::move(previous);
    }
}

}  // namespace orchard
