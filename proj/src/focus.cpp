#include "orchard/focus.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace orchard {

namespace {

// Row and column parity of channel block k.
constexpr std::size_t kRowParity[4] = {0, 1, 0, 1};
constexpr std::size_t kColParity[4] = {0, 0, 1, 1};

}  // namespace

Tensor3::Tensor3(std::size_t height, std::size_t width, std::size_t channels)
    : height_(height), width_(width), channels_(channels),
      data_(height * width * channels, 0.0) {}

Tensor3::Tensor3(std::size_t height, std::size_t width, std::size_t channels,
                 std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (data_.size() != height * width * channels) {
        throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                    " does not match shape " + std::to_string(height) + "x" +
                                    std::to_string(width) + "x" + std::to_string(channels));
    }
}

Tensor3 focus_slice(const Tensor3& input) {
    if (input.height() % 2 != 0 || input.width() % 2 != 0) {
        throw std::invalid_argument("focus slicing needs even height and width, got " +
                                    std::to_string(input.height()) + "x" +
                                    std::to_string(input.width()));
    }
    const std::size_t c = input.channels();
    Tensor3 out(input.height() / 2, input.width() / 2, 4 * c);
    const auto rows = static_cast<std::ptrdiff_t>(out.height());
#pragma omp parallel for
    for (std::ptrdiff_t yy = 0; yy < rows; ++yy) {
        const auto y = static_cast<std::size_t>(yy);
        for (std::size_t x = 0; x < out.width(); ++x) {
            double* dst = &out.data()[out.offset(y, x, 0)];
            for (std::size_t k = 0; k < 4; ++k) {
                const double* src =
                    &input.data()[input.offset(2 * y + kRowParity[k], 2 * x + kColParity[k], 0)];
                for (std::size_t ch = 0; ch < c; ++ch) {
                    dst[k * c + ch] = src[ch];
                }
            }
        }
    }
    return out;
}

Tensor3 focus_unslice(const Tensor3& sliced) {
    if (sliced.channels() % 4 != 0) {
        throw std::invalid_argument("focus inverse needs a channel count divisible by 4");
    }
    const std::size_t c = sliced.channels() / 4;
    Tensor3 out(sliced.height() * 2, sliced.width() * 2, c);
    const auto rows = static_cast<std::ptrdiff_t>(sliced.height());
#pragma omp parallel for
    for (std::ptrdiff_t yy = 0; yy < rows; ++yy) {
        const auto y = static_cast<std::size_t>(yy);
        for (std::size_t x = 0; x < sliced.width(); ++x) {
            const double* src = &sliced.data()[sliced.offset(y, x, 0)];
            for (std::size_t k = 0; k < 4; ++k) {
                double* dst =
                    &out.data()[out.offset(2 * y + kRowParity[k], 2 * x + kColParity[k], 0)];
                for (std::size_t ch = 0; ch < c; ++ch) {
                    dst[ch] = src[k * c + ch];
                }
            }
        }
    }
    return out;
}

}  // namespace orchard
