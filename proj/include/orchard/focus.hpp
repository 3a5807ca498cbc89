#pragma once

#include <cstddef>
#include <vector>

namespace orchard {

/// Dense H x W x C array, row-major with channels innermost:
/// element (y, x, c) lives at (y * width + x) * channels + c.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t height, std::size_t width, std::size_t channels);
    Tensor3(std::size_t height, std::size_t width, std::size_t channels,
            std::vector<double> data);

    [[nodiscard]] std::size_t height() const noexcept { return height_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] std::size_t channels() const noexcept { return channels_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] std::size_t offset(std::size_t y, std::size_t x, std::size_t c) const noexcept {
        return (y * width_ + x) * channels_ + c;
    }
    [[nodiscard]] double& at(std::size_t y, std::size_t x, std::size_t c) {
        return data_[offset(y, x, c)];
    }
    [[nodiscard]] double at(std::size_t y, std::size_t x, std::size_t c) const {
        return data_[offset(y, x, c)];
    }

    [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }
    [[nodiscard]] std::vector<double>& data() noexcept { return data_; }

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    std::vector<double> data_;
};

/// Space-to-depth slicing: H x W x C becomes H/2 x W/2 x 4C.
///
/// Output channel blocks, each holding the C input channels in order:
///   0: even row, even col   1: odd row, even col
///   2: even row, odd col    3: odd row, odd col
/// Throws std::invalid_argument for odd height or width.
[[nodiscard]] Tensor3 focus_slice(const Tensor3& input);

/// Exact inverse of focus_slice. Requires channels divisible by 4.
[[nodiscard]] Tensor3 focus_unslice(const Tensor3& sliced);

}  // namespace orchard
