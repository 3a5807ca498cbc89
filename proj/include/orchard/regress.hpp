#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace orchard {

struct DataPoint {
    double x = 0.0;  // detected or tagged count
    double y = 0.0;  // true count or yield
};

/// f(x) = a * x + b
struct LinearModel {
    double a = 0.0;
    double b = 0.0;

    friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

struct GdConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 50000;
    double init_a = 0.0;
    double init_b = 0.0;
    // Run descent on zero-mean, unit-variance x and y and map the result back.
    bool standardize = true;
};

struct GdResult {
    LinearModel model;
    // Sum-of-squares loss in original coordinates; entry 0 is the initial
    // model and entry k the model after k updates.
    std::vector<double> history;
};

struct YieldModel {
    LinearModel count_correction;
    double mean_fruit_weight = 1.0;  // kg per fruit
};

struct YieldEstimate {
    double corrected_count = 0.0;
    double yield_mass = 0.0;
};

/// Raised by fit_gd when the loss exceeds the divergence bound.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t epoch, double loss);
    [[nodiscard]] std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

inline constexpr double kDivergenceBound = 1e12;

[[nodiscard]] constexpr double predict(const LinearModel& m, double x) noexcept {
    return m.a * x + m.b;
}

/// Sum of squared residuals. Throws std::invalid_argument on empty data.
[[nodiscard]] double mse(const LinearModel& m, std::span<const DataPoint> data);

/// Mean of squared residuals.
[[nodiscard]] double mean_squared_error(const LinearModel& m, std::span<const DataPoint> data);

/// Partial derivatives (dJ/da, dJ/db) of the sum-of-squares loss.
[[nodiscard]] std::pair<double, double> mse_gradient(const LinearModel& m,
                                                     std::span<const DataPoint> data);

/// Batch gradient descent with simultaneous updates of slope and intercept.
///
/// With standardization the loss Hessian is 2n*I, so learning rates below
/// 1/n decrease the loss monotonically.
[[nodiscard]] GdResult fit_gd(std::span<const DataPoint> data, const GdConfig& cfg);

/// Closed-form least squares via two-pass mean and covariance.
/// Throws std::invalid_argument for fewer than two points or zero x variance.
[[nodiscard]] LinearModel fit_ols(std::span<const DataPoint> data);

/// Corrected count (clamped at zero) and its mass.
[[nodiscard]] YieldEstimate estimate_yield(double detected_count, const YieldModel& ym);

}  // namespace orchard
