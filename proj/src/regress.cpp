#include "orchard/regress.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace orchard {

namespace {

void require_data(std::span<const DataPoint> data) {
    if (data.empty()) {
        throw std::invalid_argument("regression requires at least one data point");
    }
}

struct Moments {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double sxx = 0.0;  // sum of squared deviations
    double syy = 0.0;
    double sxy = 0.0;
};

Moments moments(std::span<const DataPoint> data) {
    Moments m;
    for (const auto& p : data) {
        m.mean_x += p.x;
        m.mean_y += p.y;
    }
    const auto n = static_cast<double>(data.size());
    m.mean_x /= n;
    m.mean_y /= n;
    for (const auto& p : data) {
        const double dx = p.x - m.mean_x;
        const double dy = p.y - m.mean_y;
        m.sxx += dx * dx;
        m.syy += dy * dy;
        m.sxy += dx * dy;
    }
    return m;
}

}  // namespace

DivergenceError::DivergenceError(std::size_t epoch, double loss)
    : std::runtime_error("gradient descent diverged at epoch " + std::to_string(epoch) +
                         " (loss " + std::to_string(loss) + ")"),
      epoch_(epoch) {}

double mse(const LinearModel& m, std::span<const DataPoint> data) {
    require_data(data);
    double sum = 0.0;
    for (const auto& p : data) {
        const double r = predict(m, p.x) - p.y;
        sum += r * r;
    }
    return sum;
}

double mean_squared_error(const LinearModel& m, std::span<const DataPoint> data) {
    return mse(m, data) / static_cast<double>(data.size());
}

std::pair<double, double> mse_gradient(const LinearModel& m, std::span<const DataPoint> data) {
    double ga = 0.0;
    double gb = 0.0;
    for (const auto& p : data) {
        const double r = predict(m, p.x) - p.y;
        ga += 2.0 * r * p.x;
        gb += 2.0 * r;
    }
    return {ga, gb};
}

GdResult fit_gd(std::span<const DataPoint> data, const GdConfig& cfg) {
    require_data(data);
    if (!(cfg.learning_rate > 0.0)) {
        throw std::invalid_argument("learning rate must be positive");
    }

    // Affine change of variables x = mx + sx*u, y = my + sy*v.
    double mx = 0.0, my = 0.0, sx = 1.0, sy = 1.0;
    if (cfg.standardize) {
        const auto mom = moments(data);
        const auto n = static_cast<double>(data.size());
        mx = mom.mean_x;
        my = mom.mean_y;
        sx = mom.sxx > 0.0 ? std::sqrt(mom.sxx / n) : 1.0;
        sy = mom.syy > 0.0 ? std::sqrt(mom.syy / n) : 1.0;
    }
    std::vector<DataPoint> scaled;
    scaled.reserve(data.size());
    for (const auto& p : data) {
        scaled.push_back({(p.x - mx) / sx, (p.y - my) / sy});
    }

    const auto to_scaled = [&](const LinearModel& m) {
        return LinearModel{m.a * sx / sy, (m.a * mx + m.b - my) / sy};
    };
    const auto to_original = [&](const LinearModel& s) {
        const double a = s.a * sy / sx;
        return LinearModel{a, my + sy * s.b - a * mx};
    };

    // Loss in original coordinates is sy^2 times the scaled loss.
    const double loss_scale = sy * sy;
    LinearModel theta = to_scaled({cfg.init_a, cfg.init_b});
    GdResult result;
    result.history.reserve(cfg.epochs + 1);
    result.history.push_back(loss_scale * mse(theta, scaled));

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto [ga, gb] = mse_gradient(theta, scaled);
        theta.a -= cfg.learning_rate * ga;
        theta.b -= cfg.learning_rate * gb;
        const double loss = loss_scale * mse(theta, scaled);
        if (!(loss <= kDivergenceBound)) {
            throw DivergenceError(epoch, loss);
        }
        result.history.push_back(loss);
    }
    result.model = cfg.epochs == 0 ? LinearModel{cfg.init_a, cfg.init_b} : to_original(theta);
    return result;
}

LinearModel fit_ols(std::span<const DataPoint> data) {
    if (data.size() < 2) {
        throw std::invalid_argument("least squares requires at least two points");
    }
    const auto m = moments(data);
    if (!(m.sxx > 0.0)) {
        throw std::invalid_argument("zero variance in x");
    }
    const double a = m.sxy / m.sxx;
    return {a, m.mean_y - a * m.mean_x};
}

YieldEstimate estimate_yield(double detected_count, const YieldModel& ym) {
    if (detected_count < 0.0) {
        throw std::invalid_argument("detected count must be non-negative");
    }
    if (!(ym.mean_fruit_weight > 0.0)) {
        throw std::invalid_argument("mean fruit weight must be positive");
    }
    const double corrected = std::max(0.0, predict(ym.count_correction, detected_count));
    return {corrected, corrected * ym.mean_fruit_weight};
}

}  // namespace orchard
