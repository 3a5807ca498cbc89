#pragma once

#include <functional>
#include <span>
#include <vector>

namespace orchard {

struct Objective {
    double value = 0.0;
    std::vector<double> gradient;
};

using ObjectiveFn = std::function<Objective(std::span<const double>)>;

/// Compares the analytic gradient returned by loss_at(params) with central
/// differences of its value. Returns the largest per-coordinate
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
[[nodiscard]] double gradcheck(const ObjectiveFn& loss_at, std::span<const double> params,
                               double epsilon);

}  // namespace orchard
