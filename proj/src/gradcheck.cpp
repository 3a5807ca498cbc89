#include "orchard/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace orchard {

double gradcheck(const ObjectiveFn& loss_at, std::span<const double> params, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("gradcheck epsilon must be positive");
    }
    const auto analytic = loss_at(params).gradient;
    if (analytic.size() != params.size()) {
        throw std::invalid_argument("objective returned a gradient of the wrong length");
    }
    std::vector<double> probe(params.begin(), params.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + epsilon;
        const double up = loss_at(probe).value;
        probe[i] = saved - epsilon;
        const double down = loss_at(probe).value;
        probe[i] = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double err = std::abs(analytic[i] - numeric) /
                           std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace orchard
