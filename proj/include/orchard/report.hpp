#pragma once

#include <string>
#include <vector>

#include "orchard/metrics.hpp"

namespace orchard::report {

/// Comma-separated table; numbers use the shortest representation that
/// round-trips.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& row(std::vector<std::string> cells);
    [[nodiscard]] std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

[[nodiscard]] std::string num(double value);
[[nodiscard]] std::string num(std::size_t value);

/// One row per scene, then "micro" and "macro" aggregate rows.
[[nodiscard]] std::string eval_metrics_csv(const EvalReport& report);

/// image_id,rank,recall,precision for every scene.
[[nodiscard]] std::string pr_curves_csv(const EvalReport& report);

}  // namespace orchard::report
