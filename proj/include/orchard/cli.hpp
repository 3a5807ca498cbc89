#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "orchard/distill.hpp"
#include "orchard/regress.hpp"

namespace orchard::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsageError = 2;

/// Settings shared by all subcommands. Precedence: defaults, then the
/// --config file, then command-line flags.
struct RunConfig {
    double conf_threshold = 0.15;
    double iou_threshold = 0.5;
    std::filesystem::path out_dir = "out";
    GdConfig regression{};
    DistillConfig distill{};
    std::optional<double> mean_fruit_weight;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

/// Reads a JSON config. Distillation fields may sit at the top level or
/// under "distill".
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

/// Reads the log level from ORCHARD_YIELD_LOG (trace, debug, info, warn,
/// error, off; default warn).
void configure_logging();

/// Entry point behind the orchard_yield executable. args excludes the
/// program name. Returns the process exit code.
int run(const std::vector<std::string>& args);

}  // namespace orchard::cli
