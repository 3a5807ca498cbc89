#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "orchard/demo.hpp"
#include "orchard/geometry.hpp"
#include "orchard/metrics.hpp"
#include "orchard/regress.hpp"

namespace orchard::io {

inline constexpr int kSchemaVersion = 1;

/// Bad input data: unreadable files, malformed lines, invalid values.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One image: ground truth, detections and the image size in pixels.
struct SceneFile {
    std::string image_id;
    std::string tree_id;  // defaults to image_id
    double width = 0.0;
    double height = 0.0;
    std::vector<GroundTruthBox> ground_truth;
    std::vector<Detection> detections;
};

struct TreeRecord {
    std::string tree_id;
    double detected_count = 0.0;
    std::optional<double> ground_truth_count;
    std::optional<double> yield_mass;
};

struct ModelFile {
    LinearModel model;
    std::optional<double> mean_fruit_weight;
};

/// Parses "class cx cy w h" lines (centre and size normalised to [0, 1])
/// into pixel boxes. Blank lines and lines starting with '#' are skipped.
/// source names the input in diagnostics.
[[nodiscard]] std::vector<GroundTruthBox> parse_annotation_text(const std::string& text,
                                                                double width, double height,
                                                                const std::string& source);

[[nodiscard]] std::vector<GroundTruthBox> parse_annotations(const std::filesystem::path& path,
                                                            double width, double height);

/// Inverse of parse_annotation_text, with shortest round-trip numbers.
[[nodiscard]] std::string render_annotations(std::span<const GroundTruthBox> boxes, double width,
                                             double height);

/// Reads a scene JSON document. A relative "annotations" path resolves
/// against the directory of the scene file. Boxes outside the image only
/// produce a warning.
[[nodiscard]] SceneFile load_scene(const std::filesystem::path& path);

/// tree_no,estimated,ground_truth[,yield_kg] with a header row. Empty
/// ground_truth and yield_kg cells are allowed.
[[nodiscard]] std::vector<TreeRecord> parse_tree_records(const std::string& text,
                                                         const std::string& source);
[[nodiscard]] std::vector<TreeRecord> load_tree_records(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const ModelFile& model,
                const std::string& extra_json = "{}");
[[nodiscard]] ModelFile load_model(const std::filesystem::path& path);

/// Versioned JSON with configuration, loss histories and weights.
[[nodiscard]] std::string demo_state_json(const DemoReport& report);
[[nodiscard]] std::vector<EpochLoss> history_from_json(const std::string& text);

[[nodiscard]] std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace orchard::io
