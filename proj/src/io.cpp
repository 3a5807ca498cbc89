#include "orchard/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"

namespace orchard::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what) {
    throw DataError(fmt::format("{}:{}: {}", source, line, what));
}

double parse_number(const std::string& token, const std::string& source, std::size_t line,
                    const char* field) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        fail_at(source, line, fmt::format("{} '{}' is not a number", field, token));
    }
    if (used != token.size() || !std::isfinite(value)) {
        fail_at(source, line, fmt::format("{} '{}' is not a finite number", field, token));
    }
    return value;
}

bool inside_image(const BBox& box, double width, double height) {
    constexpr double slack = 1e-9;
    return box.x_min >= -slack && box.y_min >= -slack && box.x_max <= width + slack &&
           box.y_max <= height + slack;
}

BBox box_from_json(const json& j, const std::string& source) {
    if (!j.is_array() || j.size() != 4) {
        throw DataError(source + ": box must be [x_min, y_min, x_max, y_max]");
    }
    BBox box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!box.valid()) {
        throw DataError(fmt::format("{}: invalid box [{}, {}, {}, {}]", source, box.x_min,
                                    box.y_min, box.x_max, box.y_max));
    }
    return box;
}

json layers_json(const ToyNet& net) {
    json layers = json::array();
    for (const auto& layer : net.layers()) {
        layers.push_back({{"inputs", layer.inputs},
                          {"outputs", layer.outputs},
                          {"weights", layer.weights},
                          {"bias", layer.bias}});
    }
    return {{"layer_sizes", net.layer_sizes()}, {"init_seed", net.init_seed()}, {"layers", layers}};
}

json history_json(const std::vector<EpochLoss>& history) {
    json total = json::array();
    json hard = json::array();
    json soft = json::array();
    for (const auto& h : history) {
        total.push_back(h.total);
        hard.push_back(h.hard);
        soft.push_back(h.soft);
    }
    return {{"total", total}, {"hard", hard}, {"soft", soft}};
}

}  // namespace

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << text;
}

std::vector<GroundTruthBox> parse_annotation_text(const std::string& text, double width,
                                                  double height, const std::string& source) {
    if (!(width > 0.0) || !(height > 0.0)) {
        throw DataError(source + ": image width and height must be positive");
    }
    std::vector<GroundTruthBox> boxes;
    std::istringstream lines(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(lines, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        for (std::string t; fields >> t;) {
            tokens.push_back(t);
        }
        if (tokens.size() != 5) {
            fail_at(source, line_no,
                    fmt::format("expected 5 fields 'class cx cy w h', found {}", tokens.size()));
        }
        const double cls = parse_number(tokens[0], source, line_no, "class");
        if (cls < 0.0 || cls != std::floor(cls)) {
            fail_at(source, line_no, "class must be a non-negative integer");
        }
        static constexpr const char* names[] = {"cx", "cy", "w", "h"};
        double v[4];
        for (int k = 0; k < 4; ++k) {
            v[k] = parse_number(tokens[static_cast<std::size_t>(k + 1)], source, line_no, names[k]);
            if (v[k] < 0.0 || v[k] > 1.0) {
                fail_at(source, line_no, fmt::format("{} = {} is outside [0, 1]", names[k], v[k]));
            }
        }
        GroundTruthBox gt;
        gt.class_id = static_cast<int>(cls);
        gt.box = {(v[0] - v[2] / 2.0) * width, (v[1] - v[3] / 2.0) * height,
                  (v[0] + v[2] / 2.0) * width, (v[1] + v[3] / 2.0) * height};
        if (!inside_image(gt.box, width, height)) {
            spdlog::warn("{}:{}: box extends outside the {}x{} image", source, line_no, width,
                         height);
        }
        boxes.push_back(gt);
    }
    return boxes;
}

std::vector<GroundTruthBox> parse_annotations(const fs::path& path, double width, double height) {
    return parse_annotation_text(read_text(path), width, height, path.string());
}

std::string render_annotations(std::span<const GroundTruthBox> boxes, double width,
                               double height) {
    std::string out;
    for (const auto& gt : boxes) {
        const auto& b = gt.box;
        out += fmt::format("{} {} {} {} {}\n", gt.class_id, (b.x_min + b.x_max) / 2.0 / width,
                           (b.y_min + b.y_max) / 2.0 / height, b.width() / width,
                           b.height() / height);
    }
    return out;
}

SceneFile load_scene(const fs::path& path) {
    const std::string source = path.string();
    json doc;
    try {
        doc = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw DataError(source + ": " + e.what());
    }
    SceneFile scene;
    try {
        if (doc.contains("schema_version") && doc["schema_version"].get<int>() != kSchemaVersion) {
            throw DataError(source + ": unsupported schema_version");
        }
        scene.image_id = doc.value("image_id", path.stem().string());
        scene.tree_id = doc.value("tree_id", scene.image_id);
        scene.width = doc.at("width").get<double>();
        scene.height = doc.at("height").get<double>();
        if (!(scene.width > 0.0) || !(scene.height > 0.0)) {
            throw DataError(source + ": width and height must be positive");
        }

        if (doc.contains("annotations")) {
            fs::path ann = doc["annotations"].get<std::string>();
            if (ann.is_relative()) {
                ann = path.parent_path() / ann;
            }
            scene.ground_truth = parse_annotations(ann, scene.width, scene.height);
        }
        for (const auto& g : doc.value("ground_truth", json::array())) {
            GroundTruthBox gt;
            gt.class_id = g.value("class_id", 0);
            gt.box = box_from_json(g.at("box"), source);
            scene.ground_truth.push_back(gt);
        }
        for (const auto& d : doc.value("detections", json::array())) {
            Detection det;
            det.class_id = d.value("class_id", 0);
            det.confidence = d.at("confidence").get<double>();
            det.box = box_from_json(d.at("box"), source);
            if (det.class_id < 0) {
                throw DataError(source + ": negative class_id");
            }
            if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
                throw DataError(fmt::format("{}: confidence {} outside [0, 1]", source,
                                            det.confidence));
            }
            scene.detections.push_back(det);
        }
    } catch (const json::exception& e) {
        throw DataError(source + ": " + e.what());
    }
    for (const auto& g : scene.ground_truth) {
        if (!inside_image(g.box, scene.width, scene.height)) {
            spdlog::warn("{}: ground-truth box outside the image", source);
        }
    }
    for (const auto& d : scene.detections) {
        if (!inside_image(d.box, scene.width, scene.height)) {
            spdlog::warn("{}: detection box outside the image", source);
        }
    }
    return scene;
}

std::vector<TreeRecord> parse_tree_records(const std::string& text, const std::string& source) {
    std::istringstream lines(text);
    std::string raw;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    std::vector<TreeRecord> records;
    while (std::getline(lines, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            cells.push_back(trim(cell));
        }
        if (line.back() == ',') {
            cells.emplace_back();
        }
        if (header.empty()) {
            header = cells;
            if (header.size() < 3 || header[0] != "tree_no" || header[1] != "estimated" ||
                header[2] != "ground_truth" || (header.size() > 3 && header[3] != "yield_kg") ||
                header.size() > 4) {
                fail_at(source, line_no,
                        "header must be tree_no,estimated,ground_truth[,yield_kg]");
            }
            continue;
        }
        if (cells.size() != header.size()) {
            fail_at(source, line_no,
                    fmt::format("expected {} columns, found {}", header.size(), cells.size()));
        }
        TreeRecord r;
        r.tree_id = cells[0];
        if (r.tree_id.empty()) {
            fail_at(source, line_no, "empty tree_no");
        }
        r.detected_count = parse_number(cells[1], source, line_no, "estimated");
        if (!cells[2].empty()) {
            r.ground_truth_count = parse_number(cells[2], source, line_no, "ground_truth");
        }
        if (header.size() > 3 && !cells[3].empty()) {
            r.yield_mass = parse_number(cells[3], source, line_no, "yield_kg");
        }
        if (r.detected_count < 0.0 || r.ground_truth_count.value_or(0.0) < 0.0 ||
            r.yield_mass.value_or(0.0) < 0.0) {
            fail_at(source, line_no, "counts and yields must be non-negative");
        }
        records.push_back(r);
    }
    if (header.empty()) {
        throw DataError(source + ": missing header row");
    }
    return records;
}

std::vector<TreeRecord> load_tree_records(const fs::path& path) {
    return parse_tree_records(read_text(path), path.string());
}

void save_model(const fs::path& path, const ModelFile& model, const std::string& extra_json) {
    json doc = {{"schema_version", kSchemaVersion},
                {"kind", "linear_model"},
                {"a", model.model.a},
                {"b", model.model.b}};
    if (model.mean_fruit_weight) {
        doc["mean_fruit_weight"] = *model.mean_fruit_weight;
    }
    const json extra = json::parse(extra_json);
    for (const auto& [key, value] : extra.items()) {
        doc[key] = value;
    }
    write_text(path, doc.dump(2) + "\n");
}

ModelFile load_model(const fs::path& path) {
    const std::string source = path.string();
    try {
        const json doc = json::parse(read_text(path));
        if (doc.at("schema_version").get<int>() != kSchemaVersion) {
            throw DataError(source + ": unsupported schema_version");
        }
        if (doc.at("kind").get<std::string>() != "linear_model") {
            throw DataError(source + ": not a linear_model document");
        }
        ModelFile m;
        m.model = {doc.at("a").get<double>(), doc.at("b").get<double>()};
        if (!std::isfinite(m.model.a) || !std::isfinite(m.model.b)) {
            throw DataError(source + ": non-finite coefficients");
        }
        if (doc.contains("mean_fruit_weight")) {
            m.mean_fruit_weight = doc["mean_fruit_weight"].get<double>();
        }
        return m;
    } catch (const json::exception& e) {
        throw DataError(source + ": " + e.what());
    }
}

std::string demo_state_json(const DemoReport& report) {
    const auto& c = report.config;
    const auto& s = report.setup;
    json doc = {
        {"schema_version", kSchemaVersion},
        {"kind", "distill_run"},
        {"config",
         {{"temperature", c.temperature},
          {"lambda_hard", c.lambda_hard},
          {"lambda_soft", c.lambda_soft},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"seed", c.seed}}},
        {"setup",
         {{"teacher_layers", s.teacher_layers},
          {"student_layers", s.student_layers},
          {"samples_per_class", s.samples_per_class},
          {"separation", s.separation},
          {"spread", s.spread},
          {"teacher_learning_rate", s.teacher_learning_rate},
          {"teacher_epochs", s.teacher_epochs}}},
        {"mode", report.plain_supervised ? "plain supervised" : "distillation"},
        {"history", history_json(report.distilled.history)},
        {"student_alone_history", history_json(report.student_alone.history)},
        {"accuracy",
         {{"teacher", report.teacher_accuracy},
          {"distilled", report.distilled_accuracy},
          {"student_alone", report.student_alone_accuracy}}},
        {"teacher", layers_json(report.teacher)},
        {"student", layers_json(report.distilled.net)},
        {"student_alone", layers_json(report.student_alone.net)},
    };
    return doc.dump(2) + "\n";
}

std::vector<EpochLoss> history_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        const json& h = doc.contains("history") ? doc["history"] : doc;
        const auto total = h.at("total").get<std::vector<double>>();
        const auto hard = h.at("hard").get<std::vector<double>>();
        const auto soft = h.at("soft").get<std::vector<double>>();
        if (total.size() != hard.size() || total.size() != soft.size()) {
            throw DataError("history arrays differ in length");
        }
        std::vector<EpochLoss> out(total.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = {total[i], hard[i], soft[i]};
        }
        return out;
    } catch (const json::exception& e) {
        throw DataError(std::string("history document: ") + e.what());
    }
}

}  // namespace orchard::io
