#include "orchard/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "orchard/demo.hpp"
#include "orchard/io.hpp"
#include "orchard/metrics.hpp"
#include "orchard/report.hpp"
#include "orchard/svg.hpp"

namespace orchard::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Coefficients of the published count-correction line.
constexpr LinearModel kReferenceCorrection{0.998, -15.101};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <typename T>
void read_field(const json& obj, const char* key, T& into) {
    if (obj.contains(key)) {
        into = obj[key].get<T>();
    }
}

void read_distill_fields(const json& obj, DistillConfig& d) {
    read_field(obj, "temperature", d.temperature);
    read_field(obj, "lambda_hard", d.lambda_hard);
    read_field(obj, "lambda_soft", d.lambda_soft);
    read_field(obj, "learning_rate", d.learning_rate);
    read_field(obj, "epochs", d.epochs);
    read_field(obj, "seed", d.seed);
}

std::string file_stem_safe(const std::string& id) {
    std::string out;
    for (char c : id) {
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    }
    return out;
}

// Options shared by every subcommand.
struct Flags {
    std::optional<double> conf;
    std::optional<double> iou;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> config;
};

RunConfig resolve(const Flags& flags) {
    RunConfig cfg;
    if (flags.config) {
        cfg = load_run_config(*flags.config);
    }
    if (flags.conf) {
        cfg.conf_threshold = *flags.conf;
    }
    if (flags.iou) {
        cfg.iou_threshold = *flags.iou;
    }
    if (flags.seed) {
        cfg.distill.seed = *flags.seed;
    }
    if (flags.out_dir) {
        cfg.out_dir = *flags.out_dir;
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

int cmd_eval(const RunConfig& cfg, const std::vector<std::string>& scene_paths) {
    if (scene_paths.empty()) {
        throw UsageError("eval needs at least one scene file");
    }
    std::vector<io::SceneFile> files;
    files.reserve(scene_paths.size());
    for (const auto& p : scene_paths) {
        files.push_back(io::load_scene(p));
    }
    std::vector<Scene> scenes;
    for (const auto& f : files) {
        scenes.push_back({f.image_id, f.detections, f.ground_truth});
    }
    const EvalReport rep = evaluate_dataset(scenes, cfg.conf_threshold, cfg.iou_threshold);

    io::write_text(cfg.out_dir / "eval_metrics.csv", report::eval_metrics_csv(rep));
    io::write_text(cfg.out_dir / "pr_curves.csv", report::pr_curves_csv(rep));
    for (const auto& s : rep.scenes) {
        svg::LinePlot plot;
        plot.title = "Precision-recall: " + s.image_id;
        plot.x_label = "recall";
        plot.y_label = "precision";
        plot.x_lo = 0.0;
        plot.x_hi = 1.0;
        plot.y_lo = 0.0;
        plot.y_hi = 1.0;
        svg::Series series{fmt::format("AP {:.3f}", s.ap), {}, "#1f77b4", false};
        for (const auto& pt : s.curve) {
            series.points.emplace_back(pt.recall, pt.precision);
        }
        plot.series.push_back(std::move(series));
        io::write_text(cfg.out_dir / ("pr_" + file_stem_safe(s.image_id) + ".svg"), plot.render());
    }

    // Views of the same tree are summed into one count.
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_tree;
    std::vector<std::string> tree_order;
    for (const auto& f : files) {
        if (!per_tree.contains(f.tree_id)) {
            tree_order.push_back(f.tree_id);
        }
        auto& [detected, truth] = per_tree[f.tree_id];
        detected += count_fruits(f.detections, cfg.conf_threshold, cfg.iou_threshold);
        truth += f.ground_truth.size();
    }
    report::CsvTable trees({"tree_no", "estimated", "ground_truth"});
    for (const auto& id : tree_order) {
        trees.row({id, report::num(per_tree[id].first), report::num(per_tree[id].second)});
    }
    io::write_text(cfg.out_dir / "tree_counts.csv", trees.str());

    std::cout << fmt::format(
        "scenes={} gt={} predictions={} tp={} fp={} fn={}\n"
        "micro precision={:.4f} recall={:.4f}\n"
        "macro precision={:.4f} recall={:.4f} mAP={:.4f}\n",
        rep.scenes.size(), rep.total_gt, rep.total_predictions, rep.total_true_positives,
        rep.total_false_positives, rep.total_false_negatives, rep.micro_precision,
        rep.micro_recall, rep.macro_precision, rep.macro_recall, rep.mean_ap);
    return kExitOk;
}

std::vector<DataPoint> fit_points(const std::vector<io::TreeRecord>& records) {
    std::vector<DataPoint> points;
    for (const auto& r : records) {
        if (!r.ground_truth_count) {
            throw io::DataError("tree " + r.tree_id + " has no ground_truth value to fit against");
        }
        points.push_back({r.detected_count, *r.ground_truth_count});
    }
    return points;
}

int cmd_fit(const RunConfig& cfg, const std::string& trees_path) {
    const auto records = io::load_tree_records(trees_path);
    const auto points = fit_points(records);
    LinearModel ols;
    GdResult gd;
    try {
        ols = fit_ols(points);
        gd = fit_gd(points, cfg.regression);
    } catch (const std::invalid_argument& e) {
        throw io::DataError(trees_path + ": " + e.what());
    } catch (const DivergenceError& e) {
        throw io::DataError(e.what());
    }
    const double gap = std::max(std::abs(gd.model.a - ols.a), std::abs(gd.model.b - ols.b));
    if (gap > 1e-6) {
        spdlog::warn("gradient descent differs from least squares by {:.3g}", gap);
    }

    const json extra = {{"fit",
                         {{"method", "gradient_descent"},
                          {"learning_rate", cfg.regression.learning_rate},
                          {"epochs", cfg.regression.epochs},
                          {"standardized", cfg.regression.standardize},
                          {"final_loss", gd.history.back()},
                          {"points", points.size()}}},
                        {"ols", {{"a", ols.a}, {"b", ols.b}, {"max_abs_gap", gap}}}};
    io::save_model(cfg.out_dir / "model.json", {gd.model, cfg.mean_fruit_weight}, extra.dump());

    report::CsvTable table({"tree_no", "estimated", "ground_truth", "corrected", "residual",
                            "detection_relative_error", "corrected_relative_error"});
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double x = points[i].x;
        const double y = points[i].y;
        const double corrected = predict(gd.model, x);
        const bool has_truth = y != 0.0;
        table.row({records[i].tree_id, report::num(x), report::num(y), report::num(corrected),
                   report::num(corrected - y),
                   has_truth ? report::num(relative_error(x, y)) : std::string(),
                   has_truth ? report::num(relative_error(corrected, y)) : std::string()});
    }
    io::write_text(cfg.out_dir / "residuals.csv", table.str());

    std::cout << fmt::format(
        "gradient descent: a={:.6f} b={:.6f} (sum of squares {:.6g})\n"
        "least squares:    a={:.6f} b={:.6f} (max gap {:.3g})\n"
        "reference fit:    a={:.3f} b={:.3f}\n",
        gd.model.a, gd.model.b, gd.history.back(), ols.a, ols.b, gap, kReferenceCorrection.a,
        kReferenceCorrection.b);
    return kExitOk;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw UsageError(fmt::format("--{} entry '{}' is not a number", what, item));
        }
    }
    return out;
}

int cmd_predict_yield(const RunConfig& cfg, const std::string& model_path,
                      const std::optional<std::string>& trees_path,
                      const std::optional<std::string>& counts,
                      const std::optional<std::string>& truths,
                      std::optional<double> fruit_weight) {
    const io::ModelFile model = io::load_model(model_path);
    std::vector<io::TreeRecord> records;
    if (trees_path && counts) {
        throw UsageError("give either --trees or --counts, not both");
    }
    if (trees_path) {
        records = io::load_tree_records(*trees_path);
    } else if (counts) {
        const auto xs = parse_list(*counts, "counts");
        const auto ys = truths ? parse_list(*truths, "truth") : std::vector<double>{};
        if (!ys.empty() && ys.size() != xs.size()) {
            throw UsageError("--truth must have one value per --counts entry");
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            io::TreeRecord r;
            r.tree_id = std::to_string(i + 1);
            r.detected_count = xs[i];
            if (!ys.empty()) {
                r.ground_truth_count = ys[i];
            }
            records.push_back(r);
        }
    } else {
        throw UsageError("predict-yield needs --trees or --counts");
    }
    for (const auto& r : records) {
        if (r.detected_count < 0.0) {
            throw io::DataError("negative count for tree " + r.tree_id);
        }
    }

    YieldModel ym{model.model,
                  fruit_weight.value_or(cfg.mean_fruit_weight.value_or(
                      model.mean_fruit_weight.value_or(1.0)))};
    if (!(ym.mean_fruit_weight > 0.0)) {
        throw UsageError("mean fruit weight must be positive");
    }

    report::CsvTable table({"tree_no", "detected", "corrected", "yield_kg", "ground_truth",
                            "relative_error", "true_yield_kg", "yield_relative_error"});
    double total_detected = 0.0, total_corrected = 0.0, total_yield = 0.0;
    double total_truth = 0.0, total_true_yield = 0.0, rel_sum = 0.0;
    std::size_t with_truth = 0, with_yield = 0;
    for (const auto& r : records) {
        const auto est = estimate_yield(r.detected_count, ym);
        total_detected += r.detected_count;
        total_corrected += est.corrected_count;
        total_yield += est.yield_mass;
        std::string truth_cell, rel_cell, yield_cell, yield_rel_cell;
        if (r.ground_truth_count) {
            truth_cell = report::num(*r.ground_truth_count);
            total_truth += *r.ground_truth_count;
            ++with_truth;
            if (*r.ground_truth_count > 0.0) {
                const double e = relative_error(est.corrected_count, *r.ground_truth_count);
                rel_sum += e;
                rel_cell = report::num(e);
            }
        }
        if (r.yield_mass) {
            yield_cell = report::num(*r.yield_mass);
            total_true_yield += *r.yield_mass;
            ++with_yield;
            if (*r.yield_mass > 0.0) {
                yield_rel_cell = report::num(relative_error(est.yield_mass, *r.yield_mass));
            }
        }
        table.row({r.tree_id, report::num(r.detected_count), report::num(est.corrected_count),
                   report::num(est.yield_mass), truth_cell, rel_cell, yield_cell,
                   yield_rel_cell});
    }
    const bool all_truth = with_truth == records.size() && total_truth > 0.0;
    const bool all_yield = with_yield == records.size() && total_true_yield > 0.0;
    table.row({"TOTAL", report::num(total_detected), report::num(total_corrected),
               report::num(total_yield), all_truth ? report::num(total_truth) : "",
               all_truth ? report::num(relative_error(total_corrected, total_truth)) : "",
               all_yield ? report::num(total_true_yield) : "",
               all_yield ? report::num(relative_error(total_yield, total_true_yield)) : ""});
    io::write_text(cfg.out_dir / "yield_report.csv", table.str());

    std::cout << fmt::format("model: a={} b={} fruit weight={} kg\n", ym.count_correction.a,
                             ym.count_correction.b, ym.mean_fruit_weight);
    std::cout << fmt::format("trees={} detected={} corrected={:.3f} yield={:.3f} kg\n",
                             records.size(), total_detected, total_corrected, total_yield);
    if (all_truth) {
        std::cout << fmt::format(
            "ground truth={} aggregate relative error={:.4f} mean per-tree relative error={:.4f}\n",
            total_truth, relative_error(total_corrected, total_truth),
            rel_sum / static_cast<double>(records.size()));
    }
    if (all_yield) {
        std::cout << fmt::format("true yield={:.3f} kg yield relative error={:.4f}\n",
                                 total_true_yield, relative_error(total_yield, total_true_yield));
    }
    return kExitOk;
}

int cmd_distill_demo(const RunConfig& cfg) {
    const DemoReport rep = run_distill_demo(cfg.distill);

    report::CsvTable history({"epoch", "distilled_total", "distilled_hard", "distilled_soft",
                              "student_alone_total"});
    const auto& d = rep.distilled.history;
    const auto& a = rep.student_alone.history;
    for (std::size_t k = 0; k < d.size(); ++k) {
        history.row({report::num(k), report::num(d[k].total), report::num(d[k].hard),
                     report::num(d[k].soft), report::num(a[k].total)});
    }
    io::write_text(cfg.out_dir / "distill_history.csv", history.str());

    const std::string mode = rep.plain_supervised ? "plain supervised" : "distillation";
    report::CsvTable summary({"run", "mode", "initial_total", "final_total", "final_hard",
                              "final_soft", "accuracy"});
    summary.row({"student_with_distillation", mode, report::num(d.front().total),
                 report::num(d.back().total), report::num(d.back().hard),
                 report::num(d.back().soft), report::num(rep.distilled_accuracy)});
    summary.row({"student_alone", "plain supervised", report::num(a.front().total),
                 report::num(a.back().total), report::num(a.back().hard), "",
                 report::num(rep.student_alone_accuracy)});
    summary.row({"teacher", "plain supervised",
                 report::num(rep.teacher_training.history.front().total),
                 report::num(rep.teacher_training.history.back().total),
                 report::num(rep.teacher_training.history.back().hard), "",
                 report::num(rep.teacher_accuracy)});
    io::write_text(cfg.out_dir / "distill_summary.csv", summary.str());
    io::write_text(cfg.out_dir / "distill_state.json", io::demo_state_json(rep));

    svg::LinePlot plot;
    plot.title = fmt::format("Student loss (T = {})", cfg.distill.temperature);
    plot.x_label = "epoch";
    plot.y_label = "loss";
    svg::Series total{"distilled total", {}, "#1f77b4", false};
    svg::Series soft{"distilled soft", {}, "#ff7f0e", false};
    svg::Series alone{"student alone", {}, "#2ca02c", false};
    for (std::size_t k = 0; k < d.size(); ++k) {
        const auto x = static_cast<double>(k);
        total.points.emplace_back(x, d[k].total);
        soft.points.emplace_back(x, d[k].soft);
        alone.points.emplace_back(x, a[k].total);
    }
    plot.series = {total, soft, alone};
    io::write_text(cfg.out_dir / "distill_loss.svg", plot.render());

    std::cout << fmt::format(
        "mode={} T={} epochs={} seed={}\n"
        "distilled: total {:.6f} -> {:.6f}, soft {:.6f} -> {:.6f}, accuracy {:.3f}\n"
        "alone:     total {:.6f} -> {:.6f}, accuracy {:.3f}\n"
        "teacher accuracy {:.3f}\n",
        mode, cfg.distill.temperature, cfg.distill.epochs, cfg.distill.seed, d.front().total,
        d.back().total, d.front().soft, d.back().soft, rep.distilled_accuracy, a.front().total,
        a.back().total, rep.student_alone_accuracy, rep.teacher_accuracy);
    return kExitOk;
}

}  // namespace

void RunConfig::validate() const {
    if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
        throw std::invalid_argument("conf_threshold must lie in [0, 1]");
    }
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        throw std::invalid_argument("iou_threshold must lie in (0, 1]");
    }
    if (!(regression.learning_rate > 0.0)) {
        throw std::invalid_argument("regression learning_rate must be positive");
    }
    if (mean_fruit_weight && !(*mean_fruit_weight > 0.0)) {
        throw std::invalid_argument("mean_fruit_weight must be positive");
    }
    distill.validate();
}

RunConfig load_run_config(const fs::path& path) {
    RunConfig cfg;
    json doc;
    try {
        doc = json::parse(io::read_text(path));
    } catch (const json::parse_error& e) {
        throw UsageError(path.string() + ": " + e.what());
    } catch (const io::DataError& e) {
        throw UsageError(e.what());
    }
    try {
        read_field(doc, "conf_threshold", cfg.conf_threshold);
        read_field(doc, "iou_threshold", cfg.iou_threshold);
        if (doc.contains("out_dir")) {
            cfg.out_dir = doc["out_dir"].get<std::string>();
        }
        if (doc.contains("regression")) {
            const auto& r = doc["regression"];
            read_field(r, "learning_rate", cfg.regression.learning_rate);
            read_field(r, "epochs", cfg.regression.epochs);
            read_field(r, "init_a", cfg.regression.init_a);
            read_field(r, "init_b", cfg.regression.init_b);
            read_field(r, "standardize", cfg.regression.standardize);
        }
        read_distill_fields(doc, cfg.distill);
        if (doc.contains("distill")) {
            read_distill_fields(doc["distill"], cfg.distill);
        }
        if (doc.contains("mean_fruit_weight")) {
            cfg.mean_fruit_weight = doc["mean_fruit_weight"].get<double>();
        }
    } catch (const json::exception& e) {
        throw UsageError(path.string() + ": " + e.what());
    }
    return cfg;
}

void configure_logging() {
    static const bool once = [] {
        auto logger = spdlog::stderr_color_mt("orchard");
        logger->set_pattern("%l: %v");
        spdlog::set_default_logger(logger);
        return true;
    }();
    (void)once;
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("ORCHARD_YIELD_LOG"); env != nullptr && *env != '\0') {
        level = spdlog::level::from_str(env);
    }
    spdlog::set_level(level);
}

int run(const std::vector<std::string>& args) {
    configure_logging();

    CLI::App app{"Fruit counting, detection metrics, yield regression and distillation demo",
                 "orchard_yield"};
    app.require_subcommand(1);
    app.fallthrough();

    Flags flags;
    app.add_option("--conf", flags.conf, "Confidence threshold (default 0.15)");
    app.add_option("--iou", flags.iou, "IoU threshold for NMS and matching (default 0.5)");
    app.add_option("--seed", flags.seed, "Seed for the distillation demo");
    app.add_option("--out-dir", flags.out_dir, "Directory for reports (default ./out)");
    app.add_option("--config", flags.config, "JSON run configuration");

    auto* eval = app.add_subcommand("eval", "Evaluate detections against ground truth");
    std::vector<std::string> scenes;
    eval->add_option("scenes", scenes, "Scene JSON files");

    auto* fit = app.add_subcommand("fit", "Fit the count-correction line to tree records");
    std::string trees_csv;
    std::optional<double> fit_lr;
    std::optional<std::size_t> fit_epochs;
    fit->add_option("trees", trees_csv, "Tree records CSV")->required();
    fit->add_option("--lr", fit_lr, "Gradient descent learning rate");
    fit->add_option("--epochs", fit_epochs, "Gradient descent epochs");
    std::optional<double> fit_weight;
    fit->add_option("--fruit-weight", fit_weight, "Mean fruit weight stored with the model (kg)");

    auto* predict = app.add_subcommand("predict-yield", "Apply a count-correction model");
    std::string model_path;
    std::optional<std::string> predict_trees, predict_counts, predict_truth;
    std::optional<double> predict_weight;
    predict->add_option("--model", model_path, "Model JSON written by fit")->required();
    predict->add_option("--trees", predict_trees, "Tree records CSV");
    predict->add_option("--counts", predict_counts, "Comma-separated detected counts");
    predict->add_option("--truth", predict_truth, "Comma-separated true counts for --counts");
    predict->add_option("--fruit-weight", predict_weight, "Mean fruit weight (kg)");

    auto* demo = app.add_subcommand("distill-demo", "Run the toy teacher/student experiment");
    std::optional<std::size_t> demo_epochs;
    demo->add_option("--epochs", demo_epochs, "Override the configured epochs");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsageError;
    }

    try {
        RunConfig cfg = resolve(flags);
        if (*fit) {
            if (fit_lr) {
                cfg.regression.learning_rate = *fit_lr;
            }
            if (fit_epochs) {
                cfg.regression.epochs = *fit_epochs;
            }
            if (fit_weight) {
                cfg.mean_fruit_weight = *fit_weight;
            }
            cfg.validate();
            return cmd_fit(cfg, trees_csv);
        }
        if (*eval) {
            return cmd_eval(cfg, scenes);
        }
        if (*predict) {
            return cmd_predict_yield(cfg, model_path, predict_trees, predict_counts,
                                     predict_truth, predict_weight);
        }
        if (*demo) {
            if (demo_epochs) {
                cfg.distill.epochs = *demo_epochs;
            }
            return cmd_distill_demo(cfg);
        }
    } catch (const UsageError& e) {
        spdlog::error("{}", e.what());
        return kExitUsageError;
    } catch (const std::invalid_argument& e) {
        spdlog::error("{}", e.what());
        return kExitUsageError;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitDataError;
    }
    return kExitUsageError;
}

}  // namespace orchard::cli
