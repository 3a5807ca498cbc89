#include "orchard/report.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace orchard::report {

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) {
        throw std::logic_error("CSV row width does not match header");
    }
    rows_.push_back(std::move(cells));
    return *this;
}

std::string CsvTable::str() const {
    const auto join = [](const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                line += ',';
            }
            line += cells[i];
        }
        return line + '\n';
    };
    std::string out = join(header_);
    for (const auto& r : rows_) {
        out += join(r);
    }
    return out;
}

std::string num(double value) { return fmt::format("{}", value); }
std::string num(std::size_t value) { return fmt::format("{}", value); }

std::string eval_metrics_csv(const EvalReport& report) {
    CsvTable table({"scope", "image_id", "gt", "predictions", "tp", "fp", "fn", "precision",
                    "recall", "ap", "precision_undefined", "recall_undefined"});
    const auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
    for (const auto& s : report.scenes) {
        table.row({"scene", s.image_id, num(s.gt_count), num(s.prediction_count),
                   num(s.true_positives), num(s.false_positives), num(s.false_negatives),
                   num(s.precision), num(s.recall), num(s.ap), flag(s.precision_undefined),
                   flag(s.recall_undefined)});
    }
    const std::string gt = num(report.total_gt);
    const std::string preds = num(report.total_predictions);
    const std::string tp = num(report.total_true_positives);
    const std::string fp = num(report.total_false_positives);
    const std::string fn = num(report.total_false_negatives);
    table.row({"micro", "*", gt, preds, tp, fp, fn, num(report.micro_precision),
               num(report.micro_recall), "", flag(report.micro_precision_undefined),
               flag(report.micro_recall_undefined)});
    table.row({"macro", "*", gt, preds, tp, fp, fn, num(report.macro_precision),
               num(report.macro_recall), num(report.mean_ap), flag(report.macro_undefined),
               flag(report.macro_undefined)});
    return table.str();
}

std::string pr_curves_csv(const EvalReport& report) {
    CsvTable table({"image_id", "rank", "recall", "precision"});
    for (const auto& s : report.scenes) {
        for (std::size_t k = 0; k < s.curve.size(); ++k) {
            table.row({s.image_id, num(k + 1), num(s.curve[k].recall), num(s.curve[k].precision)});
        }
    }
    return table.str();
}

}  // namespace orchard::report
