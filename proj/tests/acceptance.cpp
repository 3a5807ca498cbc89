// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: orchard_acceptance [criterion...]   (no arguments runs all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "oracles.hpp"
#include "orchard/demo.hpp"
#include "orchard/distill.hpp"
#include "orchard/focus.hpp"
#include "orchard/geometry.hpp"
#include "orchard/gradcheck.hpp"
#include "orchard/io.hpp"
#include "orchard/metrics.hpp"
#include "orchard/random.hpp"
#include "orchard/regress.hpp"
#include "orchard/trainer.hpp"
#include "tree_table.hpp"

using namespace orchard;

namespace {

// Tolerances and limits, fixed here rather than passed in.
constexpr double kTreeTablePointTolerance = 0.1;   // percentage points, after rounding
constexpr double kRegressionTolerance = 1e-6;   // fit_gd vs fit_ols, both coefficients
constexpr double kOracleTolerance = 1e-12;      // fit_ols vs two-pass oracle, relative
constexpr double kYieldBandLow = 0.05;
constexpr double kYieldBandHigh = 0.12;
constexpr double kFrozenAggregateError = 3.42 / 1970.0;  // |1973.42 - 1970| / 1970
constexpr int kMetricInstances = 1000;
constexpr double kMetricTolerance = 1e-12;
constexpr int kSoftmaxInputs = 100000;
constexpr double kSoftmaxTolerance = 1e-12;
constexpr int kGradientPoints = 100;
constexpr double kGradientTolerance = 1e-4;
constexpr double kGradientStep = 1e-5;  // central-difference step; 1e-6 is roundoff-limited
constexpr double kSoftLossRatio = 0.1;

constexpr double kLimit1 = 1.0, kLimit2 = 10.0, kLimit4 = 30.0, kLimit5 = 60.0;

enum class Verdict { pass, fail, declared };

struct Outcome {
    Verdict verdict = Verdict::fail;
    std::string detail;
    std::vector<std::string> info;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<DataPoint> tree_table_points() {
    std::vector<DataPoint> pts;
    for (const auto& r : kTreeTable) {
        pts.push_back({static_cast<double>(r.estimated), static_cast<double>(r.ground_truth)});
    }
    return pts;
}

Outcome criterion1() {
    const auto start = Clock::now();
    int ok = 0;
    double worst = 0.0;
    for (const auto& r : kTreeTable) {
        const double pct = 100.0 * relative_error(r.estimated, r.ground_truth);
        const double diff = std::abs(std::round(pct * 10.0) / 10.0 - r.printed_percent);
        worst = std::max(worst, diff);
        ok += diff <= kTreeTablePointTolerance + 1e-9 ? 1 : 0;
    }
    const double t = seconds_since(start);
    const bool pass = ok == static_cast<int>(kTreeTable.size()) && t < kLimit1;
    return {pass ? Verdict::pass : Verdict::fail,
            fmt::format("{}/{} rows within {}pp (max {:.3f}pp), {:.3f}s", ok, kTreeTable.size(),
                        kTreeTablePointTolerance, worst, t),
            {}};
}

Outcome criterion2() {
    const auto start = Clock::now();
    const auto pts = tree_table_points();
    const auto ols = fit_ols(pts);
    const auto oracle = oracle::two_pass_ols(pts);
    const auto gd = fit_gd(pts, GdConfig{});
    const double gd_gap = std::max(std::abs(gd.model.a - ols.a), std::abs(gd.model.b - ols.b));
    const double oracle_gap = std::max(std::abs(ols.a - oracle.a) / std::abs(oracle.a),
                                       std::abs(ols.b - oracle.b) / std::abs(oracle.b));
    const double exact_gap = std::max(std::abs(ols.a - kTreeTableOlsSlope),
                                      std::abs(ols.b - kTreeTableOlsIntercept));
    const auto published =
        io::load_model(std::string(ORCHARD_DATA_DIR) + "/reference_model.json").model;
    const double t = seconds_since(start);
    const bool pass = gd_gap <= kRegressionTolerance && oracle_gap <= kOracleTolerance &&
                      exact_gap <= kRegressionTolerance && t < kLimit2;
    return {pass ? Verdict::pass : Verdict::fail,
            fmt::format("gd vs ols {:.2e} (<= {}), ols vs oracle {:.2e}, {:.3f}s", gd_gap,
                        kRegressionTolerance, oracle_gap, t),
            {fmt::format("fitted a={:.6f} b={:.6f}; published a={} b={}", ols.a, ols.b,
                         published.a, published.b)}};
}

Outcome criterion3() {
    const auto model = io::load_model(std::string(ORCHARD_DATA_DIR) + "/reference_model.json");
    const YieldModel ym{model.model, 1.0};
    double corrected = 0.0, truth = 0.0, per_tree = 0.0;
    for (const auto& r : kTreeTable) {
        const double c = estimate_yield(r.estimated, ym).corrected_count;
        corrected += c;
        truth += r.ground_truth;
        per_tree += relative_error(c, r.ground_truth);
    }
    const double aggregate = relative_error(corrected, truth);
    const bool frozen = std::abs(aggregate - kFrozenAggregateError) < 1e-12;
    const bool in_band = aggregate >= kYieldBandLow && aggregate <= kYieldBandHigh;
    return {in_band && frozen ? Verdict::pass : Verdict::fail,
            fmt::format("aggregate relative error {:.4f}% (corrected {:.2f} vs {}), band "
                        "[{}%, {}%]",
                        100.0 * aggregate, corrected, truth, 100.0 * kYieldBandLow,
                        100.0 * kYieldBandHigh),
            {fmt::format("golden {} ({:.4f}%)", frozen ? "matches" : "DIFFERS",
                         100.0 * kFrozenAggregateError),
             fmt::format("mean per-tree relative error of corrected counts: {:.3f}%",
                         100.0 * per_tree / static_cast<double>(kTreeTable.size()))}};
}

GroundTruthBox make_gt(const BBox& b, int cls) { return {b, cls}; }

Outcome criterion4() {
    const auto start = Clock::now();
    Rng rng(20240611);
    long mismatches = 0, violations = 0;

    // IoU: exact on integer boxes against cell counting, and against the
    // interval formula on continuous boxes.
    for (int k = 0; k < kMetricInstances; ++k) {
        const BBox a = oracle::random_int_box(rng, 24), b = oracle::random_int_box(rng, 24);
        const BBox c = oracle::random_box(rng, 50, 30), d = oracle::random_box(rng, 50, 30);
        const double v = iou(a, b), w = iou(c, d);
        mismatches += std::abs(v - oracle::pixel_iou(a, b)) > kMetricTolerance ? 1 : 0;
        mismatches += std::abs(w - oracle::area_iou(c, d)) > kMetricTolerance ? 1 : 0;
        violations += (v < 0 || v > 1 || w < 0 || w > 1 || iou(c, d) != iou(d, c)) ? 1 : 0;
    }

    // NMS on up to 8 boxes, two classes, distinct confidences.
    for (int k = 0; k < kMetricInstances; ++k) {
        std::vector<Detection> dets;
        for (std::size_t n = 1 + rng.below(8); n > 0; --n) {
            dets.push_back({oracle::random_box(rng, 20, 15), static_cast<int>(rng.below(2)),
                            rng.uniform()});
        }
        const auto got = nms(dets, 0.5);
        mismatches += got == oracle::brute_nms(dets, 0.5) ? 0 : 1;
        violations += got.size() <= dets.size() ? 0 : 1;
    }

    // Matching: greedy rule against a scan-based greedy oracle, and
    // optimality on scenes where each prediction overlaps at most one gt.
    int unambiguous = 0;
    for (int k = 0; k < kMetricInstances || unambiguous < kMetricInstances; ++k) {
        std::vector<GroundTruthBox> gts;
        for (std::size_t n = 1 + rng.below(4); n > 0; --n) {
            gts.push_back(make_gt(oracle::random_box(rng, 40, 15), static_cast<int>(rng.below(2))));
        }
        std::vector<Detection> preds;
        for (std::size_t n = 1 + rng.below(4); n > 0; --n) {
            BBox b = oracle::random_box(rng, 40, 15);
            int cls = static_cast<int>(rng.below(2));
            if (rng.uniform() < 0.6) {
                const auto& target = gts[rng.below(gts.size())];
                const double j = rng.uniform(-2, 2);
                b = {target.box.x_min + j, target.box.y_min + j, target.box.x_max + j,
                     target.box.y_max + j};
                cls = target.class_id;
            }
            preds.push_back({b, cls, rng.uniform()});
        }
        const auto m = match_detections(preds, gts, 0.5);
        std::vector<long> got(preds.size(), -1);
        for (const auto& tp : m.true_positives) {
            got[tp.detection_index] = static_cast<long>(*tp.gt_index);
        }
        mismatches += got == oracle::greedy_match(preds, gts, 0.5) ? 0 : 1;
        violations += m.true_positives.size() + m.false_positives.size() == preds.size() ? 0 : 1;
        violations += m.true_positives.size() + m.false_negative_count == gts.size() ? 0 : 1;

        bool ambiguous = false;
        for (const auto& p : preds) {
            int hits = 0;
            for (const auto& g : gts) {
                hits += (g.class_id == p.class_id && oracle::area_iou(p.box, g.box) >= 0.5) ? 1 : 0;
            }
            ambiguous = ambiguous || hits > 1;
        }
        if (!ambiguous) {
            ++unambiguous;
            mismatches += m.true_positives.size() == oracle::max_matching(preds, gts, 0.5) ? 0 : 1;
        }
    }

    // AP on curves of up to 20 points.
    for (int k = 0; k < kMetricInstances; ++k) {
        PRCurve curve;
        double r = 0.0;
        for (std::size_t n = 1 + rng.below(20); n > 0; --n) {
            if (rng.uniform() < 0.6) {
                r = std::min(1.0, r + rng.uniform(0.0, 0.3));
            }
            curve.push_back({r, rng.uniform()});
        }
        const double ap = average_precision(curve);
        mismatches += std::abs(ap - oracle::riemann_ap(curve)) > kMetricTolerance ? 1 : 0;
        violations += (ap < 0 || ap > 1) ? 1 : 0;
    }

    // Rate invariants on whole scenes through evaluate_dataset.
    for (int k = 0; k < kMetricInstances / 10; ++k) {
        std::vector<Scene> scenes(1 + rng.below(4));
        for (auto& s : scenes) {
            for (std::size_t n = rng.below(6); n > 0; --n) {
                s.ground_truth.push_back(make_gt(oracle::random_box(rng, 30, 12), 0));
            }
            for (std::size_t n = rng.below(8); n > 0; --n) {
                s.predictions.push_back({oracle::random_box(rng, 30, 12), 0, rng.uniform()});
            }
        }
        const auto rep = evaluate_dataset(scenes, rng.uniform(), 0.5);
        const auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
        for (const auto& s : rep.scenes) {
            violations += (in01(s.precision) && in01(s.recall) && in01(s.ap)) ? 0 : 1;
            violations += s.true_positives + s.false_positives == s.prediction_count ? 0 : 1;
            violations += s.true_positives + s.false_negatives == s.gt_count ? 0 : 1;
        }
        violations += (in01(rep.micro_precision) && in01(rep.micro_recall) &&
                       in01(rep.macro_precision) && in01(rep.macro_recall) && in01(rep.mean_ap))
                          ? 0
                          : 1;
    }

    const double t = seconds_since(start);
    const bool pass = mismatches == 0 && violations == 0 && t < kLimit4;
    return {pass ? Verdict::pass : Verdict::fail,
            fmt::format("{} instances per kernel ({} unambiguous matchings), {} oracle "
                        "mismatches, {} invariant violations, {:.2f}s",
                        kMetricInstances, unambiguous, mismatches, violations, t),
            {}};
}

Outcome criterion5() {
    const auto start = Clock::now();
    Rng rng(5150);

    double worst_norm = 0.0;
    for (int k = 0; k < kSoftmaxInputs; ++k) {
        std::vector<double> z(2 + rng.below(9));
        const double scale = std::pow(10.0, rng.uniform(-2, 3));
        for (double& v : z) {
            v = rng.uniform(-scale, scale);
        }
        const auto p = temperature_softmax(z, std::pow(10.0, rng.uniform(-1, 2)));
        worst_norm = std::max(worst_norm, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
    }

    const DemoSetup setup;
    Rng data_rng(77);
    const auto data = make_blobs(16, setup.separation, setup.spread, data_rng);
    double worst_grad = 0.0;
    for (int k = 0; k < kGradientPoints; ++k) {
        const auto teacher = ToyNet::initialized(setup.teacher_layers, rng.engine()());
        const auto student = ToyNet::initialized(setup.student_layers, rng.engine()());
        const auto teacher_logits = batch_logits(teacher, data);
        DistillConfig cfg;
        cfg.temperature = rng.uniform(1, 30);
        cfg.lambda_hard = rng.uniform();
        cfg.lambda_soft = rng.uniform();
        const ObjectiveFn f = [&](std::span<const double> p) {
            ToyNet probe = student;
            probe.set_parameters(p);
            auto obj = distill_objective(probe, teacher_logits, data, cfg);
            return Objective{obj.loss.total, obj.gradient};
        };
        worst_grad = std::max(worst_grad, gradcheck(f, student.parameters(), kGradientStep));
    }

    const DistillConfig cfg;  // T = 20
    const auto first = run_distill_demo(cfg);
    const auto second = run_distill_demo(cfg);
    const auto& h = first.distilled.history;
    const double ratio = h.back().soft / h.front().soft;
    const bool reproducible =
        first.distilled.history == second.distilled.history && first.distilled.net == second.distilled.net;

    const double t = seconds_since(start);
    const bool pass = worst_norm <= kSoftmaxTolerance && worst_grad < kGradientTolerance &&
                      ratio < kSoftLossRatio && reproducible && t < kLimit5;
    return {pass ? Verdict::pass : Verdict::fail,
            fmt::format("softmax |sum-1| max {:.1e} over {}, gradcheck max {:.1e} over {} points (step {}), "
                        "soft loss ratio {:.4f}, reproducible={}, {:.2f}s",
                        worst_norm, kSoftmaxInputs, worst_grad, kGradientPoints, kGradientStep, ratio,
                        reproducible, t),
            {fmt::format("soft loss {:.6f} -> {:.6f} at T={}", h.front().soft, h.back().soft,
                         cfg.temperature)}};
}

Outcome criterion6() {
    Rng rng(606);
    bool shapes = true;
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{4, 4}, {608, 608}}) {
        Tensor3 x(h, w, 3);
        const auto y = focus_slice(x);
        shapes = shapes && y.height() == h / 2 && y.width() == w / 2 && y.channels() == 12;
    }
    int exact = 0;
    constexpr int trials = 50;
    for (int k = 0; k < trials; ++k) {
        const std::size_t h = 2 * (1 + rng.below(40)), w = 2 * (1 + rng.below(40));
        Tensor3 x(h, w, 1 + rng.below(5));
        for (double& v : x.data()) {
            v = rng.normal(0, 1);
        }
        exact += focus_unslice(focus_slice(x)) == x ? 1 : 0;
    }
    Tensor3 big(608, 608, 3);
    for (double& v : big.data()) {
        v = rng.uniform();
    }
    exact += focus_unslice(focus_slice(big)) == big ? 1 : 0;
    const bool pass = shapes && exact == trials + 1;
    return {pass ? Verdict::pass : Verdict::fail,
            fmt::format("shapes {}, exact inverse on {}/{} random tensors",
                        shapes ? "ok" : "WRONG", exact, trials + 1),
            {}};
}

Outcome criterion7() {
    return {Verdict::declared,
            "detector precision/recall/mAP and model sizes need GPU training on an unpublished "
            "image set; covered instead by criteria 4-6 and the synthetic-scene goldens",
            {}};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "relative error reproduces the printed tree table", criterion1},
        {2, "gradient descent fit equals least squares", criterion2},
        {3, "published correction gives 5-12% aggregate error", criterion3},
        {4, "detection metrics match brute-force oracles", criterion4},
        {5, "distillation numerics", criterion5},
        {6, "focus slice shapes and inverse", criterion6},
        {7, "detector benchmark numbers", criterion7},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        char* end = nullptr;
        const long id = std::strtol(argv[i], &end, 10);
        if (*end != '\0' || id < 1 || id > static_cast<long>(all.size())) {
            std::fprintf(stderr, "unknown criterion '%s' (expected 1-%zu)\n", argv[i], all.size());
            return 2;
        }
        selected.push_back(static_cast<int>(id));
    }
    if (selected.empty()) {
        for (const auto& c : all) {
            selected.push_back(c.id);
        }
    }

    int failures = 0;
    for (const int id : selected) {
        const auto& c = all[static_cast<std::size_t>(id - 1)];
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {Verdict::fail, std::string("threw: ") + e.what(), {}};
        }
        const char* tag = o.verdict == Verdict::pass   ? "PASS"
                          : o.verdict == Verdict::fail ? "FAIL"
                                                       : "NOT REPRODUCIBLE (declared)";
        fmt::print("criterion {} {}: {}: {}\n", c.id, tag, c.name, o.detail);
        for (const auto& line : o.info) {
            fmt::print("  info: {}\n", line);
        }
        failures += o.verdict == Verdict::fail ? 1 : 0;
    }
    return failures == 0 ? 0 : 1;
}
