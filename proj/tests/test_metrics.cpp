#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "orchard/metrics.hpp"
#include "orchard/serial.hpp"

using namespace orchard;

namespace {

Detection det(BBox b, double conf, int cls = 0) { return {b, cls, conf}; }
GroundTruthBox gt(BBox b, int cls = 0) { return {b, cls}; }

}  // namespace

TEST_CASE("match_detections basic cases") {
    SUBCASE("exact hit") {
        const auto m = match_detections(std::vector{det({0, 0, 10, 10}, 0.9)},
                                        std::vector{gt({0, 0, 10, 10})}, 0.5);
        CHECK(m.true_positives.size() == 1);
        CHECK(m.false_positives.empty());
        CHECK(m.false_negative_count == 0);
        CHECK(m.true_positives[0].gt_index == 0u);
    }
    SUBCASE("overlap below threshold") {
        // 10x10 vs 10x4 inside it: IoU 0.4
        const auto m = match_detections(std::vector{det({0, 0, 10, 4}, 0.9)},
                                        std::vector{gt({0, 0, 10, 10})}, 0.5);
        CHECK(m.true_positives.empty());
        CHECK(m.false_positives.size() == 1);
        CHECK(m.false_negative_count == 1);
    }
    SUBCASE("two predictions over one ground truth") {
        const std::vector preds{det({0, 0, 10, 10}, 0.8), det({0, 0, 10, 9}, 0.9)};
        const auto m = match_detections(preds, std::vector{gt({0, 0, 10, 10})}, 0.5);
        REQUIRE(m.true_positives.size() == 1);
        CHECK(m.true_positives[0].confidence == 0.9);
        CHECK(m.true_positives[0].detection_index == 1);
        REQUIRE(m.false_positives.size() == 1);
        CHECK(m.false_positives[0].confidence == 0.8);
        CHECK(m.false_negative_count == 0);
    }
    SUBCASE("class mismatch never matches") {
        const auto m = match_detections(std::vector{det({0, 0, 10, 10}, 0.9, 1)},
                                        std::vector{gt({0, 0, 10, 10}, 0)}, 0.5);
        CHECK(m.true_positives.empty());
        CHECK(m.false_negative_count == 1);
    }
    SUBCASE("threshold must be in (0, 1]") {
        CHECK_THROWS_AS((void)match_detections({}, {}, 0.0), std::invalid_argument);
    }
}

TEST_CASE("match_detections takes the best unmatched gt, lowest index on ties") {
    const std::vector gts{gt({0, 0, 10, 10}), gt({0, 0, 10, 10}), gt({2, 0, 12, 10})};
    const auto m = match_detections(std::vector{det({0, 0, 10, 10}, 0.9), det({0, 0, 10, 10}, 0.8)},
                                    gts, 0.5);
    REQUIRE(m.true_positives.size() == 2);
    CHECK(m.true_positives[0].gt_index == 0u);
    CHECK(m.true_positives[1].gt_index == 1u);
    CHECK(m.false_negative_count == 1);
}

TEST_CASE("precision_recall_curve") {
    const auto single = match_detections(std::vector{det({0, 0, 1, 1}, 0.9)},
                                         std::vector{gt({0, 0, 1, 1})}, 0.5);
    CHECK(precision_recall_curve(single, 1) == PRCurve{{1.0, 1.0}});

    const auto two = match_detections(std::vector{det({0, 0, 1, 1}, 0.9), det({5, 5, 6, 6}, 0.8)},
                                      std::vector{gt({0, 0, 1, 1})}, 0.5);
    CHECK(precision_recall_curve(two, 1) == PRCurve{{1.0, 1.0}, {1.0, 0.5}});

    CHECK(precision_recall_curve(MatchResult{}, 3).empty());

    // No ground truth: recall stays 0.
    const auto none = match_detections(std::vector{det({0, 0, 1, 1}, 0.9)},
                                       std::vector<GroundTruthBox>{}, 0.5);
    CHECK(precision_recall_curve(none, 0) == PRCurve{{0.0, 0.0}});
}

TEST_CASE("average_precision") {
    CHECK(average_precision({{1.0, 1.0}}) == 1.0);
    CHECK(average_precision({}) == 0.0);
    CHECK(average_precision({{0.5, 1.0}, {1.0, 0.5}}) == doctest::Approx(0.75));
    // Interpolation lifts the dip at recall 0.5.
    CHECK(average_precision({{0.5, 0.5}, {1.0, 0.8}}) == doctest::Approx(0.8));
}

TEST_CASE("average_precision equals the Riemann-sum oracle on random curves") {
    Rng rng(99);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + rng.below(20);
        PRCurve curve;
        double r = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (rng.uniform() < 0.6) {
                r = std::min(1.0, r + rng.uniform(0.0, 0.3));
            }
            curve.push_back({r, rng.uniform()});
        }
        const double ap = average_precision(curve);
        CHECK(ap == doctest::Approx(oracle::riemann_ap(curve)).epsilon(1e-12));
        CHECK(ap >= 0.0);
        CHECK(ap <= 1.0);
    }
}

TEST_CASE("relative_error") {
    CHECK(relative_error(75, 53) == doctest::Approx(22.0 / 53.0));
    CHECK(std::round(relative_error(75, 53) * 1000) / 1000 == doctest::Approx(0.415));
    CHECK(relative_error(132, 132) == 0.0);
    CHECK(relative_error(98, 81) == doctest::Approx(0.2099).epsilon(1e-3));
    CHECK_THROWS_AS((void)relative_error(5, 0), std::domain_error);
}

TEST_CASE("matching agrees with exhaustive optimal matching on unambiguous scenes") {
    Rng rng(31);
    int checked = 0;
    while (checked < 1000) {
        const std::size_t n_gt = 1 + rng.below(4);
        const std::size_t n_pred = 1 + rng.below(6);
        std::vector<GroundTruthBox> gts;
        for (std::size_t g = 0; g < n_gt; ++g) {
            gts.push_back(gt(oracle::random_box(rng, 40.0, 15.0)));
        }
        std::vector<Detection> preds;
        for (std::size_t i = 0; i < n_pred; ++i) {
            BBox b = oracle::random_box(rng, 40.0, 15.0);
            if (rng.uniform() < 0.6) {
                const auto& target = gts[rng.below(n_gt)].box;
                const double j = rng.uniform(-2, 2);
                b = {target.x_min + j, target.y_min + j, target.x_max + j, target.y_max + j};
            }
            preds.push_back(det(b, rng.uniform()));
        }
        // Unambiguous: every prediction clears the threshold for at most one gt.
        bool ambiguous = false;
        for (const auto& p : preds) {
            int hits = 0;
            for (const auto& g : gts) {
                hits += oracle::area_iou(p.box, g.box) >= 0.5 ? 1 : 0;
            }
            ambiguous = ambiguous || hits > 1;
        }
        if (ambiguous) {
            continue;
        }
        ++checked;
        const auto m = match_detections(preds, gts, 0.5);
        CHECK(m.true_positives.size() == oracle::max_matching(preds, gts, 0.5));
        CHECK(m.true_positives.size() + m.false_positives.size() == preds.size());
        CHECK(m.true_positives.size() + m.false_negative_count == gts.size());
        // Each matched gt went to its highest-confidence candidate.
        for (const auto& tp : m.true_positives) {
            for (std::size_t i = 0; i < preds.size(); ++i) {
                if (oracle::area_iou(preds[i].box, gts[*tp.gt_index].box) >= 0.5) {
                    CHECK(preds[i].confidence <= tp.confidence);
                }
            }
        }
    }
}

TEST_CASE("evaluate_dataset") {
    SUBCASE("perfect scene") {
        const std::vector<Scene> scenes{
            {"s", {det({0, 0, 1, 1}, 0.9), det({3, 3, 4, 4}, 0.8)},
             {gt({0, 0, 1, 1}), gt({3, 3, 4, 4})}}};
        const auto r = evaluate_dataset(scenes, 0.15, 0.5);
        CHECK(r.micro_precision == 1.0);
        CHECK(r.micro_recall == 1.0);
        CHECK(r.mean_ap == 1.0);
    }
    SUBCASE("one perfect and one missed scene pool to recall 0.5") {
        const std::vector<Scene> scenes{
            {"hit", {det({0, 0, 1, 1}, 0.9)}, {gt({0, 0, 1, 1})}},
            {"miss", {}, {gt({0, 0, 1, 1})}}};
        const auto r = evaluate_dataset(scenes, 0.15, 0.5);
        CHECK(r.micro_recall == 0.5);
        CHECK(r.total_false_negatives == 1);
        CHECK(r.scenes[1].precision_undefined);
        CHECK(r.scenes[1].precision == 1.0);
        CHECK(r.mean_ap == 0.5);
    }
    SUBCASE("empty scene list") {
        const auto r = evaluate_dataset(std::vector<Scene>{}, 0.15, 0.5);
        CHECK(r.total_gt == 0);
        CHECK(r.total_predictions == 0);
        CHECK(r.micro_precision_undefined);
        CHECK(r.micro_recall_undefined);
        CHECK(r.macro_undefined);
    }
}

TEST_CASE("evaluation rates stay in range and recall falls with the threshold") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Scene> scenes(1 + rng.below(4));
        for (auto& s : scenes) {
            for (std::size_t g = rng.below(6); g > 0; --g) {
                s.ground_truth.push_back(gt(oracle::random_box(rng, 30.0, 12.0)));
            }
            for (std::size_t p = rng.below(8); p > 0; --p) {
                s.predictions.push_back(det(oracle::random_box(rng, 30.0, 12.0), rng.uniform()));
            }
        }
        double previous_recall = 2.0;
        for (double t = 0.0; t <= 1.0; t += 0.1) {
            const auto r = evaluate_dataset(scenes, t, 0.5);
            for (const auto& s : r.scenes) {
                CHECK(s.precision >= 0.0);
                CHECK(s.precision <= 1.0);
                CHECK(s.recall >= 0.0);
                CHECK(s.recall <= 1.0);
                CHECK(s.ap >= 0.0);
                CHECK(s.ap <= 1.0);
                CHECK(s.true_positives + s.false_positives == s.prediction_count);
                CHECK(s.true_positives + s.false_negatives == s.gt_count);
                for (std::size_t k = 1; k < s.curve.size(); ++k) {
                    CHECK(s.curve[k].recall >= s.curve[k - 1].recall);
                }
            }
            CHECK(r.micro_recall <= previous_recall);
            previous_recall = r.micro_recall;
        }
    }
}

TEST_CASE("parallel evaluation equals the serial reference") {
    Rng rng(404);
    std::vector<Scene> scenes(37);
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        auto& s = scenes[i];
        s.image_id = "s" + std::to_string(i);
        for (std::size_t g = rng.below(10); g > 0; --g) {
            s.ground_truth.push_back(gt(oracle::random_box(rng, 60.0, 15.0)));
        }
        for (std::size_t p = rng.below(14); p > 0; --p) {
            s.predictions.push_back(det(oracle::random_box(rng, 60.0, 15.0), rng.uniform()));
        }
    }
    const auto par = evaluate_dataset(scenes, 0.15, 0.5);
    const auto ref = serial::evaluate_dataset(scenes, 0.15, 0.5);
    REQUIRE(par.scenes.size() == ref.scenes.size());
    for (std::size_t i = 0; i < par.scenes.size(); ++i) {
        CHECK(par.scenes[i].image_id == ref.scenes[i].image_id);
        CHECK(par.scenes[i].true_positives == ref.scenes[i].true_positives);
        CHECK(par.scenes[i].ap == ref.scenes[i].ap);
        CHECK(par.scenes[i].curve == ref.scenes[i].curve);
    }
    CHECK(par.micro_precision == ref.micro_precision);
    CHECK(par.micro_recall == ref.micro_recall);
    CHECK(par.mean_ap == ref.mean_ap);
}
