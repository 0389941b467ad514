#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pedcross/evaluation.hpp"
#include "pedcross/rng.hpp"

using namespace pedcross;
namespace fs = std::filesystem;

namespace {

std::vector<Decision> make_decisions(long tp, long fn, long tn, long fp) {
    std::vector<Decision> out;
    for (long i = 0; i < tp; ++i) out.push_back({CrossLabel::C, CrossLabel::C});
    for (long i = 0; i < fn; ++i) out.push_back({CrossLabel::NC, CrossLabel::C});
    for (long i = 0; i < tn; ++i) out.push_back({CrossLabel::NC, CrossLabel::NC});
    for (long i = 0; i < fp; ++i) out.push_back({CrossLabel::C, CrossLabel::NC});
    return out;
}

TrackTimeline step_timeline(const std::string& seq, long gt, long event, const std::string& kind,
                            long first, long last) {
    // Probability steps from 0 to 1 exactly at the event frame.
    TrackTimeline t;
    t.sequence = seq;
    t.gt_id = gt;
    t.event_frame = event;
    t.kind = kind;
    for (long f = first; f <= last; ++f) t.p_by_frame[f] = f >= event ? 1.0 : 0.0;
    return t;
}

}  // namespace

TEST_CASE("balanced accuracy on an already balanced set") {
    // 8 correct C, 2 wrong C, 10 correct NC... balanced at 10 per class:
    // TP=8, FN=2, TN=2, FP=8 -> Acc (8+2)/20 = 0.5.
    std::vector<Decision> decisions = make_decisions(8, 2, 2, 8);
    EvalReport r = balanced_accuracy(decisions, 1);
    CHECK(r.n_decisions == 20);
    CHECK(r.accuracy == doctest::Approx(0.5));
    CHECK(r.tp == 8);
    CHECK(r.fn == 2);
    CHECK(r.tn == 2);
    CHECK(r.fp == 8);
}

TEST_CASE("perfect predictions give accuracy one") {
    EvalReport r = balanced_accuracy(make_decisions(40, 0, 25, 0), 3);
    CHECK(r.accuracy == doctest::Approx(1.0));
    CHECK(r.n_decisions == 50);
    CHECK(r.per_class_balanced == 25);
}

TEST_CASE("paper-scale subsampling arithmetic") {
    std::vector<Decision> decisions = make_decisions(12000, 5045, 4000, 1161);
    REQUIRE(decisions.size() == 17045 + 5161);
    EvalReport r = balanced_accuracy(decisions, 7);
    CHECK(r.truth_c_total == 17045);
    CHECK(r.truth_nc_total == 5161);
    CHECK(r.per_class_balanced == 5161);
    CHECK(r.n_decisions == 10322);
    CHECK(r.tn + r.fp == 5161);
    CHECK(r.tp + r.fn == 5161);
    CHECK(r.accuracy == doctest::Approx(static_cast<double>(r.tp + r.tn) / 10322.0));
}

TEST_CASE("balanced accuracy is order-invariant given the seed") {
    std::vector<Decision> decisions = make_decisions(300, 150, 100, 50);
    EvalReport a = balanced_accuracy(decisions, 11);
    Rng rng(5);
    rng.shuffle(decisions);
    EvalReport b = balanced_accuracy(decisions, 11);
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.tp == b.tp);
    CHECK(a.fn == b.fn);
}

TEST_CASE("single-class truth is rejected") {
    CHECK_THROWS_AS(balanced_accuracy(make_decisions(5, 5, 0, 0), 1), SingleClassData);
}

TEST_CASE("tte sign convention via the step-function test") {
    std::vector<TrackTimeline> timelines;
    for (int s = 0; s < 4; ++s) {
        timelines.push_back(
            step_timeline("seq_" + std::to_string(s), 1, 50, "start_walking_to_cross", 20, 80));
    }
    std::vector<TTECurve> curves = tte_curves(timelines, 0.5);
    REQUIRE(curves.size() == 1);
    const TTECurve& curve = curves[0];
    CHECK(curve.kind == "start_walking_to_cross");
    REQUIRE_FALSE(curve.points.empty());
    CHECK(curve.points.front().tte == 30);   // descending TTE
    CHECK(curve.points.back().tte == -30);
    for (const TTECurvePoint& pt : curve.points) {
        CHECK(pt.n == 4);
        if (pt.tte > 0) {
            CHECK(pt.predictability == doctest::Approx(0.0));
            CHECK(pt.mean_p == doctest::Approx(0.0));
        } else {
            CHECK(pt.predictability == doctest::Approx(1.0));
            CHECK(pt.mean_p == doctest::Approx(1.0));
        }
        CHECK(pt.std_p == doctest::Approx(0.0));
    }
}

TEST_CASE("tte curves cover only the common support") {
    std::vector<TrackTimeline> timelines = {
        step_timeline("a", 1, 50, "start_walking_to_cross", 30, 70),
        step_timeline("b", 1, 60, "start_walking_to_cross", 45, 100),  // TTE 15..-40
    };
    std::vector<TTECurve> curves = tte_curves(timelines, 0.5);
    REQUIRE(curves.size() == 1);
    CHECK(curves[0].points.front().tte == 15);
    CHECK(curves[0].points.back().tte == -20);
}

TEST_CASE("predictability is a fraction of sequences above threshold") {
    std::vector<TrackTimeline> timelines;
    for (int s = 0; s < 14; ++s) {
        TrackTimeline t;
        t.sequence = "s" + std::to_string(s);
        t.gt_id = 1;
        t.event_frame = 10;
        t.kind = "start_walking_to_cross";
        // Half the sequences confident, half not.
        for (long f = 0; f <= 20; ++f) t.p_by_frame[f] = s < 7 ? 0.9 : 0.1;
        timelines.push_back(t);
    }
    std::vector<TTECurve> curves = tte_curves(timelines, 0.5);
    for (const TTECurvePoint& pt : curves[0].points) {
        CHECK(pt.predictability == doctest::Approx(0.5));
    }
}

TEST_CASE("predictability never increases with the threshold") {
    Rng rng(9);
    std::vector<TrackTimeline> timelines;
    for (int s = 0; s < 6; ++s) {
        TrackTimeline t;
        t.sequence = "s" + std::to_string(s);
        t.gt_id = 1;
        t.event_frame = 15;
        t.kind = "keep_walking_to_cross";
        for (long f = 0; f <= 30; ++f) t.p_by_frame[f] = rng.uniform();
        timelines.push_back(t);
    }
    std::vector<TTECurve> low = tte_curves(timelines, 0.3);
    std::vector<TTECurve> high = tte_curves(timelines, 0.7);
    REQUIRE(low[0].points.size() == high[0].points.size());
    for (std::size_t i = 0; i < low[0].points.size(); ++i) {
        CHECK(high[0].points[i].predictability <= low[0].points[i].predictability);
        CHECK(low[0].points[i].mean_p >= 0.0);
        CHECK(low[0].points[i].mean_p <= 1.0);
        CHECK(low[0].points[i].std_p >= 0.0);
    }
}

TEST_CASE("timeline without probabilities raises MissingAnnotation") {
    std::vector<TrackTimeline> timelines = {TrackTimeline{"empty", 1, 5, "keep_walking_to_cross", {}}};
    CHECK_THROWS_AS(tte_curves(timelines, 0.5), MissingAnnotation);
}

TEST_CASE("results table for a fixed report is pinned byte for byte") {
    EvalReport report;
    report.accuracy = 0.875;
    report.tp = 7;
    report.tn = 7;
    report.fp = 1;
    report.fn = 1;
    report.n_decisions = 16;
    report.truth_c_total = 20;
    report.truth_nc_total = 8;
    report.per_class_balanced = 8;
    report.seed = 5;

    fs::path dir = fs::temp_directory_path() / "pedcross_eval_tests" / "golden";
    fs::remove_all(dir);
    emit_report(report, {}, dir);
    std::ifstream in(dir / "results.csv");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content ==
          "metric,value\n"
          "accuracy,0.875\n"
          "tp,7\n"
          "tn,7\n"
          "fp,1\n"
          "fn,1\n"
          "n_decisions,16\n"
          "truth_c_total,20\n"
          "truth_nc_total,8\n"
          "per_class_balanced,8\n"
          "seed,5\n");
}

TEST_CASE("emit_report writes the table, curve values, and plots") {
    fs::path dir = fs::temp_directory_path() / "pedcross_eval_tests" / "full";
    fs::remove_all(dir);
    EvalReport report = balanced_accuracy(make_decisions(9, 1, 8, 2), 5);
    std::vector<TrackTimeline> timelines = {
        step_timeline("a", 1, 10, "start_walking_to_cross", 0, 20),
        step_timeline("b", 1, 12, "start_walking_to_cross", 2, 22),
    };
    std::vector<TTECurve> curves = tte_curves(timelines, 0.5);
    emit_report(report, curves, dir);

    CHECK(fs::exists(dir / "results.csv"));
    CHECK(fs::exists(dir / "tte_start_walking_to_cross.csv"));
    CHECK(fs::exists(dir / "tte_start_walking_to_cross_probability.svg"));
    CHECK(fs::exists(dir / "tte_start_walking_to_cross_predictability.svg"));

    std::ifstream csv(dir / "results.csv");
    std::string header, first;
    std::getline(csv, header);
    std::getline(csv, first);
    CHECK(header == "metric,value");
    CHECK(first.substr(0, 9) == "accuracy,");

    std::ifstream svg(dir / "tte_start_walking_to_cross_probability.svg");
    std::string content((std::istreambuf_iterator<char>(svg)), std::istreambuf_iterator<char>());
    CHECK(content.find("<svg") != std::string::npos);
    CHECK(content.find("</svg>") != std::string::npos);

    // One sequence only: std band has zero width but the files still render.
    fs::path dir_single = fs::temp_directory_path() / "pedcross_eval_tests" / "single";
    fs::remove_all(dir_single);
    std::vector<TrackTimeline> one = {step_timeline("a", 1, 10, "keep_walking_to_cross", 0, 20)};
    emit_report(report, tte_curves(one, 0.5), dir_single);
    CHECK(fs::exists(dir_single / "tte_keep_walking_to_cross.csv"));

    // No curves: table only.
    fs::path dir_empty = fs::temp_directory_path() / "pedcross_eval_tests" / "empty";
    fs::remove_all(dir_empty);
    emit_report(report, {}, dir_empty);
    CHECK(fs::exists(dir_empty / "results.csv"));
    CHECK_FALSE(fs::exists(dir_empty / "tte_start_walking_to_cross_probability.svg"));
}
