#include "pedcross/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "pedcross/errors.hpp"
#include "pedcross/rng.hpp"
#include "pedcross/svg.hpp"

namespace pedcross {

EvalReport balanced_accuracy(std::span<const Decision> decisions, std::uint64_t seed) {
    long correct_c = 0, wrong_c = 0, correct_nc = 0, wrong_nc = 0;
    for (const Decision& d : decisions) {
        if (d.truth == CrossLabel::C) {
            (d.predicted == CrossLabel::C ? correct_c : wrong_c) += 1;
        } else {
            (d.predicted == CrossLabel::NC ? correct_nc : wrong_nc) += 1;
        }
    }
    const long total_c = correct_c + wrong_c;
    const long total_nc = correct_nc + wrong_nc;
    if (total_c == 0 || total_nc == 0) {
        throw SingleClassData("balanced_accuracy: both truth classes must be present");
    }

    EvalReport report;
    report.seed = seed;
    report.truth_c_total = total_c;
    report.truth_nc_total = total_nc;
    report.per_class_balanced = std::min(total_c, total_nc);

    // Sample the majority class from a canonical pool (correct items first),
    // so the outcome depends only on the confusion counts and the seed.
    const bool c_major = total_c >= total_nc;
    const long major_total = c_major ? total_c : total_nc;
    const long major_correct = c_major ? correct_c : correct_nc;
    Rng rng(mix64(seed ^ 0x62616c616e636564ULL));
    std::vector<std::size_t> picked = rng.sample_without_replacement(
        static_cast<std::size_t>(major_total), static_cast<std::size_t>(report.per_class_balanced));
    long kept_correct = 0;
    for (std::size_t idx : picked) {
        if (static_cast<long>(idx) < major_correct) ++kept_correct;
    }
    const long kept_wrong = report.per_class_balanced - kept_correct;

    if (c_major) {
        report.tp = kept_correct;
        report.fn = kept_wrong;
        report.tn = correct_nc;
        report.fp = wrong_nc;
    } else {
        report.tn = kept_correct;
        report.fp = kept_wrong;
        report.tp = correct_c;
        report.fn = wrong_c;
    }
    report.n_decisions = 2 * report.per_class_balanced;
    report.accuracy =
        static_cast<double>(report.tp + report.tn) / static_cast<double>(report.n_decisions);
    return report;
}

std::vector<TTECurve> tte_curves(std::span<const TrackTimeline> timelines, double threshold) {
    std::vector<std::string> kinds;
    for (const TrackTimeline& t : timelines) {
        if (t.p_by_frame.empty()) {
            throw MissingAnnotation("tte_curves: no probabilities for " + t.sequence + "#" +
                                    std::to_string(t.gt_id));
        }
        if (std::find(kinds.begin(), kinds.end(), t.kind) == kinds.end()) kinds.push_back(t.kind);
    }
    std::sort(kinds.begin(), kinds.end());

    std::vector<TTECurve> curves;
    for (const std::string& kind : kinds) {
        std::vector<const TrackTimeline*> group;
        for (const TrackTimeline& t : timelines) {
            if (t.kind == kind) group.push_back(&t);
        }

        // TTE values covered by every contributing sequence.
        std::set<long> common;
        for (std::size_t i = 0; i < group.size(); ++i) {
            std::set<long> mine;
            for (const auto& [frame, p] : group[i]->p_by_frame) {
                mine.insert(group[i]->event_frame - frame);
            }
            if (i == 0) {
                common = std::move(mine);
            } else {
                std::set<long> kept;
                std::ranges::set_intersection(common, mine, std::inserter(kept, kept.begin()));
                common = std::move(kept);
            }
        }

        TTECurve curve;
        curve.kind = kind;
        curve.threshold = threshold;
        for (auto it = common.rbegin(); it != common.rend(); ++it) {  // TTE descending
            const long tte = *it;
            double sum = 0.0;
            double sum_sq = 0.0;
            int above = 0;
            for (const TrackTimeline* t : group) {
                const double p = t->p_by_frame.at(t->event_frame - tte);
                sum += p;
                sum_sq += p * p;
                if (p > threshold) ++above;
            }
            TTECurvePoint point;
            point.tte = tte;
            point.n = static_cast<int>(group.size());
            point.mean_p = sum / point.n;
            point.std_p = std::sqrt(std::max(0.0, sum_sq / point.n - point.mean_p * point.mean_p));
            point.predictability = static_cast<double>(above) / point.n;
            curve.points.push_back(point);
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

namespace {

std::string csv_num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void emit_report(const EvalReport& report, std::span<const TTECurve> curves,
                 const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string());

    std::string table;
    table += "metric,value\n";
    table += "accuracy," + csv_num(report.accuracy) + "\n";
    table += "tp," + std::to_string(report.tp) + "\n";
    table += "tn," + std::to_string(report.tn) + "\n";
    table += "fp," + std::to_string(report.fp) + "\n";
    table += "fn," + std::to_string(report.fn) + "\n";
    table += "n_decisions," + std::to_string(report.n_decisions) + "\n";
    table += "truth_c_total," + std::to_string(report.truth_c_total) + "\n";
    table += "truth_nc_total," + std::to_string(report.truth_nc_total) + "\n";
    table += "per_class_balanced," + std::to_string(report.per_class_balanced) + "\n";
    table += "seed," + std::to_string(report.seed) + "\n";
    write_file(out_dir / "results.csv", table);

    for (const TTECurve& curve : curves) {
        std::string values;
        values += "tte,mean_p,std_p,n,predictability\n";
        for (const TTECurvePoint& pt : curve.points) {
            values += std::to_string(pt.tte) + "," + csv_num(pt.mean_p) + "," + csv_num(pt.std_p) +
                      "," + std::to_string(pt.n) + "," + csv_num(pt.predictability) + "\n";
        }
        write_file(out_dir / ("tte_" + curve.kind + ".csv"), values);

        if (curve.points.empty()) continue;
        const double tte_max = static_cast<double>(curve.points.front().tte);
        const double tte_min = static_cast<double>(curve.points.back().tte);

        LineChart prob("crossing probability vs TTE (" + curve.kind + ")",
                       "time to event [frames]", "p(crossing)");
        prob.set_x_domain(tte_max, tte_min);  // before the event on the left
        prob.set_y_domain(0.0, 1.0);
        LineChart::Points mean, lower, upper;
        for (const TTECurvePoint& pt : curve.points) {
            const double x = static_cast<double>(pt.tte);
            mean.emplace_back(x, pt.mean_p);
            lower.emplace_back(x, std::max(0.0, pt.mean_p - pt.std_p));
            upper.emplace_back(x, std::min(1.0, pt.mean_p + pt.std_p));
        }
        prob.add_band(lower, upper, "#aecbe8");
        prob.add_line(mean, "#1f4e9e");
        if (tte_min <= 0.0 && tte_max >= 0.0) prob.add_vline(0.0, "#888888");
        write_file(out_dir / ("tte_" + curve.kind + "_probability.svg"), prob.render());

        LineChart pred("predictability vs TTE (" + curve.kind + ")", "time to event [frames]",
                       "predictability");
        pred.set_x_domain(tte_max, tte_min);
        pred.set_y_domain(0.0, 1.0);
        LineChart::Points steps;
        for (const TTECurvePoint& pt : curve.points) {
            steps.emplace_back(static_cast<double>(pt.tte), pt.predictability);
        }
        pred.add_step(steps, "#b03030");
        if (tte_min <= 0.0 && tte_max >= 0.0) pred.add_vline(0.0, "#888888");
        write_file(out_dir / ("tte_" + curve.kind + "_predictability.svg"), pred.render());
    }
}

}  // namespace pedcross
