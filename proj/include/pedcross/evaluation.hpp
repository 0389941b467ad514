#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pedcross/label.hpp"

namespace pedcross {

struct Decision {
    CrossLabel predicted = CrossLabel::NC;
    CrossLabel truth = CrossLabel::NC;
};

/// Accuracy over a class-balanced subsample of the decisions, C positive.
struct EvalReport {
    double accuracy = 0.0;
    long tp = 0, tn = 0, fp = 0, fn = 0;  // over the balanced subset
    long n_decisions = 0;                 // balanced decisions scored
    long truth_c_total = 0;               // before balancing
    long truth_nc_total = 0;
    long per_class_balanced = 0;          // after balancing, per class
    std::uint64_t seed = 0;
};

/// Undersample the majority truth class to the minority count (seeded), then
/// Acc = (TP + TN) / (P + N) over the balanced set. The result depends only
/// on the confusion counts and the seed, not on decision order.
EvalReport balanced_accuracy(std::span<const Decision> decisions, std::uint64_t seed);

/// Per-frame crossing probabilities of one annotated pedestrian, aligned to
/// its event frame. TTE = event_frame - frame: positive before the event.
struct TrackTimeline {
    std::string sequence;
    long gt_id = 0;
    long event_frame = 0;
    std::string kind;
    std::map<long, double> p_by_frame;
};

struct TTECurvePoint {
    long tte = 0;
    double mean_p = 0.0;
    double std_p = 0.0;  // population std across sequences
    int n = 0;           // sequences contributing
    double predictability = 0.0;  // fraction of sequences with p > threshold
};

struct TTECurve {
    std::string kind;
    double threshold = 0.5;
    std::vector<TTECurvePoint> points;  // TTE descending (before -> after event)
};

/// One curve per event kind, reported only at TTE values covered by every
/// contributing sequence. Throws MissingAnnotation if a timeline has no
/// probabilities at all.
std::vector<TTECurve> tte_curves(std::span<const TrackTimeline> timelines,
                                 double threshold = 0.5);

/// Write results.csv, per-curve value files, and per-curve SVG plots (mean
/// line + std band; predictability step) under out_dir.
void emit_report(const EvalReport& report, std::span<const TTECurve> curves,
                 const std::filesystem::path& out_dir);

}  // namespace pedcross
