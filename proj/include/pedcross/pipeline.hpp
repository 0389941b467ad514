#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pedcross/dataset.hpp"
#include "pedcross/evaluation.hpp"
#include "pedcross/random_forest.hpp"
#include "pedcross/skeleton_features.hpp"
#include "pedcross/tracker.hpp"

namespace pedcross {

enum class FeatureChannels { Skeleton, External, Both };
std::string to_string(FeatureChannels c);
FeatureChannels feature_channels_from_string(const std::string& s);

struct PipelineConfig {
    int window = 14;                  // T
    double threshold = 0.5;           // decision threshold on p(crossing)
    FeatureChannels channels = FeatureChannels::Skeleton;
    int min_history = 0;              // frames of history required to decide; 0 -> T
    int carry_forward = 5;            // frames a dropped keypoint is carried
    double min_train_width = kMinTrainBoxWidth;
    std::uint64_t seed = 42;
    int workers = 1;
    TrackerConfig tracker;
    int n_trees = 400;
    int max_depth = 15;
    bool use_grid = false;
    GridSpec grid;

    int history_needed() const { return min_history > 0 ? std::max(min_history, window) : window; }
};

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& config);

/// A maximal run of consecutive frames belonging to one identity.
struct TrackSeries {
    long id = 0;  // ground-truth id or tracker id, depending on grouping
    std::vector<Observation> frames;
    std::vector<TrackStatus> status;  // parallel to frames; Confirmed for gt series
};

/// Group a stream into consecutive per-identity runs, by tracker id or by
/// ground-truth id.
std::vector<TrackSeries> group_series(const SequenceData& stream, bool by_ground_truth);

/// Per-frame 396-dim features for a series, with carry-forward fill of
/// dropped keypoints. Frames with no usable skeleton yield zero vectors.
std::vector<FrameFeatures> series_features(const TrackSeries& series, int carry_forward);

/// Label every observation of the stream with a track id and lifecycle
/// status, stepping the tracker over every frame of the span (missed frames
/// age the tracks).
SequenceData run_track(const SequenceData& input, const PipelineConfig& config);

struct TrainReport {
    long streams = 0;
    long windows_built = 0;
    long windows_eligible = 0;
    long windows_labeled = 0;
    long class_c_before = 0;
    long class_nc_before = 0;
    long per_class_after = 0;
    int n_trees = 0;
    int max_depth = 0;
    int feature_dim = 0;
    std::optional<GridSearchResult> grid;
};

struct TrainOutput {
    ForestModel model;
    TrainReport report;
};

/// Build windows from ground-truth tracks (filter, label by the most recent
/// frame, balance classes), then train the forest; grid search when
/// configured.
TrainOutput run_train(std::span<const SequenceData> streams, const PipelineConfig& config);

struct PredictionRow {
    long frame = 0;
    long track_id = 0;
    std::optional<long> gt_id;
    BBox bbox;
    std::optional<double> p;  // empty for undecided rows
    std::string decision;     // "C" | "NC" | "undecided"
};

struct PredictionStream {
    std::string sequence_id;
    int window = 0;
    std::string channels;
    double threshold = 0.5;
    std::vector<PredictionRow> rows;  // ordered by (frame, track_id)
};

/// Emit p(crossing) and a decision for every confirmed track at every frame
/// with enough consecutive history; shorter histories yield "undecided"
/// rows. Input streams without track ids are tracked in-memory first.
PredictionStream run_predict(const SequenceData& input, const ForestModel& model,
                             const PipelineConfig& config);

PredictionStream read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, const PredictionStream& predictions);

struct EvalOutput {
    EvalReport report;
    std::vector<TTECurve> curves;
    long undecided = 0;
    long skipped_no_gt = 0;       // decided rows without ground-truth identity
    long skipped_unlabeled = 0;   // decided rows whose frame has no action tag
    long missing_annotations = 0; // TTE annotations without any decided frame
    std::vector<std::string> warnings;
};

/// Join decisions against ground truth (annotated pedestrians only), compute
/// the balanced accuracy and the TTE curves.
EvalOutput run_eval(std::span<const PredictionStream> predictions,
                    std::span<const SequenceData> truth,
                    std::span<const TTEAnnotation> annotations, const PipelineConfig& config);

}  // namespace pedcross
