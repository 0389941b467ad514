#pragma once

#include <Eigen/Dense>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "pedcross/dataset.hpp"
#include "pedcross/kalman.hpp"

namespace pedcross {

/// Cosine distance 1 - a.b / (|a||b|), in [0, 2]. Throws DimensionMismatch or
/// ZeroVector.
double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct TrackerConfig {
    int confirm_hits = 3;          // consecutive matches before a track is consolidated
    int max_misses = 30;           // consecutive misses before a track ends
    double appearance_gate = 0.2;  // cosine-distance gate
    double iou_gate = 0.7;         // gate on 1 - iou when embeddings are absent
    int gallery_size = 100;        // bounded FIFO of appearance vectors per track
    KalmanNoise noise;
};

struct TrackFrameRecord {
    long frame = 0;
    BBox bbox;
    std::optional<Skeleton> skeleton;
};

struct Track {
    long id = 0;
    KalmanState state;
    TrackStatus status = TrackStatus::Tentative;
    int hits = 0;    // consecutive matches
    int misses = 0;  // consecutive misses
    std::deque<Eigen::VectorXd> gallery;
    std::vector<TrackFrameRecord> history;  // matched frames only
};

/// Multi-pedestrian tracking by detection. Stateful and frame-ordered; one
/// instance per sequence. Distinct sequences can be tracked concurrently on
/// independent instances.
class Tracker {
public:
    Tracker() = default;
    explicit Tracker(const TrackerConfig& config);

    struct StepResult {
        // Parallel to the observations passed in: assigned track id and the
        // track's status after the step.
        std::vector<long> track_ids;
        std::vector<TrackStatus> track_status;
    };

    /// Process one frame. Frame indices must be strictly increasing across
    /// calls; pass an empty span for frames without detections so misses age
    /// in frame units.
    StepResult step(long frame, std::span<const Observation> observations);

    const std::vector<Track>& tracks() const { return tracks_; }
    const std::vector<Track>& ended_tracks() const { return ended_; }

private:
    double pair_cost(const Track& track, const Observation& obs, double* gate) const;
    void match_stage(const std::vector<std::size_t>& track_idx,
                     std::vector<std::size_t>& det_idx,
                     std::span<const Observation> observations,
                     std::vector<std::size_t>& matched_tracks,
                     std::vector<long>& det_track_id);

    TrackerConfig config_;
    KalmanFilter filter_;
    std::vector<Track> tracks_;
    std::vector<Track> ended_;
    long next_id_ = 1;
    long last_frame_ = -1;
    bool started_ = false;
};

}  // namespace pedcross
