#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "pedcross/dataset.hpp"

namespace pedcross {

enum class GaitKind { WalkingLateral, Standing, StartWalking };

std::string to_string(GaitKind kind);
GaitKind gait_kind_from_string(const std::string& s);

/// Parametric pedestrian. Walking legs swing sinusoidally with the given
/// period and pass through the neutral standing configuration twice per
/// cycle, so a single mid-swing frame is indistinguishable from standing.
struct GaitParams {
    GaitKind kind = GaitKind::WalkingLateral;
    long event_frame = 0;    // StartWalking: first frame of motion
    double speed = 3.0;      // pixels/frame along +x
    int period = 14;         // gait cycle length in frames
    double thigh_len = 0.0;  // pixels; 0 picks 0.22 * height
    double shank_len = 0.0;  // pixels; 0 picks 0.24 * height
    double jitter_std = 0.0; // per-keypoint Gaussian noise, pixels
    double start_x = 100.0;  // top-of-head position at frame 0
    double start_y = 50.0;
    double height = 200.0;   // head-to-ankle size, pixels
};

inline constexpr int kEmbeddingDim = 16;
inline constexpr double kEmbeddingNoiseStd = 0.05;

/// Generate a fully annotated observation stream: per pedestrian per frame an
/// 18-joint skeleton from the gait model, a box around it padded by 10%, a
/// per-identity unit embedding with seeded noise, and action tags consistent
/// with the motion.
SequenceData generate_sequence(std::span<const GaitParams> pedestrians, long n_frames,
                               std::uint64_t seed, const std::string& sequence_id = "synth");

/// Seeded stress model: drop whole detections with drop_prob and individual
/// keypoints with keypoint_drop_prob (confidence set to 0).
SequenceData degrade(const SequenceData& stream, double drop_prob, double keypoint_drop_prob,
                     std::uint64_t seed);

}  // namespace pedcross
