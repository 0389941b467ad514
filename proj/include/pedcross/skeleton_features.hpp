#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <span>

#include "pedcross/geometry.hpp"
#include "pedcross/label.hpp"

namespace pedcross {

inline constexpr std::size_t kSelectedJoints = 9;

/// The stable joints feeding the classifier, in fixed order: neck,
/// R-shoulder, L-shoulder, R-hip, L-hip, R-knee, L-knee, R-ankle, L-ankle.
inline constexpr std::array<int, kSelectedJoints> kSelectedJointIndices = {1, 2, 5, 8, 11,
                                                                          9, 12, 10, 13};

inline constexpr std::size_t kPairCount = 36;     // C(9,2)
inline constexpr std::size_t kTripletCount = 84;  // C(9,3)
// Per frame: 36 pairs x (dx/h, dy/h, |v|/h, theta) then 84 triplets x 3
// interior angles.
inline constexpr std::size_t kFrameFeatureDim = kPairCount * 4 + kTripletCount * 3;  // 396

struct SelectedKeypoints {
    std::array<Keypoint, kSelectedJoints> points;
    std::array<bool, kSelectedJoints> valid;  // valid[i] <=> confidence > 0
};

using FrameFeatureVec = Eigen::Matrix<double, kFrameFeatureDim, 1>;

struct FrameFeatures {
    FrameFeatureVec values = FrameFeatureVec::Zero();
    long source_frame = 0;
};

struct WindowFeatures {
    Eigen::VectorXd values;  // 396 * T, oldest frame first
    std::optional<CrossLabel> label;
    long track_id = 0;
    long end_frame = 0;
};

SelectedKeypoints select_keypoints(const Skeleton& skeleton);

/// Vertical extent of the valid selected joints. Throws DegenerateHeight if
/// fewer than 2 joints are valid or the extent is below one pixel.
double compute_height(const SelectedKeypoints& k);

/// The 396 per-frame geometric features. Pair distances are normalized by the
/// height; angles stay in radians. Slots touching an invalid joint are zero.
FrameFeatures frame_features(const SelectedKeypoints& k, long source_frame = 0);

/// Concatenate the last `window` frames, oldest first. The buffer must hold at
/// least `window` frames with consecutive source frame indices; the label is
/// the most recent frame's.
WindowFeatures window_features(std::span<const FrameFeatures> buffer, std::size_t window,
                               long track_id, std::optional<CrossLabel> label);

/// Interleave an external per-frame feature block after each skeleton block:
/// output dimension (396 + d) * T, oldest frame first.
Eigen::VectorXd concat_external(const WindowFeatures& w,
                                std::span<const Eigen::VectorXd> external);

/// Fills joints that drop out for a few frames with their last valid
/// observation, for up to max_age consecutive frames. One instance per track;
/// feed frames in order.
class KeypointCarryForward {
public:
    explicit KeypointCarryForward(int max_age = 5) : max_age_(max_age) { reset(); }

    Skeleton apply(const Skeleton& skeleton);
    void reset();

private:
    int max_age_;
    std::array<Keypoint, kSkeletonJoints> last_{};
    std::array<int, kSkeletonJoints> age_{};  // frames since last seen; -1 = never
};

}  // namespace pedcross
