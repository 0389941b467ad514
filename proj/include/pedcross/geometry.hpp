#pragma once

#include <array>
#include <cstddef>

#include "pedcross/errors.hpp"

namespace pedcross {

// Image coordinates: x = column growing rightward, y = row growing downward,
// origin at the top-left corner. All pixel quantities are real-valued.

/// Axis-aligned bounding box in pixels.
struct BBox {
    double left = 0.0;
    double top = 0.0;
    double width = 0.0;
    double height = 0.0;

    double right() const { return left + width; }
    double bottom() const { return top + height; }
    double center_x() const { return left + width / 2.0; }
    double center_y() const { return top + height / 2.0; }
    double area() const { return width * height; }

    bool operator==(const BBox&) const = default;
};

/// Center/aspect/height measurement extracted from a box: the observable part
/// of the tracker state.
struct BoxMeasurement {
    double u = 0.0;       // box center column
    double v = 0.0;       // box center row
    double lambda = 0.0;  // aspect ratio width/height
    double h = 0.0;       // box height
};

/// One estimated body joint. confidence == 0 means "not observed"; x and y
/// are meaningless in that case.
struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;

    bool valid() const { return confidence > 0.0; }
};

inline constexpr std::size_t kSkeletonJoints = 18;

// Canonical 18-joint index order:
//   0 nose, 1 neck, 2 R-shoulder, 3 R-elbow, 4 R-wrist, 5 L-shoulder,
//   6 L-elbow, 7 L-wrist, 8 R-hip, 9 R-knee, 10 R-ankle, 11 L-hip,
//   12 L-knee, 13 L-ankle, 14 R-eye, 15 L-eye, 16 R-ear, 17 L-ear.
using Skeleton = std::array<Keypoint, kSkeletonJoints>;

enum class JointId : int {
    Nose = 0,
    Neck = 1,
    RShoulder = 2,
    RElbow = 3,
    RWrist = 4,
    LShoulder = 5,
    LElbow = 6,
    LWrist = 7,
    RHip = 8,
    RKnee = 9,
    RAnkle = 10,
    LHip = 11,
    LKnee = 12,
    LAnkle = 13,
    REye = 14,
    LEye = 15,
    REar = 16,
    LEar = 17,
};

/// Convert a box to the (u, v, lambda, h) measurement used by the tracker.
BoxMeasurement bbox_to_state(const BBox& b);

/// Inverse of bbox_to_state. Throws NonPositiveExtent if h <= 0 or lambda <= 0.
BBox state_to_bbox(double u, double v, double lambda, double h);
inline BBox state_to_bbox(const BoxMeasurement& m) {
    return state_to_bbox(m.u, m.v, m.lambda, m.h);
}

/// Intersection over union, in [0, 1].
double iou(const BBox& a, const BBox& b);

}  // namespace pedcross
