#include "pedcross/skeleton_features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pedcross/errors.hpp"

namespace pedcross {

SelectedKeypoints select_keypoints(const Skeleton& skeleton) {
    SelectedKeypoints out;
    for (std::size_t i = 0; i < kSelectedJoints; ++i) {
        out.points[i] = skeleton[static_cast<std::size_t>(kSelectedJointIndices[i])];
        out.valid[i] = out.points[i].valid();
    }
    return out;
}

double compute_height(const SelectedKeypoints& k) {
    double top = std::numeric_limits<double>::infinity();
    double bottom = -std::numeric_limits<double>::infinity();
    int n_valid = 0;
    for (std::size_t i = 0; i < kSelectedJoints; ++i) {
        if (!k.valid[i]) continue;
        top = std::min(top, k.points[i].y);
        bottom = std::max(bottom, k.points[i].y);
        ++n_valid;
    }
    if (n_valid < 2) throw DegenerateHeight("compute_height: fewer than 2 valid keypoints");
    const double h = bottom - top;
    if (h < 1.0) throw DegenerateHeight("compute_height: vertical extent below one pixel");
    return h;
}

namespace {

// Interior angle at vertex a of triangle (a, b, c), clamped arccos. A
// zero-length side yields 0.
double interior_angle(const Keypoint& a, const Keypoint& b, const Keypoint& c) {
    const double ux = b.x - a.x;
    const double uy = b.y - a.y;
    const double vx = c.x - a.x;
    const double vy = c.y - a.y;
    const double nu = std::hypot(ux, uy);
    const double nv = std::hypot(vx, vy);
    if (nu == 0.0 || nv == 0.0) return 0.0;
    const double cosine = std::clamp((ux * vx + uy * vy) / (nu * nv), -1.0, 1.0);
    return std::acos(cosine);
}

}  // namespace

FrameFeatures frame_features(const SelectedKeypoints& k, long source_frame) {
    const double h = compute_height(k);

    FrameFeatures out;
    out.source_frame = source_frame;
    std::size_t slot = 0;

    for (std::size_t i = 0; i < kSelectedJoints; ++i) {
        for (std::size_t j = i + 1; j < kSelectedJoints; ++j) {
            if (k.valid[i] && k.valid[j]) {
                const double dx = k.points[j].x - k.points[i].x;
                const double dy = k.points[j].y - k.points[i].y;
                const double ndx = dx / h;
                const double ndy = dy / h;
                double theta = std::atan2(dy, dx);
                if (theta == -std::numbers::pi) theta = std::numbers::pi;  // pin to (-pi, pi]
                out.values(static_cast<Eigen::Index>(slot + 0)) = ndx;
                out.values(static_cast<Eigen::Index>(slot + 1)) = ndy;
                out.values(static_cast<Eigen::Index>(slot + 2)) = std::hypot(ndx, ndy);
                out.values(static_cast<Eigen::Index>(slot + 3)) = theta;
            }
            slot += 4;
        }
    }
    for (std::size_t i = 0; i < kSelectedJoints; ++i) {
        for (std::size_t j = i + 1; j < kSelectedJoints; ++j) {
            for (std::size_t l = j + 1; l < kSelectedJoints; ++l) {
                if (k.valid[i] && k.valid[j] && k.valid[l]) {
                    out.values(static_cast<Eigen::Index>(slot + 0)) =
                        interior_angle(k.points[i], k.points[j], k.points[l]);
                    out.values(static_cast<Eigen::Index>(slot + 1)) =
                        interior_angle(k.points[j], k.points[i], k.points[l]);
                    out.values(static_cast<Eigen::Index>(slot + 2)) =
                        interior_angle(k.points[l], k.points[i], k.points[j]);
                }
                slot += 3;
            }
        }
    }
    return out;
}

WindowFeatures window_features(std::span<const FrameFeatures> buffer, std::size_t window,
                               long track_id, std::optional<CrossLabel> label) {
    if (window == 0) throw InsufficientHistory("window_features: window must be positive");
    if (buffer.size() < window) {
        throw InsufficientHistory("window_features: " + std::to_string(buffer.size()) +
                                  " frames buffered, " + std::to_string(window) + " required");
    }
    std::span<const FrameFeatures> tail = buffer.subspan(buffer.size() - window);
    for (std::size_t i = 1; i < tail.size(); ++i) {
        if (tail[i].source_frame != tail[i - 1].source_frame + 1) {
            throw InsufficientHistory("window_features: frames are not consecutive");
        }
    }

    WindowFeatures out;
    out.values.resize(static_cast<Eigen::Index>(window * kFrameFeatureDim));
    for (std::size_t i = 0; i < window; ++i) {
        out.values.segment(static_cast<Eigen::Index>(i * kFrameFeatureDim), kFrameFeatureDim) =
            tail[i].values;
    }
    out.label = label;
    out.track_id = track_id;
    out.end_frame = tail.back().source_frame;
    return out;
}

Eigen::VectorXd concat_external(const WindowFeatures& w,
                                std::span<const Eigen::VectorXd> external) {
    const std::size_t window = static_cast<std::size_t>(w.values.size()) / kFrameFeatureDim;
    if (window * kFrameFeatureDim != static_cast<std::size_t>(w.values.size())) {
        throw DimensionMismatch("concat_external: window vector is not a multiple of 396");
    }
    if (external.size() != window) {
        throw DimensionMismatch("concat_external: " + std::to_string(external.size()) +
                                " external frames for a window of " + std::to_string(window));
    }
    const Eigen::Index ext_dim = external.empty() ? 0 : external.front().size();
    for (const Eigen::VectorXd& e : external) {
        if (e.size() != ext_dim) {
            throw DimensionMismatch("concat_external: external vectors differ in dimension");
        }
    }

    Eigen::VectorXd out(static_cast<Eigen::Index>(window) * (kFrameFeatureDim + ext_dim));
    Eigen::Index cursor = 0;
    for (std::size_t i = 0; i < window; ++i) {
        out.segment(cursor, kFrameFeatureDim) =
            w.values.segment(static_cast<Eigen::Index>(i * kFrameFeatureDim), kFrameFeatureDim);
        cursor += kFrameFeatureDim;
        out.segment(cursor, ext_dim) = external[i];
        cursor += ext_dim;
    }
    return out;
}

Skeleton KeypointCarryForward::apply(const Skeleton& skeleton) {
    Skeleton out = skeleton;
    for (std::size_t i = 0; i < kSkeletonJoints; ++i) {
        if (skeleton[i].valid()) {
            last_[i] = skeleton[i];
            age_[i] = 0;
            continue;
        }
        if (age_[i] >= 0 && age_[i] < max_age_) {
            ++age_[i];
            out[i] = last_[i];
        } else {
            out[i].confidence = 0.0;
        }
    }
    return out;
}

void KeypointCarryForward::reset() {
    last_.fill(Keypoint{});
    age_.fill(-1);
}

}  // namespace pedcross
