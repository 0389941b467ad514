#include "pedcross/synth.hpp"

#include <cmath>
#include <numbers>

#include "pedcross/rng.hpp"

namespace pedcross {

std::string to_string(GaitKind kind) {
    switch (kind) {
        case GaitKind::WalkingLateral: return "walking_lateral";
        case GaitKind::Standing: return "standing";
        case GaitKind::StartWalking: return "start_walking";
    }
    return "standing";
}

GaitKind gait_kind_from_string(const std::string& s) {
    if (s == "walking_lateral") return GaitKind::WalkingLateral;
    if (s == "standing") return GaitKind::Standing;
    if (s == "start_walking") return GaitKind::StartWalking;
    throw UnknownLabel("not a gait kind: " + s);
}

namespace {

constexpr double kSwingAmplitude = 0.55;  // radians of leg swing
constexpr double kKneeSpread = 0.10;      // radians of stance spread
constexpr double kShoulderCounter = 0.1;  // counter-oscillation fraction

struct Pose {
    // x offsets from the body axis and y offsets from the top of the head.
    std::array<double, kSkeletonJoints> off_x{};
    std::array<double, kSkeletonJoints> off_y{};
};

// swing in [-1, 1]: sin of the gait phase; spread: knee stance angle.
Pose body_pose(const GaitParams& p, double swing, double spread) {
    const double h = p.height;
    const double thigh = p.thigh_len > 0.0 ? p.thigh_len : 0.22 * h;
    const double shank = p.shank_len > 0.0 ? p.shank_len : 0.24 * h;
    const double theta = kSwingAmplitude * swing;

    Pose pose;
    auto set = [&pose](JointId id, double x, double y) {
        pose.off_x[static_cast<std::size_t>(id)] = x;
        pose.off_y[static_cast<std::size_t>(id)] = y;
    };
    auto mirror = [&pose, &set](JointId right, JointId left, double x, double y) {
        set(right, x, y);
        // Exact negation keeps the extent symmetric about the body axis.
        set(left, -x, y);
    };

    set(JointId::Nose, 0.0, 0.08 * h);
    mirror(JointId::REye, JointId::LEye, 0.03 * h, 0.06 * h);
    mirror(JointId::REar, JointId::LEar, 0.055 * h, 0.07 * h);
    set(JointId::Neck, 0.0, 0.17 * h);

    const double arm_swing = kShoulderCounter * thigh * std::sin(theta);
    mirror(JointId::RShoulder, JointId::LShoulder, 0.11 * h - arm_swing, 0.20 * h);
    mirror(JointId::RElbow, JointId::LElbow, 0.15 * h - 1.5 * arm_swing, 0.33 * h);
    mirror(JointId::RWrist, JointId::LWrist, 0.16 * h - 2.0 * arm_swing, 0.46 * h);

    const double hip_x = 0.07 * h;
    const double hip_y = 0.52 * h;
    mirror(JointId::RHip, JointId::LHip, hip_x, hip_y);

    const double knee_x = hip_x + thigh * std::sin(theta + spread);
    const double knee_y = hip_y + thigh * std::cos(theta + spread);
    mirror(JointId::RKnee, JointId::LKnee, knee_x, knee_y);

    const double ankle_x = knee_x + shank * std::sin(theta - spread);
    const double ankle_y = knee_y + shank * std::cos(theta - spread);
    mirror(JointId::RAnkle, JointId::LAnkle, ankle_x, ankle_y);
    return pose;
}

Eigen::VectorXd identity_embedding(std::size_t pedestrian, Rng& rng) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(kEmbeddingDim);
    e(static_cast<Eigen::Index>(pedestrian % kEmbeddingDim)) = 1.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) e(i) += rng.gaussian(0.0, kEmbeddingNoiseStd);
    e.normalize();
    return e;
}

}  // namespace

SequenceData generate_sequence(std::span<const GaitParams> pedestrians, long n_frames,
                               std::uint64_t seed, const std::string& sequence_id) {
    SequenceData seq;
    seq.sequence_id = sequence_id;
    Rng base(seed);

    for (long t = 0; t < n_frames; ++t) {
        for (std::size_t ped = 0; ped < pedestrians.size(); ++ped) {
            const GaitParams& p = pedestrians[ped];
            const bool moving = p.kind == GaitKind::WalkingLateral ||
                                (p.kind == GaitKind::StartWalking && t >= p.event_frame);
            const long move_origin = p.kind == GaitKind::StartWalking ? p.event_frame : 0;

            double swing = 0.0;
            double spread = kKneeSpread;
            if (moving) {
                const long phase_index = (t - move_origin) % p.period;
                const double phi =
                    2.0 * std::numbers::pi * static_cast<double>(phase_index) / p.period;
                swing = std::sin(phi);
                // |cos| so the two neutral crossings per cycle coincide with
                // the standing stance.
                spread = kKneeSpread * std::abs(std::cos(phi));
            }
            const double axis_x =
                p.start_x + (moving ? p.speed * static_cast<double>(t - move_origin) : 0.0);

            Pose pose = body_pose(p, swing, spread);

            double min_x = 0.0, max_x = 0.0, min_y = pose.off_y[0], max_y = pose.off_y[0];
            for (std::size_t k = 0; k < kSkeletonJoints; ++k) {
                min_x = std::min(min_x, pose.off_x[k]);
                max_x = std::max(max_x, pose.off_x[k]);
                min_y = std::min(min_y, pose.off_y[k]);
                max_y = std::max(max_y, pose.off_y[k]);
            }

            Rng rng = base.child(ped).child(static_cast<std::uint64_t>(t));

            Observation obs;
            obs.frame = t;
            obs.score = 1.0;
            obs.occlusion = Occlusion::None;
            obs.gt_id = static_cast<long>(ped) + 1;

            Skeleton sk;
            for (std::size_t k = 0; k < kSkeletonJoints; ++k) {
                sk[k].x = axis_x + pose.off_x[k] + rng.gaussian(0.0, p.jitter_std);
                sk[k].y = p.start_y + pose.off_y[k] + rng.gaussian(0.0, p.jitter_std);
                sk[k].confidence = 1.0;
            }
            obs.skeleton = sk;

            // Box: skeleton extent padded by 10% on each axis; the x extent is
            // symmetric so the center advances exactly with the body axis.
            const double half_w = 1.1 * (max_x - min_x) / 2.0;
            const double mid_y = (min_y + max_y) / 2.0;
            const double half_h = 1.1 * (max_y - min_y) / 2.0;
            obs.bbox.left = axis_x - half_w;
            obs.bbox.width = 2.0 * half_w;
            obs.bbox.top = p.start_y + mid_y - half_h;
            obs.bbox.height = 2.0 * half_h;

            obs.embedding = identity_embedding(ped, rng);

            if (moving) {
                obs.action = "crossing";
                obs.direction = MotionDirection::Lateral;
            } else {
                obs.action = "standing";
            }
            seq.observations.push_back(std::move(obs));
        }
    }
    return seq;
}

SequenceData degrade(const SequenceData& stream, double drop_prob, double keypoint_drop_prob,
                     std::uint64_t seed) {
    SequenceData out;
    out.sequence_id = stream.sequence_id;
    Rng rng(mix64(seed ^ 0x64656772616465ULL));
    for (const Observation& src : stream.observations) {
        const bool drop = rng.uniform() < drop_prob;
        Observation obs = src;  // draw order is fixed, independent of outcomes
        if (obs.skeleton) {
            for (Keypoint& kp : *obs.skeleton) {
                if (rng.uniform() < keypoint_drop_prob) kp.confidence = 0.0;
            }
        }
        if (!drop) out.observations.push_back(std::move(obs));
    }
    return out;
}

}  // namespace pedcross
