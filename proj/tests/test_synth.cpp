#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pedcross/pipeline.hpp"
#include "pedcross/skeleton_features.hpp"
#include "pedcross/synth.hpp"

using namespace pedcross;
namespace fs = std::filesystem;

namespace {

std::string serialized(const SequenceData& seq) {
    fs::path dir = fs::temp_directory_path() / "pedcross_synth_tests";
    fs::create_directories(dir);
    fs::path path = dir / "dump.jsonl";
    write_sequence(path, seq);
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("standing pedestrian without jitter repeats the same skeleton") {
    GaitParams p;
    p.kind = GaitKind::Standing;
    p.jitter_std = 0.0;
    SequenceData seq = generate_sequence({&p, 1}, 10, 1);
    REQUIRE(seq.observations.size() == 10);
    const Skeleton& first = *seq.observations[0].skeleton;
    for (const Observation& obs : seq.observations) {
        REQUIRE(obs.skeleton.has_value());
        for (std::size_t k = 0; k < kSkeletonJoints; ++k) {
            CHECK((*obs.skeleton)[k].x == first[k].x);
            CHECK((*obs.skeleton)[k].y == first[k].y);
        }
        CHECK(obs.action == "standing");
    }
}

TEST_CASE("walking box center advances by the speed") {
    GaitParams p;
    p.kind = GaitKind::WalkingLateral;
    p.speed = 3.0;
    p.jitter_std = 0.0;
    SequenceData seq = generate_sequence({&p, 1}, 30, 1);
    for (std::size_t i = 1; i < seq.observations.size(); ++i) {
        const double step = seq.observations[i].bbox.center_x() -
                            seq.observations[i - 1].bbox.center_x();
        CHECK(step == doctest::Approx(3.0).epsilon(1e-9));
    }
    CHECK(seq.observations[0].action == "crossing");
    CHECK(seq.observations[0].direction == MotionDirection::Lateral);
}

TEST_CASE("generation is deterministic per seed") {
    GaitParams walk;
    walk.jitter_std = 1.5;
    GaitParams stand;
    stand.kind = GaitKind::Standing;
    stand.start_x = 400;
    stand.jitter_std = 1.5;
    std::vector<GaitParams> peds = {walk, stand};

    SequenceData a = generate_sequence(peds, 25, 42, "det");
    SequenceData b = generate_sequence(peds, 25, 42, "det");
    CHECK(serialized(a) == serialized(b));

    SequenceData c = generate_sequence(peds, 25, 43, "det");
    CHECK(serialized(a) != serialized(c));
}

TEST_CASE("generated streams round-trip through the stream format") {
    GaitParams p;
    p.jitter_std = 2.0;
    SequenceData seq = generate_sequence({&p, 1}, 15, 7, "rt");
    fs::path dir = fs::temp_directory_path() / "pedcross_synth_tests";
    fs::create_directories(dir);
    write_sequence(dir / "rt.jsonl", seq);
    SequenceData back = read_sequence(dir / "rt.jsonl");
    CHECK(back.sequence_id == "rt");
    CHECK(back.observations.size() == seq.observations.size());
    CHECK(serialized(back) == serialized(seq));
}

TEST_CASE("walking features repeat with the gait period") {
    GaitParams p;
    p.kind = GaitKind::WalkingLateral;
    p.period = 14;
    p.jitter_std = 0.0;
    SequenceData seq = generate_sequence({&p, 1}, 40, 3);
    std::vector<FrameFeatures> features;
    for (const Observation& obs : seq.observations) {
        features.push_back(frame_features(select_keypoints(*obs.skeleton), obs.frame));
    }
    for (std::size_t t = 0; t + 14 < features.size(); ++t) {
        CHECK((features[t].values - features[t + 14].values).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("walking at a neutral crossing matches the standing pose") {
    GaitParams walk;
    walk.kind = GaitKind::WalkingLateral;
    walk.speed = 0.0;  // keep the body axis fixed for the comparison
    walk.jitter_std = 0.0;
    GaitParams stand = walk;
    stand.kind = GaitKind::Standing;

    SequenceData walking = generate_sequence({&walk, 1}, 15, 1);
    SequenceData standing = generate_sequence({&stand, 1}, 15, 1);
    // Frames 0 and period/2 are the two neutral crossings of the cycle.
    for (long frame : {0L, 7L}) {
        const Skeleton& w = *walking.observations[static_cast<std::size_t>(frame)].skeleton;
        const Skeleton& s = *standing.observations[static_cast<std::size_t>(frame)].skeleton;
        for (std::size_t k = 0; k < kSkeletonJoints; ++k) {
            CHECK(w[k].x == doctest::Approx(s[k].x).epsilon(1e-12));
            CHECK(w[k].y == doctest::Approx(s[k].y).epsilon(1e-12));
        }
    }
}

TEST_CASE("start_walking switches pose, motion, and label at the event frame") {
    GaitParams p;
    p.kind = GaitKind::StartWalking;
    p.event_frame = 10;
    p.speed = 4.0;
    p.jitter_std = 0.0;
    SequenceData seq = generate_sequence({&p, 1}, 30, 5);
    for (const Observation& obs : seq.observations) {
        if (obs.frame < 10) {
            CHECK(obs.action == "standing");
        } else {
            CHECK(obs.action == "crossing");
        }
    }
    // Stationary before the event.
    CHECK(seq.observations[9].bbox.center_x() ==
          doctest::Approx(seq.observations[0].bbox.center_x()).epsilon(1e-12));
    // Moving afterwards.
    CHECK(seq.observations[20].bbox.center_x() >
          seq.observations[10].bbox.center_x() + 30.0);
}

TEST_CASE("embeddings are unit vectors separated across identities") {
    GaitParams a;
    GaitParams b = a;
    b.start_x = 600;
    std::vector<GaitParams> peds = {a, b};
    SequenceData seq = generate_sequence(peds, 6, 9);
    for (const Observation& obs : seq.observations) {
        REQUIRE(obs.embedding.has_value());
        CHECK(obs.embedding->norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
    const Eigen::VectorXd& e1 = *seq.observations[0].embedding;
    const Eigen::VectorXd& e2 = *seq.observations[1].embedding;
    CHECK(1.0 - e1.dot(e2) > 0.5);  // near-orthogonal identities
}

TEST_CASE("degrade removes detections and keypoints at the configured rates") {
    GaitParams p;
    SequenceData seq = generate_sequence({&p, 1}, 600, 11);

    SequenceData same = degrade(seq, 0.0, 0.0, 1);
    CHECK(same.observations.size() == seq.observations.size());
    CHECK(serialized(same) == serialized(seq));

    SequenceData gone = degrade(seq, 1.0, 0.0, 1);
    CHECK(gone.observations.empty());

    SequenceData thinned = degrade(seq, 0.0, 0.3, 2);
    long dropped = 0;
    long total = 0;
    for (const Observation& obs : thinned.observations) {
        for (const Keypoint& kp : *obs.skeleton) {
            total += 1;
            if (!kp.valid()) dropped += 1;
        }
    }
    const double fraction = static_cast<double>(dropped) / static_cast<double>(total);
    CHECK(fraction == doctest::Approx(0.3).epsilon(0.07));  // 10,800 draws
}
