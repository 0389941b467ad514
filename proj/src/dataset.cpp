#include "pedcross/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pedcross/rng.hpp"

namespace pedcross {

using nlohmann::json;

std::string to_string(Occlusion o) {
    switch (o) {
        case Occlusion::None: return "none";
        case Occlusion::Partial: return "partial";
        case Occlusion::Heavy: return "heavy";
    }
    return "none";
}

Occlusion occlusion_from_string(const std::string& s) {
    if (s == "none") return Occlusion::None;
    if (s == "partial") return Occlusion::Partial;
    if (s == "heavy") return Occlusion::Heavy;
    throw UnknownLabel("not an occlusion tag: " + s);
}

std::string to_string(MotionDirection d) {
    return d == MotionDirection::Lateral ? "lateral" : "longitudinal";
}

MotionDirection motion_direction_from_string(const std::string& s) {
    if (s == "lateral") return MotionDirection::Lateral;
    if (s == "longitudinal") return MotionDirection::Longitudinal;
    throw UnknownLabel("not a motion direction: " + s);
}

std::string to_string(TrackStatus s) {
    switch (s) {
        case TrackStatus::Tentative: return "tentative";
        case TrackStatus::Confirmed: return "confirmed";
        case TrackStatus::Ended: return "ended";
    }
    return "tentative";
}

TrackStatus track_status_from_string(const std::string& s) {
    if (s == "tentative") return TrackStatus::Tentative;
    if (s == "confirmed") return TrackStatus::Confirmed;
    if (s == "ended") return TrackStatus::Ended;
    throw UnknownLabel("not a track status: " + s);
}

namespace {

const std::set<std::string>& lateral_crossing_tags() {
    static const std::set<std::string> tags = {
        "clear-path", "moving-fast", "moving-slow", "slow-down", "speed-up"};
    return tags;
}

// Action vocabulary accepted in strict mode.
const std::set<std::string>& known_action_tags() {
    static const std::set<std::string> tags = {
        "crossing",  "clear-path", "moving-fast", "moving-slow", "slow-down",
        "speed-up",  "standing",   "stopped",     "walking",     "looking",
        "not-looking", "handwave", "nod"};
    return tags;
}

}  // namespace

CrossLabel map_label(const std::string& action, std::optional<MotionDirection> direction,
                     bool strict) {
    if (action.empty()) throw UnknownLabel("empty action tag");
    if (action == "crossing") return CrossLabel::C;
    if (lateral_crossing_tags().count(action) > 0) {
        return (direction && *direction == MotionDirection::Lateral) ? CrossLabel::C
                                                                     : CrossLabel::NC;
    }
    if (strict && known_action_tags().count(action) == 0) {
        throw UnknownLabel("unknown action tag: " + action);
    }
    return CrossLabel::NC;
}

bool window_eligible(std::span<const Observation> frames, double min_width) {
    for (const Observation& obs : frames) {
        if (obs.bbox.width < min_width) return false;
        if (obs.occlusion != Occlusion::None) return false;
    }
    return true;
}

std::vector<std::span<const Observation>> filter_training_samples(
    const std::vector<std::span<const Observation>>& windows, double min_width) {
    std::vector<std::span<const Observation>> kept;
    kept.reserve(windows.size());
    for (const auto& w : windows) {
        if (window_eligible(w, min_width)) kept.push_back(w);
    }
    return kept;
}

std::vector<std::size_t> balance_classes(std::span<const CrossLabel> labels, std::uint64_t seed) {
    std::vector<std::size_t> c_idx;
    std::vector<std::size_t> nc_idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == CrossLabel::C ? c_idx : nc_idx).push_back(i);
    }
    if (c_idx.empty() || nc_idx.empty()) {
        throw SingleClassData("balance_classes: both classes must be present");
    }
    std::vector<std::size_t>& majority = c_idx.size() >= nc_idx.size() ? c_idx : nc_idx;
    const std::size_t target = std::min(c_idx.size(), nc_idx.size());

    Rng rng(seed);
    std::vector<std::size_t> chosen = rng.sample_without_replacement(majority.size(), target);
    std::vector<std::size_t> kept;
    kept.reserve(2 * target);
    for (std::size_t pos : chosen) kept.push_back(majority[pos]);
    const std::vector<std::size_t>& minority = c_idx.size() >= nc_idx.size() ? nc_idx : c_idx;
    kept.insert(kept.end(), minority.begin(), minority.end());
    std::sort(kept.begin(), kept.end());
    return kept;
}

namespace {

json observation_to_json(const Observation& obs) {
    json j;
    j["frame"] = obs.frame;
    j["box"] = {obs.bbox.left, obs.bbox.top, obs.bbox.width, obs.bbox.height};
    j["score"] = obs.score;
    if (obs.occlusion != Occlusion::None) j["occlusion"] = to_string(obs.occlusion);
    if (obs.skeleton) {
        json flat = json::array();
        for (const Keypoint& kp : *obs.skeleton) {
            flat.push_back(kp.x);
            flat.push_back(kp.y);
            flat.push_back(kp.confidence);
        }
        j["skeleton"] = std::move(flat);
    }
    if (obs.embedding) {
        json vec = json::array();
        for (Eigen::Index i = 0; i < obs.embedding->size(); ++i) vec.push_back((*obs.embedding)(i));
        j["embedding"] = std::move(vec);
    }
    if (obs.gt_id) j["gt_id"] = *obs.gt_id;
    if (obs.action) j["action"] = *obs.action;
    if (obs.direction) j["direction"] = to_string(*obs.direction);
    if (obs.track_id) j["track_id"] = *obs.track_id;
    if (obs.track_status) j["track_status"] = to_string(*obs.track_status);
    return j;
}

Observation observation_from_json(const json& j, long line_no) {
    Observation obs;
    try {
        obs.frame = j.at("frame").get<long>();
        if (obs.frame < 0) throw ParseError("negative frame index", line_no);
        const auto& box = j.at("box");
        if (!box.is_array() || box.size() != 4) throw ParseError("box must have 4 entries", line_no);
        obs.bbox = BBox{box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                        box[3].get<double>()};
        if (obs.bbox.width <= 0.0 || obs.bbox.height <= 0.0) {
            throw ParseError("box extents must be positive", line_no);
        }
        obs.score = j.value("score", 1.0);
        if (obs.score < 0.0 || obs.score > 1.0) throw ParseError("score outside [0,1]", line_no);
        if (j.contains("occlusion")) obs.occlusion = occlusion_from_string(j["occlusion"]);
        if (j.contains("skeleton")) {
            const auto& flat = j["skeleton"];
            if (!flat.is_array() || flat.size() != 3 * kSkeletonJoints) {
                throw ParseError("skeleton must have 54 entries", line_no);
            }
            Skeleton sk;
            for (std::size_t k = 0; k < kSkeletonJoints; ++k) {
                sk[k].x = flat[3 * k + 0].get<double>();
                sk[k].y = flat[3 * k + 1].get<double>();
                sk[k].confidence = flat[3 * k + 2].get<double>();
                if (sk[k].confidence < 0.0 || sk[k].confidence > 1.0) {
                    throw ParseError("keypoint confidence outside [0,1]", line_no);
                }
            }
            obs.skeleton = sk;
        }
        if (j.contains("embedding")) {
            const auto& vec = j["embedding"];
            Eigen::VectorXd emb(static_cast<Eigen::Index>(vec.size()));
            for (std::size_t k = 0; k < vec.size(); ++k) {
                emb(static_cast<Eigen::Index>(k)) = vec[k].get<double>();
            }
            obs.embedding = std::move(emb);
        }
        if (j.contains("gt_id")) obs.gt_id = j["gt_id"].get<long>();
        if (j.contains("action")) obs.action = j["action"].get<std::string>();
        if (j.contains("direction")) obs.direction = motion_direction_from_string(j["direction"]);
        if (j.contains("track_id")) obs.track_id = j["track_id"].get<long>();
        if (j.contains("track_status")) {
            obs.track_status = track_status_from_string(j["track_status"]);
        }
    } catch (const ParseError&) {
        throw;
    } catch (const json::exception& e) {
        throw ParseError(e.what(), line_no);
    } catch (const UnknownLabel& e) {
        throw ParseError(e.what(), line_no);
    }
    return obs;
}

json parse_line(const std::string& line, long line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("malformed record", line_no);
    return j;
}

}  // namespace

SequenceData read_sequence(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    SequenceData seq;
    std::string line;
    long line_no = 0;
    bool saw_header = false;
    long prev_frame = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, line_no);
        if (!saw_header) {
            if (!j.contains("pedcross_stream")) {
                throw SchemaVersionMismatch("missing stream header in " + path.string());
            }
            int version = j["pedcross_stream"].get<int>();
            if (version != kStreamFormatVersion) {
                throw SchemaVersionMismatch("unsupported stream version " +
                                            std::to_string(version));
            }
            seq.sequence_id = j.value("sequence", path.stem().string());
            saw_header = true;
            continue;
        }
        Observation obs = observation_from_json(j, line_no);
        if (obs.frame < prev_frame) {
            throw NonMonotonicFrameIndex("line " + std::to_string(line_no) +
                                         ": frame indices must be nondecreasing");
        }
        prev_frame = obs.frame;
        seq.observations.push_back(std::move(obs));
    }
    if (!saw_header && line_no > 0) {
        throw SchemaVersionMismatch("missing stream header in " + path.string());
    }
    return seq;
}

void write_sequence(const std::filesystem::path& path, const SequenceData& sequence) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    json header;
    header["pedcross_stream"] = kStreamFormatVersion;
    header["sequence"] = sequence.sequence_id;
    out << header.dump() << '\n';
    for (const Observation& obs : sequence.observations) {
        out << observation_to_json(obs).dump() << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<TTEAnnotation> read_tte_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<TTEAnnotation> out;
    std::string line;
    long line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, line_no);
        if (!saw_header) {
            if (!j.contains("pedcross_tte")) {
                throw SchemaVersionMismatch("missing TTE header in " + path.string());
            }
            if (j["pedcross_tte"].get<int>() != kTteFormatVersion) {
                throw SchemaVersionMismatch("unsupported TTE version");
            }
            saw_header = true;
            continue;
        }
        try {
            TTEAnnotation a;
            a.sequence = j.at("sequence").get<std::string>();
            a.gt_id = j.at("gt_id").get<long>();
            a.event_frame = j.at("event_frame").get<long>();
            a.kind = j.at("kind").get<std::string>();
            if (a.kind != "keep_walking_to_cross" && a.kind != "start_walking_to_cross") {
                throw ParseError("unknown TTE event kind: " + a.kind, line_no);
            }
            out.push_back(std::move(a));
        } catch (const json::exception& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return out;
}

void write_tte_annotations(const std::filesystem::path& path,
                           std::span<const TTEAnnotation> annotations) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    json header;
    header["pedcross_tte"] = kTteFormatVersion;
    out << header.dump() << '\n';
    for (const TTEAnnotation& a : annotations) {
        json j;
        j["sequence"] = a.sequence;
        j["gt_id"] = a.gt_id;
        j["event_frame"] = a.event_frame;
        j["kind"] = a.kind;
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace pedcross
