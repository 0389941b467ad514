#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pedcross/geometry.hpp"
#include "pedcross/label.hpp"

namespace pedcross {

enum class Occlusion { None, Partial, Heavy };
enum class MotionDirection { Lateral, Longitudinal };

std::string to_string(Occlusion o);
Occlusion occlusion_from_string(const std::string& s);
std::string to_string(MotionDirection d);
MotionDirection motion_direction_from_string(const std::string& s);

/// Lifecycle status of a track; carried on tracked streams so downstream
/// stages can restrict themselves to consolidated pedestrians.
enum class TrackStatus { Tentative, Confirmed, Ended };
std::string to_string(TrackStatus s);
TrackStatus track_status_from_string(const std::string& s);

/// One detected pedestrian in one frame.
struct Observation {
    long frame = 0;
    BBox bbox;
    double score = 1.0;
    std::optional<Skeleton> skeleton;
    std::optional<Eigen::VectorXd> embedding;
    std::optional<long> gt_id;
    std::optional<std::string> action;
    std::optional<MotionDirection> direction;
    Occlusion occlusion = Occlusion::None;
    // Filled by the tracking stage.
    std::optional<long> track_id;
    std::optional<TrackStatus> track_status;
};

struct SequenceData {
    std::string sequence_id;
    std::vector<Observation> observations;  // frames nondecreasing

    long first_frame() const { return observations.empty() ? 0 : observations.front().frame; }
    long last_frame() const { return observations.empty() ? -1 : observations.back().frame; }
};

/// Time-to-event annotation for one pedestrian in one sequence. event_frame
/// is the frame where TTE = 0.
struct TTEAnnotation {
    std::string sequence;
    long gt_id = 0;
    long event_frame = 0;
    std::string kind;  // "keep_walking_to_cross" | "start_walking_to_cross"
};

inline constexpr int kStreamFormatVersion = 1;
inline constexpr int kTteFormatVersion = 1;
inline constexpr double kMinTrainBoxWidth = 60.0;

/// Map a raw dataset action tag to C/NC. "crossing" maps to C, as do
/// clear-path / moving-fast / moving-slow / slow-down / speed-up when the
/// pedestrian moves laterally; everything else is NC. In strict mode an
/// unrecognized tag raises UnknownLabel instead.
CrossLabel map_label(const std::string& action, std::optional<MotionDirection> direction,
                     bool strict = false);

/// True when every frame of the window has box width >= min_width and no
/// occlusion.
bool window_eligible(std::span<const Observation> frames, double min_width = kMinTrainBoxWidth);

/// Keep windows whose every frame passes the width / occlusion rule.
std::vector<std::span<const Observation>> filter_training_samples(
    const std::vector<std::span<const Observation>>& windows,
    double min_width = kMinTrainBoxWidth);

/// Undersample the majority class uniformly at random (seeded) down to the
/// minority count. Returns the kept indices in ascending order. Throws
/// SingleClassData when only one class is present.
std::vector<std::size_t> balance_classes(std::span<const CrossLabel> labels, std::uint64_t seed);

// Line-delimited stream I/O. One JSON object per line; the first line is a
// header carrying the format version and the sequence id.
SequenceData read_sequence(const std::filesystem::path& path);
void write_sequence(const std::filesystem::path& path, const SequenceData& sequence);

std::vector<TTEAnnotation> read_tte_annotations(const std::filesystem::path& path);
void write_tte_annotations(const std::filesystem::path& path,
                           std::span<const TTEAnnotation> annotations);

}  // namespace pedcross
