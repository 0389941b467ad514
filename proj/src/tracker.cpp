#include "pedcross/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "pedcross/assignment.hpp"
#include "pedcross/errors.hpp"

namespace pedcross {

double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("cosine_distance: vectors of size " + std::to_string(a.size()) +
                                " and " + std::to_string(b.size()));
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine_distance: zero-norm vector");
    return 1.0 - a.dot(b) / (na * nb);
}

Tracker::Tracker(const TrackerConfig& config) : config_(config), filter_(config.noise) {}

namespace {

bool has_usable_embedding(const Observation& obs) {
    return obs.embedding && obs.embedding->size() > 0 && obs.embedding->norm() > 0.0;
}

constexpr double kUnmatchableCost = 1e9;  // always above any gate

}  // namespace

double Tracker::pair_cost(const Track& track, const Observation& obs, double* gate) const {
    if (!track.gallery.empty() && has_usable_embedding(obs)) {
        double best = std::numeric_limits<double>::infinity();
        for (const Eigen::VectorXd& g : track.gallery) {
            if (g.size() != obs.embedding->size()) continue;
            best = std::min(best, cosine_distance(g, *obs.embedding));
        }
        if (std::isfinite(best)) {
            *gate = config_.appearance_gate;
            return best;
        }
    }
    // No appearance available on one side: overlap cost against the predicted box.
    *gate = config_.iou_gate;
    const double h = track.state.mean(3);
    const double lambda = track.state.mean(2);
    if (h <= 0.0 || lambda <= 0.0) return kUnmatchableCost;
    return 1.0 - iou(track.state.bbox(), obs.bbox);
}

void Tracker::match_stage(const std::vector<std::size_t>& track_idx,
                          std::vector<std::size_t>& det_idx,
                          std::span<const Observation> observations,
                          std::vector<std::size_t>& matched_tracks,
                          std::vector<long>& det_track_id) {
    if (track_idx.empty() || det_idx.empty()) return;

    Eigen::MatrixXd cost(static_cast<Eigen::Index>(track_idx.size()),
                         static_cast<Eigen::Index>(det_idx.size()));
    Eigen::MatrixXd gates(cost.rows(), cost.cols());
    for (std::size_t r = 0; r < track_idx.size(); ++r) {
        for (std::size_t c = 0; c < det_idx.size(); ++c) {
            double gate = 0.0;
            cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                pair_cost(tracks_[track_idx[r]], observations[det_idx[c]], &gate);
            gates(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = gate;
        }
    }

    Assignment result = assign_gated(cost, gates);
    std::vector<std::size_t> consumed;
    for (auto [r, c] : result.matches) {
        Track& track = tracks_[track_idx[static_cast<std::size_t>(r)]];
        const Observation& obs = observations[det_idx[static_cast<std::size_t>(c)]];
        track.state = filter_.update(track.state, bbox_to_state(obs.bbox));
        track.hits += 1;
        track.misses = 0;
        if (has_usable_embedding(obs)) {
            track.gallery.push_back(*obs.embedding);
            while (static_cast<int>(track.gallery.size()) > config_.gallery_size) {
                track.gallery.pop_front();
            }
        }
        track.history.push_back({last_frame_, obs.bbox, obs.skeleton});
        matched_tracks.push_back(track_idx[static_cast<std::size_t>(r)]);
        det_track_id[det_idx[static_cast<std::size_t>(c)]] = track.id;
        consumed.push_back(det_idx[static_cast<std::size_t>(c)]);
    }
    std::erase_if(det_idx, [&](std::size_t d) {
        return std::find(consumed.begin(), consumed.end(), d) != consumed.end();
    });
}

Tracker::StepResult Tracker::step(long frame, std::span<const Observation> observations) {
    if (started_ && frame <= last_frame_) {
        throw NonMonotonicFrameIndex("tracker step: frame " + std::to_string(frame) +
                                     " after frame " + std::to_string(last_frame_));
    }
    for (const Observation& obs : observations) {
        if (obs.frame != frame) {
            throw NonMonotonicFrameIndex("tracker step: observation from frame " +
                                         std::to_string(obs.frame) + " passed for frame " +
                                         std::to_string(frame));
        }
    }
    started_ = true;
    last_frame_ = frame;

    for (Track& track : tracks_) track.state = filter_.predict(track.state);

    std::vector<std::size_t> confirmed;
    std::vector<std::size_t> tentative;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        (tracks_[i].status == TrackStatus::Confirmed ? confirmed : tentative).push_back(i);
    }
    std::vector<std::size_t> det_idx(observations.size());
    for (std::size_t i = 0; i < det_idx.size(); ++i) det_idx[i] = i;

    std::vector<long> det_track_id(observations.size(), -1);
    std::vector<std::size_t> matched_tracks;
    match_stage(confirmed, det_idx, observations, matched_tracks, det_track_id);
    match_stage(tentative, det_idx, observations, matched_tracks, det_track_id);

    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        if (std::find(matched_tracks.begin(), matched_tracks.end(), i) == matched_tracks.end()) {
            tracks_[i].misses += 1;
            tracks_[i].hits = 0;
        }
    }

    for (std::size_t d : det_idx) {
        const Observation& obs = observations[d];
        Track track;
        track.id = next_id_++;
        track.state = filter_.init(bbox_to_state(obs.bbox));
        track.status = TrackStatus::Tentative;
        track.hits = 1;
        track.misses = 0;
        if (has_usable_embedding(obs)) track.gallery.push_back(*obs.embedding);
        track.history.push_back({frame, obs.bbox, obs.skeleton});
        det_track_id[d] = track.id;
        tracks_.push_back(std::move(track));
    }

    for (Track& track : tracks_) {
        if (track.status == TrackStatus::Tentative) {
            if (track.misses >= 1) {
                track.status = TrackStatus::Ended;
            } else if (track.hits >= config_.confirm_hits) {
                track.status = TrackStatus::Confirmed;
            }
        }
        if (track.misses >= config_.max_misses) track.status = TrackStatus::Ended;
    }

    std::unordered_map<long, TrackStatus> status_by_id;
    for (const Track& track : tracks_) status_by_id[track.id] = track.status;

    for (auto it = tracks_.begin(); it != tracks_.end();) {
        if (it->status == TrackStatus::Ended) {
            ended_.push_back(std::move(*it));
            it = tracks_.erase(it);
        } else {
            ++it;
        }
    }

    StepResult result;
    result.track_ids.reserve(observations.size());
    result.track_status.reserve(observations.size());
    for (std::size_t i = 0; i < observations.size(); ++i) {
        result.track_ids.push_back(det_track_id[i]);
        result.track_status.push_back(status_by_id.at(det_track_id[i]));
    }
    return result;
}

}  // namespace pedcross
