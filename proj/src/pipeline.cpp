#include "pedcross/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <tuple>

#include <json.hpp>

#include "pedcross/rng.hpp"

namespace pedcross {

using nlohmann::json;

std::string to_string(FeatureChannels c) {
    switch (c) {
        case FeatureChannels::Skeleton: return "skeleton";
        case FeatureChannels::External: return "external";
        case FeatureChannels::Both: return "both";
    }
    return "skeleton";
}

FeatureChannels feature_channels_from_string(const std::string& s) {
    if (s == "skeleton") return FeatureChannels::Skeleton;
    if (s == "external") return FeatureChannels::External;
    if (s == "both") return FeatureChannels::Both;
    throw UnknownLabel("not a feature channel: " + s);
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("malformed config file", 1);

    PipelineConfig c;
    c.window = j.value("T", c.window);
    if (c.window < 1) throw ParseError("T must be >= 1", 1);
    c.threshold = j.value("threshold", c.threshold);
    if (j.contains("channels")) c.channels = feature_channels_from_string(j["channels"]);
    c.min_history = j.value("min_history", c.min_history);
    c.carry_forward = j.value("carry_forward", c.carry_forward);
    c.min_train_width = j.value("min_train_width", c.min_train_width);
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    if (j.contains("tracker")) {
        const json& t = j["tracker"];
        c.tracker.confirm_hits = t.value("confirm_hits", c.tracker.confirm_hits);
        c.tracker.max_misses = t.value("max_misses", c.tracker.max_misses);
        c.tracker.appearance_gate = t.value("appearance_gate", c.tracker.appearance_gate);
        c.tracker.iou_gate = t.value("iou_gate", c.tracker.iou_gate);
        c.tracker.gallery_size = t.value("gallery_size", c.tracker.gallery_size);
        KalmanNoise& n = c.tracker.noise;
        n.process_position_std = t.value("process_position_std", n.process_position_std);
        n.process_velocity_std = t.value("process_velocity_std", n.process_velocity_std);
        n.measurement_std = t.value("measurement_std", n.measurement_std);
        n.init_position_factor = t.value("init_position_factor", n.init_position_factor);
        n.init_velocity_factor = t.value("init_velocity_factor", n.init_velocity_factor);
        n.aspect_position_std = t.value("aspect_position_std", n.aspect_position_std);
        n.aspect_velocity_std = t.value("aspect_velocity_std", n.aspect_velocity_std);
    }
    if (j.contains("forest")) {
        c.n_trees = j["forest"].value("n_trees", c.n_trees);
        c.max_depth = j["forest"].value("max_depth", c.max_depth);
    }
    c.use_grid = j.value("use_grid", c.use_grid);
    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (g.contains("tree_counts")) c.grid.tree_counts = g["tree_counts"].get<std::vector<int>>();
        if (g.contains("depths")) c.grid.depths = g["depths"].get<std::vector<int>>();
        c.grid.folds = g.value("folds", c.grid.folds);
    }
    return c;
}

void save_config(const std::filesystem::path& path, const PipelineConfig& c) {
    json j;
    j["T"] = c.window;
    j["threshold"] = c.threshold;
    j["channels"] = to_string(c.channels);
    j["min_history"] = c.min_history;
    j["carry_forward"] = c.carry_forward;
    j["min_train_width"] = c.min_train_width;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["tracker"] = {
        {"confirm_hits", c.tracker.confirm_hits},
        {"max_misses", c.tracker.max_misses},
        {"appearance_gate", c.tracker.appearance_gate},
        {"iou_gate", c.tracker.iou_gate},
        {"gallery_size", c.tracker.gallery_size},
        {"process_position_std", c.tracker.noise.process_position_std},
        {"process_velocity_std", c.tracker.noise.process_velocity_std},
        {"measurement_std", c.tracker.noise.measurement_std},
        {"init_position_factor", c.tracker.noise.init_position_factor},
        {"init_velocity_factor", c.tracker.noise.init_velocity_factor},
        {"aspect_position_std", c.tracker.noise.aspect_position_std},
        {"aspect_velocity_std", c.tracker.noise.aspect_velocity_std},
    };
    j["forest"] = {{"n_trees", c.n_trees}, {"max_depth", c.max_depth}};
    j["use_grid"] = c.use_grid;
    j["grid"] = {
        {"tree_counts", c.grid.tree_counts},
        {"depths", c.grid.depths},
        {"folds", c.grid.folds},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<TrackSeries> group_series(const SequenceData& stream, bool by_ground_truth) {
    std::map<long, std::vector<const Observation*>> by_id;
    for (const Observation& obs : stream.observations) {
        std::optional<long> key = by_ground_truth ? obs.gt_id : obs.track_id;
        if (!key) continue;
        auto& list = by_id[*key];
        if (!list.empty() && list.back()->frame == obs.frame) continue;  // keep the first per frame
        list.push_back(&obs);
    }

    std::vector<TrackSeries> series;
    for (const auto& [id, list] : by_id) {
        TrackSeries current;
        current.id = id;
        auto flush = [&]() {
            if (!current.frames.empty()) series.push_back(std::move(current));
            current = TrackSeries{};
            current.id = id;
        };
        for (const Observation* obs : list) {
            if (!current.frames.empty() && obs->frame != current.frames.back().frame + 1) flush();
            current.frames.push_back(*obs);
            if (by_ground_truth) {
                current.status.push_back(TrackStatus::Confirmed);
            } else {
                current.status.push_back(obs->track_status.value_or(TrackStatus::Confirmed));
            }
        }
        flush();
    }
    return series;
}

std::vector<FrameFeatures> series_features(const TrackSeries& series, int carry_forward) {
    std::vector<FrameFeatures> features;
    features.reserve(series.frames.size());
    KeypointCarryForward fill(carry_forward);
    Skeleton empty{};
    for (const Observation& obs : series.frames) {
        const Skeleton filled = fill.apply(obs.skeleton ? *obs.skeleton : empty);
        SelectedKeypoints selected = select_keypoints(filled);
        FrameFeatures f;
        f.source_frame = obs.frame;
        int n_valid = 0;
        for (bool v : selected.valid) n_valid += v ? 1 : 0;
        if (n_valid >= 2) {
            try {
                f = frame_features(selected, obs.frame);
            } catch (const DegenerateHeight&) {
                f = FrameFeatures{};
                f.source_frame = obs.frame;
            }
        }
        features.push_back(std::move(f));
    }
    return features;
}

SequenceData run_track(const SequenceData& input, const PipelineConfig& config) {
    SequenceData out = input;
    if (out.observations.empty()) return out;
    for (std::size_t i = 1; i < out.observations.size(); ++i) {
        if (out.observations[i].frame < out.observations[i - 1].frame) {
            throw NonMonotonicFrameIndex("run_track: observations are not frame-ordered");
        }
    }

    Tracker tracker(config.tracker);
    const long first = out.first_frame();
    const long last = out.last_frame();
    std::size_t cursor = 0;
    for (long frame = first; frame <= last; ++frame) {
        std::size_t begin = cursor;
        while (cursor < out.observations.size() && out.observations[cursor].frame == frame) {
            ++cursor;
        }
        std::span<const Observation> frame_obs(input.observations.data() + begin, cursor - begin);
        Tracker::StepResult step = tracker.step(frame, frame_obs);
        for (std::size_t i = 0; i < frame_obs.size(); ++i) {
            out.observations[begin + i].track_id = step.track_ids[i];
            out.observations[begin + i].track_status = step.track_status[i];
        }
    }
    return out;
}

namespace {

Eigen::Index external_dim_of_streams(std::span<const SequenceData> streams) {
    for (const SequenceData& stream : streams) {
        for (const Observation& obs : stream.observations) {
            if (obs.embedding) return obs.embedding->size();
        }
    }
    throw InsufficientData("external feature channel requested but no embeddings in the data");
}

// Model input for the window of the series ending at `end` inclusive.
Eigen::VectorXf window_vector(std::span<const FrameFeatures> features, const TrackSeries& series,
                              std::size_t end, const PipelineConfig& config,
                              Eigen::Index ext_dim) {
    const std::size_t window = static_cast<std::size_t>(config.window);
    std::span<const FrameFeatures> head(features.data(), end + 1);

    Eigen::VectorXd values;
    if (config.channels == FeatureChannels::Skeleton) {
        values = window_features(head, window, series.id, std::nullopt).values;
    } else {
        std::vector<Eigen::VectorXd> external;
        external.reserve(window);
        for (std::size_t i = end + 1 - window; i <= end; ++i) {
            const Observation& obs = series.frames[i];
            if (obs.embedding) {
                if (obs.embedding->size() != ext_dim) {
                    throw DimensionMismatch("embedding dimension varies within the data");
                }
                external.push_back(*obs.embedding);
            } else {
                external.push_back(Eigen::VectorXd::Zero(ext_dim));
            }
        }
        if (config.channels == FeatureChannels::Both) {
            WindowFeatures w = window_features(head, window, series.id, std::nullopt);
            values = concat_external(w, external);
        } else {
            values.resize(static_cast<Eigen::Index>(window) * ext_dim);
            for (std::size_t i = 0; i < window; ++i) {
                values.segment(static_cast<Eigen::Index>(i) * ext_dim, ext_dim) = external[i];
            }
        }
    }
    return values.cast<float>();
}

Eigen::Index window_dimension(const PipelineConfig& config, Eigen::Index ext_dim) {
    const Eigen::Index t = config.window;
    switch (config.channels) {
        case FeatureChannels::Skeleton: return t * static_cast<Eigen::Index>(kFrameFeatureDim);
        case FeatureChannels::External: return t * ext_dim;
        case FeatureChannels::Both:
            return t * (static_cast<Eigen::Index>(kFrameFeatureDim) + ext_dim);
    }
    return 0;
}

}  // namespace

TrainOutput run_train(std::span<const SequenceData> streams, const PipelineConfig& config) {
    TrainOutput out;
    out.report.streams = static_cast<long>(streams.size());

    Eigen::Index ext_dim = 0;
    if (config.channels != FeatureChannels::Skeleton) ext_dim = external_dim_of_streams(streams);

    struct WindowRef {
        const TrackSeries* series;
        std::size_t features_index;
        std::size_t end;
    };
    std::vector<std::vector<TrackSeries>> all_series;
    std::vector<std::vector<FrameFeatures>> all_features;
    std::vector<WindowRef> windows;
    std::vector<CrossLabel> labels;

    const std::size_t window = static_cast<std::size_t>(config.window);
    for (const SequenceData& stream : streams) {
        all_series.push_back(group_series(stream, /*by_ground_truth=*/true));
    }
    for (const auto& series_list : all_series) {
        for (const TrackSeries& series : series_list) {
            if (series.frames.size() < window) continue;
            all_features.push_back(series_features(series, config.carry_forward));
            const std::size_t features_index = all_features.size() - 1;
            for (std::size_t end = window - 1; end < series.frames.size(); ++end) {
                out.report.windows_built += 1;
                std::span<const Observation> span(series.frames.data() + (end + 1 - window),
                                                  window);
                if (!window_eligible(span, config.min_train_width)) continue;
                out.report.windows_eligible += 1;
                const Observation& last = series.frames[end];
                if (!last.action) continue;
                CrossLabel label = map_label(*last.action, last.direction);
                out.report.windows_labeled += 1;
                windows.push_back({&series, features_index, end});
                labels.push_back(label);
            }
        }
    }

    if (windows.empty()) throw InsufficientData("run_train: no eligible labeled windows");
    out.report.class_c_before =
        std::count(labels.begin(), labels.end(), CrossLabel::C);
    out.report.class_nc_before = static_cast<long>(labels.size()) - out.report.class_c_before;
    if (out.report.class_c_before == 0 || out.report.class_nc_before == 0) {
        throw SingleClassTraining("run_train: only one class present after filtering");
    }

    std::vector<std::size_t> kept = balance_classes(labels, mix64(config.seed ^ 0x62616cULL));
    out.report.per_class_after = static_cast<long>(kept.size()) / 2;

    FeatureMatrix x(static_cast<Eigen::Index>(kept.size()), window_dimension(config, ext_dim));
    std::vector<CrossLabel> y;
    y.reserve(kept.size());
    for (std::size_t r = 0; r < kept.size(); ++r) {
        const WindowRef& ref = windows[kept[r]];
        x.row(static_cast<Eigen::Index>(r)) =
            window_vector(all_features[ref.features_index], *ref.series, ref.end, config, ext_dim)
                .transpose();
        y.push_back(labels[kept[r]]);
    }

    int n_trees = config.n_trees;
    int max_depth = config.max_depth;
    if (config.use_grid) {
        out.report.grid = grid_search_cv(x, y, config.grid, config.seed, config.workers);
        n_trees = out.report.grid->best_n_trees;
        max_depth = out.report.grid->best_max_depth;
    }
    TrainOptions options;
    options.workers = config.workers;
    out.model = train_forest(x, y, n_trees, max_depth, config.seed, options).model;
    out.report.n_trees = n_trees;
    out.report.max_depth = max_depth;
    out.report.feature_dim = static_cast<int>(x.cols());
    return out;
}

PredictionStream run_predict(const SequenceData& input, const ForestModel& model,
                             const PipelineConfig& config) {
    const bool already_tracked =
        std::any_of(input.observations.begin(), input.observations.end(),
                    [](const Observation& o) { return o.track_id.has_value(); });
    SequenceData tracked = already_tracked ? input : run_track(input, config);

    Eigen::Index ext_dim = 0;
    if (config.channels != FeatureChannels::Skeleton) {
        const Eigen::Index per_frame = model.feature_dim / config.window;
        ext_dim = per_frame - (config.channels == FeatureChannels::Both
                                   ? static_cast<Eigen::Index>(kFrameFeatureDim)
                                   : 0);
        if (ext_dim <= 0 || per_frame * config.window != model.feature_dim) {
            throw DimensionMismatch("model feature_dim incompatible with channel/T choice");
        }
    }
    if (window_dimension(config, ext_dim) != model.feature_dim) {
        throw DimensionMismatch("model expects " + std::to_string(model.feature_dim) +
                                " features, config yields " +
                                std::to_string(window_dimension(config, ext_dim)));
    }

    PredictionStream out;
    out.sequence_id = tracked.sequence_id;
    out.window = config.window;
    out.channels = to_string(config.channels);
    out.threshold = config.threshold;

    const std::size_t needed = static_cast<std::size_t>(config.history_needed());
    std::vector<float> row;
    for (const TrackSeries& series : group_series(tracked, /*by_ground_truth=*/false)) {
        std::vector<FrameFeatures> features = series_features(series, config.carry_forward);
        for (std::size_t i = 0; i < series.frames.size(); ++i) {
            if (series.status[i] != TrackStatus::Confirmed) continue;
            const Observation& obs = series.frames[i];
            PredictionRow pr;
            pr.frame = obs.frame;
            pr.track_id = series.id;
            pr.gt_id = obs.gt_id;
            pr.bbox = obs.bbox;
            if (i + 1 >= needed) {
                Eigen::VectorXf vec = window_vector(features, series, i, config, ext_dim);
                std::span<const float> view(vec.data(), static_cast<std::size_t>(vec.size()));
                const double p = predict_proba(model, view);
                pr.p = p;
                pr.decision = p > config.threshold ? "C" : "NC";
            } else {
                pr.decision = "undecided";
            }
            out.rows.push_back(std::move(pr));
        }
    }
    std::sort(out.rows.begin(), out.rows.end(), [](const PredictionRow& a, const PredictionRow& b) {
        return std::tie(a.frame, a.track_id) < std::tie(b.frame, b.track_id);
    });
    return out;
}

inline constexpr int kPredictionsFormatVersion = 1;

PredictionStream read_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    PredictionStream out;
    std::string line;
    long line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ParseError("malformed record", line_no);
        if (!saw_header) {
            if (!j.contains("pedcross_predictions")) {
                throw SchemaVersionMismatch("missing predictions header in " + path.string());
            }
            if (j["pedcross_predictions"].get<int>() != kPredictionsFormatVersion) {
                throw SchemaVersionMismatch("unsupported predictions version");
            }
            out.sequence_id = j.value("sequence", "");
            out.window = j.value("T", 0);
            out.channels = j.value("channels", "skeleton");
            out.threshold = j.value("threshold", 0.5);
            saw_header = true;
            continue;
        }
        try {
            PredictionRow r;
            r.frame = j.at("frame").get<long>();
            r.track_id = j.at("track_id").get<long>();
            if (j.contains("gt_id")) r.gt_id = j["gt_id"].get<long>();
            const auto& box = j.at("box");
            r.bbox = BBox{box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                          box[3].get<double>()};
            if (j.contains("p")) r.p = j["p"].get<double>();
            r.decision = j.at("decision").get<std::string>();
            if (r.decision != "C" && r.decision != "NC" && r.decision != "undecided") {
                throw ParseError("bad decision: " + r.decision, line_no);
            }
            out.rows.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    if (!saw_header) throw SchemaVersionMismatch("missing predictions header in " + path.string());
    return out;
}

void write_predictions(const std::filesystem::path& path, const PredictionStream& predictions) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    json header;
    header["pedcross_predictions"] = kPredictionsFormatVersion;
    header["sequence"] = predictions.sequence_id;
    header["T"] = predictions.window;
    header["channels"] = predictions.channels;
    header["threshold"] = predictions.threshold;
    out << header.dump() << '\n';
    for (const PredictionRow& r : predictions.rows) {
        json j;
        j["frame"] = r.frame;
        j["track_id"] = r.track_id;
        if (r.gt_id) j["gt_id"] = *r.gt_id;
        j["box"] = {r.bbox.left, r.bbox.top, r.bbox.width, r.bbox.height};
        if (r.p) j["p"] = *r.p;
        j["decision"] = r.decision;
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

EvalOutput run_eval(std::span<const PredictionStream> predictions,
                    std::span<const SequenceData> truth,
                    std::span<const TTEAnnotation> annotations, const PipelineConfig& config) {
    EvalOutput out;

    std::map<std::tuple<std::string, long, long>, const Observation*> truth_by_key;
    for (const SequenceData& stream : truth) {
        for (const Observation& obs : stream.observations) {
            if (!obs.gt_id) continue;
            truth_by_key.emplace(std::make_tuple(stream.sequence_id, *obs.gt_id, obs.frame), &obs);
        }
    }

    std::vector<Decision> decisions;
    for (const PredictionStream& stream : predictions) {
        for (const PredictionRow& row : stream.rows) {
            if (row.decision == "undecided") {
                out.undecided += 1;
                continue;
            }
            if (!row.gt_id) {
                out.skipped_no_gt += 1;
                continue;
            }
            auto it = truth_by_key.find(std::make_tuple(stream.sequence_id, *row.gt_id, row.frame));
            if (it == truth_by_key.end() || !it->second->action) {
                out.skipped_unlabeled += 1;
                continue;
            }
            Decision d;
            d.predicted = cross_label_from_string(row.decision);
            d.truth = map_label(*it->second->action, it->second->direction);
            decisions.push_back(d);
        }
    }
    if (out.skipped_no_gt > 0) {
        out.warnings.push_back(std::to_string(out.skipped_no_gt) +
                               " decisions for pedestrians without ground truth were excluded");
    }
    if (out.skipped_unlabeled > 0) {
        out.warnings.push_back(std::to_string(out.skipped_unlabeled) +
                               " decisions without an action tag were excluded");
    }

    out.report = balanced_accuracy(decisions, config.seed);

    std::vector<TrackTimeline> timelines;
    for (const TTEAnnotation& a : annotations) {
        TrackTimeline t;
        t.sequence = a.sequence;
        t.gt_id = a.gt_id;
        t.event_frame = a.event_frame;
        t.kind = a.kind;
        for (const PredictionStream& stream : predictions) {
            if (stream.sequence_id != a.sequence) continue;
            for (const PredictionRow& row : stream.rows) {
                if (!row.p || !row.gt_id || *row.gt_id != a.gt_id) continue;
                t.p_by_frame.emplace(row.frame, *row.p);
            }
        }
        if (t.p_by_frame.empty()) {
            out.missing_annotations += 1;
            out.warnings.push_back("no decided frames for annotated pedestrian " + a.sequence +
                                   "#" + std::to_string(a.gt_id));
            continue;
        }
        timelines.push_back(std::move(t));
    }
    out.curves = tte_curves(timelines, config.threshold);
    return out;
}

}  // namespace pedcross
