// Command-line front end for the crossing-intent pipeline: synthetic data
// generation, tracking, training, prediction, and evaluation as composable
// subcommands over line-delimited streams.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pedcross/parallel.hpp"
#include "pedcross/pipeline.hpp"
#include "pedcross/rng.hpp"
#include "pedcross/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> window;
    std::optional<std::string> channels;
    std::optional<double> threshold;
    std::optional<int> min_history;
};

pedcross::PipelineConfig resolve_config(const GlobalOptions& g) {
    pedcross::PipelineConfig config;
    if (!g.config_path.empty()) config = pedcross::load_config(g.config_path);
    if (g.seed) config.seed = *g.seed;
    if (g.workers) config.workers = *g.workers;
    if (g.window) config.window = *g.window;
    if (g.channels) config.channels = pedcross::feature_channels_from_string(*g.channels);
    if (g.threshold) config.threshold = *g.threshold;
    if (g.min_history) config.min_history = *g.min_history;
    if (config.window < 1) throw pedcross::Error("T must be >= 1");
    return config;
}

std::string default_out_dir() {
    const char* env = std::getenv("PEDCROSS_OUT_DIR");
    return env ? env : "pedcross_out";
}

struct SynthOptions {
    std::string out_dir;
    int walking = 0;
    int standing = 0;
    int start_walking = 0;
    int peds = 1;
    long frames = 120;
    int period = 14;
    double speed = 3.0;
    double jitter = 4.0;
    double height = 200.0;
    long event_frame = 45;
    double drop_prob = 0.0;
    double kp_drop_prob = 0.0;
};

int cmd_synth(const pedcross::PipelineConfig& config, const SynthOptions& opt) {
    if (opt.walking + opt.standing + opt.start_walking <= 0) {
        throw pedcross::Error("synth: nothing to generate (use --walking/--standing/--start-walking)");
    }
    fs::create_directories(opt.out_dir);

    struct Plan {
        pedcross::GaitKind kind;
        std::string name;
    };
    std::vector<Plan> plans;
    int counter = 0;
    auto add = [&](int n, pedcross::GaitKind kind) {
        for (int i = 0; i < n; ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "seq_%03d", counter++);
            plans.push_back({kind, name});
        }
    };
    add(opt.walking, pedcross::GaitKind::WalkingLateral);
    add(opt.standing, pedcross::GaitKind::Standing);
    add(opt.start_walking, pedcross::GaitKind::StartWalking);

    std::vector<pedcross::TTEAnnotation> annotations;
    pedcross::parallel_for(plans.size(), config.workers, [&](std::size_t i) {
        const Plan& plan = plans[i];
        std::vector<pedcross::GaitParams> peds;
        for (int k = 0; k < opt.peds; ++k) {
            pedcross::GaitParams p;
            p.kind = plan.kind;
            p.event_frame = opt.event_frame;
            p.speed = opt.speed;
            p.period = opt.period;
            p.jitter_std = opt.jitter;
            p.height = opt.height;
            p.start_x = 150.0 + 400.0 * k;
            p.start_y = 60.0;
            peds.push_back(p);
        }
        const std::uint64_t seq_seed = pedcross::mix64(config.seed ^ (0x5e9ULL + i));
        pedcross::SequenceData seq =
            pedcross::generate_sequence(peds, opt.frames, seq_seed, plan.name);
        if (opt.drop_prob > 0.0 || opt.kp_drop_prob > 0.0) {
            seq = pedcross::degrade(seq, opt.drop_prob, opt.kp_drop_prob,
                                    pedcross::mix64(seq_seed ^ 0xdeadULL));
        }
        pedcross::write_sequence(fs::path(opt.out_dir) / (plan.name + ".jsonl"), seq);
    });

    for (std::size_t i = 0; i < plans.size(); ++i) {
        if (plans[i].kind != pedcross::GaitKind::StartWalking) continue;
        for (int k = 0; k < opt.peds; ++k) {
            annotations.push_back(
                {plans[i].name, k + 1, opt.event_frame, "start_walking_to_cross"});
        }
    }
    if (!annotations.empty()) {
        pedcross::write_tte_annotations(fs::path(opt.out_dir) / "tte.jsonl", annotations);
    }
    pedcross::save_config(fs::path(opt.out_dir) / "resolved_config.json", config);
    std::cout << "wrote " << plans.size() << " sequences to " << opt.out_dir << "\n";
    return 0;
}

int cmd_track(const pedcross::PipelineConfig& config, const std::string& input,
              const std::string& output) {
    pedcross::SequenceData stream = pedcross::read_sequence(input);
    pedcross::SequenceData tracked = pedcross::run_track(stream, config);
    pedcross::write_sequence(output, tracked);
    pedcross::save_config(output + ".config.json", config);
    std::cout << "tracked " << stream.observations.size() << " observations\n";
    return 0;
}

json grid_to_json(const pedcross::GridSearchResult& grid) {
    json table = json::array();
    for (const auto& entry : grid.table) {
        table.push_back({{"n_trees", entry.n_trees},
                         {"max_depth", entry.max_depth},
                         {"mean_accuracy", entry.mean_accuracy}});
    }
    return {{"best_n_trees", grid.best_n_trees},
            {"best_max_depth", grid.best_max_depth},
            {"table", table}};
}

int cmd_train(const pedcross::PipelineConfig& config, const std::vector<std::string>& inputs,
              const std::string& model_path, const std::string& report_path) {
    std::vector<pedcross::SequenceData> streams;
    streams.reserve(inputs.size());
    for (const std::string& path : inputs) streams.push_back(pedcross::read_sequence(path));

    pedcross::TrainOutput out = pedcross::run_train(streams, config);
    pedcross::save_forest(model_path, out.model);
    pedcross::save_config(model_path + ".config.json", config);

    json report;
    report["streams"] = out.report.streams;
    report["windows_built"] = out.report.windows_built;
    report["windows_eligible"] = out.report.windows_eligible;
    report["windows_labeled"] = out.report.windows_labeled;
    report["class_c_before"] = out.report.class_c_before;
    report["class_nc_before"] = out.report.class_nc_before;
    report["per_class_after"] = out.report.per_class_after;
    report["n_trees"] = out.report.n_trees;
    report["max_depth"] = out.report.max_depth;
    report["feature_dim"] = out.report.feature_dim;
    if (out.report.grid) report["grid"] = grid_to_json(*out.report.grid);
    if (!report_path.empty()) {
        std::ofstream f(report_path, std::ios::binary);
        if (!f) throw pedcross::IoError("cannot write " + report_path);
        f << report.dump(2) << '\n';
    }
    std::cout << "trained " << out.report.n_trees << " trees (depth " << out.report.max_depth
              << ") on " << 2 * out.report.per_class_after << " windows\n";
    return 0;
}

int cmd_predict(const pedcross::PipelineConfig& config, const std::string& input,
                const std::string& model_path, const std::string& output) {
    pedcross::SequenceData stream = pedcross::read_sequence(input);
    pedcross::ForestModel model = pedcross::load_forest(model_path);
    pedcross::PredictionStream predictions = pedcross::run_predict(stream, model, config);
    pedcross::write_predictions(output, predictions);
    pedcross::save_config(output + ".config.json", config);
    std::cout << "wrote " << predictions.rows.size() << " prediction rows\n";
    return 0;
}

int cmd_eval(const pedcross::PipelineConfig& config, const std::vector<std::string>& prediction_paths,
             const std::vector<std::string>& truth_paths, const std::string& tte_path,
             const std::string& out_dir) {
    std::vector<pedcross::PredictionStream> predictions;
    for (const std::string& p : prediction_paths) {
        predictions.push_back(pedcross::read_predictions(p));
    }
    std::vector<pedcross::SequenceData> truth;
    for (const std::string& p : truth_paths) truth.push_back(pedcross::read_sequence(p));
    std::vector<pedcross::TTEAnnotation> annotations;
    if (!tte_path.empty()) annotations = pedcross::read_tte_annotations(tte_path);

    pedcross::EvalOutput out = pedcross::run_eval(predictions, truth, annotations, config);
    for (const std::string& w : out.warnings) std::cerr << "warning: " << w << "\n";

    fs::create_directories(out_dir);
    pedcross::emit_report(out.report, out.curves, out_dir);

    json report;
    report["accuracy"] = out.report.accuracy;
    report["tp"] = out.report.tp;
    report["tn"] = out.report.tn;
    report["fp"] = out.report.fp;
    report["fn"] = out.report.fn;
    report["n_decisions"] = out.report.n_decisions;
    report["truth_c_total"] = out.report.truth_c_total;
    report["truth_nc_total"] = out.report.truth_nc_total;
    report["per_class_balanced"] = out.report.per_class_balanced;
    report["seed"] = out.report.seed;
    report["undecided"] = out.undecided;
    report["skipped_no_gt"] = out.skipped_no_gt;
    report["skipped_unlabeled"] = out.skipped_unlabeled;
    report["missing_annotations"] = out.missing_annotations;
    report["warnings"] = out.warnings;
    {
        std::ofstream f(fs::path(out_dir) / "report.json", std::ios::binary);
        if (!f) throw pedcross::IoError("cannot write report.json");
        f << report.dump(2) << '\n';
    }
    pedcross::save_config(fs::path(out_dir) / "resolved_config.json", config);
    std::cout << "balanced accuracy " << out.report.accuracy << " over " << out.report.n_decisions
              << " decisions\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pedestrian crossing-intent pipeline"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_path, "pipeline config file (JSON)");
    app.add_option("--seed", global.seed, "override the config seed");
    app.add_option("--workers", global.workers, "worker threads");
    app.add_option("--T", global.window, "window length in frames");
    app.add_option("--channels", global.channels, "feature channels: skeleton|external|both");
    app.add_option("--threshold", global.threshold, "decision threshold");
    app.add_option("--min-history", global.min_history,
                   "frames of history required before deciding (0 = T)");

    SynthOptions synth_opt;
    synth_opt.out_dir = default_out_dir();
    CLI::App* synth = app.add_subcommand("synth", "generate synthetic sequences");
    synth->add_option("--out", synth_opt.out_dir, "output directory");
    synth->add_option("--walking", synth_opt.walking, "number of walking sequences");
    synth->add_option("--standing", synth_opt.standing, "number of standing sequences");
    synth->add_option("--start-walking", synth_opt.start_walking,
                      "number of start-walking sequences");
    synth->add_option("--peds", synth_opt.peds, "pedestrians per sequence");
    synth->add_option("--frames", synth_opt.frames, "frames per sequence");
    synth->add_option("--period", synth_opt.period, "gait period in frames");
    synth->add_option("--speed", synth_opt.speed, "walking speed, px/frame");
    synth->add_option("--jitter", synth_opt.jitter, "keypoint jitter std, px");
    synth->add_option("--height", synth_opt.height, "pedestrian height, px");
    synth->add_option("--event-frame", synth_opt.event_frame,
                      "start-walking event frame (TTE = 0)");
    synth->add_option("--drop-prob", synth_opt.drop_prob, "detection drop probability");
    synth->add_option("--kp-drop-prob", synth_opt.kp_drop_prob, "keypoint drop probability");

    std::string track_input, track_output;
    CLI::App* track = app.add_subcommand("track", "label a stream with track ids");
    track->add_option("--input", track_input, "input stream")->required();
    track->add_option("--output", track_output, "tracked output stream")->required();

    std::vector<std::string> train_inputs;
    std::string model_path, report_path;
    CLI::App* train = app.add_subcommand("train", "train the crossing classifier");
    train->add_option("--input", train_inputs, "training streams")->required()->expected(-1);
    train->add_option("--model", model_path, "output model file")->required();
    train->add_option("--report", report_path, "training report (JSON)");
    bool grid_flag = false;
    train->add_flag("--grid", grid_flag, "grid-search hyperparameters with cross-validation");

    std::vector<std::string> gs_inputs;
    std::string gs_model, gs_report;
    CLI::App* gridsearch = app.add_subcommand("gridsearch",
                                              "cross-validated hyperparameter search + train");
    gridsearch->add_option("--input", gs_inputs, "training streams")->required()->expected(-1);
    gridsearch->add_option("--model", gs_model, "output model file")->required();
    gridsearch->add_option("--report", gs_report, "search report (JSON)");

    std::string predict_input, predict_model, predict_output;
    CLI::App* predict = app.add_subcommand("predict", "per-track crossing probabilities");
    predict->add_option("--input", predict_input, "input stream (raw or tracked)")->required();
    predict->add_option("--model", predict_model, "model file")->required();
    predict->add_option("--output", predict_output, "prediction stream output")->required();

    std::vector<std::string> eval_predictions, eval_truth;
    std::string eval_tte;
    std::string eval_out = default_out_dir();
    CLI::App* eval = app.add_subcommand("eval", "balanced accuracy and TTE curves");
    eval->add_option("--predictions", eval_predictions, "prediction streams")
        ->required()
        ->expected(-1);
    eval->add_option("--truth", eval_truth, "ground-truth streams")->required()->expected(-1);
    eval->add_option("--tte", eval_tte, "TTE annotation file");
    eval->add_option("--out", eval_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        pedcross::PipelineConfig config = resolve_config(global);
        if (synth->parsed()) return cmd_synth(config, synth_opt);
        if (track->parsed()) return cmd_track(config, track_input, track_output);
        if (train->parsed()) {
            if (grid_flag) config.use_grid = true;
            return cmd_train(config, train_inputs, model_path, report_path);
        }
        if (gridsearch->parsed()) {
            config.use_grid = true;
            return cmd_train(config, gs_inputs, gs_model, gs_report);
        }
        if (predict->parsed()) return cmd_predict(config, predict_input, predict_model, predict_output);
        if (eval->parsed()) return cmd_eval(config, eval_predictions, eval_truth, eval_tte, eval_out);
    } catch (const pedcross::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const pedcross::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const pedcross::SchemaVersionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const pedcross::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
