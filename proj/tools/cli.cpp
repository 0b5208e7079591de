#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "vra/vra.hpp"

namespace vra::cli {

namespace fs = std::filesystem;

namespace {

struct IngestArgs {
    std::string manifest;
    std::string raw_dir;
    std::string store;
};

struct SplitArgs {
    std::string store;
    std::uint64_t seed = 0;
};

struct TrainArgs {
    std::string store;
    std::string checkpoint;
    std::string history;
    std::vector<std::size_t> hidden{default_hidden_dims.begin(), default_hidden_dims.end()};
    bool finetune_on_all = false;
    TrainConfig config;
};

struct PredictArgs {
    std::string store;
    std::string checkpoint;
    std::string output;
    std::string matrix;
    std::string split = "test";
    std::size_t repeats = 10;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool sequential = false;
};

struct EnsembleArgs {
    std::string a;
    std::string b;
    std::string output;
    EnsembleConfig weights;
};

struct EvaluateArgs {
    std::string labels;
    std::vector<std::string> sets;
    std::vector<std::string> names;
    std::string output;
    std::string json;
};

struct ScaleBoxesArgs {
    std::string input;
    std::string output;
    double factor = default_crop_scale;
    double width = 0.0;
    double height = 0.0;
    bool round = false;
};

std::string fmt_double(double v, const char* spec = "%.17g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << text;
}

void write_effective_config(const CLI::App& app, const fs::path& path) {
    write_text(path, app.config_to_str(true, false));
}

fs::path manifest_path_for(const std::string& labels) {
    const fs::path p(labels);
    return fs::is_directory(p) ? p / FeatureStore::manifest_name : p;
}

// ---------------------------------------------------------------- commands

void cmd_ingest(const IngestArgs& a, const CLI::App& app, std::ostream& diag) {
    const auto store = ingest_features(a.manifest, a.raw_dir, a.store);
    diag << "ingested " << store.manifest().size() << " videos, dim " << store.dim() << " into " << a.store << '\n';
    write_effective_config(app, fs::path(a.store) / "ingest.config.toml");
}

void cmd_split(const SplitArgs& a, const CLI::App& app, std::ostream& diag) {
    auto store = FeatureStore::open(a.store);
    const auto assignment = split_dataset(store.manifest(), a.seed);
    store.save_split(assignment);
    diag << "split " << store.manifest().size() << " videos: train " << assignment.train_ids.size() << ", test "
         << assignment.test_ids.size() << ", val " << assignment.val_ids.size() << '\n';
    write_effective_config(app, fs::path(a.store) / "split.config.toml");
}

void cmd_train(TrainArgs a, const CLI::App& app, std::ostream& diag) {
    a.config.validate();
    const auto store = FeatureStore::open(a.store);
    const auto splits = splits_from_manifest(store.manifest());
    if (splits.train_ids.empty() || splits.val_ids.empty()) {
        throw DataError("store has no train/val assignment; run 'vra split' or set split fields in the manifest");
    }
    const auto initial = init_params(2 * store.dim(), a.hidden, a.config.dropout_rate, a.config.seed);
    const auto log_epoch = [&diag](const EpochRecord& r) {
        diag << "epoch " << r.epoch << " train_rmse " << fmt_double(r.train_rmse, "%.6f") << " val_rmse "
             << fmt_double(r.val_rmse, "%.6f") << " lr " << fmt_double(r.lr, "%.3g") << '\n';
    };

    auto result = train(a.config, store, splits, initial, nullptr, log_epoch);
    const fs::path history = a.history.empty() ? fs::path(a.checkpoint + ".history.json") : fs::path(a.history);
    write_text(history, result.history.to_json() + "\n");
    diag << "best epoch " << result.history.best_epoch << '\n';

    if (a.finetune_on_all && a.config.max_epochs > 0) {
        diag << "fine-tuning best checkpoint on train+val\n";
        result = finetune_on_all(a.config, store, splits, result.model, log_epoch);
        auto finetune_history = history;
        finetune_history.replace_extension(".finetune.json");
        write_text(finetune_history, result.history.to_json() + "\n");
    }
    save_checkpoint(result.model, a.checkpoint);
    write_effective_config(app, a.checkpoint + ".config.toml");
}

void cmd_predict(const PredictArgs& a, const CLI::App& app, std::ostream& diag) {
    if (a.repeats < 1) {
        throw ConfigError("--repeats must be at least 1");
    }
    const auto store = FeatureStore::open(a.store);
    const auto model = load_checkpoint(a.checkpoint);
    const auto ids = a.split == "all" ? store.manifest().ids() : store.manifest().ids(parse_split(a.split));
    if (ids.empty()) {
        throw DataError("no videos in split '" + a.split + "'");
    }
    const auto predictions =
        predict_repeated(model.params, store, ids, model.config.sequence_length, a.repeats, a.seed,
                         a.sequential ? Execution::sequential : Execution::parallel, a.threads);
    write_predictions(a.output, averaged(predictions));
    if (!a.matrix.empty()) {
        write_prediction_matrix(a.matrix, predictions);
    }
    if (a.repeats >= 2) {
        diag << "pairwise consistency rmse " << fmt_double(pairwise_consistency_rmse(predictions), "%.6f") << '\n';
    }
    write_effective_config(app, a.output + ".config.toml");
}

void cmd_ensemble(const EnsembleArgs& a, const CLI::App& app, std::ostream&) {
    const auto merged = ensemble_weighted(read_predictions(a.a), read_predictions(a.b), a.weights);
    write_predictions(a.output, merged);
    write_effective_config(app, a.output + ".config.toml");
}

void cmd_evaluate(const EvaluateArgs& a, const CLI::App& app, std::ostream& diag) {
    if (!a.names.empty() && a.names.size() != a.sets.size()) {
        throw ConfigError("--name must be given once per prediction set");
    }
    const auto labels = Manifest::read(manifest_path_for(a.labels), false);
    std::vector<std::string> names;
    std::vector<SetMetrics> sets;
    for (std::size_t s = 0; s < a.sets.size(); ++s) {
        const std::string name = a.names.empty() ? fs::path(a.sets[s]).filename().string() : a.names[s];
        const auto preds = read_predictions(a.sets[s]);
        std::map<std::string, bool> seen;
        std::vector<double> predicted;
        std::vector<double> truth;
        for (std::size_t i = 0; i < preds.video_ids.size(); ++i) {
            const auto& id = preds.video_ids[i];
            if (!seen.emplace(id, true).second) {
                throw DuplicateIdError("set " + std::to_string(s + 1) + " (" + name + "): duplicate video_id '" +
                                       id + "'");
            }
            const auto* entry = labels.find(id);
            if (entry == nullptr) {
                throw NotFoundError("set " + std::to_string(s + 1) + " (" + name + "): no label for video_id '" +
                                    id + "'");
            }
            predicted.push_back(preds.mos[i]);
            truth.push_back(entry->mos_label);
        }
        try {
            sets.push_back(compute_set_metrics(predicted, truth));
        } catch (const DegenerateInput& e) {
            throw DegenerateInput("set " + std::to_string(s + 1) + " (" + name + "): " + e.what());
        }
        names.push_back(name);
    }
    const auto report = MetricsReport::build(std::move(names), std::move(sets));
    write_text(a.output, report.to_text());
    if (!a.json.empty()) {
        write_text(a.json, report.to_json() + "\n");
    }
    diag << "final_score " << fmt_double(report.final_score, "%.4f") << '\n';
    write_effective_config(app, a.output + ".config.toml");
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    return fields;
}

double parse_coord(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw DataError(where + ": bad coordinate '" + text + "'");
    }
}

void cmd_scale_boxes(const ScaleBoxesArgs& a, const CLI::App& app, std::ostream&) {
    std::ifstream in(a.input);
    if (!in) {
        throw NotFoundError("cannot open '" + a.input + "'");
    }
    std::ostringstream out;
    out << "video_id,frame,x1,y1,x2,y2\n";
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || (line_no == 1 && line.rfind("video_id,", 0) == 0)) {
            continue;
        }
        const std::string where = a.input + ":" + std::to_string(line_no);
        const auto f = split_csv(line);
        if (f.size() != 6) {
            throw DataError(where + ": expected video_id,frame,x1,y1,x2,y2");
        }
        const BBox box{parse_coord(f[2], where), parse_coord(f[3], where), parse_coord(f[4], where),
                       parse_coord(f[5], where)};
        BBox scaled;
        try {
            scaled = scale_bbox(box, a.factor, a.width, a.height);
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        if (a.round) {
            scaled = round_outward(scaled);
        }
        out << f[0] << ',' << f[1] << ',' << fmt_double(scaled.x1) << ',' << fmt_double(scaled.y1) << ','
            << fmt_double(scaled.x2) << ',' << fmt_double(scaled.y2) << '\n';
    }
    write_text(a.output, out.str());
    write_effective_config(app, a.output + ".config.toml");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& diag) {
    CLI::App app{"Visual realism assessment: feature ingestion, MOS head training, repeated inference, "
                 "ensembling and scoring"};
    app.name(args.empty() ? "vra" : args.front());
    app.set_config("--config", "", "TOML/INI file with option defaults (command-line flags take precedence)");
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Build a binary feature store from raw per-frame features");
    ingest->add_option("--manifest", ingest_args.manifest, "Input manifest (JSON Lines)")->required()
        ->check(CLI::ExistingFile);
    ingest->add_option("--raw-dir", ingest_args.raw_dir, "Directory the manifest's feature_file paths are relative to")
        ->required()->check(CLI::ExistingDirectory);
    ingest->add_option("--store", ingest_args.store, "Output store directory")->required();

    SplitArgs split_args;
    auto* split = app.add_subcommand("split", "Assign a seeded 70/20/10 train/test/val split");
    split->add_option("--store", split_args.store, "Feature store directory")->required()
        ->check(CLI::ExistingDirectory);
    split->add_option("--seed", split_args.seed, "Shuffle seed")->capture_default_str();

    TrainArgs train_args;
    auto& tc = train_args.config;
    auto* train_cmd = app.add_subcommand("train", "Train the MOS regression head");
    train_cmd->add_option("--store", train_args.store, "Feature store directory")->required()
        ->check(CLI::ExistingDirectory);
    train_cmd->add_option("--checkpoint", train_args.checkpoint, "Output checkpoint path")->required();
    train_cmd->add_option("--history", train_args.history, "History JSON path (default <checkpoint>.history.json)");
    train_cmd->add_option("--hidden", train_args.hidden, "Hidden layer widths (none for a linear head)")
        ->expected(0, -1)->capture_default_str();
    train_cmd->add_option("--lr", tc.learning_rate, "Initial learning rate")->capture_default_str();
    train_cmd->add_option("--batch-size", tc.batch_size)->capture_default_str();
    train_cmd->add_option("--accumulation-steps", tc.accumulation_steps)->capture_default_str();
    train_cmd->add_option("--dropout", tc.dropout_rate)->capture_default_str();
    train_cmd->add_option("--sequence-length", tc.sequence_length)->capture_default_str();
    train_cmd->add_option("--max-epochs", tc.max_epochs)->capture_default_str();
    train_cmd->add_option("--early-stop-patience", tc.early_stop_patience)->capture_default_str();
    train_cmd->add_option("--sched-factor", tc.scheduler.factor)->capture_default_str();
    train_cmd->add_option("--sched-patience", tc.scheduler.patience)->capture_default_str();
    train_cmd->add_option("--sched-threshold", tc.scheduler.threshold)->capture_default_str();
    train_cmd->add_option("--min-lr", tc.scheduler.min_lr)->capture_default_str();
    train_cmd->add_option("--beta1", tc.adamw.beta1)->capture_default_str();
    train_cmd->add_option("--beta2", tc.adamw.beta2)->capture_default_str();
    train_cmd->add_option("--eps", tc.adamw.eps)->capture_default_str();
    train_cmd->add_option("--weight-decay", tc.adamw.weight_decay)->capture_default_str();
    train_cmd->add_option("--seed", tc.seed, "Seed for initialization, sampling, dropout and shuffling")
        ->capture_default_str();
    train_cmd->add_flag("--finetune-on-all", train_args.finetune_on_all,
                        "Continue the best checkpoint on train+val as a second phase");

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "Repeated stochastic prediction, averaged per video");
    predict->add_option("--store", predict_args.store, "Feature store directory")->required()
        ->check(CLI::ExistingDirectory);
    predict->add_option("--checkpoint", predict_args.checkpoint)->required()->check(CLI::ExistingFile);
    predict->add_option("--output", predict_args.output, "Averaged predictions (CSV)")->required();
    predict->add_option("--matrix", predict_args.matrix, "Optional dump of every repeat (CSV)");
    predict->add_option("--split", predict_args.split, "Which videos to predict")
        ->check(CLI::IsMember({"train", "test", "val", "unassigned", "all"}))->capture_default_str();
    predict->add_option("--repeats", predict_args.repeats, "Number of stochastic repeats")->capture_default_str();
    predict->add_option("--seed", predict_args.seed, "Base seed for frame-window sampling")->capture_default_str();
    predict->add_option("--threads", predict_args.threads, "Worker threads (0 = hardware)")->capture_default_str();
    predict->add_flag("--sequential", predict_args.sequential, "Compute on the calling thread only");

    EnsembleArgs ensemble_args;
    auto* ensemble = app.add_subcommand("ensemble", "Weighted average of two prediction files");
    ensemble->add_option("a", ensemble_args.a, "First model's predictions")->required()->check(CLI::ExistingFile);
    ensemble->add_option("b", ensemble_args.b, "Second model's predictions")->required()->check(CLI::ExistingFile);
    ensemble->add_option("--wa", ensemble_args.weights.weight_a, "Weight of the first model")->capture_default_str();
    ensemble->add_option("--wb", ensemble_args.weights.weight_b, "Weight of the second model")->capture_default_str();
    ensemble->add_option("-o,--output", ensemble_args.output)->required();

    EvaluateArgs evaluate_args;
    auto* evaluate = app.add_subcommand("evaluate", "PLCC, SRCC, RMSE per test set and the final score");
    evaluate->add_option("--labels", evaluate_args.labels, "Label manifest or store directory")->required()
        ->check(CLI::ExistingPath);
    evaluate->add_option("sets", evaluate_args.sets, "One prediction file per test set")->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--name", evaluate_args.names, "Display name per set, in order");
    evaluate->add_option("-o,--output", evaluate_args.output, "Text report")->required();
    evaluate->add_option("--json", evaluate_args.json, "Machine-readable report");

    ScaleBoxesArgs boxes_args;
    auto* boxes = app.add_subcommand("scale-boxes", "Expand face boxes about their centers and clamp to the image");
    boxes->add_option("--input", boxes_args.input, "CSV: video_id,frame,x1,y1,x2,y2")->required()
        ->check(CLI::ExistingFile);
    boxes->add_option("--output", boxes_args.output)->required();
    boxes->add_option("--factor", boxes_args.factor)->capture_default_str();
    boxes->add_option("--width", boxes_args.width, "Image width in pixels")->required();
    boxes->add_option("--height", boxes_args.height, "Image height in pixels")->required();
    boxes->add_flag("--round", boxes_args.round, "Round outward to integer pixels");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        diag << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        diag << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    try {
        if (ingest->parsed()) {
            cmd_ingest(ingest_args, app, diag);
        } else if (split->parsed()) {
            cmd_split(split_args, app, diag);
        } else if (train_cmd->parsed()) {
            cmd_train(train_args, app, diag);
        } else if (predict->parsed()) {
            cmd_predict(predict_args, app, diag);
        } else if (ensemble->parsed()) {
            cmd_ensemble(ensemble_args, app, diag);
        } else if (evaluate->parsed()) {
            cmd_evaluate(evaluate_args, app, diag);
        } else if (boxes->parsed()) {
            cmd_scale_boxes(boxes_args, app, diag);
        }
    } catch (const ConfigError& e) {
        diag << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const NumericError& e) {
        diag << "numeric error: " << e.what() << '\n';
        return exit_numeric;
    } catch (const std::exception& e) {
        diag << "data error: " << e.what() << '\n';
        return exit_data;
    }
    return exit_ok;
}

int run(int argc, const char* const* argv) {
    return run(std::vector<std::string>(argv, argv + argc), std::cerr);
}

} // namespace vra::cli
