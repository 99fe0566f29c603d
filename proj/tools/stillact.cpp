#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "stillact/augment.hpp"
#include "stillact/dataset_io.hpp"
#include "stillact/dbn.hpp"
#include "stillact/errors.hpp"
#include "stillact/evaluation.hpp"
#include "stillact/geometry.hpp"
#include "stillact/synthetic.hpp"
#include "vendor/CLI11.hpp"
#include "vendor/json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("STILLACT_LOG");
    if (!env) return LogLevel::Info;
    std::string v = env;
    if (v == "error") return LogLevel::Error;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Info;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::cerr << "stillact: " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::cerr << "stillact: " << msg << "\n";
}

struct Options {
    std::string data;
    std::string model;
    std::string out;
    std::uint64_t seed = 0;
    int epochs_pretrain = 100;
    int epochs_finetune = 1000;
    double lr_pretrain = 0.01;
    double lr_finetune = 0.1;
    int batch = 20;
    int jitter = 10;
    int replicas = 10;
    int folds = 5;
    std::string thresholds;
    std::string propagate = "mean";

    int per_class = 100;
    double sigma = 0.0;
    double miss_prob = 0.0;
    double fp_prob = 0.0;
};

fs::path ensure_out_dir(const Options& opt) {
    fs::path dir(opt.out);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw stillact::Error("cannot write " + path.string());
    out << text;
}

/// Every run records the resolved parameters it actually used.
void write_snapshot(const fs::path& dir, const std::string& command, const json& params) {
    json doc;
    doc["command"] = command;
    doc["parameters"] = params;
    write_text(dir / "config.json", doc.dump(1) + "\n");
}

void write_metrics(const fs::path& dir, const std::vector<std::pair<std::string,
                   const std::vector<double>*>>& stages) {
    std::string text;
    char buf[64];
    for (const auto& [stage, trace] : stages) {
        for (std::size_t i = 0; i < trace->size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", (*trace)[i]);
            text += stage + " " + std::to_string(i + 1) + " " + buf + "\n";
        }
    }
    write_text(dir / "metrics.log", text);
}

stillact::ThresholdSet load_thresholds_opt(const Options& opt) {
    if (opt.thresholds.empty()) return stillact::ThresholdSet::zeros();
    return stillact::load_thresholds(opt.thresholds);
}

stillact::Propagate parse_propagate(const std::string& value) {
    if (value == "mean") return stillact::Propagate::Mean;
    if (value == "sample") return stillact::Propagate::Sample;
    throw CLI::ValidationError("--propagate must be 'mean' or 'sample'");
}

std::vector<stillact::FeatureRecord> encode_all(const std::vector<stillact::ImageAnnotation>& annotations,
                                                const stillact::ThresholdSet& thresholds) {
    std::vector<stillact::FeatureRecord> records;
    records.reserve(annotations.size());
    for (const stillact::ImageAnnotation& a : annotations) {
        stillact::FeatureRecord rec;
        rec.image_id = a.image_id;
        rec.label = a.label;
        rec.feature = stillact::encode_image(stillact::normalize_scale(a), thresholds);
        records.push_back(std::move(rec));
    }
    return records;
}

std::pair<Eigen::MatrixXd, std::vector<int>> labeled_matrix(
    const std::vector<stillact::FeatureRecord>& records) {
    std::vector<stillact::FeatureVector> features;
    std::vector<int> labels;
    for (const stillact::FeatureRecord& rec : records) {
        if (!rec.label) throw stillact::MissingLabel(rec.image_id);
        features.push_back(rec.feature);
        labels.push_back(*rec.label);
    }
    return {stillact::features_to_matrix(features), std::move(labels)};
}

json common_params(const Options& opt) {
    json p;
    p["seed"] = opt.seed;
    return p;
}

int cmd_synth_gen(const Options& opt) {
    fs::path dir = ensure_out_dir(opt);
    stillact::SynthTemplates templates = stillact::load_templates(opt.data);

    stillact::SynthConfig config;
    config.images_per_class = opt.per_class;
    config.seed = opt.seed;
    config.noise.coord_sigma = opt.sigma;
    config.noise.miss_prob = opt.miss_prob;
    config.noise.false_positive_prob = opt.fp_prob;

    std::vector<stillact::ImageAnnotation> annotations = stillact::generate(templates, config);
    stillact::save_annotations(annotations, dir / "annotations.jsonl");

    json p = common_params(opt);
    p["templates"] = opt.data;
    p["per_class"] = opt.per_class;
    p["sigma"] = opt.sigma;
    p["miss_prob"] = opt.miss_prob;
    p["fp_prob"] = opt.fp_prob;
    write_snapshot(dir, "synth-gen", p);
    log_info("wrote " + std::to_string(annotations.size()) + " annotations to " +
             (dir / "annotations.jsonl").string());
    return 0;
}

int cmd_encode(const Options& opt) {
    fs::path dir = ensure_out_dir(opt);
    std::vector<stillact::ImageAnnotation> annotations = stillact::load_annotations(opt.data);
    stillact::ThresholdSet thresholds = load_thresholds_opt(opt);

    std::vector<stillact::FeatureRecord> records = encode_all(annotations, thresholds);
    stillact::save_features(records, dir / "features.jsonl");

    json p = common_params(opt);
    p["data"] = opt.data;
    p["thresholds"] = opt.thresholds;
    write_snapshot(dir, "encode", p);
    log_info("encoded " + std::to_string(records.size()) + " images");
    return 0;
}

int cmd_augment(const Options& opt) {
    fs::path dir = ensure_out_dir(opt);
    std::vector<stillact::ImageAnnotation> annotations = stillact::load_annotations(opt.data);

    stillact::AugmentConfig config;
    config.jitter_px = opt.jitter;
    config.replicas = opt.replicas;
    config.seed = opt.seed;

    std::vector<stillact::ImageAnnotation> out;
    out.reserve(annotations.size() * 2 * static_cast<std::size_t>(opt.replicas));
    for (const stillact::ImageAnnotation& a : annotations) {
        std::vector<stillact::ImageAnnotation> replicas = stillact::augment(a, config);
        out.insert(out.end(), replicas.begin(), replicas.end());
    }
    stillact::save_annotations(out, dir / "annotations.jsonl");

    json p = common_params(opt);
    p["data"] = opt.data;
    p["jitter"] = opt.jitter;
    p["replicas"] = opt.replicas;
    write_snapshot(dir, "augment", p);
    log_info("augmented " + std::to_string(annotations.size()) + " images into " +
             std::to_string(out.size()));
    return 0;
}

stillact::CdConfig pretrain_config(const Options& opt) {
    stillact::CdConfig config;
    config.learning_rate = opt.lr_pretrain;
    config.epochs = opt.epochs_pretrain;
    config.batch_size = opt.batch;
    config.seed = opt.seed;
    return config;
}

stillact::FineTuneConfig finetune_config(const Options& opt) {
    stillact::FineTuneConfig config;
    config.learning_rate = opt.lr_finetune;
    config.epochs = opt.epochs_finetune;
    config.batch_size = opt.batch;
    config.seed = opt.seed;
    return config;
}

json training_params(const Options& opt) {
    json p = common_params(opt);
    p["data"] = opt.data;
    p["epochs_pretrain"] = opt.epochs_pretrain;
    p["epochs_finetune"] = opt.epochs_finetune;
    p["lr_pretrain"] = opt.lr_pretrain;
    p["lr_finetune"] = opt.lr_finetune;
    p["batch"] = opt.batch;
    p["propagate"] = opt.propagate;
    return p;
}

int cmd_pretrain(const Options& opt) {
    fs::path dir = ensure_out_dir(opt);
    std::vector<stillact::FeatureRecord> records = stillact::load_features(opt.data);

    std::vector<stillact::FeatureVector> features;
    features.reserve(records.size());
    for (const stillact::FeatureRecord& rec : records) features.push_back(rec.feature);
    Eigen::MatrixXd X = stillact::features_to_matrix(features);

    stillact::Propagate propagate = parse_propagate(opt.propagate);
    stillact::PretrainResult result =
        stillact::pretrain(X, pretrain_config(opt), propagate, stillact::DbnArchitecture{});

    stillact::DbnModel model;
    model.layer1 = result.layer1;
    model.layer2 = result.layer2;
    model.softmax_W = Eigen::MatrixXd::Zero(model.layer2.hidden_units(), stillact::kClassCount);
    model.softmax_bias = Eigen::VectorXd::Zero(stillact::kClassCount);
    model.meta.seed = opt.seed;
    model.meta.pretrain = pretrain_config(opt);
    model.meta.propagate = propagate;
    stillact::save_model(model, dir / "model.json");

    write_metrics(dir, {{"layer1", &result.layer1_trace}, {"layer2", &result.layer2_trace}});
    write_snapshot(dir, "pretrain", training_params(opt));
    log_info("pre-trained on " + std::to_string(records.size()) + " feature vectors");
    return 0;
}

int cmd_finetune(const Options& opt) {
    fs::path dir = ensure_out_dir(opt);
    std::vector<stillact::FeatureRecord> records = stillact::load_features(opt.data);
    auto [X, labels] = labeled_matrix(records);

    stillact::DbnModel pretrained = stillact::load_model(opt.model);
    stillact::FineTuneResult result =
        stillact::finetune(pretrained.layer1, pretrained.layer2, X, labels, finetune_config(opt));

    result.model.meta.seed = opt.seed;
    result.model.meta.pretrain = pretrained.meta.pretrain;
    result.model.meta.propagate = pretrained.meta.propagate;
    stillact::save_model(result.model, dir / "model.json");

    write_metrics(dir, {{"finetune", &result.loss_trace}});
    json p = training_params(opt);
    p["model"] = opt.model;
    write_snapshot(dir, "finetune", p);
    log_info("fine-tuned on " + std::to_string(records.size()) + " feature vectors");
    return 0;
}

int cmd_train(const Options& opt) {
    fs::path dir = ensure_out_dir(opt);
    std::vector<stillact::ImageAnnotation> annotations = stillact::load_annotations(opt.data);
    stillact::ThresholdSet thresholds = load_thresholds_opt(opt);

    std::vector<stillact::FeatureRecord> records = encode_all(annotations, thresholds);
    auto [X, labels] = labeled_matrix(records);

    stillact::Propagate propagate = parse_propagate(opt.propagate);
    log_debug("pre-training");
    stillact::PretrainResult pre =
        stillact::pretrain(X, pretrain_config(opt), propagate, stillact::DbnArchitecture{});
    log_debug("fine-tuning");
    stillact::FineTuneResult fine =
        stillact::finetune(pre.layer1, pre.layer2, X, labels, finetune_config(opt));

    fine.model.meta.seed = opt.seed;
    fine.model.meta.pretrain = pretrain_config(opt);
    fine.model.meta.propagate = propagate;
    stillact::save_model(fine.model, dir / "model.json");

    write_metrics(dir, {{"layer1", &pre.layer1_trace},
                        {"layer2", &pre.layer2_trace},
                        {"finetune", &fine.loss_trace}});
    json p = training_params(opt);
    p["thresholds"] = opt.thresholds;
    write_snapshot(dir, "train", p);
    log_info("trained on " + std::to_string(records.size()) + " images");
    return 0;
}

int cmd_predict(const Options& opt) {
    fs::path dir = ensure_out_dir(opt);
    std::vector<stillact::ImageAnnotation> annotations = stillact::load_annotations(opt.data);
    stillact::ThresholdSet thresholds = load_thresholds_opt(opt);
    stillact::DbnModel model = stillact::load_model(opt.model);

    std::string lines;
    char buf[64];
    for (const stillact::ImageAnnotation& a : annotations) {
        stillact::FeatureVector f =
            stillact::encode_image(stillact::normalize_scale(a), thresholds);
        stillact::Prediction pred = stillact::predict(model, f);
        json row;
        row["image_id"] = a.image_id;
        row["label"] = pred.label;
        row["class"] = std::string(stillact::class_name(pred.label));
        json scores = json::array();
        for (Eigen::Index j = 0; j < pred.scores.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%a", pred.scores(j));
            scores.push_back(std::string(buf));
        }
        row["scores"] = scores;
        lines += row.dump() + "\n";
    }
    write_text(dir / "predictions.jsonl", lines);

    json p = common_params(opt);
    p["data"] = opt.data;
    p["model"] = opt.model;
    p["thresholds"] = opt.thresholds;
    write_snapshot(dir, "predict", p);
    log_info("predicted " + std::to_string(annotations.size()) + " images");
    return 0;
}

int cmd_evaluate(const Options& opt) {
    fs::path dir = ensure_out_dir(opt);
    std::vector<stillact::ImageAnnotation> annotations = stillact::load_annotations(opt.data);
    stillact::ThresholdSet thresholds = load_thresholds_opt(opt);
    stillact::DbnModel model = stillact::load_model(opt.model);

    stillact::EvaluationReport report = stillact::evaluate_model(model, annotations, thresholds);
    write_text(dir / "report.txt", stillact::report_text(report));
    write_text(dir / "report.json", stillact::report_json(report) + "\n");

    json p = common_params(opt);
    p["data"] = opt.data;
    p["model"] = opt.model;
    p["thresholds"] = opt.thresholds;
    write_snapshot(dir, "evaluate", p);
    log_info("evaluated " + std::to_string(report.evaluated) + " images, mAP " +
             std::to_string(report.map));
    return 0;
}

int cmd_select_thresholds(const Options& opt) {
    fs::path dir = ensure_out_dir(opt);
    std::vector<stillact::ImageAnnotation> annotations = stillact::load_annotations(opt.data);

    stillact::FineTuneConfig trainer_config;
    trainer_config.seed = opt.seed;
    stillact::FeatureTrainer trainer = [&trainer_config](
                                           const std::vector<stillact::FeatureVector>& features,
                                           const std::vector<int>& labels) {
        Eigen::MatrixXd X = stillact::features_to_matrix(features);
        return stillact::shallow_scorer(stillact::train_shallow(X, labels, trainer_config).model);
    };

    stillact::ThresholdSearchResult result =
        stillact::select_thresholds(annotations, trainer, opt.folds, opt.seed);
    stillact::save_thresholds(result.thresholds, dir / "thresholds.json");

    json search;
    search["best_map"] = result.best_map;
    json entities = json::array();
    for (const stillact::EntityThresholdInfo& info : result.info) {
        json e;
        e["entity"] = std::string(stillact::entity_name(info.kind));
        e["chosen"] = info.chosen;
        e["vacuous"] = info.vacuous;
        e["grid"] = info.grid;
        entities.push_back(e);
    }
    search["entities"] = entities;
    write_text(dir / "search.json", search.dump(1) + "\n");

    json p = common_params(opt);
    p["data"] = opt.data;
    p["folds"] = opt.folds;
    write_snapshot(dir, "select-thresholds", p);
    log_info("selected thresholds, cross-validated mAP " + std::to_string(result.best_map));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Still-image action recognition pipeline"};
    app.require_subcommand(1);

    Options opt;

    auto add_common = [&opt](CLI::App* cmd, bool needs_data, bool needs_model) {
        cmd->add_option("--data", opt.data, "Input data file")->required(needs_data);
        if (needs_model) cmd->add_option("--model", opt.model, "Model file")->required();
        cmd->add_option("--out", opt.out, "Output directory")->required();
        cmd->add_option("--seed", opt.seed, "Run seed");
    };

    auto add_training = [&opt](CLI::App* cmd) {
        cmd->add_option("--epochs-pretrain", opt.epochs_pretrain, "Pre-training epochs");
        cmd->add_option("--epochs-finetune", opt.epochs_finetune, "Fine-tuning epochs");
        cmd->add_option("--lr-pretrain", opt.lr_pretrain, "Pre-training learning rate");
        cmd->add_option("--lr-finetune", opt.lr_finetune, "Fine-tuning learning rate");
        cmd->add_option("--batch", opt.batch, "Mini-batch size");
        cmd->add_option("--propagate", opt.propagate, "Layer-1 to layer-2 propagation")
            ->check(CLI::IsMember({"mean", "sample"}));
    };

    CLI::App* synth = app.add_subcommand("synth-gen", "Generate synthetic benchmark annotations");
    add_common(synth, true, false);
    synth->add_option("--per-class", opt.per_class, "Images per class");
    synth->add_option("--sigma", opt.sigma, "Coordinate noise, px");
    synth->add_option("--miss-prob", opt.miss_prob, "Entity dropout probability");
    synth->add_option("--fp-prob", opt.fp_prob, "Spurious detection probability");

    CLI::App* encode = app.add_subcommand("encode", "Encode annotations into feature vectors");
    add_common(encode, true, false);
    encode->add_option("--thresholds", opt.thresholds, "Detector threshold file");

    CLI::App* augment = app.add_subcommand("augment", "Mirror and jitter labeled annotations");
    add_common(augment, true, false);
    augment->add_option("--jitter", opt.jitter, "Max jitter offset, px");
    augment->add_option("--replicas", opt.replicas, "Jittered replicas per orientation");

    CLI::App* pretrain = app.add_subcommand("pretrain", "Greedy layer-wise pre-training");
    add_common(pretrain, true, false);
    add_training(pretrain);

    CLI::App* finetune = app.add_subcommand("finetune", "Supervised fine-tuning");
    add_common(finetune, true, true);
    add_training(finetune);

    CLI::App* train = app.add_subcommand("train", "Pre-train then fine-tune");
    add_common(train, true, false);
    add_training(train);
    train->add_option("--thresholds", opt.thresholds, "Detector threshold file");

    CLI::App* predict = app.add_subcommand("predict", "Score annotations with a trained model");
    add_common(predict, true, true);
    predict->add_option("--thresholds", opt.thresholds, "Detector threshold file");

    CLI::App* evaluate = app.add_subcommand("evaluate", "Per-class AP report for labeled data");
    add_common(evaluate, true, true);
    evaluate->add_option("--thresholds", opt.thresholds, "Detector threshold file");

    CLI::App* select = app.add_subcommand("select-thresholds",
                                          "Cross-validated detector threshold search");
    add_common(select, true, false);
    select->add_option("--folds", opt.folds, "Cross-validation folds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (synth->parsed()) return cmd_synth_gen(opt);
        if (encode->parsed()) return cmd_encode(opt);
        if (augment->parsed()) return cmd_augment(opt);
        if (pretrain->parsed()) return cmd_pretrain(opt);
        if (finetune->parsed()) return cmd_finetune(opt);
        if (train->parsed()) return cmd_train(opt);
        if (predict->parsed()) return cmd_predict(opt);
        if (evaluate->parsed()) return cmd_evaluate(opt);
        if (select->parsed()) return cmd_select_thresholds(opt);
    } catch (const stillact::NumericFailure& e) {
        std::cerr << "stillact: numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const stillact::InvalidConfig& e) {
        std::cerr << "stillact: " << e.what() << "\n";
        return 1;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "stillact: " << e.what() << "\n";
        return 1;
    } catch (const stillact::Error& e) {
        std::cerr << "stillact: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "stillact: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
