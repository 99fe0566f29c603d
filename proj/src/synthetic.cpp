#include "stillact/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>

#include "stillact/errors.hpp"
#include "stillact/minibatch.hpp"
#include "stillact/rng.hpp"
#include "vendor/json.hpp"

namespace stillact {

namespace {

using nlohmann::json;

double require_number(const json& node, const char* key) {
    if (!node.contains(key) || !node[key].is_number()) {
        throw InvalidConfig(std::string("templates: missing numeric field '") + key + "'");
    }
    double v = node[key].get<double>();
    if (!std::isfinite(v)) {
        throw InvalidConfig(std::string("templates: field '") + key + "' is not finite");
    }
    return v;
}

/// Round to the nearest 1/16 px. Keeps every coordinate exactly representable
/// after a horizontal flip against an integer image width.
double snap(double v) { return std::round(v * 16.0) / 16.0; }

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidConfig(std::string(what) + " must lie in [0, 1]");
    }
}

void check_range(const ScoreRange& r, const char* what) {
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
        throw InvalidConfig(std::string(what) + " must be a finite lo <= hi range");
    }
}

void check_labels(const std::vector<int>& labels, Eigen::Index rows, int classes) {
    if (static_cast<Eigen::Index>(labels.size()) != rows) {
        throw DimensionMismatch("labels/batch size mismatch");
    }
    for (int label : labels) {
        if (label < 0 || label >= classes) throw LabelOutOfRange(label);
    }
}

}  // namespace

SynthTemplates load_templates(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open template file " + path.string());

    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw CorruptFile("template file " + path.string() + ": " + e.what());
    }

    SynthTemplates out;
    out.width = require_number(doc, "width");
    out.height = require_number(doc, "height");
    if (out.width <= 0 || out.height <= 0) {
        throw InvalidConfig("templates: width and height must be positive");
    }
    if (!doc.contains("classes") || !doc["classes"].is_array()) {
        throw InvalidConfig("templates: missing 'classes' array");
    }

    std::array<bool, kClassCount> seen_label{};
    for (const json& cls : doc["classes"]) {
        ClassTemplate tpl;
        if (!cls.contains("label") || !cls["label"].is_string()) {
            throw InvalidConfig("templates: class entry without a string label");
        }
        std::optional<int> label = class_from_name(cls["label"].get<std::string>());
        if (!label) {
            throw InvalidConfig("templates: unknown class " + cls["label"].get<std::string>());
        }
        tpl.label = *label;
        if (seen_label[static_cast<std::size_t>(tpl.label)]) {
            throw InvalidConfig("templates: duplicate class " + cls["label"].get<std::string>());
        }
        seen_label[static_cast<std::size_t>(tpl.label)] = true;

        if (!cls.contains("entities") || !cls["entities"].is_array() || cls["entities"].empty()) {
            throw InvalidConfig("templates: class " + cls["label"].get<std::string>() +
                                " has no entities");
        }
        std::array<bool, kEntityCount> seen_kind{};
        for (const json& ent : cls["entities"]) {
            if (!ent.contains("kind") || !ent["kind"].is_string()) {
                throw InvalidConfig("templates: entity without a string kind");
            }
            std::optional<EntityKind> kind = entity_from_name(ent["kind"].get<std::string>());
            if (!kind) {
                throw InvalidConfig("templates: unknown entity " + ent["kind"].get<std::string>());
            }
            std::size_t ki = static_cast<std::size_t>(entity_index(*kind));
            if (seen_kind[ki]) {
                throw InvalidConfig("templates: duplicate entity " +
                                    ent["kind"].get<std::string>());
            }
            seen_kind[ki] = true;
            CentralLine line{require_number(ent, "x1"), require_number(ent, "y1"),
                             require_number(ent, "x2"), require_number(ent, "y2")};
            tpl.entities.emplace_back(*kind, line);
        }
        if (!seen_kind[static_cast<std::size_t>(entity_index(EntityKind::Head))]) {
            throw InvalidConfig("templates: class " + cls["label"].get<std::string>() +
                                " lacks a head");
        }
        out.classes.push_back(std::move(tpl));
    }

    for (int c = 0; c < kClassCount; ++c) {
        if (!seen_label[static_cast<std::size_t>(c)]) {
            throw InvalidConfig("templates: class " + std::string(class_name(c)) + " is missing");
        }
    }
    std::sort(out.classes.begin(), out.classes.end(),
              [](const ClassTemplate& a, const ClassTemplate& b) { return a.label < b.label; });
    return out;
}

std::vector<ImageAnnotation> generate(const SynthTemplates& templates,
                                      const SynthConfig& config) {
    if (config.images_per_class < 1) {
        throw InvalidConfig("images_per_class must be at least 1");
    }
    if (!(config.noise.coord_sigma >= 0.0)) {
        throw InvalidConfig("coord_sigma must be non-negative");
    }
    check_probability(config.noise.miss_prob, "miss_prob");
    check_probability(config.noise.false_positive_prob, "false_positive_prob");
    check_range(config.noise.true_score, "true_score");
    check_range(config.noise.false_score, "false_score");
    if (templates.classes.size() != static_cast<std::size_t>(kClassCount)) {
        throw InvalidConfig("templates must cover every class");
    }

    rng::Engine eng = rng::make_engine(config.seed, "synth.generate");
    const NoiseModel& noise = config.noise;

    std::vector<ImageAnnotation> out;
    out.reserve(static_cast<std::size_t>(kClassCount) *
                static_cast<std::size_t>(config.images_per_class));

    for (const ClassTemplate& tpl : templates.classes) {
        for (int idx = 0; idx < config.images_per_class; ++idx) {
            ImageAnnotation img;
            img.image_id = "synth-" + std::string(class_name(tpl.label)) + "-" +
                           std::to_string(idx);
            img.width = templates.width;
            img.height = templates.height;
            img.label = tpl.label;
            img.pose_mode = PoseMode::Full;

            std::array<bool, kEntityCount> present{};
            for (const auto& [kind, line] : tpl.entities) {
                if (kind != EntityKind::Head &&
                    rng::uniform(eng) < noise.miss_prob) {
                    continue;
                }
                DetectionRecord rec;
                rec.kind = kind;
                rec.line.x1 = std::clamp(snap(line.x1 + noise.coord_sigma * rng::normal(eng)),
                                         0.0, templates.width);
                rec.line.y1 = std::clamp(snap(line.y1 + noise.coord_sigma * rng::normal(eng)),
                                         0.0, templates.height);
                rec.line.x2 = std::clamp(snap(line.x2 + noise.coord_sigma * rng::normal(eng)),
                                         0.0, templates.width);
                rec.line.y2 = std::clamp(snap(line.y2 + noise.coord_sigma * rng::normal(eng)),
                                         0.0, templates.height);
                rec.score = rng::uniform(eng, noise.true_score.lo, noise.true_score.hi);
                rec.source = Source::Detector;
                img.detections.push_back(rec);
                present[static_cast<std::size_t>(entity_index(kind))] = true;
            }

            for (int k = 0; k < kEntityCount; ++k) {
                EntityKind kind = entity_at(k);
                if (present[static_cast<std::size_t>(k)] || kind == EntityKind::Head) continue;
                if (rng::uniform(eng) >= noise.false_positive_prob) continue;
                DetectionRecord rec;
                rec.kind = kind;
                rec.line.x1 = snap(rng::uniform(eng, 0.0, templates.width));
                rec.line.y1 = snap(rng::uniform(eng, 0.0, templates.height));
                rec.line.x2 = snap(rng::uniform(eng, 0.0, templates.width));
                rec.line.y2 = snap(rng::uniform(eng, 0.0, templates.height));
                rec.score = rng::uniform(eng, noise.false_score.lo, noise.false_score.hi);
                rec.source = Source::Detector;
                img.detections.push_back(rec);
            }

            out.push_back(std::move(img));
        }
    }
    return out;
}

Eigen::VectorXd shallow_forward(const SoftmaxModel& model, const Eigen::VectorXd& feature) {
    if (feature.size() != model.W.rows()) {
        throw DimensionMismatch("shallow_forward: feature length " +
                                std::to_string(feature.size()) + ", model expects " +
                                std::to_string(model.W.rows()));
    }
    Eigen::MatrixXd logits = (feature.transpose() * model.W).rowwise() + model.bias.transpose();
    return softmax_rows(logits).row(0).transpose();
}

std::pair<double, ShallowGradients> shallow_loss_and_gradients(const SoftmaxModel& model,
                                                               const Eigen::MatrixXd& batch,
                                                               const std::vector<int>& labels) {
    if (batch.rows() == 0) throw EmptyBatch();
    if (batch.cols() != model.W.rows()) {
        throw DimensionMismatch("shallow batch width does not match the model");
    }
    check_labels(labels, batch.rows(), static_cast<int>(model.bias.size()));

    Eigen::MatrixXd probs =
        softmax_rows((batch * model.W).rowwise() + model.bias.transpose());
    const double n = static_cast<double>(batch.rows());

    double loss = 0.0;
    Eigen::MatrixXd dz = probs;
    for (Eigen::Index r = 0; r < batch.rows(); ++r) {
        int label = labels[static_cast<std::size_t>(r)];
        loss -= std::log(probs(r, label));
        dz(r, label) -= 1.0;
    }
    loss /= n;
    dz /= n;

    ShallowGradients g;
    g.W = batch.transpose() * dz;
    g.bias = dz.colwise().sum().transpose();
    return {loss, std::move(g)};
}

ShallowResult train_shallow(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                            const FineTuneConfig& config) {
    if (features.rows() == 0) throw EmptyDataset();
    check_labels(labels, features.rows(), kClassCount);

    ShallowResult result;
    result.model.W = Eigen::MatrixXd::Zero(features.cols(), kClassCount);
    result.model.bias = Eigen::VectorXd::Zero(kClassCount);

    rng::Engine eng = rng::make_engine(config.seed, "shallow.finetune");
    const int n = static_cast<int>(features.rows());

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (const std::vector<int>& batch_idx : epoch_batches(n, config.batch_size, eng)) {
            Eigen::MatrixXd batch(static_cast<Eigen::Index>(batch_idx.size()), features.cols());
            std::vector<int> batch_labels(batch_idx.size());
            for (std::size_t r = 0; r < batch_idx.size(); ++r) {
                batch.row(static_cast<Eigen::Index>(r)) = features.row(batch_idx[r]);
                batch_labels[r] = labels[static_cast<std::size_t>(batch_idx[r])];
            }

            auto [loss, g] = shallow_loss_and_gradients(result.model, batch, batch_labels);
            if (!std::isfinite(loss)) {
                throw NumericFailure("shallow training loss is non-finite at epoch " +
                                     std::to_string(epoch + 1));
            }

            result.model.W -= config.learning_rate * g.W;
            result.model.bias -= config.learning_rate * g.bias;
            epoch_loss += loss * static_cast<double>(batch_idx.size());
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(n));
    }
    return result;
}

Scorer shallow_scorer(const SoftmaxModel& model) {
    return [model](const FeatureVector& f) { return shallow_forward(model, feature_to_vector(f)); };
}

}  // namespace stillact
