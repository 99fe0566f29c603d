#include "stillact/dataset_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vendor/json.hpp"

#include "stillact/errors.hpp"
#include "stillact/rng.hpp"

namespace stillact {

namespace {

using nlohmann::json;

std::string hex_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_hex_double(const json& j, const char* what) {
    if (!j.is_string()) throw CorruptFile(std::string(what) + ": expected hex float string");
    const std::string& s = j.get_ref<const std::string&>();
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw CorruptFile(std::string(what) + ": bad float literal '" + s + "'");
    }
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(hex_double(m(r, c)));
    }
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows * cols) {
        throw CorruptFile(std::string(what) + ": wrong element count");
    }
    Eigen::MatrixXd m(rows, cols);
    Eigen::Index i = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = parse_hex_double(j[static_cast<std::size_t>(i++)], what);
        }
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(hex_double(v(i)));
    return out;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index size, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
        throw CorruptFile(std::string(what) + ": wrong element count");
    }
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        v(i) = parse_hex_double(j[static_cast<std::size_t>(i)], what);
    }
    return v;
}

std::string checksum_hex(const std::string& payload) {
    std::uint64_t h = rng::hash_label(payload);
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const json& require(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(line, "missing field '" + std::string(key) + "'");
    }
    return *it;
}

double require_finite_number(const json& j, const char* key, std::size_t line) {
    if (!j.is_number()) throw ParseError(line, std::string("field '") + key + "' is not a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw ParseError(line, std::string("field '") + key + "' is not finite");
    }
    return v;
}

DetectionRecord parse_detection(const json& j, std::size_t line) {
    if (!j.is_object()) throw ParseError(line, "detection is not an object");

    const json& kind_json = require(j, "kind", line);
    if (!kind_json.is_string()) throw ParseError(line, "detection kind is not a string");
    std::optional<EntityKind> kind = entity_from_name(kind_json.get_ref<const std::string&>());
    if (!kind) throw UnknownEntityKind(line, kind_json.get_ref<const std::string&>());

    DetectionRecord rec;
    rec.kind = *kind;
    rec.line.x1 = require_finite_number(require(j, "x1", line), "x1", line);
    rec.line.y1 = require_finite_number(require(j, "y1", line), "y1", line);
    rec.line.x2 = require_finite_number(require(j, "x2", line), "x2", line);
    rec.line.y2 = require_finite_number(require(j, "y2", line), "y2", line);
    rec.score = require_finite_number(require(j, "score", line), "score", line);

    const json& source = require(j, "source", line);
    if (!source.is_string()) throw ParseError(line, "detection source is not a string");
    const std::string& source_name = source.get_ref<const std::string&>();
    if (source_name == "manual") {
        rec.source = Source::Manual;
    } else if (source_name == "detector") {
        rec.source = Source::Detector;
    } else {
        throw ParseError(line, "unknown detection source '" + source_name + "'");
    }
    return rec;
}

ImageAnnotation parse_annotation(const json& j, std::size_t line) {
    if (!j.is_object()) throw ParseError(line, "annotation is not an object");

    ImageAnnotation annotation;
    const json& id = require(j, "image_id", line);
    if (!id.is_string()) throw ParseError(line, "image_id is not a string");
    annotation.image_id = id.get<std::string>();
    annotation.width = require_finite_number(require(j, "width", line), "width", line);
    annotation.height = require_finite_number(require(j, "height", line), "height", line);

    const json& pose = require(j, "pose_mode", line);
    if (!pose.is_string()) throw ParseError(line, "pose_mode is not a string");
    const std::string& pose_name = pose.get_ref<const std::string&>();
    if (pose_name == "full") {
        annotation.pose_mode = PoseMode::Full;
    } else if (pose_name == "upper") {
        annotation.pose_mode = PoseMode::Upper;
    } else {
        throw ParseError(line, "unknown pose_mode '" + pose_name + "'");
    }

    if (j.contains("label") && !j["label"].is_null()) {
        const json& label = j["label"];
        if (!label.is_string()) throw ParseError(line, "label is not a string");
        std::optional<int> cls = class_from_name(label.get_ref<const std::string&>());
        if (!cls) throw UnknownLabel(line, label.get_ref<const std::string&>());
        annotation.label = cls;
    }

    const json& detections = require(j, "detections", line);
    if (!detections.is_array()) throw ParseError(line, "detections is not an array");
    for (const json& d : detections) annotation.detections.push_back(parse_detection(d, line));
    return annotation;
}

json annotation_to_json(const ImageAnnotation& annotation) {
    json detections = json::array();
    for (const DetectionRecord& rec : annotation.detections) {
        detections.push_back({{"kind", std::string(entity_name(rec.kind))},
                              {"x1", rec.line.x1},
                              {"y1", rec.line.y1},
                              {"x2", rec.line.x2},
                              {"y2", rec.line.y2},
                              {"score", rec.score},
                              {"source", rec.source == Source::Manual ? "manual" : "detector"}});
    }
    json j = {{"image_id", annotation.image_id},
              {"width", annotation.width},
              {"height", annotation.height},
              {"pose_mode", annotation.pose_mode == PoseMode::Full ? "full" : "upper"},
              {"detections", detections}};
    if (annotation.label.has_value()) {
        j["label"] = std::string(class_name(*annotation.label));
    } else {
        j["label"] = nullptr;
    }
    return j;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

std::vector<ImageAnnotation> load_annotations(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<ImageAnnotation> annotations;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(line_number, e.what());
        }
        annotations.push_back(parse_annotation(j, line_number));
    }
    return annotations;
}

void save_annotations(const std::vector<ImageAnnotation>& annotations,
                      const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    for (const ImageAnnotation& annotation : annotations) {
        out << annotation_to_json(annotation).dump() << '\n';
    }
}

void save_model(const DbnModel& model, const std::filesystem::path& path) {
    const DbnArchitecture arch = model.architecture();
    json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["architecture"] = {arch.input, arch.hidden1, arch.hidden2, arch.classes};
    doc["layer1"] = {{"sigma", hex_double(model.layer1.sigma)},
                     {"W", matrix_to_json(model.layer1.W)},
                     {"hidden_bias", vector_to_json(model.layer1.hidden_bias)},
                     {"visible_bias", vector_to_json(model.layer1.visible_bias)}};
    doc["layer2"] = {{"W", matrix_to_json(model.layer2.W)},
                     {"hidden_bias", vector_to_json(model.layer2.hidden_bias)},
                     {"visible_bias", vector_to_json(model.layer2.visible_bias)}};
    doc["softmax"] = {{"W", matrix_to_json(model.softmax_W)},
                      {"bias", vector_to_json(model.softmax_bias)}};
    doc["meta"] = {
        {"seed", model.meta.seed},
        {"propagate", model.meta.propagate == Propagate::Mean ? "mean" : "sample"},
        {"pretrain",
         {{"learning_rate", hex_double(model.meta.pretrain.learning_rate)},
          {"epochs", model.meta.pretrain.epochs},
          {"batch_size", model.meta.pretrain.batch_size},
          {"k", model.meta.pretrain.k},
          {"seed", model.meta.pretrain.seed}}},
        {"finetune",
         {{"learning_rate", hex_double(model.meta.finetune.learning_rate)},
          {"epochs", model.meta.finetune.epochs},
          {"batch_size", model.meta.finetune.batch_size},
          {"seed", model.meta.finetune.seed}}}};
    doc["checksum"] = checksum_hex(doc.dump());

    std::ofstream out = open_output(path);
    out << doc.dump(1) << '\n';
}

DbnModel load_model(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::stringstream buffer;
    buffer << in.rdbuf();

    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw CorruptFile("model file '" + path.string() + "': " + e.what());
    }

    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
        throw CorruptFile("model file missing format_version");
    }
    int version = doc["format_version"].get<int>();
    if (version != kModelFormatVersion) throw VersionMismatch(version, kModelFormatVersion);

    if (!doc.contains("checksum") || !doc["checksum"].is_string()) {
        throw CorruptFile("model file missing checksum");
    }
    std::string stored = doc["checksum"].get<std::string>();
    doc.erase("checksum");
    if (checksum_hex(doc.dump()) != stored) {
        throw CorruptFile("model file checksum mismatch");
    }

    if (!doc.contains("architecture") || !doc["architecture"].is_array() ||
        doc["architecture"].size() != 4) {
        throw CorruptFile("model file architecture malformed");
    }
    try {
        Eigen::Index input = doc["architecture"][0].get<Eigen::Index>();
        Eigen::Index hidden1 = doc["architecture"][1].get<Eigen::Index>();
        Eigen::Index hidden2 = doc["architecture"][2].get<Eigen::Index>();
        Eigen::Index classes = doc["architecture"][3].get<Eigen::Index>();

        DbnModel model;
        const json& l1 = doc.at("layer1");
        model.layer1.sigma = parse_hex_double(l1.at("sigma"), "layer1.sigma");
        model.layer1.W = matrix_from_json(l1.at("W"), input, hidden1, "layer1.W");
        model.layer1.hidden_bias =
            vector_from_json(l1.at("hidden_bias"), hidden1, "layer1.hidden_bias");
        model.layer1.visible_bias =
            vector_from_json(l1.at("visible_bias"), input, "layer1.visible_bias");

        const json& l2 = doc.at("layer2");
        model.layer2.W = matrix_from_json(l2.at("W"), hidden1, hidden2, "layer2.W");
        model.layer2.hidden_bias =
            vector_from_json(l2.at("hidden_bias"), hidden2, "layer2.hidden_bias");
        model.layer2.visible_bias =
            vector_from_json(l2.at("visible_bias"), hidden1, "layer2.visible_bias");

        const json& head = doc.at("softmax");
        model.softmax_W = matrix_from_json(head.at("W"), hidden2, classes, "softmax.W");
        model.softmax_bias = vector_from_json(head.at("bias"), classes, "softmax.bias");

        const json& meta = doc.at("meta");
        model.meta.seed = meta.at("seed").get<std::uint64_t>();
        model.meta.propagate = meta.at("propagate").get<std::string>() == "sample"
                                   ? Propagate::Sample
                                   : Propagate::Mean;
        const json& pre = meta.at("pretrain");
        model.meta.pretrain.learning_rate = parse_hex_double(pre.at("learning_rate"), "pretrain.lr");
        model.meta.pretrain.epochs = pre.at("epochs").get<int>();
        model.meta.pretrain.batch_size = pre.at("batch_size").get<int>();
        model.meta.pretrain.k = pre.at("k").get<int>();
        model.meta.pretrain.seed = pre.at("seed").get<std::uint64_t>();
        const json& fine = meta.at("finetune");
        model.meta.finetune.learning_rate =
            parse_hex_double(fine.at("learning_rate"), "finetune.lr");
        model.meta.finetune.epochs = fine.at("epochs").get<int>();
        model.meta.finetune.batch_size = fine.at("batch_size").get<int>();
        model.meta.finetune.seed = fine.at("seed").get<std::uint64_t>();
        return model;
    } catch (const json::exception& e) {
        throw CorruptFile(std::string("model file is structurally invalid: ") + e.what());
    }
}

void save_thresholds(const ThresholdSet& thresholds, const std::filesystem::path& path) {
    json values;
    for (int k = 0; k < kEntityCount; ++k) {
        values[std::string(entity_name(entity_at(k)))] =
            hex_double(thresholds.sigma[static_cast<std::size_t>(k)]);
    }
    json doc = {{"format_version", kThresholdFormatVersion}, {"thresholds", values}};
    std::ofstream out = open_output(path);
    out << doc.dump(1) << '\n';
}

ThresholdSet load_thresholds(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw CorruptFile("threshold file '" + path.string() + "': " + e.what());
    }
    if (!doc.contains("format_version") ||
        doc["format_version"].get<int>() != kThresholdFormatVersion) {
        throw CorruptFile("threshold file has wrong format_version");
    }
    ThresholdSet thresholds;
    const json& values = doc.at("thresholds");
    for (int k = 0; k < kEntityCount; ++k) {
        std::string name(entity_name(entity_at(k)));
        if (!values.contains(name)) {
            throw CorruptFile("threshold file missing entity '" + name + "'");
        }
        thresholds.sigma[static_cast<std::size_t>(k)] =
            parse_hex_double(values[name], name.c_str());
    }
    return thresholds;
}

void save_features(const std::vector<FeatureRecord>& records,
                   const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    for (const FeatureRecord& rec : records) {
        json values = json::array();
        for (double v : rec.feature.values) values.push_back(v);
        json j = {{"image_id", rec.image_id}, {"values", values}};
        if (rec.label.has_value()) {
            j["label"] = std::string(class_name(*rec.label));
        } else {
            j["label"] = nullptr;
        }
        out << j.dump() << '\n';
    }
}

std::vector<FeatureRecord> load_features(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<FeatureRecord> records;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(line_number, e.what());
        }
        FeatureRecord rec;
        const json& id = require(j, "image_id", line_number);
        if (!id.is_string()) throw ParseError(line_number, "image_id is not a string");
        rec.image_id = id.get<std::string>();
        if (j.contains("label") && !j["label"].is_null()) {
            if (!j["label"].is_string()) throw ParseError(line_number, "label is not a string");
            std::optional<int> cls = class_from_name(j["label"].get_ref<const std::string&>());
            if (!cls) throw UnknownLabel(line_number, j["label"].get<std::string>());
            rec.label = cls;
        }
        const json& values = require(j, "values", line_number);
        if (!values.is_array() || values.size() != static_cast<std::size_t>(kFeatureDim)) {
            throw ParseError(line_number, "values must hold exactly 90 numbers");
        }
        for (std::size_t i = 0; i < static_cast<std::size_t>(kFeatureDim); ++i) {
            rec.feature.values[i] = require_finite_number(values[i], "values", line_number);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace stillact
