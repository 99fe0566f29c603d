#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "stillact/dataset_io.hpp"
#include "stillact/dbn.hpp"
#include "stillact/errors.hpp"
#include "stillact/rng.hpp"
#include "vendor/doctest.h"
#include "vendor/json.hpp"

using namespace stillact;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("stillact-io-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path file(const char* name) const { return path / name; }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

DbnModel small_model(std::uint64_t seed) {
    rng::Engine eng = rng::make_engine(seed, "io.test");
    DbnModel model;
    model.layer1 = make_gaussian_rbm(9, 8, eng);
    model.layer2 = make_binary_rbm(8, 5, eng);
    model.softmax_W = Eigen::MatrixXd(5, 7);
    for (Eigen::Index r = 0; r < 5; ++r) {
        for (Eigen::Index c = 0; c < 7; ++c) model.softmax_W(r, c) = rng::normal(eng);
    }
    model.softmax_bias = Eigen::VectorXd(7);
    for (Eigen::Index c = 0; c < 7; ++c) model.softmax_bias(c) = rng::normal(eng);
    model.meta.seed = seed;
    model.meta.propagate = Propagate::Sample;
    model.meta.pretrain = {0.015, 3, 4, 2, seed + 1};
    model.meta.finetune = {0.25, 9, 5, seed + 2};
    return model;
}

const char* kValidLine =
    R"({"image_id":"a","width":100,"height":100,"pose_mode":"full","label":null,"detections":[]})";

}  // namespace

TEST_CASE("annotations round trip every field") {
    ImageAnnotation first;
    first.image_id = "img-001";
    first.width = 640;
    first.height = 480;
    first.pose_mode = PoseMode::Upper;
    first.label = 4;
    first.detections = {
        {EntityKind::Head, {100.25, 50.5, 101.75, 90.125}, 0.875, Source::Manual},
        {EntityKind::Horse, {10, 200, 300, 210.0625}, 0.4375, Source::Detector},
    };

    ImageAnnotation second;
    second.image_id = "img-002";
    second.width = 321;
    second.height = 123;

    TempDir dir;
    fs::path path = dir.file("annotations.jsonl");
    save_annotations({first, second}, path);
    std::vector<ImageAnnotation> loaded = load_annotations(path);

    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].image_id == "img-001");
    CHECK(loaded[0].width == 640.0);
    CHECK(loaded[0].height == 480.0);
    CHECK(loaded[0].pose_mode == PoseMode::Upper);
    REQUIRE(loaded[0].label.has_value());
    CHECK(*loaded[0].label == 4);
    REQUIRE(loaded[0].detections.size() == 2);
    CHECK(loaded[0].detections[0].kind == EntityKind::Head);
    CHECK(loaded[0].detections[0].line.x1 == 100.25);
    CHECK(loaded[0].detections[0].line.y1 == 50.5);
    CHECK(loaded[0].detections[0].line.x2 == 101.75);
    CHECK(loaded[0].detections[0].line.y2 == 90.125);
    CHECK(loaded[0].detections[0].score == 0.875);
    CHECK(loaded[0].detections[0].source == Source::Manual);
    CHECK(loaded[0].detections[1].kind == EntityKind::Horse);
    CHECK(loaded[0].detections[1].line.y2 == 210.0625);
    CHECK(loaded[0].detections[1].source == Source::Detector);

    CHECK(loaded[1].image_id == "img-002");
    CHECK(!loaded[1].label.has_value());
    CHECK(loaded[1].pose_mode == PoseMode::Full);
    CHECK(loaded[1].detections.empty());
}

TEST_CASE("annotation loader accepts empty input") {
    TempDir dir;

    fs::path empty = dir.file("empty.jsonl");
    write_text(empty, "");
    CHECK(load_annotations(empty).empty());

    fs::path blanks = dir.file("blanks.jsonl");
    write_text(blanks, std::string(kValidLine) + "\n\n" + kValidLine + "\n");
    CHECK(load_annotations(blanks).size() == 2);

    CHECK_THROWS_AS(load_annotations(dir.file("no-such-file.jsonl")), Error);
}

TEST_CASE("annotation loader reports the offending line") {
    TempDir dir;

    SUBCASE("unknown entity kind") {
        fs::path path = dir.file("bad-kind.jsonl");
        write_text(path, std::string(kValidLine) + "\n" + kValidLine + "\n" +
                             R"({"image_id":"c","width":100,"height":100,"pose_mode":"full",)" +
                             R"("detections":[{"kind":"unicycle","x1":0,"y1":0,"x2":1,"y2":1,)" +
                             R"("score":0.5,"source":"detector"}]})" + "\n");
        CHECK_THROWS_WITH_AS(load_annotations(path), "line 3: unknown entity kind 'unicycle'",
                             UnknownEntityKind);
        try {
            load_annotations(path);
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
    }

    SUBCASE("unknown action label") {
        fs::path path = dir.file("bad-label.jsonl");
        write_text(path, std::string(kValidLine) + "\n" +
                             R"({"image_id":"b","width":100,"height":100,"pose_mode":"full",)" +
                             R"("label":"juggling","detections":[]})" + "\n");
        CHECK_THROWS_WITH_AS(load_annotations(path), "line 2: unknown action label 'juggling'",
                             UnknownLabel);
    }

    SUBCASE("missing field") {
        fs::path path = dir.file("no-width.jsonl");
        write_text(path, R"({"image_id":"a","height":100,"pose_mode":"full","detections":[]})");
        CHECK_THROWS_WITH_AS(load_annotations(path), "line 1: missing field 'width'", ParseError);
    }

    SUBCASE("non-numeric field") {
        fs::path path = dir.file("string-width.jsonl");
        write_text(path, R"({"image_id":"a","width":"wide","height":100,"pose_mode":"full",)"
                         R"("detections":[]})");
        CHECK_THROWS_WITH_AS(load_annotations(path), "line 1: field 'width' is not a number",
                             ParseError);
    }

    SUBCASE("non-string label") {
        fs::path path = dir.file("numeric-label.jsonl");
        write_text(path, R"({"image_id":"a","width":100,"height":100,"pose_mode":"full",)"
                         R"("label":3,"detections":[]})");
        CHECK_THROWS_WITH_AS(load_annotations(path), "line 1: label is not a string", ParseError);
    }

    SUBCASE("unknown pose mode") {
        fs::path path = dir.file("bad-pose.jsonl");
        write_text(path, R"({"image_id":"a","width":100,"height":100,"pose_mode":"half",)"
                         R"("detections":[]})");
        CHECK_THROWS_WITH_AS(load_annotations(path), "line 1: unknown pose_mode 'half'",
                             ParseError);
    }

    SUBCASE("unknown detection source") {
        fs::path path = dir.file("bad-source.jsonl");
        write_text(path, R"({"image_id":"a","width":100,"height":100,"pose_mode":"full",)"
                         R"("detections":[{"kind":"head","x1":0,"y1":0,"x2":1,"y2":1,)"
                         R"("score":0.5,"source":"guess"}]})");
        CHECK_THROWS_WITH_AS(load_annotations(path), "line 1: unknown detection source 'guess'",
                             ParseError);
    }

    SUBCASE("malformed json") {
        fs::path path = dir.file("garbage.jsonl");
        write_text(path, std::string(kValidLine) + "\n{not json\n");
        try {
            load_annotations(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
}

TEST_CASE("model file round trips bit-exactly") {
    DbnModel model = small_model(77);
    TempDir dir;
    fs::path path = dir.file("model.json");
    save_model(model, path);
    DbnModel loaded = load_model(path);

    CHECK(loaded.layer1.sigma == model.layer1.sigma);
    CHECK(same(loaded.layer1.W, model.layer1.W));
    CHECK(same(loaded.layer1.hidden_bias, model.layer1.hidden_bias));
    CHECK(same(loaded.layer1.visible_bias, model.layer1.visible_bias));
    CHECK(same(loaded.layer2.W, model.layer2.W));
    CHECK(same(loaded.layer2.hidden_bias, model.layer2.hidden_bias));
    CHECK(same(loaded.layer2.visible_bias, model.layer2.visible_bias));
    CHECK(same(loaded.softmax_W, model.softmax_W));
    CHECK(same(loaded.softmax_bias, model.softmax_bias));

    CHECK(loaded.meta.seed == 77);
    CHECK(loaded.meta.propagate == Propagate::Sample);
    CHECK(loaded.meta.pretrain.learning_rate == 0.015);
    CHECK(loaded.meta.pretrain.epochs == 3);
    CHECK(loaded.meta.pretrain.batch_size == 4);
    CHECK(loaded.meta.pretrain.k == 2);
    CHECK(loaded.meta.pretrain.seed == 78);
    CHECK(loaded.meta.finetune.learning_rate == 0.25);
    CHECK(loaded.meta.finetune.epochs == 9);
    CHECK(loaded.meta.finetune.batch_size == 5);
    CHECK(loaded.meta.finetune.seed == 79);

    rng::Engine eng = rng::make_engine(5, "io.test.forward");
    Eigen::VectorXd input(9);
    for (Eigen::Index i = 0; i < 9; ++i) input(i) = rng::normal(eng);
    Eigen::VectorXd before = forward(model, input);
    Eigen::VectorXd after = forward(loaded, input);
    CHECK((before.array() == after.array()).all());

    // Saving the loaded model reproduces the file byte for byte.
    fs::path again = dir.file("model2.json");
    save_model(loaded, again);
    CHECK(read_text(again) == read_text(path));
}

TEST_CASE("model loader rejects damaged files") {
    DbnModel model = small_model(11);
    TempDir dir;
    fs::path path = dir.file("model.json");
    save_model(model, path);
    std::string text = read_text(path);

    SUBCASE("truncation") {
        write_text(dir.file("cut.json"), text.substr(0, text.size() / 2));
        CHECK_THROWS_AS(load_model(dir.file("cut.json")), CorruptFile);
    }

    SUBCASE("tampered parameter") {
        std::size_t pos = text.find("p-");
        REQUIRE(pos != std::string::npos);
        text[pos + 1] = '+';
        write_text(dir.file("tampered.json"), text);
        CHECK_THROWS_AS(load_model(dir.file("tampered.json")), CorruptFile);
    }

    SUBCASE("version bump wins over checksum mismatch") {
        std::size_t pos = text.find("\"format_version\": 1");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 19, "\"format_version\": 999");
        write_text(dir.file("versioned.json"), text);
        try {
            load_model(dir.file("versioned.json"));
            FAIL("expected VersionMismatch");
        } catch (const VersionMismatch& e) {
            std::string what = e.what();
            CHECK(what.find("999") != std::string::npos);
            CHECK(what.find("expected 1") != std::string::npos);
        }
    }

    SUBCASE("valid checksum but missing section") {
        nlohmann::json doc = nlohmann::json::parse(text);
        doc.erase("checksum");
        doc.erase("layer2");
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(rng::hash_label(doc.dump())));
        doc["checksum"] = buf;
        write_text(dir.file("gutted.json"), doc.dump(1) + "\n");
        CHECK_THROWS_AS(load_model(dir.file("gutted.json")), CorruptFile);
    }

    SUBCASE("not json at all") {
        write_text(dir.file("noise.json"), "plain text\n");
        CHECK_THROWS_AS(load_model(dir.file("noise.json")), CorruptFile);
    }
}

TEST_CASE("threshold file round trips exactly") {
    ThresholdSet thresholds;
    for (int k = 0; k < kEntityCount; ++k) {
        thresholds.sigma[static_cast<std::size_t>(k)] = static_cast<double>(k) / 7.0;
    }
    TempDir dir;
    fs::path path = dir.file("thresholds.json");
    save_thresholds(thresholds, path);
    ThresholdSet loaded = load_thresholds(path);
    for (int k = 0; k < kEntityCount; ++k) {
        CHECK(loaded.sigma[static_cast<std::size_t>(k)] ==
              thresholds.sigma[static_cast<std::size_t>(k)]);
    }

    SUBCASE("missing entity") {
        nlohmann::json doc = nlohmann::json::parse(read_text(path));
        doc["thresholds"].erase("horse");
        write_text(dir.file("partial.json"), doc.dump(1) + "\n");
        CHECK_THROWS_AS(load_thresholds(dir.file("partial.json")), CorruptFile);
    }

    SUBCASE("wrong version") {
        nlohmann::json doc = nlohmann::json::parse(read_text(path));
        doc["format_version"] = 2;
        write_text(dir.file("future.json"), doc.dump(1) + "\n");
        CHECK_THROWS_AS(load_thresholds(dir.file("future.json")), CorruptFile);
    }

    SUBCASE("garbage") {
        write_text(dir.file("noise.json"), "]{");
        CHECK_THROWS_AS(load_thresholds(dir.file("noise.json")), CorruptFile);
    }
}

TEST_CASE("feature records round trip exactly") {
    rng::Engine eng = rng::make_engine(9, "io.test.features");
    std::vector<FeatureRecord> records(3);
    records[0].image_id = "f-0";
    records[0].label = 2;
    records[1].image_id = "f-1";
    records[2].image_id = "f-2";
    records[2].label = 6;
    for (FeatureRecord& rec : records) {
        for (double& v : rec.feature.values) v = rng::uniform(eng);
    }

    TempDir dir;
    fs::path path = dir.file("features.jsonl");
    save_features(records, path);
    std::vector<FeatureRecord> loaded = load_features(path);

    REQUIRE(loaded.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(loaded[i].image_id == records[i].image_id);
        CHECK(loaded[i].label == records[i].label);
        for (int d = 0; d < kFeatureDim; ++d) {
            CHECK(loaded[i].feature.values[static_cast<std::size_t>(d)] ==
                  records[i].feature.values[static_cast<std::size_t>(d)]);
        }
    }

    fs::path empty = dir.file("empty.jsonl");
    write_text(empty, "");
    CHECK(load_features(empty).empty());
}

TEST_CASE("feature loader rejects malformed records") {
    TempDir dir;

    SUBCASE("wrong dimension") {
        fs::path path = dir.file("short.jsonl");
        write_text(path, R"({"image_id":"a","label":null,"values":[0.1,0.2]})");
        CHECK_THROWS_WITH_AS(load_features(path), "line 1: values must hold exactly 90 numbers",
                             ParseError);
    }

    SUBCASE("numeric label") {
        std::string values = "[0";
        for (int i = 1; i < kFeatureDim; ++i) values += ",0";
        values += "]";
        fs::path path = dir.file("numeric-label.jsonl");
        write_text(path, R"({"image_id":"a","label":3,"values":)" + values + "}");
        CHECK_THROWS_WITH_AS(load_features(path), "line 1: label is not a string", ParseError);
    }

    SUBCASE("unknown label") {
        std::string values = "[0";
        for (int i = 1; i < kFeatureDim; ++i) values += ",0";
        values += "]";
        fs::path path = dir.file("unknown-label.jsonl");
        write_text(path, R"({"image_id":"a","label":"flying","values":)" + values + "}");
        CHECK_THROWS_WITH_AS(load_features(path), "line 1: unknown action label 'flying'",
                             UnknownLabel);
    }

    SUBCASE("missing values") {
        fs::path path = dir.file("no-values.jsonl");
        write_text(path, R"({"image_id":"a","label":null})");
        CHECK_THROWS_WITH_AS(load_features(path), "line 1: missing field 'values'", ParseError);
    }
}
