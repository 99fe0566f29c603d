#include <cmath>

#include "stillact/augment.hpp"
#include "stillact/errors.hpp"
#include "stillact/geometry.hpp"
#include "vendor/doctest.h"

using namespace stillact;

namespace {

ImageAnnotation fixture() {
    ImageAnnotation a;
    a.image_id = "walker-17";
    a.width = 300;
    a.height = 400;
    a.label = 6;
    a.detections.push_back(
        {EntityKind::Head, CentralLine{150, 40, 150, 90}, 0.95, Source::Detector});
    a.detections.push_back(
        {EntityKind::Torso, CentralLine{150, 90, 150, 200}, 0.9, Source::Detector});
    a.detections.push_back(
        {EntityKind::LeftUpperArm, CentralLine{150, 100, 120, 150}, 0.8, Source::Detector});
    return a;
}

bool same_geometry(const ImageAnnotation& a, const ImageAnnotation& b) {
    if (a.detections.size() != b.detections.size()) return false;
    for (std::size_t i = 0; i < a.detections.size(); ++i) {
        const DetectionRecord &ra = a.detections[i], &rb = b.detections[i];
        if (ra.kind != rb.kind || ra.line.x1 != rb.line.x1 || ra.line.y1 != rb.line.y1 ||
            ra.line.x2 != rb.line.x2 || ra.line.y2 != rb.line.y2) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("augment produces 2 x replicas annotations") {
    AugmentConfig cfg;
    cfg.replicas = 10;
    CHECK(augment(fixture(), cfg).size() == 20);

    cfg.replicas = 3;
    CHECK(augment(fixture(), cfg).size() == 6);
}

TEST_CASE("zero jitter yields exact copies of the image and its flip") {
    AugmentConfig cfg;
    cfg.jitter_px = 0;
    cfg.replicas = 4;

    ImageAnnotation a = fixture();
    ImageAnnotation flipped = flip_horizontal(a);
    std::vector<ImageAnnotation> out = augment(a, cfg);
    REQUIRE(out.size() == 8);
    for (int i = 0; i < 4; ++i) CHECK(same_geometry(out[static_cast<std::size_t>(i)], a));
    for (int i = 4; i < 8; ++i) CHECK(same_geometry(out[static_cast<std::size_t>(i)], flipped));
}

TEST_CASE("jitter offsets are integers within the bound") {
    AugmentConfig cfg;
    cfg.jitter_px = 10;
    cfg.replicas = 10;
    cfg.seed = 4;

    ImageAnnotation a = fixture();
    ImageAnnotation flipped = flip_horizontal(a);
    std::vector<ImageAnnotation> out = augment(a, cfg);
    REQUIRE(out.size() == 20);

    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        const ImageAnnotation& source = idx < 10 ? a : flipped;
        REQUIRE(out[idx].detections.size() == source.detections.size());
        for (std::size_t r = 0; r < source.detections.size(); ++r) {
            const CentralLine& s = source.detections[r].line;
            const CentralLine& j = out[idx].detections[r].line;
            for (double delta : {j.x1 - s.x1, j.y1 - s.y1, j.x2 - s.x2, j.y2 - s.y2}) {
                CHECK(std::fabs(delta) <= 10.0);
                CHECK(delta == std::floor(delta));
            }
        }
        CHECK(out[idx].label == a.label);
        CHECK(out[idx].image_id == a.image_id);
    }
}

TEST_CASE("augment is a pure function of annotation and config") {
    AugmentConfig cfg;
    cfg.seed = 21;
    std::vector<ImageAnnotation> a = augment(fixture(), cfg);
    std::vector<ImageAnnotation> b = augment(fixture(), cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_geometry(a[i], b[i]));

    cfg.seed = 22;
    std::vector<ImageAnnotation> c = augment(fixture(), cfg);
    bool all_equal = true;
    for (std::size_t i = 0; i < a.size(); ++i) all_equal = all_equal && same_geometry(a[i], c[i]);
    CHECK_FALSE(all_equal);
}

TEST_CASE("augment rejects unlabeled input and bad configs") {
    ImageAnnotation unlabeled = fixture();
    unlabeled.label.reset();
    CHECK_THROWS_AS(augment(unlabeled, AugmentConfig{}), MissingLabel);

    AugmentConfig bad;
    bad.replicas = 0;
    CHECK_THROWS_AS(augment(fixture(), bad), InvalidConfig);
    bad.replicas = 10;
    bad.jitter_px = -1;
    CHECK_THROWS_AS(augment(fixture(), bad), InvalidConfig);
}
