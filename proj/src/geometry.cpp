#include "stillact/geometry.hpp"

#include <cmath>
#include <numbers>

#include "stillact/errors.hpp"

namespace stillact {

namespace {

const DetectionRecord* require_head(const ImageAnnotation& annotation) {
    const DetectionRecord* head = find_best(annotation, EntityKind::Head);
    if (head == nullptr) throw MissingHead(annotation.image_id);
    return head;
}

}  // namespace

const DetectionRecord* find_best(const ImageAnnotation& annotation, EntityKind kind) {
    const DetectionRecord* best = nullptr;
    for (const DetectionRecord& rec : annotation.detections) {
        if (rec.kind != kind) continue;
        if (best == nullptr || rec.score > best->score) best = &rec;
    }
    return best;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ImageAnnotation normalize_scale(const ImageAnnotation& annotation) {
    const DetectionRecord* head = require_head(annotation);
    double len = head->line.length();
    if (len == 0.0) throw DegenerateHead(annotation.image_id);

    double s = kHeadLength / len;
    ImageAnnotation out = annotation;
    out.width *= s;
    out.height *= s;
    for (DetectionRecord& rec : out.detections) {
        rec.line.x1 *= s;
        rec.line.y1 *= s;
        rec.line.x2 *= s;
        rec.line.y2 *= s;
    }
    return out;
}

EntityFeature encode_entity(const CentralLine& head, const CentralLine* entity) {
    if (entity == nullptr) return EntityFeature{};

    double cx = head.mid_x();
    double cy = head.mid_y();

    EntityFeature f;
    f.exists = true;
    f.x1 = entity->x1 - cx;
    f.y1 = entity->y1 - cy;
    f.x2 = entity->x2 - cx;
    f.y2 = entity->y2 - cy;

    // Head line direction and head-center -> entity-midpoint direction.
    double hx = head.x2 - head.x1;
    double hy = head.y2 - head.y1;
    double ex = entity->mid_x() - cx;
    double ey = entity->mid_y() - cy;

    if (ex == 0.0 && ey == 0.0) {
        // Midpoint on the head center: angle undefined, use 0. Happens for the
        // head's own feature and for pathological detections.
        f.alpha = 0.0;
        return f;
    }

    // Counterclockwise-positive in image coordinates (y down) is the negated
    // y-up orientation, hence the swapped cross product.
    f.alpha = std::atan2(hy * ex - hx * ey, hx * ex + hy * ey);
    return f;
}

std::array<double, kDimsPerEntity> squash(const EntityFeature& raw) {
    constexpr double kAngleScale = std::numbers::pi / 2.0;
    return {
        raw.exists ? 1.0 : 0.0,
        logistic(raw.x1 / kHeadLength),
        logistic(raw.y1 / kHeadLength),
        logistic(raw.x2 / kHeadLength),
        logistic(raw.y2 / kHeadLength),
        logistic(raw.alpha / kAngleScale),
    };
}

FeatureVector encode_image(const ImageAnnotation& annotation, const ThresholdSet& thresholds) {
    const DetectionRecord* head = require_head(annotation);

    FeatureVector out;
    for (int i = 0; i < kEntityCount; ++i) {
        EntityKind kind = entity_at(i);
        const DetectionRecord* rec = find_best(annotation, kind);

        bool absent = rec == nullptr;
        if (!absent && annotation.pose_mode == PoseMode::Upper && is_leg_part(kind)) {
            absent = true;
        }
        if (!absent && rec->source == Source::Detector && rec->score <= thresholds.at(kind)) {
            absent = true;
        }

        EntityFeature raw = encode_entity(head->line, absent ? nullptr : &rec->line);
        std::array<double, kDimsPerEntity> block = squash(raw);
        for (int d = 0; d < kDimsPerEntity; ++d) {
            out.values[static_cast<std::size_t>(i * kDimsPerEntity + d)] = block[static_cast<std::size_t>(d)];
        }
    }
    return out;
}

ImageAnnotation flip_horizontal(const ImageAnnotation& annotation) {
    ImageAnnotation out = annotation;
    for (DetectionRecord& rec : out.detections) {
        rec.kind = mirror(rec.kind);
        rec.line.x1 = annotation.width - rec.line.x1;
        rec.line.x2 = annotation.width - rec.line.x2;
    }
    return out;
}

}  // namespace stillact
