#ifndef STILLACT_ANNOTATION_HPP
#define STILLACT_ANNOTATION_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "stillact/entity.hpp"

namespace stillact {

/// Segment between the two endpoint anchors of a part, or across an object's
/// detection window. Coordinates are image pixels, y growing downward.
struct CentralLine {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    double length() const { return std::hypot(x2 - x1, y2 - y1); }
    double mid_x() const { return 0.5 * (x1 + x2); }
    double mid_y() const { return 0.5 * (y1 + y2); }
};

enum class Source { Manual, Detector };

/// One localized entity. `score` is the detector confidence; manual
/// annotations carry a score too but bypass threshold gating.
struct DetectionRecord {
    EntityKind kind = EntityKind::Head;
    CentralLine line;
    double score = 0.0;
    Source source = Source::Detector;
};

enum class PoseMode { Full, Upper };

struct ImageAnnotation {
    std::string image_id;
    double width = 0;
    double height = 0;
    std::vector<DetectionRecord> detections;
    std::optional<int> label;  // action class 0..6
    PoseMode pose_mode = PoseMode::Full;
};

/// Highest-score record of the given kind, or nullptr if none. Duplicate
/// records per kind are legal in the raw annotation; ties keep the earliest.
const DetectionRecord* find_best(const ImageAnnotation& annotation, EntityKind kind);

}  // namespace stillact

#endif
