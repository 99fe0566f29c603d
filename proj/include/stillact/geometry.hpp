#ifndef STILLACT_GEOMETRY_HPP
#define STILLACT_GEOMETRY_HPP

#include <array>

#include "stillact/annotation.hpp"
#include "stillact/thresholds.hpp"

namespace stillact {

/// Every annotation is rescaled until the head's central line has this length.
inline constexpr double kHeadLength = 50.0;

/// Raw 6-dim relation of one entity to the head, before sigmoid squashing.
/// Coordinates are entity endpoints minus the head center; alpha is the signed
/// angle from the head line direction (first endpoint -> second endpoint) to
/// the head-center -> entity-midpoint direction, counterclockwise positive in
/// image coordinates, range [-pi, pi].
struct EntityFeature {
    bool exists = false;
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    double alpha = 0;
};

/// The 90-dim encoder output. Entity-major layout: 6 consecutive dims per
/// entity in catalog index order; dim 6k is the isExist bit.
struct FeatureVector {
    std::array<double, kFeatureDim> values{};
};

double logistic(double x);

/// Rescale every coordinate (and the image extent) by 50 / headLength.
/// Throws MissingHead / DegenerateHead.
ImageAnnotation normalize_scale(const ImageAnnotation& annotation);

/// Relation of one entity to the head; entity == nullptr means absent and
/// yields the all-zero feature. When the entity midpoint coincides with the
/// head center alpha is undefined and set to 0 (the head's own feature lands
/// here by construction).
EntityFeature encode_entity(const CentralLine& head, const CentralLine* entity);

/// Sigmoid-squash one raw feature: isExist passes through, coordinates map to
/// logistic(c/50), alpha to logistic(alpha/(pi/2)).
std::array<double, kDimsPerEntity> squash(const EntityFeature& raw);

/// Full 90-dim encoding of a normalized annotation under per-entity score
/// thresholds. Leg parts are forced absent in upper-body mode.
FeatureVector encode_image(const ImageAnnotation& annotation, const ThresholdSet& thresholds);

/// Mirror every endpoint (x -> width - x) and swap paired left/right kinds.
ImageAnnotation flip_horizontal(const ImageAnnotation& annotation);

}  // namespace stillact

#endif
