#include "stillact/augment.hpp"

#include <string>

#include "stillact/errors.hpp"
#include "stillact/geometry.hpp"
#include "stillact/rng.hpp"

namespace stillact {

namespace {

ImageAnnotation jittered(const ImageAnnotation& source, const AugmentConfig& config,
                         int orientation, int replica) {
    std::uint64_t stream = rng::mix(rng::hash_label(source.image_id),
                                    (static_cast<std::uint64_t>(orientation) << 32) |
                                        static_cast<std::uint64_t>(replica));
    rng::Engine eng = rng::make_engine(config.seed, "augment.jitter", stream);

    ImageAnnotation out = source;
    for (DetectionRecord& rec : out.detections) {
        rec.line.x1 += rng::uniform_int(eng, -config.jitter_px, config.jitter_px);
        rec.line.y1 += rng::uniform_int(eng, -config.jitter_px, config.jitter_px);
        rec.line.x2 += rng::uniform_int(eng, -config.jitter_px, config.jitter_px);
        rec.line.y2 += rng::uniform_int(eng, -config.jitter_px, config.jitter_px);
    }
    return out;
}

}  // namespace

std::vector<ImageAnnotation> augment(const ImageAnnotation& annotation,
                                     const AugmentConfig& config) {
    if (!annotation.label.has_value()) throw MissingLabel(annotation.image_id);
    if (config.jitter_px < 0) throw InvalidConfig("jitter_px must be >= 0");
    if (config.replicas < 1) throw InvalidConfig("replicas must be >= 1");

    ImageAnnotation flipped = flip_horizontal(annotation);

    std::vector<ImageAnnotation> out;
    out.reserve(2 * static_cast<std::size_t>(config.replicas));
    for (int replica = 0; replica < config.replicas; ++replica) {
        out.push_back(jittered(annotation, config, 0, replica));
    }
    for (int replica = 0; replica < config.replicas; ++replica) {
        out.push_back(jittered(flipped, config, 1, replica));
    }
    return out;
}

}  // namespace stillact
