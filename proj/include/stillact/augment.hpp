#ifndef STILLACT_AUGMENT_HPP
#define STILLACT_AUGMENT_HPP

#include <cstdint>
#include <vector>

#include "stillact/annotation.hpp"

namespace stillact {

struct AugmentConfig {
    int jitter_px = 10;  // epsilon: each endpoint coordinate moves by an integer in [-eps, eps]
    int replicas = 10;   // jittered copies per orientation
    std::uint64_t seed = 0;
};

/// Training-set expansion: the annotation and its horizontal flip, each
/// jittered `replicas` times, 2 x replicas outputs total. Jitter offsets are
/// drawn per (seed, image_id, orientation, replica), so the output sequence is
/// a pure function of the inputs. Input must be normalized and labeled.
std::vector<ImageAnnotation> augment(const ImageAnnotation& annotation,
                                     const AugmentConfig& config);

}  // namespace stillact

#endif
