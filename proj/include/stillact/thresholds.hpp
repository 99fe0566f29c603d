#ifndef STILLACT_THRESHOLDS_HPP
#define STILLACT_THRESHOLDS_HPP

#include <array>

#include "stillact/entity.hpp"

namespace stillact {

/// Per-entity detection-score gate. A detector-source record with
/// score <= sigma[k] is treated as absent; manual records always pass.
struct ThresholdSet {
    std::array<double, kEntityCount> sigma{};

    double at(EntityKind k) const { return sigma[static_cast<std::size_t>(entity_index(k))]; }
    double& at(EntityKind k) { return sigma[static_cast<std::size_t>(entity_index(k))]; }

    /// All-zero thresholds: every strictly positive score passes.
    static ThresholdSet zeros() { return ThresholdSet{}; }
};

}  // namespace stillact

#endif
