#include "stillact/entity.hpp"

#include <array>
#include <cassert>

namespace stillact {

namespace {

constexpr std::array<std::string_view, kEntityCount> kEntityNames = {
    "head",
    "torso",
    "left-upper-arm",
    "left-lower-arm",
    "right-upper-arm",
    "right-lower-arm",
    "left-upper-leg",
    "left-lower-leg",
    "right-upper-leg",
    "right-lower-leg",
    "bike",
    "camera",
    "computer",
    "horse",
    "instrument",
};

constexpr std::array<std::string_view, kClassCount> kClassNames = {
    "interacting-with-computer",
    "photographing",
    "playing-instrument",
    "riding-bike",
    "riding-horse",
    "running",
    "walking",
};

}  // namespace

EntityKind entity_at(int index) {
    assert(index >= 0 && index < kEntityCount);
    return static_cast<EntityKind>(index);
}

EntityKind mirror(EntityKind k) {
    switch (k) {
        case EntityKind::LeftUpperArm: return EntityKind::RightUpperArm;
        case EntityKind::RightUpperArm: return EntityKind::LeftUpperArm;
        case EntityKind::LeftLowerArm: return EntityKind::RightLowerArm;
        case EntityKind::RightLowerArm: return EntityKind::LeftLowerArm;
        case EntityKind::LeftUpperLeg: return EntityKind::RightUpperLeg;
        case EntityKind::RightUpperLeg: return EntityKind::LeftUpperLeg;
        case EntityKind::LeftLowerLeg: return EntityKind::RightLowerLeg;
        case EntityKind::RightLowerLeg: return EntityKind::LeftLowerLeg;
        default: return k;
    }
}

std::string_view entity_name(EntityKind k) {
    return kEntityNames[static_cast<std::size_t>(entity_index(k))];
}

std::optional<EntityKind> entity_from_name(std::string_view name) {
    for (int i = 0; i < kEntityCount; ++i) {
        if (kEntityNames[static_cast<std::size_t>(i)] == name) return entity_at(i);
    }
    return std::nullopt;
}

std::string_view class_name(int label) {
    assert(label >= 0 && label < kClassCount);
    return kClassNames[static_cast<std::size_t>(label)];
}

std::optional<int> class_from_name(std::string_view name) {
    for (int i = 0; i < kClassCount; ++i) {
        if (kClassNames[static_cast<std::size_t>(i)] == name) return i;
    }
    return std::nullopt;
}

}  // namespace stillact
