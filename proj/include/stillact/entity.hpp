#ifndef STILLACT_ENTITY_HPP
#define STILLACT_ENTITY_HPP

#include <optional>
#include <string_view>

namespace stillact {

/// The fixed 15-entity catalog: 10 body parts followed by 5 object types.
/// Index order is load-bearing — feature layout, threshold files and the
/// annotation format all reference entities by this order.
enum class EntityKind : int {
    Head = 0,
    Torso = 1,
    LeftUpperArm = 2,
    LeftLowerArm = 3,
    RightUpperArm = 4,
    RightLowerArm = 5,
    LeftUpperLeg = 6,
    LeftLowerLeg = 7,
    RightUpperLeg = 8,
    RightLowerLeg = 9,
    Bike = 10,
    Camera = 11,
    Computer = 12,
    Horse = 13,
    Instrument = 14,
};

inline constexpr int kEntityCount = 15;
inline constexpr int kBodyPartCount = 10;
inline constexpr int kObjectCount = 5;
inline constexpr int kDimsPerEntity = 6;
inline constexpr int kFeatureDim = kEntityCount * kDimsPerEntity;  // 90
inline constexpr int kClassCount = 7;

inline int entity_index(EntityKind k) { return static_cast<int>(k); }
EntityKind entity_at(int index);

inline bool is_body_part(EntityKind k) { return entity_index(k) < kBodyPartCount; }
inline bool is_object(EntityKind k) { return !is_body_part(k); }

/// The four leg segments: absent by construction in upper-body pose mode.
inline bool is_leg_part(EntityKind k) {
    int i = entity_index(k);
    return i >= entity_index(EntityKind::LeftUpperLeg) &&
           i <= entity_index(EntityKind::RightLowerLeg);
}

/// Head, torso and the four arm segments.
inline bool in_upper_body(EntityKind k) { return is_body_part(k) && !is_leg_part(k); }

/// Left/right counterpart under a horizontal flip; identity for unpaired kinds.
EntityKind mirror(EntityKind k);

std::string_view entity_name(EntityKind k);
std::optional<EntityKind> entity_from_name(std::string_view name);

/// Action classes, fixed label order 0..6.
std::string_view class_name(int label);
std::optional<int> class_from_name(std::string_view name);

}  // namespace stillact

#endif
