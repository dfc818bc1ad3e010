#pragma once

#include <numbers>
#include <optional>
#include <string_view>

namespace realnav {

enum class Action { kMoveForward, kTurnLeft, kTurnRight, kStop };

inline constexpr double kMoveDistance = 0.25;                       // meters
inline constexpr double kTurnAngle = 10.0 * std::numbers::pi / 180.0;  // radians

/// Wire names: MOVE_FORWARD, TURN_LEFT, TURN_RIGHT, STOP.
std::string_view action_name(Action a) noexcept;
std::optional<Action> parse_action(std::string_view name) noexcept;

}  // namespace realnav
