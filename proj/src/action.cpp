#include "realnav/action.hpp"

namespace realnav {

std::string_view action_name(Action a) noexcept {
  switch (a) {
    case Action::kMoveForward: return "MOVE_FORWARD";
    case Action::kTurnLeft: return "TURN_LEFT";
    case Action::kTurnRight: return "TURN_RIGHT";
    case Action::kStop: return "STOP";
  }
  return "STOP";
}

std::optional<Action> parse_action(std::string_view name) noexcept {
  if (name == "MOVE_FORWARD") return Action::kMoveForward;
  if (name == "TURN_LEFT") return Action::kTurnLeft;
  if (name == "TURN_RIGHT") return Action::kTurnRight;
  if (name == "STOP") return Action::kStop;
  return std::nullopt;
}

}  // namespace realnav
