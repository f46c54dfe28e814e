#ifndef ROBOTIQ_SKILLS_ROBOT_HPP_
#define ROBOTIQ_SKILLS_ROBOT_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "robotiq/geom/pose.hpp"

namespace robotiq::skills {

// Arm lifecycle. Legal moves: Home->PrePick->Pick->PostPick->PrePlace->
// Place->PostPlace->Home. Navigation happens in Home or PostPick.
enum class ArmState { kHome, kPrePick, kPick, kPostPick, kPrePlace, kPlace, kPostPlace };

std::string_view to_string(ArmState s);
bool arm_transition_allowed(ArmState from, ArmState to);

struct GripperState {
  double opening = 0.0;   // meters, in [0, max_opening]
  double velocity = 0.0;  // m/s
};

struct RobotState {
  geom::Pose2D pose;
  ArmState arm = ArmState::kHome;
  GripperState gripper;
  std::optional<std::string> held_item;
};

}  // namespace robotiq::skills

#endif  // ROBOTIQ_SKILLS_ROBOT_HPP_
