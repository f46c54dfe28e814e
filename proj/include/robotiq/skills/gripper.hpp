#ifndef ROBOTIQ_SKILLS_GRIPPER_HPP_
#define ROBOTIQ_SKILLS_GRIPPER_HPP_

#include <vector>

namespace robotiq::skills {

struct GripperSample {
  double t = 0.0;
  double position = 0.0;      // finger offset from the gripper center, m
  double velocity = 0.0;      // m/s
  double acceleration = 0.0;  // m/s^2
  double effort = 0.0;        // N; the simulated fingers never press on anything
};

struct GripperProfile {
  std::vector<GripperSample> samples;
  double duration() const { return samples.empty() ? 0.0 : samples.back().t; }
};

enum class GripperDirection { kOpen, kClose };

// Rest-to-rest trapezoidal velocity profile covering `travel` meters:
// accelerate at a_peak, cruise at a_peak * 0.1 s (or a triangle when travel
// is too short), decelerate at -a_peak. Opening moves position up from
// `start`, closing moves it down. Sample instants fall on every phase
// boundary so the trapezoid rule over the velocity series is exact.
// Throws Error(kInvalidInput) unless travel > 0 and a_peak > 0.
GripperProfile gripper_trajectory(GripperDirection direction, double travel, double a_peak,
                                  double start = 0.0, double max_sample_dt = 0.005);

}  // namespace robotiq::skills

#endif  // ROBOTIQ_SKILLS_GRIPPER_HPP_
