#include "robotiq/skills/gripper.hpp"

#include <algorithm>
#include <cmath>

#include "robotiq/error.hpp"

namespace robotiq::skills {

GripperProfile gripper_trajectory(GripperDirection direction, double travel, double a_peak,
                                  double start, double max_sample_dt) {
  if (!(travel > 0.0) || !(a_peak > 0.0) || !std::isfinite(travel) || !std::isfinite(a_peak)) {
    throw Error(ErrorKind::kInvalidInput, "gripper_trajectory: travel and a_peak must be > 0");
  }
  if (!(max_sample_dt > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "gripper_trajectory: sample interval must be > 0");
  }
  const double a = a_peak;
  double v_peak = a * 0.1;
  double t_cruise = 0.0;
  if (travel < v_peak * v_peak / a) {
    v_peak = std::sqrt(travel * a);
  } else {
    t_cruise = std::max(0.0, (travel - v_peak * v_peak / a) / v_peak);
  }
  const double t_ramp = v_peak / a;
  const double t_end = 2.0 * t_ramp + t_cruise;
  const double sign = direction == GripperDirection::kOpen ? 1.0 : -1.0;

  // Distance covered and speed at time t.
  const auto state = [&](double t, double& s, double& v) {
    if (t <= t_ramp) {
      s = 0.5 * a * t * t;
      v = a * t;
    } else if (t <= t_ramp + t_cruise) {
      s = 0.5 * a * t_ramp * t_ramp + v_peak * (t - t_ramp);
      v = v_peak;
    } else {
      const double r = std::max(0.0, t_end - t);
      s = travel - 0.5 * a * r * r;
      v = a * r;
    }
  };

  GripperProfile profile;
  struct Phase {
    double begin, length, accel;
  };
  const Phase phases[] = {{0.0, t_ramp, a}, {t_ramp, t_cruise, 0.0}, {t_ramp + t_cruise, t_ramp, -a}};
  for (const auto& ph : phases) {
    if (!(ph.length > 0.0)) continue;
    const int steps = std::max(1, static_cast<int>(std::ceil(ph.length / max_sample_dt)));
    for (int k = 0; k < steps; ++k) {
      const double t = ph.begin + ph.length * k / steps;
      double s = 0.0;
      double v = 0.0;
      state(t, s, v);
      profile.samples.push_back({t, start + sign * s, sign * v, sign * ph.accel, 0.0});
    }
  }
  // Final rest sample; it closes the deceleration phase.
  profile.samples.push_back({t_end, start + sign * travel, 0.0, -sign * a, 0.0});
  profile.samples.front().velocity = 0.0;
  return profile;
}

}  // namespace robotiq::skills
