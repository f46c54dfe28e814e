#include "robotiq/geom/pose.hpp"

#include <array>
#include <string>

#include "robotiq/error.hpp"

namespace robotiq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kInvalidSpec: return "invalid-spec";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kInvariantViolation: return "invariant-violation";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kSetup: return "setup";
    case ErrorKind::kCatalog: return "catalog";
    case ErrorKind::kIncompatible: return "incompatible";
    case ErrorKind::kBackend: return "backend";
    case ErrorKind::kBackendTimeout: return "backend-timeout";
    case ErrorKind::kExtraction: return "extraction";
    case ErrorKind::kNanGuard: return "nan-guard";
    case ErrorKind::kTrainingFailure: return "training-failure";
    case ErrorKind::kUnparseable: return "unparseable-command";
    case ErrorKind::kNotFound: return "not-found";
    case ErrorKind::kBusy: return "busy";
  }
  return "unknown";
}

namespace geom {

double wrap_angle(double angle) {
  constexpr double kTwoPi = 2.0 * kPi;
  if (angle > -kPi && angle <= kPi) return angle;
  double wrapped = std::remainder(angle, kTwoPi);  // in [-pi, pi]
  if (wrapped <= -kPi) wrapped += kTwoPi;
  return wrapped;
}

Quaternion quaternion_from_heading(double heading) {
  return {0.0, 0.0, std::sin(heading / 2.0), std::cos(heading / 2.0)};
}

double heading_from_quaternion(const Quaternion& q) {
  const double n2 = q.qx * q.qx + q.qy * q.qy + q.qz * q.qz + q.qw * q.qw;
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw Error(ErrorKind::kInvalidInput, "quaternion has zero or non-finite norm");
  }
  // Normalize first so the yaw formula stays exact for non-unit inputs.
  const double inv = 1.0 / std::sqrt(n2);
  const double x = q.qx * inv, y = q.qy * inv, z = q.qz * inv, w = q.qw * inv;
  return wrap_angle(std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z)));
}

Pose2D integrate_unicycle(const Pose2D& pose, double v, double omega, double dt) {
  return integrate_unicycle(pose, v, omega, dt, kMaxSubStep);
}

Pose2D integrate_unicycle(const Pose2D& pose, double v, double omega, double dt,
                          double max_sub_step) {
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.theta) ||
      !std::isfinite(v) || !std::isfinite(omega) || !std::isfinite(dt)) {
    throw Error(ErrorKind::kInvalidInput, "integrate_unicycle: non-finite input");
  }
  if (!(dt > 0.0) || !(max_sub_step > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "integrate_unicycle: dt must be positive");
  }
  const auto steps = static_cast<long>(std::ceil(dt / max_sub_step - 1e-9));
  const double h = dt / static_cast<double>(steps < 1 ? 1 : steps);

  double x = pose.x, y = pose.y, th = pose.theta;
  using State = std::array<double, 3>;
  const auto deriv = [&](double heading) -> State {
    return {v * std::cos(heading), v * std::sin(heading), omega};
  };
  for (long i = 0; i < (steps < 1 ? 1 : steps); ++i) {
    const State k1 = deriv(th);
    const State k2 = deriv(th + 0.5 * h * k1[2]);
    const State k3 = deriv(th + 0.5 * h * k2[2]);
    const State k4 = deriv(th + h * k3[2]);
    x += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    y += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    th += h * omega;
  }
  return {x, y, wrap_angle(th)};
}

}  // namespace geom
}  // namespace robotiq
