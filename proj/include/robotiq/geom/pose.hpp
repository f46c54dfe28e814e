#ifndef ROBOTIQ_GEOM_POSE_HPP_
#define ROBOTIQ_GEOM_POSE_HPP_

#include <cmath>
#include <numbers>

namespace robotiq::geom {

inline constexpr double kPi = std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

// Planar rotation as a unit quaternion (qx = qy = 0).
struct Quaternion {
  double qx = 0.0;
  double qy = 0.0;
  double qz = 0.0;
  double qw = 1.0;
};

Quaternion quaternion_from_heading(double heading);

// Yaw extracted from a quaternion; throws kInvalidInput on a zero-norm input.
double heading_from_quaternion(const Quaternion& q);

// Unicycle kinematics x' = v cos(theta), y' = v sin(theta), theta' = omega,
// integrated with explicit RK4 sub-steps of at most kMaxSubStep seconds.
inline constexpr double kMaxSubStep = 1e-3;
Pose2D integrate_unicycle(const Pose2D& pose, double v, double omega, double dt);

// Same scheme with a caller-chosen sub-step ceiling (used by convergence checks).
Pose2D integrate_unicycle(const Pose2D& pose, double v, double omega, double dt,
                          double max_sub_step);

}  // namespace robotiq::geom

#endif  // ROBOTIQ_GEOM_POSE_HPP_
