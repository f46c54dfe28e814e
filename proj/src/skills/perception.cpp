#include "robotiq/skills/perception.hpp"

#include <algorithm>
#include <cmath>

namespace robotiq::skills {

MarkerObservation marker_ground_truth(const geom::Marker& marker, const geom::Pose2D& pose) {
  const geom::Vec2 rel = marker.pose.position() - pose.position();
  MarkerObservation o;
  o.id = marker.id;
  o.range = geom::norm(rel);
  o.bearing = o.range > 0.0 ? geom::wrap_angle(std::atan2(rel.y, rel.x) - pose.theta) : 0.0;
  o.visible = true;
  return o;
}

std::vector<MarkerObservation> sense_marker(const geom::WorldMap& map, const geom::Pose2D& pose,
                                            const CameraSpec& camera, const NoiseSpec& noise,
                                            std::mt19937_64& rng) {
  std::vector<MarkerObservation> out;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const auto& m : map.markers) {
    MarkerObservation o = marker_ground_truth(m, pose);
    if (!(o.range > 0.0) || o.range > camera.range || std::abs(o.bearing) > camera.half_fov) continue;
    // Printed on one side only: the robot must be in front of the marker.
    const geom::Vec2 facing{std::cos(m.pose.theta), std::sin(m.pose.theta)};
    if (geom::dot(facing, pose.position() - m.pose.position()) <= 0.0) continue;
    const double angle = pose.theta + o.bearing;
    const double hit = geom::ray_cast(map, pose, angle, 0.0, o.range + 1.0);
    if (hit < o.range - camera.occlusion_tolerance) continue;

    if (noise.sigma_range > 0.0) o.range += noise.sigma_range * gauss(rng);
    if (noise.sigma_bearing > 0.0) o.bearing += noise.sigma_bearing * gauss(rng);
    o.range = std::clamp(o.range, 0.0, camera.range);
    o.bearing = std::clamp(o.bearing, -camera.half_fov, camera.half_fov);
    out.push_back(o);
  }
  return out;
}

}  // namespace robotiq::skills
