#ifndef ROBOTIQ_SKILLS_PERCEPTION_HPP_
#define ROBOTIQ_SKILLS_PERCEPTION_HPP_

#include <random>
#include <vector>

#include "robotiq/geom/world.hpp"

namespace robotiq::skills {

struct CameraSpec {
  double range = 4.0;
  double half_fov = 1.0471975511965976;  // 60 degrees
  double occlusion_tolerance = 0.02;      // a ray may stop this short of the marker
};

struct NoiseSpec {
  double sigma_range = 0.0;
  double sigma_bearing = 0.0;
};

struct MarkerObservation {
  int id = 0;
  double range = 0.0;
  double bearing = 0.0;  // relative to the robot heading, counterclockwise positive
  bool visible = false;
};

// Markers in range and field of view, seen from their front face and not
// hidden behind an obstacle. Noisy values are clamped back into the camera
// limits so `visible` keeps its meaning.
std::vector<MarkerObservation> sense_marker(const geom::WorldMap& map, const geom::Pose2D& pose,
                                            const CameraSpec& camera, const NoiseSpec& noise,
                                            std::mt19937_64& rng);

// Noiseless range and bearing to a marker, ignoring visibility.
MarkerObservation marker_ground_truth(const geom::Marker& marker, const geom::Pose2D& pose);

}  // namespace robotiq::skills

#endif  // ROBOTIQ_SKILLS_PERCEPTION_HPP_
