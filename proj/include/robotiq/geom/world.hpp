#ifndef ROBOTIQ_GEOM_WORLD_HPP_
#define ROBOTIQ_GEOM_WORLD_HPP_

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "robotiq/geom/pose.hpp"

namespace robotiq::geom {

struct Circle {
  Vec2 center;
  double radius = 0.0;
};

struct Segment {
  Vec2 p1;
  Vec2 p2;
};

struct Rect {
  Vec2 min;
  Vec2 max;

  bool contains(Vec2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
};

using Obstacle = std::variant<Circle, Segment, Rect>;

struct Marker {
  int id = 0;
  Pose2D pose;  // theta is the outward face normal
};

struct Item {
  std::string name;
  Pose2D pose;
  bool held = false;
};

struct WorldMap {
  std::string name;
  Rect bounds;
  std::vector<Obstacle> obstacles;
  std::vector<Marker> markers;
  std::map<std::string, Vec2> locations;
  std::vector<Item> items;
  std::optional<Pose2D> start;

  const Marker* find_marker(int id) const;
  const Item* find_item(const std::string& name) const;
  Item* find_item(const std::string& name);
  double diagonal() const { return distance(bounds.min, bounds.max); }
};

// Distance from p to the closed shape (0 inside filled shapes).
double distance_to(const Obstacle& obstacle, Vec2 p);

// True iff p lies in a filled obstacle (circle or rectangle interior/boundary).
bool point_in_obstacle(const WorldMap& map, Vec2 p);

// Range along the ray to the first obstacle or bounds edge, clamped to
// [r_min, r_max]. An origin already inside an obstacle or outside the bounds
// returns r_min.
double ray_cast(const WorldMap& map, const Pose2D& origin, double angle, double r_min,
                double r_max);

// Unclamped hit distance against a single obstacle (nullopt on miss).
std::optional<double> ray_hit(const Obstacle& obstacle, Vec2 origin, Vec2 dir);

// True iff the closed disc of robot_radius at pose touches an obstacle or the
// bounds. Tangency counts as contact.
bool collision_check(const WorldMap& map, const Pose2D& pose, double robot_radius);

}  // namespace robotiq::geom

#endif  // ROBOTIQ_GEOM_WORLD_HPP_
