#include "robotiq/geom/world.hpp"

#include <algorithm>
#include <limits>

namespace robotiq::geom {

const Marker* WorldMap::find_marker(int id) const {
  for (const auto& m : markers) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

const Item* WorldMap::find_item(const std::string& item_name) const {
  for (const auto& it : items) {
    if (it.name == item_name) return &it;
  }
  return nullptr;
}

Item* WorldMap::find_item(const std::string& item_name) {
  for (auto& it : items) {
    if (it.name == item_name) return &it;
  }
  return nullptr;
}

namespace {

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

// Ray (origin + s*dir, |dir| = 1) against segment; returns s >= 0 on hit.
std::optional<double> hit_segment(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const double denom = cross(dir, e);
  const Vec2 w = a - origin;
  if (std::abs(denom) < 1e-15) {
    // Parallel; a collinear overlap is hit at its nearest endpoint.
    if (std::abs(cross(w, dir)) > 1e-12) return std::nullopt;
    const double sa = dot(a - origin, dir);
    const double sb = dot(b - origin, dir);
    if (sa < 0.0 && sb < 0.0) return std::nullopt;
    if (sa <= 0.0 || sb <= 0.0) return 0.0;
    return std::min(sa, sb);
  }
  const double s = cross(w, e) / denom;
  const double u = cross(w, dir) / denom;
  if (s < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return s;
}

std::optional<double> hit_circle(Vec2 origin, Vec2 dir, const Circle& c) {
  const Vec2 oc = origin - c.center;
  const double b = dot(oc, dir);
  const double cc = dot(oc, oc) - c.radius * c.radius;
  if (cc <= 0.0) return 0.0;  // inside
  const double disc = b * b - cc;
  if (disc < 0.0) return std::nullopt;
  const double s = -b - std::sqrt(disc);
  if (s < 0.0) return std::nullopt;
  return s;
}

std::optional<double> hit_rect(Vec2 origin, Vec2 dir, const Rect& r) {
  if (r.contains(origin)) return 0.0;
  // Slab method.
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  const double o[2] = {origin.x, origin.y};
  const double d[2] = {dir.x, dir.y};
  const double lo[2] = {r.min.x, r.min.y};
  const double hi[2] = {r.max.x, r.max.y};
  for (int k = 0; k < 2; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (o[k] < lo[k] || o[k] > hi[k]) return std::nullopt;
      continue;
    }
    double ta = (lo[k] - o[k]) / d[k];
    double tb = (hi[k] - o[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return t0;
}

// Exit distance from inside the bounds rectangle.
double exit_bounds(Vec2 origin, Vec2 dir, const Rect& r) {
  double s = std::numeric_limits<double>::infinity();
  if (dir.x > 0.0) s = std::min(s, (r.max.x - origin.x) / dir.x);
  if (dir.x < 0.0) s = std::min(s, (r.min.x - origin.x) / dir.x);
  if (dir.y > 0.0) s = std::min(s, (r.max.y - origin.y) / dir.y);
  if (dir.y < 0.0) s = std::min(s, (r.min.y - origin.y) / dir.y);
  return std::max(s, 0.0);
}

}  // namespace

std::optional<double> ray_hit(const Obstacle& obstacle, Vec2 origin, Vec2 dir) {
  return std::visit(
      [&](const auto& shape) -> std::optional<double> {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return hit_circle(origin, dir, shape);
        } else if constexpr (std::is_same_v<T, Segment>) {
          return hit_segment(origin, dir, shape.p1, shape.p2);
        } else {
          return hit_rect(origin, dir, shape);
        }
      },
      obstacle);
}

double distance_to(const Obstacle& obstacle, Vec2 p) {
  return std::visit(
      [&](const auto& shape) -> double {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return std::max(0.0, distance(p, shape.center) - shape.radius);
        } else if constexpr (std::is_same_v<T, Segment>) {
          return distance_to_segment(p, shape.p1, shape.p2);
        } else {
          const double dx = std::max({shape.min.x - p.x, 0.0, p.x - shape.max.x});
          const double dy = std::max({shape.min.y - p.y, 0.0, p.y - shape.max.y});
          return std::hypot(dx, dy);
        }
      },
      obstacle);
}

bool point_in_obstacle(const WorldMap& map, Vec2 p) {
  for (const auto& ob : map.obstacles) {
    if (std::holds_alternative<Segment>(ob)) continue;
    if (distance_to(ob, p) <= 0.0) return true;
  }
  return false;
}

double ray_cast(const WorldMap& map, const Pose2D& origin, double angle, double r_min,
                double r_max) {
  const Vec2 o = origin.position();
  if (!map.bounds.contains(o)) return r_min;
  const Vec2 dir{std::cos(angle), std::sin(angle)};
  double best = exit_bounds(o, dir, map.bounds);
  for (const auto& ob : map.obstacles) {
    if (auto s = ray_hit(ob, o, dir); s && *s < best) best = *s;
  }
  return std::clamp(best, r_min, r_max);
}

bool collision_check(const WorldMap& map, const Pose2D& pose, double robot_radius) {
  const Vec2 p = pose.position();
  const Rect& b = map.bounds;
  if (p.x - robot_radius <= b.min.x || p.x + robot_radius >= b.max.x ||
      p.y - robot_radius <= b.min.y || p.y + robot_radius >= b.max.y) {
    return true;
  }
  for (const auto& ob : map.obstacles) {
    if (distance_to(ob, p) <= robot_radius) return true;
  }
  return false;
}

}  // namespace robotiq::geom
