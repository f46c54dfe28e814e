#include "robotiq/geom/map_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "robotiq/error.hpp"

namespace robotiq::geom {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::kParse, "map field '" + path + "': " + what);
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) field_error(path, "expected a number");
  return j.get<double>();
}

Vec2 vec2_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) field_error(path, "expected [x, y]");
  return {number_at(j[0], path + "[0]"), number_at(j[1], path + "[1]")};
}

Pose2D pose_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) field_error(path, "expected [x, y, theta]");
  return {number_at(j[0], path + "[0]"), number_at(j[1], path + "[1]"),
          wrap_angle(number_at(j[2], path + "[2]"))};
}

const json& member(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) field_error(path + "." + key, "missing");
  return *it;
}

Obstacle obstacle_at(const json& j, const std::string& path) {
  if (!j.is_object()) field_error(path, "expected an object");
  const json& type = member(j, "type", path);
  if (!type.is_string()) field_error(path + ".type", "expected a string");
  const auto t = type.get<std::string>();
  if (t == "circle") {
    return Circle{vec2_at(member(j, "center", path), path + ".center"),
                  number_at(member(j, "radius", path), path + ".radius")};
  }
  if (t == "segment") {
    return Segment{vec2_at(member(j, "p1", path), path + ".p1"),
                   vec2_at(member(j, "p2", path), path + ".p2")};
  }
  if (t == "rect") {
    return Rect{vec2_at(member(j, "min", path), path + ".min"),
                vec2_at(member(j, "max", path), path + ".max")};
  }
  field_error(path + ".type", "unknown obstacle type '" + t + "'");
}

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }
json pose_json(const Pose2D& p) { return json::array({p.x, p.y, p.theta}); }

}  // namespace

std::vector<std::string> check_world(const WorldMap& map) {
  std::vector<std::string> v;
  const Rect& b = map.bounds;
  if (!(b.min.x < b.max.x && b.min.y < b.max.y)) {
    v.push_back("bounds: min must be < max componentwise");
    return v;
  }
  for (size_t i = 0; i < map.obstacles.size(); ++i) {
    const auto& ob = map.obstacles[i];
    const std::string tag = "obstacles[" + std::to_string(i) + "]";
    if (const auto* c = std::get_if<Circle>(&ob); c && !(c->radius > 0.0)) {
      v.push_back(tag + ": radius must be > 0");
    }
    if (const auto* r = std::get_if<Rect>(&ob); r && !(r->min.x < r->max.x && r->min.y < r->max.y)) {
      v.push_back(tag + ": rect min must be < max componentwise");
    }
  }
  std::set<int> ids;
  for (const auto& m : map.markers) {
    if (!ids.insert(m.id).second) v.push_back("marker " + std::to_string(m.id) + ": duplicate id");
    if (!b.contains(m.pose.position())) v.push_back("marker " + std::to_string(m.id) + ": outside bounds");
  }
  for (const auto& [name, p] : map.locations) {
    if (!b.contains(p)) v.push_back("location '" + name + "': outside bounds");
  }
  std::set<std::string> names;
  for (const auto& it : map.items) {
    if (!names.insert(it.name).second) v.push_back("item '" + it.name + "': duplicate name");
    if (!b.contains(it.pose.position())) {
      v.push_back("item '" + it.name + "': outside bounds");
    } else if (!it.held && point_in_obstacle(map, it.pose.position())) {
      v.push_back("item '" + it.name + "': inside an obstacle");
    }
  }
  if (map.start && !b.contains(map.start->position())) v.push_back("start: outside bounds");
  return v;
}

WorldMap load_world(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number.
    size_t line = 1;
    for (size_t i = 0; i < std::min<size_t>(e.byte, document.size()); ++i) {
      if (document[i] == '\n') ++line;
    }
    throw Error(ErrorKind::kParse, "map document line " + std::to_string(line) + ": " + e.what());
  }
  if (!doc.is_object()) field_error("$", "expected a JSON object");

  WorldMap map;
  if (auto it = doc.find("name"); it != doc.end() && it->is_string()) map.name = it->get<std::string>();
  const json& bounds = member(doc, "bounds", "$");
  map.bounds = Rect{vec2_at(member(bounds, "min", "bounds"), "bounds.min"),
                    vec2_at(member(bounds, "max", "bounds"), "bounds.max")};

  if (auto it = doc.find("obstacles"); it != doc.end()) {
    if (!it->is_array()) field_error("obstacles", "expected an array");
    for (size_t i = 0; i < it->size(); ++i) {
      map.obstacles.push_back(obstacle_at((*it)[i], "obstacles[" + std::to_string(i) + "]"));
    }
  }
  if (auto it = doc.find("markers"); it != doc.end()) {
    if (!it->is_array()) field_error("markers", "expected an array");
    for (size_t i = 0; i < it->size(); ++i) {
      const std::string path = "markers[" + std::to_string(i) + "]";
      const json& m = (*it)[i];
      const json& id = member(m, "id", path);
      if (!id.is_number_integer()) field_error(path + ".id", "expected an integer");
      map.markers.push_back({id.get<int>(), pose_at(member(m, "pose", path), path + ".pose")});
    }
  }
  if (auto it = doc.find("locations"); it != doc.end()) {
    if (!it->is_object()) field_error("locations", "expected an object");
    for (const auto& [name, p] : it->items()) {
      map.locations[name] = vec2_at(p, "locations." + name);
    }
  }
  if (auto it = doc.find("items"); it != doc.end()) {
    if (!it->is_array()) field_error("items", "expected an array");
    for (size_t i = 0; i < it->size(); ++i) {
      const std::string path = "items[" + std::to_string(i) + "]";
      const json& m = (*it)[i];
      const json& name = member(m, "name", path);
      if (!name.is_string()) field_error(path + ".name", "expected a string");
      map.items.push_back({name.get<std::string>(), pose_at(member(m, "pose", path), path + ".pose"), false});
    }
  }
  if (auto it = doc.find("start"); it != doc.end()) map.start = pose_at(*it, "start");

  if (auto violations = check_world(map); !violations.empty()) {
    std::string msg = "map invariant violation:";
    for (const auto& s : violations) msg += "\n  " + s;
    throw Error(ErrorKind::kInvariantViolation, msg);
  }
  return map;
}

WorldMap load_world_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kNotFound, "map file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_world(ss.str());
}

json world_to_json(const WorldMap& map) {
  json obstacles = json::array();
  for (const auto& ob : map.obstacles) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Circle>) {
            obstacles.push_back({{"type", "circle"}, {"center", vec_json(s.center)}, {"radius", s.radius}});
          } else if constexpr (std::is_same_v<T, Segment>) {
            obstacles.push_back({{"type", "segment"}, {"p1", vec_json(s.p1)}, {"p2", vec_json(s.p2)}});
          } else {
            obstacles.push_back({{"type", "rect"}, {"min", vec_json(s.min)}, {"max", vec_json(s.max)}});
          }
        },
        ob);
  }
  json markers = json::array();
  for (const auto& m : map.markers) markers.push_back({{"id", m.id}, {"pose", pose_json(m.pose)}});
  json locations = json::object();
  for (const auto& [name, p] : map.locations) locations[name] = vec_json(p);
  json items = json::array();
  for (const auto& it : map.items) {
    items.push_back({{"name", it.name}, {"pose", pose_json(it.pose)}, {"held", it.held}});
  }
  json out = {{"name", map.name},
              {"bounds", {{"min", vec_json(map.bounds.min)}, {"max", vec_json(map.bounds.max)}}},
              {"obstacles", obstacles},
              {"markers", markers},
              {"locations", locations},
              {"items", items}};
  if (map.start) out["start"] = pose_json(*map.start);
  return out;
}

}  // namespace robotiq::geom
