#ifndef ROBOTIQ_GEOM_MAP_IO_HPP_
#define ROBOTIQ_GEOM_MAP_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "robotiq/geom/world.hpp"

namespace robotiq::geom {

// Parses a map document. Throws Error(kParse) naming the line or field on
// malformed input and Error(kInvariantViolation) listing every violated
// invariant otherwise.
WorldMap load_world(std::string_view document);
WorldMap load_world_file(const std::filesystem::path& path);

// Returns the list of invariant violations (empty when the map is valid).
std::vector<std::string> check_world(const WorldMap& map);

nlohmann::json world_to_json(const WorldMap& map);

}  // namespace robotiq::geom

#endif  // ROBOTIQ_GEOM_MAP_IO_HPP_
