#include "robotiq/rl/run_config.hpp"

#include <fstream>

#include "robotiq/error.hpp"
#include "robotiq/geom/map_io.hpp"

namespace robotiq::rl {

using nlohmann::json;

RunConfig load_run_config(const std::filesystem::path& path, Algorithm algorithm) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kNotFound, "run config not found: " + path.string());
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorKind::kParse, "run config " + path.string() + " is not a JSON object");
  }
  if (!j.contains("map") || !j["map"].is_string()) {
    throw Error(ErrorKind::kParse, "run config field 'map': missing");
  }
  RunConfig rc;
  rc.map = geom::load_world_file(path.parent_path() / j["map"].get<std::string>());
  const json env = j.value("env", json::object());
  rc.env = nav::env_config_from_json(env);
  rc.train = train_config_from_json(j.value("train", json::object()), algorithm);
  if (auto t = j.find("transfer"); t != j.end()) {
    json merged = env;
    merged.update(t->value("env", json::object()));
    rc.transfer_env = nav::env_config_from_json(merged);
    rc.transfer_episodes = t->value("episodes", rc.transfer_episodes);
  }
  return rc;
}

}  // namespace robotiq::rl
