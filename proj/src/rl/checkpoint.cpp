#include "robotiq/rl/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "robotiq/error.hpp"

namespace robotiq::rl {

using nlohmann::json;

std::string env_fingerprint(const nav::EnvConfig& cfg) {
  char buf[256];
  std::string canon;
  std::snprintf(buf, sizeof buf, "n=%d;delta=%.9g;r_min=%.9g;r_max=%.9g;", cfg.n, cfg.delta_deg,
                cfg.r_min, cfg.r_max);
  canon += buf;
  if (const auto* d = std::get_if<nav::DiscreteActions>(&cfg.actions)) {
    std::snprintf(buf, sizeof buf, "discrete:%d:%.9g", d->count, d->omega_max);
  } else {
    const auto& c = std::get<nav::ContinuousActions>(cfg.actions);
    std::snprintf(buf, sizeof buf, "continuous:%.9g:%.9g", c.omega_min, c.omega_max);
  }
  canon += buf;
  // FNV-1a, 64 bit.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json checkpoint_to_json(const Checkpoint& c) {
  return {{"format", "robotiq.checkpoint"},
          {"version", kCheckpointVersion},
          {"epoch", c.epoch},
          {"score", c.score},
          {"seed", c.seed},
          {"algorithm", c.algorithm},
          {"fingerprint", c.fingerprint},
          {"env", nav::env_config_to_json(c.env)},
          {"policy", c.policy.to_json()}};
}

Checkpoint checkpoint_from_json(const json& j) {
  if (j.value("format", std::string()) != "robotiq.checkpoint") {
    throw Error(ErrorKind::kParse, "not a robotiq checkpoint");
  }
  if (j.value("version", 0) != kCheckpointVersion) {
    throw Error(ErrorKind::kIncompatible, "unsupported checkpoint version");
  }
  Checkpoint c;
  c.policy = Policy::from_json(j.at("policy"));
  c.epoch = j.at("epoch").get<int>();
  c.score = j.at("score").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.algorithm = j.at("algorithm").get<std::string>();
  c.fingerprint = j.at("fingerprint").get<std::string>();
  c.env = nav::env_config_from_json(j.at("env"));
  if (c.fingerprint != env_fingerprint(c.env)) {
    throw Error(ErrorKind::kIncompatible, "checkpoint fingerprint does not match its env config");
  }
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kNotFound, "cannot write checkpoint: " + path.string());
  out << checkpoint_to_json(ckpt).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kNotFound, "checkpoint not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("checkpoint: ") + e.what());
  }
  return checkpoint_from_json(j);
}

void require_compatible(const Checkpoint& ckpt, const nav::EnvConfig& cfg) {
  const auto fp = env_fingerprint(cfg);
  if (fp != ckpt.fingerprint) {
    throw Error(ErrorKind::kIncompatible, "checkpoint fingerprint " + ckpt.fingerprint +
                                              " does not match env fingerprint " + fp);
  }
}

}  // namespace robotiq::rl
