#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "robotiq/error.hpp"
#include "robotiq/geom/map_io.hpp"
#include "robotiq/nav/env.hpp"
#include "robotiq/rl/checkpoint.hpp"
#include "robotiq/rl/run_config.hpp"
#include "robotiq/rl/trainer.hpp"
#include "robotiq/service/bench.hpp"
#include "robotiq/service/server.hpp"
#include "robotiq/service/session.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace robotiq;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stoull(tok));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidInput, "bad seed '" + tok + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::kInvalidInput, "--seeds: no seeds given");
  return out;
}

plan::PlannerBackend make_backend(const std::string& name, double latency, double timeout) {
  if (name == "rule") return plan::RuleBasedBackend{latency};
  if (name == "llm") return plan::external_backend_from_env(timeout);
  throw Error(ErrorKind::kInvalidInput, "--backend must be rule or llm, got '" + name + "'");
}

skills::Navigator make_navigator(const std::string& checkpoint) {
  if (checkpoint.empty()) return skills::FallbackNavigator{};
  return skills::PolicyNavigator{
      std::make_shared<const rl::Checkpoint>(rl::load_checkpoint(checkpoint))};
}

json eval_summary(const rl::EvalResult& r) {
  json events = json::array();
  for (auto e : r.events) events.push_back(std::string(nav::to_string(e)));
  return {{"episodes", r.scores.size()},
          {"success_rate", r.success_rate},
          {"mean_score", r.mean_score},
          {"std_score", r.std_score},
          {"mean_steps_to_goal", r.mean_steps_to_goal},
          {"scores", r.scores},
          {"events", events}};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kSetup, "cannot write " + path.string());
  out << text;
}

struct TrainArgs {
  std::string config;
  std::string algo = "ppo";
  std::string seeds;
  int epochs = 0;
  std::string out = "runs";
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  const auto algo = rl::algorithm_from_string(a.algo);
  auto rc = rl::load_run_config(a.config, algo);
  if (!a.seeds.empty()) rc.train.seeds = parse_seeds(a.seeds);
  if (a.epochs > 0) rc.train.epochs = a.epochs;
  rc.train.validate();

  const auto factory = [&] { return nav::NavEnv(rc.map, rc.env); };
  const auto progress = [&](std::uint64_t seed, const rl::EpochStats& s) {
    if (a.quiet) return;
    std::fprintf(stderr, "seed %llu epoch %3d score %.3f (train %.3f over %d) best %.3f\n",
                 static_cast<unsigned long long>(seed), s.epoch, s.mean_score,
                 s.train_mean_score, s.train_episodes, s.best_score);
  };
  const auto result = rl::train(factory, rc.train, progress);

  const fs::path out = a.out;
  fs::create_directories(out);
  std::ostringstream csv;
  rl::write_curve_csv(csv, result.curves);
  write_text(out / "curve.csv", csv.str());
  rl::save_checkpoint(result.best, out / "best.ckpt.json");
  json seeds = json::array();
  for (size_t i = 0; i < result.curves.size(); ++i) {
    const auto& c = result.curves[i];
    const auto name = "seed_" + std::to_string(c.seed) + ".ckpt.json";
    rl::save_checkpoint(result.best_per_seed[i], out / name);
    seeds.push_back({{"seed", c.seed},
                     {"tail_mean", c.tail_mean(0.2)},
                     {"max_score", c.max_score()},
                     {"checkpoint", (out / name).string()}});
  }
  json summary = {{"algorithm", a.algo},
                  {"curve", (out / "curve.csv").string()},
                  {"best", (out / "best.ckpt.json").string()},
                  {"best_score", result.best.score},
                  {"tail_mean", result.aggregate.tail_mean(0.2)},
                  {"seeds", seeds}};
  if (rc.transfer_env) {
    nav::NavEnv target(rc.map, *rc.transfer_env);
    summary["transfer"] = eval_summary(rl::transfer_eval(result.best, target, rc.transfer_episodes));
    summary["transfer"].erase("scores");
    summary["transfer"].erase("events");
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string map;
  std::string config;
  std::string goal_location;
  int episodes = 50;
  std::uint64_t seed_base = 0;
  bool seed_base_set = false;
};

int run_eval(const EvalArgs& a, bool transfer) {
  const auto ckpt = rl::load_checkpoint(a.checkpoint);
  geom::WorldMap map;
  nav::EnvConfig env = ckpt.env;
  int episodes = a.episodes;
  if (!a.config.empty()) {
    auto rc = rl::load_run_config(a.config, rl::algorithm_from_string(ckpt.algorithm));
    map = rc.map;
    if (transfer) {
      if (!rc.transfer_env) throw Error(ErrorKind::kInvalidInput, "config has no transfer section");
      env = *rc.transfer_env;
      episodes = rc.transfer_episodes;
    } else {
      env = rc.env;
    }
  } else if (!a.map.empty()) {
    map = geom::load_world_file(a.map);
    // Starts and goals are drawn on the new map unless a location is named.
    env.fixed_start.reset();
    env.fixed_goal.reset();
    env.goal_location.clear();
    env.max_return = 0.0;
  } else {
    throw Error(ErrorKind::kInvalidInput, "--map or --config is required");
  }
  if (!a.goal_location.empty()) {
    env.fixed_goal.reset();
    env.goal_location = a.goal_location;
  }
  nav::NavEnv target(map, env);
  const auto r = transfer
                     ? rl::transfer_eval(ckpt, target, episodes, a.seed_base_set ? a.seed_base : 2000000)
                     : rl::evaluate(ckpt, target, episodes, a.seed_base_set ? a.seed_base : 1000000);
  std::cout << eval_summary(r).dump(2) << "\n";
  return 0;
}

struct SessionArgs {
  std::string map;
  std::string backend = "rule";
  std::string checkpoint;
  double llm_latency = 0.0;
  double llm_timeout = 30.0;
  double voice_latency = 0.0;
  std::uint64_t seed = 0;
};

service::SessionConfig session_config(const SessionArgs& a) {
  service::SessionConfig cfg;
  cfg.backend = make_backend(a.backend, a.llm_latency, a.llm_timeout);
  cfg.navigator = make_navigator(a.checkpoint);
  cfg.voice_latency = a.voice_latency;
  cfg.seed = a.seed;
  return cfg;
}

int run_serve(const SessionArgs& a, const std::string& address, int port) {
  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  service::ServerConfig cfg;
  cfg.address = address;
  cfg.port = static_cast<unsigned short>(port);
  cfg.default_map = a.map;
  cfg.session = session_config(a);
  geom::load_world_file(a.map);  // fail fast on a bad map
  service::Server server(cfg);
  server.start();
  std::cerr << "listening on http://" << address << ":" << server.port() << "\n";
  int sig = 0;
  sigwait(&set, &sig);
  std::cerr << "shutting down\n";
  server.stop();
  return 0;
}

int run_repl(const SessionArgs& a) {
  auto cfg = session_config(a);
  cfg.stream = false;
  auto session = service::Session::from_file("repl", a.map, cfg);
  std::cout << "commands: free text, :state, :metrics, :quit\n";
  std::string line;
  while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
    if (line.empty()) continue;
    if (line == ":quit" || line == ":q") break;
    if (line == ":state") {
      std::cout << session->state_json().dump(2) << "\n";
      continue;
    }
    if (line == ":metrics") {
      std::cout << service::report_to_json(session->metrics()).dump(2) << "\n";
      continue;
    }
    try {
      const auto outcome = session->submit_command(line);
      if (!outcome.compiled) {
        std::cout << "rejected [" << *outcome.error_stage << "/" << outcome.error_kind
                  << "]: " << outcome.error_message << "\n";
        for (const auto& v : outcome.violations) {
          std::cout << "  step " << v.step << " " << v.rule << ": " << v.message << "\n";
        }
        continue;
      }
      std::cout << "plan: " << outcome.plan.dump() << "\n";
      for (const auto& r : outcome.records) {
        std::printf("  %-28s %s t_llm=%.3f t_robot=%.2f%s%s\n", r.task.c_str(),
                    r.success ? "ok  " : "FAIL", r.t_llm, r.t_robot,
                    r.detail.empty() ? "" : "  ", r.detail.c_str());
      }
    } catch (const Error& e) {
      std::cout << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    }
  }
  return 0;
}

struct BenchArgs {
  SessionArgs session;
  std::string script;
  int trials = 50;
  std::string out = "metrics.csv";
  std::string cdf;
  std::string summary;
  double jitter_xy = 0.1;
  double jitter_theta = 0.3;
};

int run_bench_cmd(const BenchArgs& a) {
  service::BenchConfig cfg;
  cfg.map = geom::load_world_file(a.session.map);
  cfg.script = service::load_script(a.script);
  cfg.trials = a.trials;
  cfg.seed = a.session.seed;
  cfg.session = session_config(a.session);
  cfg.jitter_xy = a.jitter_xy;
  cfg.jitter_theta = a.jitter_theta;
  const auto result = service::run_bench(cfg);

  std::ostringstream csv;
  service::write_records_csv(csv, result.records);
  write_text(a.out, csv.str());
  if (!a.cdf.empty()) {
    std::ostringstream cdf;
    service::write_cdf_csv(cdf, result.report);
    write_text(a.cdf, cdf.str());
  }
  const auto report = service::report_to_json(result.report).dump(2);
  if (!a.summary.empty()) write_text(a.summary, report + "\n");
  std::cout << report << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robotiq: language-driven robot skills in a 2D simulator"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a navigation policy");
  t->add_option("--config", train.config, "Run config JSON")->required()->check(CLI::ExistingFile);
  t->add_option("--algo", train.algo, "ppo or vpg")->check(CLI::IsMember({"ppo", "vpg"}));
  t->add_option("--seeds", train.seeds, "Comma separated seeds, overrides the config");
  t->add_option("--epochs", train.epochs, "Overrides the config");
  t->add_option("--out", train.out, "Output directory");
  t->add_flag("--quiet", train.quiet, "No per-epoch progress");

  EvalArgs eval, transfer;
  for (auto [name, args, desc] :
       {std::tuple{"eval", &eval, "Evaluate a checkpoint"},
        std::tuple{"transfer", &transfer, "Zero-shot evaluation on a new map or goal"}}) {
    auto* s = app.add_subcommand(name, desc);
    s->add_option("--checkpoint", args->checkpoint)->required()->check(CLI::ExistingFile);
    s->add_option("--map", args->map, "Map JSON")->check(CLI::ExistingFile);
    s->add_option("--config", args->config, "Run config JSON instead of --map")
        ->check(CLI::ExistingFile);
    s->add_option("--goal-location", args->goal_location, "Fixed goal by location name");
    s->add_option("--episodes", args->episodes)->check(CLI::PositiveNumber);
    s->add_option("--seed-base", args->seed_base)->each([args](const std::string&) {
      args->seed_base_set = true;
    });
  }

  const auto add_session_opts = [](CLI::App* s, SessionArgs& a) {
    s->add_option("--map", a.map, "Map JSON")->required()->check(CLI::ExistingFile);
    s->add_option("--backend", a.backend, "rule or llm")->check(CLI::IsMember({"rule", "llm"}));
    s->add_option("--checkpoint", a.checkpoint, "Policy checkpoint for navigation")
        ->check(CLI::ExistingFile);
    s->add_option("--llm-latency", a.llm_latency, "Modeled planner latency of the rule backend, s");
    s->add_option("--llm-timeout", a.llm_timeout, "External backend timeout, s");
    s->add_option("--voice-latency", a.voice_latency, "Added to every command's t_llm, s");
    s->add_option("--seed", a.seed);
  };

  SessionArgs serve;
  std::string address = "127.0.0.1";
  int port = 8080;
  auto* sv = app.add_subcommand("serve", "Run the HTTP/WebSocket service");
  add_session_opts(sv, serve);
  sv->add_option("--port", port)->check(CLI::Range(0, 65535));
  sv->add_option("--address", address);

  SessionArgs repl;
  auto* rp = app.add_subcommand("repl", "Interactive text loop");
  add_session_opts(rp, repl);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Scripted trials with metrics export");
  add_session_opts(b, bench.session);
  b->add_option("--script", bench.script, "One command per line")->required()->check(CLI::ExistingFile);
  b->add_option("--trials", bench.trials)->check(CLI::PositiveNumber);
  b->add_option("--out", bench.out, "Metrics CSV");
  b->add_option("--cdf", bench.cdf, "CDF CSV");
  b->add_option("--summary", bench.summary, "Report JSON");
  b->add_option("--jitter-xy", bench.jitter_xy);
  b->add_option("--jitter-theta", bench.jitter_theta);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*t) return run_train(train);
    if (app.got_subcommand("eval")) return run_eval(eval, false);
    if (app.got_subcommand("transfer")) return run_eval(transfer, true);
    if (*sv) return run_serve(serve, address, port);
    if (*rp) return run_repl(repl);
    if (*b) return run_bench_cmd(bench);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
