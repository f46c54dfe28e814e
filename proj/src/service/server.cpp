#include "robotiq/service/server.hpp"

#include <condition_variable>
#include <sys/socket.h>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "robotiq/error.hpp"
#include "robotiq/rl/checkpoint.hpp"

namespace robotiq::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

std::shared_ptr<Session> SessionRegistry::create(const std::filesystem::path& map, SessionConfig cfg) {
  std::string id;
  {
    std::lock_guard lock(mu_);
    id = "s" + std::to_string(next_id_++);
  }
  std::shared_ptr<Session> s = Session::from_file(id, map, std::move(cfg));
  std::lock_guard lock(mu_);
  sessions_[id] = s;
  return s;
}

std::shared_ptr<Session> SessionRegistry::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

bool SessionRegistry::remove(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return false;
    s = it->second;
    sessions_.erase(it);
  }
  s->cancel();
  s->events().close();
  return true;
}

std::vector<std::shared_ptr<Session>> SessionRegistry::all() const {
  std::lock_guard lock(mu_);
  std::vector<std::shared_ptr<Session>> out;
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

http::status status_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::kNotFound: return http::status::not_found;
    case ErrorKind::kBusy: return http::status::conflict;
    case ErrorKind::kInvalidInput:
    case ErrorKind::kInvalidSpec:
    case ErrorKind::kParse:
    case ErrorKind::kInvariantViolation:
    case ErrorKind::kUnparseable:
    case ErrorKind::kCatalog:
    case ErrorKind::kIncompatible: return http::status::bad_request;
    default: return http::status::internal_server_error;
  }
}

Response reply(const Request& req, http::status status, const json& body) {
  Response res{status, req.version()};
  res.set(http::field::content_type, "application/json");
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = body.dump();
  res.prepare_payload();
  return res;
}

json error_body(ErrorKind kind, const std::string& message) {
  return {{"error", {{"kind", std::string(to_string(kind))}, {"message", message}}}};
}

std::string_view target_of(const Request& req) {
  const auto t = req.target();
  return {t.data(), t.size()};
}

std::vector<std::string> split_path(std::string_view target) {
  std::vector<std::string> parts;
  const auto q = target.find('?');
  std::string_view path = target.substr(0, q);
  size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const size_t j = path.find('/', i);
    const size_t end = j == std::string_view::npos ? path.size() : j;
    if (end > i) parts.emplace_back(path.substr(i, end - i));
    i = end;
  }
  return parts;
}

std::uint64_t query_from(std::string_view target) {
  const auto q = target.find("from=");
  if (q == std::string_view::npos) return 0;
  try {
    return std::stoull(std::string(target.substr(q + 5)));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

struct Server::Impl {
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::atomic<bool> stopping{false};
  std::thread accept_thread;
  std::thread ticker;
  std::mutex mu;
  std::condition_variable cv;
  std::list<std::thread> workers;
  std::list<int> open_fds;
  bool stopped = false;
};

Server::Server(ServerConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {}

Server::~Server() { stop(); }

namespace {

Response route(const Request& req, SessionRegistry& registry, const ServerConfig& cfg) {
  const auto parts = split_path(target_of(req));
  const auto method = req.method();
  if (method == http::verb::options) {
    Response res{http::status::no_content, req.version()};
    res.set(http::field::access_control_allow_origin, "*");
    res.set(http::field::access_control_allow_methods, "GET, POST, DELETE, OPTIONS");
    res.set(http::field::access_control_allow_headers, "Content-Type");
    res.keep_alive(req.keep_alive());
    res.prepare_payload();
    return res;
  }
  try {
    if (parts.size() == 1 && parts[0] == "health") return reply(req, http::status::ok, json{{"status", "ok"}});
    if (parts.size() == 1 && parts[0] == "catalog") {
      return reply(req, http::status::ok, skills::catalog_manifest(skills::default_catalog()));
    }
    if (parts.empty() || parts[0] != "sessions") {
      return reply(req, http::status::not_found, error_body(ErrorKind::kNotFound, "no route"));
    }
    const json body = req.body().empty() ? json::object() : json::parse(req.body(), nullptr, false);
    if (body.is_discarded()) {
      return reply(req, http::status::bad_request, error_body(ErrorKind::kParse, "request body is not JSON"));
    }
    if (parts.size() == 1 && method == http::verb::post) {
      SessionConfig sc = cfg.session;
      std::filesystem::path map = body.value("map", cfg.default_map.string());
      sc.seed = body.value("seed", sc.seed);
      sc.voice_latency = body.value("voice_latency", sc.voice_latency);
      if (auto nav = body.find("navigator"); nav != body.end() && nav->is_object() && nav->contains("checkpoint")) {
        sc.navigator = skills::PolicyNavigator{std::make_shared<rl::Checkpoint>(
            rl::load_checkpoint((*nav)["checkpoint"].get<std::string>()))};
      }
      if (map.empty()) return reply(req, http::status::bad_request, error_body(ErrorKind::kInvalidInput, "no map given"));
      auto s = registry.create(map, sc);
      return reply(req, http::status::created, json{{"id", s->id()}, {"state", s->state_json()}});
    }
    if (parts.size() < 2) return reply(req, http::status::method_not_allowed, error_body(ErrorKind::kInvalidInput, "unsupported method"));
    auto session = registry.find(parts[1]);
    if (!session) {
      return reply(req, http::status::not_found, error_body(ErrorKind::kNotFound, "unknown session '" + parts[1] + "'"));
    }
    if (parts.size() == 2 && method == http::verb::delete_) {
      registry.remove(parts[1]);
      return reply(req, http::status::ok, json{{"deleted", parts[1]}});
    }
    if (parts.size() == 3 && parts[2] == "state" && method == http::verb::get) {
      return reply(req, http::status::ok, session->state_json());
    }
    if (parts.size() == 3 && parts[2] == "metrics" && method == http::verb::get) {
      json j = report_to_json(session->metrics());
      json recs = json::array();
      for (const auto& r : session->records()) recs.push_back(record_to_json(r));
      j["records_list"] = recs;
      return reply(req, http::status::ok, j);
    }
    if (parts.size() == 3 && parts[2] == "command" && method == http::verb::post) {
      if (!body.contains("text") || !body["text"].is_string()) {
        return reply(req, http::status::bad_request, error_body(ErrorKind::kInvalidInput, "body needs {\"text\": ...}"));
      }
      const CommandOutcome out = session->submit_command(body["text"].get<std::string>());
      return reply(req, out.compiled ? http::status::ok : http::status::unprocessable_entity, out.to_json());
    }
    return reply(req, http::status::not_found, error_body(ErrorKind::kNotFound, "no route"));
  } catch (const Error& e) {
    return reply(req, status_for(e.kind()), error_body(e.kind(), e.what()));
  } catch (const std::exception& e) {
    return reply(req, http::status::bad_request, error_body(ErrorKind::kInvalidInput, e.what()));
  }
}

void stream_events(tcp::socket socket, const Request& req, std::shared_ptr<Session> session,
                   const std::atomic<bool>& stopping) {
  websocket::stream<tcp::socket> ws(std::move(socket));
  ws.accept(req);
  ws.text(true);
  std::uint64_t cursor = query_from(target_of(req));
  auto& hub = session->events();
  while (!stopping.load()) {
    auto ev = hub.next(cursor, std::chrono::milliseconds(100));
    if (ev) {
      ws.write(asio::buffer(ev->to_json().dump()));
    } else if (hub.closed()) {
      break;
    }
  }
  beast::error_code ec;
  ws.close(websocket::close_code::normal, ec);
}

}  // namespace

void Server::start() {
  auto& im = *impl_;
  beast::error_code ec;
  const auto addr = asio::ip::make_address(cfg_.address, ec);
  if (ec) throw Error(ErrorKind::kSetup, "bad listen address '" + cfg_.address + "'");
  const tcp::endpoint ep{addr, cfg_.port};
  im.acceptor.open(ep.protocol(), ec);
  if (!ec) im.acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) im.acceptor.bind(ep, ec);
  if (!ec) im.acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw Error(ErrorKind::kSetup, "cannot listen on " + cfg_.address + ":" + std::to_string(cfg_.port) + ": " + ec.message());
  port_ = im.acceptor.local_endpoint().port();

  im.accept_thread = std::thread([this] {
    auto& im = *impl_;
    for (;;) {
      beast::error_code ec;
      tcp::socket socket(im.io);
      im.acceptor.accept(socket, ec);
      if (im.stopping.load()) return;
      if (ec) continue;
      std::lock_guard lock(im.mu);
      const int fd = socket.native_handle();
      im.open_fds.push_back(fd);
      auto fd_it = std::prev(im.open_fds.end());
      im.workers.emplace_back([this, s = std::move(socket), fd_it]() mutable {
        auto& im = *impl_;
        try {
          beast::flat_buffer buffer;
          for (;;) {
            Request req;
            http::read(s, buffer, req);
            if (websocket::is_upgrade(req)) {
              const auto parts = split_path(target_of(req));
              auto session = parts.size() == 3 && parts[0] == "sessions" && parts[2] == "events"
                                 ? registry_.find(parts[1])
                                 : nullptr;
              if (!session) {
                http::write(s, reply(req, http::status::not_found, error_body(ErrorKind::kNotFound, "unknown event stream")));
                break;
              }
              stream_events(std::move(s), req, session, im.stopping);
              break;
            }
            Response res = route(req, registry_, cfg_);
            http::write(s, res);
            if (!res.keep_alive()) break;
          }
        } catch (const std::exception&) {
          // Peer went away; nothing to report.
        }
        beast::error_code ignore;
        s.shutdown(tcp::socket::shutdown_both, ignore);
        std::lock_guard lock(im.mu);
        *fd_it = -1;
      });
    }
  });

  im.ticker = std::thread([this] {
    auto& im = *impl_;
    const auto period = std::chrono::duration<double>(std::max(0.01, cfg_.idle_state_period));
    std::unique_lock lock(im.mu);
    while (!im.stopping.load()) {
      im.cv.wait_for(lock, period, [&] { return im.stopping.load(); });
      if (im.stopping.load()) break;
      lock.unlock();
      for (auto& s : registry_.all()) {
        if (!s->busy()) s->publish_state();
      }
      lock.lock();
    }
  });
}

void Server::stop() {
  auto& im = *impl_;
  {
    std::lock_guard lock(im.mu);
    if (im.stopped) return;
    im.stopped = true;
    im.stopping.store(true);
    for (int fd : im.open_fds) {
      if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
    }
  }
  im.cv.notify_all();
  for (auto& s : registry_.all()) s->cancel();
  beast::error_code ec;
  // close() alone does not wake a thread blocked in accept().
  ::shutdown(im.acceptor.native_handle(), SHUT_RDWR);
  im.acceptor.close(ec);
  if (im.accept_thread.joinable()) im.accept_thread.join();
  if (im.ticker.joinable()) im.ticker.join();
  std::list<std::thread> workers;
  {
    std::lock_guard lock(im.mu);
    workers.swap(im.workers);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
}

void Server::wait() {
  auto& im = *impl_;
  std::unique_lock lock(im.mu);
  im.cv.wait(lock, [&] { return im.stopping.load(); });
}

}  // namespace robotiq::service
