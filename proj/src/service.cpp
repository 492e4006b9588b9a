#include "riarit/service.hpp"

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <fcntl.h>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <thread>
#include <unistd.h>

#include "httplib.h"

namespace riarit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void fsync_path(const fs::path& p) {
  const int fd = ::open(p.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

std::string session_name(std::uint64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(n));
  return buf;
}

std::optional<std::uint64_t> session_number(const std::string& name) {
  if (name.size() < 2 || name[0] != 's' ||
      !std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return std::stoull(name.substr(1));
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::chrono::system_clock::time_point from_ms(std::int64_t ms) {
  return std::chrono::system_clock::time_point(std::chrono::milliseconds(ms));
}

} // namespace

SessionManager::SessionManager(std::shared_ptr<const Scenario> scenario,
                               std::shared_ptr<const Catalog> catalog, std::string data_dir,
                               TeacherKind default_teacher)
    : scenario_(std::move(scenario)), catalog_(std::move(catalog)),
      data_dir_(std::move(data_dir)), default_teacher_(default_teacher) {
  fs::create_directories(data_dir_);
  load_existing();
}

std::string SessionManager::log_path(const std::string& id) const {
  return (fs::path(data_dir_) / id / "events.jsonl").string();
}

void SessionManager::load_existing() {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(data_dir_)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && session_number(name)) {
      names.push_back(name);
    }
  }
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    counter_ = std::max(counter_, *session_number(name));
    const fs::path dir = fs::path(data_dir_) / name;
    try {
      std::size_t valid = 0;
      auto log = read_event_log(log_path(name), &valid);
      if (valid != fs::file_size(log_path(name))) {
        fs::resize_file(log_path(name), valid);
      }
      auto sink = std::make_shared<FileEventSink>(log_path(name));
      auto entry = std::make_shared<Entry>();
      entry->session.emplace(Session::restore(*scenario_, *catalog_, std::move(log), sink));
      std::ifstream meta(dir / "meta.json");
      if (meta) {
        const json m = json::parse(meta, nullptr, false);
        if (m.is_object() && m.contains("created_at_ms")) {
          entry->session->set_clock(from_ms(m["created_at_ms"].get<std::int64_t>()),
                                    std::chrono::system_clock::now);
        }
      }
      sessions_[name] = std::move(entry);
    } catch (const std::exception& e) {
      load_errors_.push_back(name + ": " + e.what());
    }
  }
}

std::size_t SessionManager::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw ServiceError(404, "unknown session '" + id + "'");
  }
  return it->second;
}

std::string SessionManager::create(const json& request) {
  const json body = request.is_null() ? json::object() : request;
  if (!body.is_object()) {
    throw ServiceError(400, "request body must be a JSON object");
  }
  if (body.contains("scenario") && !body["scenario"].is_null() &&
      body["scenario"] != json(scenario_->id)) {
    throw ServiceError(404, "unknown scenario " + body["scenario"].dump());
  }
  TeacherKind teacher = default_teacher_;
  std::uint64_t seed = 0;
  try {
    if (body.contains("teacher") && !body["teacher"].is_null()) {
      teacher = parse_teacher_kind(body["teacher"].get<std::string>());
    }
    if (body.contains("seed") && !body["seed"].is_null()) {
      seed = body["seed"].get<std::uint64_t>();
    } else {
      std::random_device rd;
      seed = (std::uint64_t(rd()) << 32) ^ rd();
    }
  } catch (const json::exception& e) {
    throw ServiceError(400, std::string("bad session request: ") + e.what());
  } catch (const ConfigError& e) {
    throw ServiceError(400, e.what());
  }

  std::lock_guard lock(mutex_);
  const std::string id = session_name(++counter_);
  const fs::path dir = fs::path(data_dir_) / id;
  fs::create_directories(dir);
  const std::int64_t created = now_ms();
  {
    std::ofstream meta(dir / "meta.json");
    meta << json{{"created_at_ms", created}}.dump() << '\n';
  }
  auto sink = std::make_shared<FileEventSink>(log_path(id));
  fsync_path(dir);
  fsync_path(data_dir_);
  auto entry = std::make_shared<Entry>();
  entry->session.emplace(Session::create(*scenario_, *catalog_, id, teacher, seed, sink));
  entry->session->set_clock(from_ms(created), std::chrono::system_clock::now);
  sessions_[id] = std::move(entry);
  return id;
}

namespace {

[[noreturn]] void rethrow_session_error(const SessionError& e) {
  switch (e.kind()) {
  case SessionError::Kind::terminal:
  case SessionError::Kind::sequencing:
    throw ServiceError(409, e.what());
  case SessionError::Kind::protocol:
    break;
  }
  throw ServiceError(400, e.what());
}

} // namespace

json SessionManager::next(const std::string& id) {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  try {
    const ExerciseInstance& inst = entry->session->next_exercise();
    return instance_to_json(*entry->session, inst);
  } catch (const SessionError& e) {
    rethrow_session_error(e);
  }
}

json SessionManager::answer(const std::string& id, const json& body) {
  AnswerSubmission sub;
  try {
    sub.items = body.at("items").get<std::vector<Cents>>();
    sub.trial = body.at("trial").get<int>();
    sub.hint_used = body.value("hint", false);
  } catch (const json::exception& e) {
    throw ServiceError(400, std::string("bad answer: ") + e.what());
  }
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  Session& session = *entry->session;
  try {
    const AnswerResult r = session.submit_answer(sub);
    json out = {
        {"verdict", std::string(to_string(r.verdict.kind))},
        {"round_closed", r.round_closed},
        {"status", r.finished ? "finished" : "active"},
        {"reason", r.reason ? json(std::string(to_string(*r.reason))) : json(nullptr)},
        {"exercises", session.state().exercises},
    };
    if (r.verdict.kind != Verdict::Kind::correct) {
      out["difference_cents"] = r.verdict.difference;
    }
    if (r.verdict.kind == Verdict::Kind::solution) {
      out["solution"] = r.verdict.solution;
    }
    if (r.reward) {
      out["reward"] = *r.reward;
    }
    if (!r.round_closed) {
      out["next_trial"] = session.state().trials_used + 1;
    }
    return out;
  } catch (const SessionError& e) {
    rethrow_session_error(e);
  }
}

json SessionManager::state(const std::string& id) {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session->snapshot();
}

std::vector<SessionEvent> SessionManager::events(const std::string& id) {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session->events();
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const ServiceError& e) {
    send_json(res, e.status(), {{"error", e.what()}});
  } catch (const json::exception& e) {
    send_json(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
  } catch (const std::exception& e) {
    send_json(res, 500, {{"error", e.what()}});
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) {
    return json::object();
  }
  return json::parse(req.body);
}

} // namespace

void install_routes(httplib::Server& server, SessionManager& m) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  server.Get("/api/health", [&m](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200,
              {{"status", "ok"}, {"scenario", m.scenario().id}, {"sessions", m.session_count()}});
  });
  server.Get("/api/scenario", [&m](const httplib::Request&, httplib::Response& res) {
    json catalog = json::array();
    for (const auto& item : m.catalog().items) {
      catalog.push_back({{"id", item.id}, {"name", item.name}, {"image", item.image}});
    }
    send_json(res, 200, {{"scenario", scenario_to_json(m.scenario())}, {"catalog", catalog}});
  });
  server.Post("/api/sessions", [&m](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 201, {{"session_id", m.create(parse_body(req))}}); });
  });
  server.Get(R"(/api/sessions/([^/]+)/next)",
             [&m](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] { send_json(res, 200, m.next(req.matches[1])); });
             });
  server.Post(R"(/api/sessions/([^/]+)/answer)",
              [&m](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] { send_json(res, 200, m.answer(req.matches[1], parse_body(req))); });
              });
  server.Get(R"(/api/sessions/([^/]+)/state)",
             [&m](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] { send_json(res, 200, m.state(req.matches[1])); });
             });
  server.Get(R"(/api/sessions/([^/]+)/events)",
             [&m](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const auto log = m.events(req.matches[1]);
                 if (req.get_param_value("format") == "jsonl") {
                   std::string text;
                   for (const auto& e : log) {
                     text += e.dump();
                     text += '\n';
                   }
                   res.set_content(text, "application/x-ndjson");
                   return;
                 }
                 send_json(res, 200, json(log));
               });
             });
}

int run_server(SessionManager& manager, const ServeOptions& options, std::ostream& log) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGINT);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  httplib::Server server;
  install_routes(server, manager);
  if (!options.static_dir.empty() && !server.set_mount_point("/", options.static_dir)) {
    log << "error: static directory " << options.static_dir << " does not exist\n";
    return 2;
  }
  int port = options.port;
  if (port == 0) {
    port = server.bind_to_any_port(options.host);
    if (port < 0) {
      log << "error: cannot bind " << options.host << "\n";
      return 2;
    }
  } else if (!server.bind_to_port(options.host, port)) {
    log << "error: cannot bind " << options.host << ":" << port << " (port busy?)\n";
    return 2;
  }
  log << "listening on http://" << options.host << ":" << port << " scenario "
      << manager.scenario().id << " sessions " << manager.session_count() << std::endl;
  for (const auto& e : manager.load_errors()) {
    log << "warning: skipped session " << e << "\n";
  }

  std::thread listener([&] { server.listen_after_bind(); });
  int sig = 0;
  sigwait(&signals, &sig);
  log << "signal " << sig << ", shutting down" << std::endl;
  server.stop();
  listener.join();
  return 0;
}

} // namespace riarit
