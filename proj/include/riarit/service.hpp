#pragma once

// Session registry with one directory per session, and the HTTP+JSON API on
// top of it.

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "riarit/session.hpp"

namespace httplib {
class Server;
}

namespace riarit {

/// Request-level failure carrying the HTTP status to answer with.
class ServiceError : public std::runtime_error {
public:
  ServiceError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

private:
  int status_;
};

class SessionManager {
public:
  /// Reopens every session found under `data_dir` by replaying its log.
  SessionManager(std::shared_ptr<const Scenario> scenario, std::shared_ptr<const Catalog> catalog,
                 std::string data_dir, TeacherKind default_teacher = TeacherKind::riarit);

  /// Body: {scenario?, teacher?, seed?}. Returns the new session id.
  std::string create(const nlohmann::json& body);
  nlohmann::json next(const std::string& id);
  /// Body: {items: [cents], trial, hint?}.
  nlohmann::json answer(const std::string& id, const nlohmann::json& body);
  nlohmann::json state(const std::string& id);
  std::vector<SessionEvent> events(const std::string& id);

  const Scenario& scenario() const { return *scenario_; }
  const Catalog& catalog() const { return *catalog_; }
  std::size_t session_count() const;
  /// Session directories that could not be replayed at startup.
  const std::vector<std::string>& load_errors() const { return load_errors_; }
  std::string log_path(const std::string& id) const;

private:
  struct Entry {
    std::mutex mutex;
    std::optional<Session> session;
  };
  std::shared_ptr<Entry> find(const std::string& id) const;
  void load_existing();

  std::shared_ptr<const Scenario> scenario_;
  std::shared_ptr<const Catalog> catalog_;
  std::string data_dir_;
  TeacherKind default_teacher_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t counter_ = 0;
  std::vector<std::string> load_errors_;
};

/// Registers the /api routes (and CORS preflight) on `server`.
void install_routes(httplib::Server& server, SessionManager& manager);

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Optional directory of static client files mounted at "/".
  std::string static_dir;
};

/// Serves until SIGTERM or SIGINT, then stops accepting and returns 0.
/// Returns nonzero when the port cannot be bound.
int run_server(SessionManager& manager, const ServeOptions& options, std::ostream& log);

} // namespace riarit
