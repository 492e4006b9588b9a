#pragma once

// Live tutoring sessions. A session's state is a fold over its append-only
// event log; every mutation is written to the log before it takes effect.

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "riarit/estimator.hpp"
#include "riarit/exercise.hpp"
#include "riarit/scenario.hpp"
#include "riarit/teacher.hpp"

namespace riarit {

class SessionError : public std::runtime_error {
public:
  enum class Kind {
    terminal,    // session already finished
    sequencing,  // call out of order (outstanding or missing exercise)
    protocol,    // malformed answer: unknown items, wrong trial number
  };
  SessionError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

class ReplayError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class FinishReason { max_exercises, mastery, wall_clock };
std::string_view to_string(FinishReason reason);
FinishReason parse_finish_reason(std::string_view text);

/// One JSON object per event: {"seq", "session", "kind", ...payload}.
using SessionEvent = nlohmann::json;

struct SessionState {
  std::string id;
  TeacherKind teacher_kind = TeacherKind::riarit;
  std::uint64_t seed = 0;
  Teacher teacher;
  StudentEstimate estimate;
  std::optional<ExerciseInstance> current;
  int trials_used = 0;
  int exercises = 0;  // closed rounds
  int successes = 0;
  int mastery_successes = 0;
  bool finished = false;
  std::optional<FinishReason> reason;
  std::uint64_t next_seq = 0;

  bool operator==(const SessionState&) const = default;
};

/// Applies one event. Throws ReplayError when the event does not fit the state
/// (sequence gap, foreign session, inconsistent outcome or reward).
void apply_event(SessionState& state, const SessionEvent& event, const Scenario& scenario);

/// Fold over a complete log, starting from its created event.
SessionState replay(const std::vector<SessionEvent>& log, const Scenario& scenario);

/// Destination of newly written events; must be durable when `append` returns.
class EventSink {
public:
  virtual ~EventSink() = default;
  virtual void append(const SessionEvent& event) = 0;
};

/// events.jsonl writer that fsyncs every line.
class FileEventSink : public EventSink {
public:
  explicit FileEventSink(const std::string& path);
  ~FileEventSink() override;
  FileEventSink(const FileEventSink&) = delete;
  FileEventSink& operator=(const FileEventSink&) = delete;
  void append(const SessionEvent& event) override;

private:
  int fd_ = -1;
  std::string path_;
};

/// Reads an events.jsonl file; a torn final line (crash mid-write) is dropped
/// and `valid_bytes` receives the length of the intact prefix.
std::vector<SessionEvent> read_event_log(const std::string& path,
                                         std::size_t* valid_bytes = nullptr);

struct AnswerResult {
  Verdict verdict;
  bool round_closed = false;
  std::optional<double> reward;
  bool finished = false;
  std::optional<FinishReason> reason;
};

class Session {
public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  /// Fresh session; the created event goes to `sink` (may be null).
  static Session create(const Scenario& scenario, const Catalog& catalog, std::string id,
                        TeacherKind teacher, std::uint64_t seed,
                        std::shared_ptr<EventSink> sink = nullptr);

  /// Session rebuilt from its log; later events go to `sink`.
  static Session restore(const Scenario& scenario, const Catalog& catalog,
                         std::vector<SessionEvent> log, std::shared_ptr<EventSink> sink = nullptr);

  const ExerciseInstance& next_exercise();
  AnswerResult submit_answer(const AnswerSubmission& submission);

  const SessionState& state() const { return state_; }
  const std::vector<SessionEvent>& events() const { return log_; }
  const Scenario& scenario() const { return *scenario_; }
  const Catalog& catalog() const { return *catalog_; }

  /// Enables the wall-clock cap measured from `started`.
  void set_clock(std::chrono::system_clock::time_point started, Clock now);

  nlohmann::json snapshot() const;

private:
  Session(const Scenario& scenario, const Catalog& catalog, std::shared_ptr<EventSink> sink);
  void emit(SessionEvent event);
  bool wall_clock_expired() const;

  const Scenario* scenario_;
  const Catalog* catalog_;
  std::shared_ptr<EventSink> sink_;
  SessionState state_;
  std::vector<SessionEvent> log_;
  std::chrono::system_clock::time_point started_{};
  Clock now_;
};

/// Exercise payload for the wire, with the round's trial bookkeeping.
nlohmann::json instance_to_json(const Session& session, const ExerciseInstance& instance);

} // namespace riarit
