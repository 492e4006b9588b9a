#include "riarit/session.hpp"

#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace riarit {

using nlohmann::json;

std::string_view to_string(FinishReason reason) {
  switch (reason) {
  case FinishReason::max_exercises:
    return "max_exercises";
  case FinishReason::mastery:
    return "mastery";
  case FinishReason::wall_clock:
    return "wall_clock";
  }
  return "?";
}

FinishReason parse_finish_reason(std::string_view text) {
  if (text == "max_exercises") {
    return FinishReason::max_exercises;
  }
  if (text == "mastery") {
    return FinishReason::mastery;
  }
  if (text == "wall_clock") {
    return FinishReason::wall_clock;
  }
  throw std::invalid_argument("unknown finish reason '" + std::string(text) + "'");
}

namespace {

constexpr std::uint64_t kExerciseStream = 0x65786572ULL;

MoneyKind parse_money(const std::string& s) {
  if (s == "real") {
    return MoneyKind::real;
  }
  if (s == "token") {
    return MoneyKind::token;
  }
  throw ReplayError("unknown money kind '" + s + "'");
}

Activity activity_from_json(const json& j, const Scenario& scenario) {
  std::vector<std::string> ids;
  for (const auto& p : scenario.space.parameters()) {
    ids.push_back(j.at(p.id).get<std::string>());
  }
  return scenario.space.make_activity(ids);
}

json activity_to_json(const Activity& a, const Scenario& scenario) {
  json out = json::object();
  const auto ids = scenario.space.value_ids(a);
  for (std::size_t j = 0; j < ids.size(); ++j) {
    out[scenario.space[j].id] = ids[j];
  }
  return out;
}

std::optional<Verdict::Kind> parse_verdict(const std::string& s) {
  for (auto k : {Verdict::Kind::correct, Verdict::Kind::incorrect, Verdict::Kind::solution}) {
    if (to_string(k) == s) {
      return k;
    }
  }
  return std::nullopt;
}

bool is_mastery_exercise(const Scenario& scenario, const Activity& a) {
  const auto param = scenario.space.find(scenario.session.mastery_parameter);
  if (!param) {
    return false;
  }
  const auto value = scenario.space.find_value(*param, scenario.session.mastery_value);
  return value && a.values[*param] == *value;
}

void apply_unchecked(SessionState& s, const SessionEvent& e, const Scenario& scenario) {
  const std::string kind = e.at("kind").get<std::string>();
  if (kind == "created") {
    if (s.next_seq != 0) {
      throw ReplayError("created event after the start of the log");
    }
    if (e.at("scenario").get<std::string>() != scenario.id) {
      throw ReplayError("log belongs to scenario '" + e.at("scenario").get<std::string>() + "'");
    }
    s.id = e.at("session").get<std::string>();
    s.teacher_kind = parse_teacher_kind(e.at("teacher").get<std::string>());
    s.seed = e.at("seed").get<std::uint64_t>();
    s.teacher = Teacher(s.teacher_kind, scenario);
    s.estimate = StudentEstimate(scenario.kc_count(), scenario.riarit.alpha);
    return;
  }
  if (s.next_seq == 0) {
    throw ReplayError("log does not start with a created event");
  }
  if (s.finished) {
    throw ReplayError("event '" + kind + "' after the session finished");
  }
  if (kind == "exercise_proposed") {
    if (s.current) {
      throw ReplayError("exercise proposed while another is outstanding");
    }
    if (e.at("index").get<int>() != s.exercises) {
      throw ReplayError("exercise index does not follow the closed rounds");
    }
    ExerciseInstance inst;
    inst.activity = activity_from_json(e.at("activity"), scenario);
    inst.exercise_type = e.at("exercise_type").get<int>();
    inst.price.cents = e.at("price_cents").get<Cents>();
    inst.object_id = e.at("object").get<std::string>();
    inst.wallet = e.at("wallet").get<std::vector<Cents>>();
    inst.money = parse_money(e.at("money").get<std::string>());
    inst.trial_limit = e.at("trial_limit").get<int>();
    s.current = std::move(inst);
    s.trials_used = 0;
    return;
  }
  if (kind == "answer_submitted") {
    if (!s.current) {
      throw ReplayError("answer without an outstanding exercise");
    }
    AnswerSubmission sub;
    sub.items = e.at("items").get<std::vector<Cents>>();
    sub.trial = e.at("trial").get<int>();
    if (sub.trial != s.trials_used + 1) {
      throw ReplayError("trial numbers are not consecutive");
    }
    const Verdict verdict = validate_answer(sub, *s.current);
    if (parse_verdict(e.at("verdict").get<std::string>()) != verdict.kind) {
      throw ReplayError("logged verdict differs from the recomputed one");
    }
    s.trials_used = sub.trial;
    const bool closed = verdict.kind != Verdict::Kind::incorrect;
    if (e.at("closed").get<bool>() != closed) {
      throw ReplayError("logged round state differs from the recomputed one");
    }
    if (!closed) {
      return;
    }
    const bool correct = verdict.kind == Verdict::Kind::correct;
    const Activity a = s.current->activity;
    const OutcomeReward reward =
        s.estimate.observe(required_competence(scenario.q_table, a), correct);
    if (e.at("reward").get<double>() != reward.total) {
      throw ReplayError("logged reward differs from the recomputed one");
    }
    s.teacher.observe(scenario, a, correct, reward.total);
    ++s.exercises;
    if (correct) {
      ++s.successes;
      if (is_mastery_exercise(scenario, a)) {
        ++s.mastery_successes;
      }
    }
    s.current.reset();
    s.trials_used = 0;
    return;
  }
  if (kind == "solution_shown") {
    return;
  }
  if (kind == "finished") {
    if (s.current) {
      throw ReplayError("session finished during an open round");
    }
    s.finished = true;
    s.reason = parse_finish_reason(e.at("reason").get<std::string>());
    return;
  }
  throw ReplayError("unknown event kind '" + kind + "'");
}

} // namespace

void apply_event(SessionState& state, const SessionEvent& event, const Scenario& scenario) {
  try {
    const auto seq = event.at("seq").get<std::uint64_t>();
    if (seq != state.next_seq) {
      throw ReplayError("sequence gap: expected " + std::to_string(state.next_seq) + ", got " +
                        std::to_string(seq));
    }
    if (seq != 0 && event.at("session").get<std::string>() != state.id) {
      throw ReplayError("event from another session");
    }
    apply_unchecked(state, event, scenario);
    ++state.next_seq;
  } catch (const json::exception& e) {
    throw ReplayError(std::string("malformed event: ") + e.what());
  } catch (const ProtocolError& e) {
    throw ReplayError(std::string("invalid logged answer: ") + e.what());
  } catch (const ConfigError& e) {
    throw ReplayError(std::string("invalid logged activity: ") + e.what());
  }
}

SessionState replay(const std::vector<SessionEvent>& log, const Scenario& scenario) {
  SessionState state;
  for (const auto& event : log) {
    apply_event(state, event, scenario);
  }
  if (state.next_seq == 0) {
    throw ReplayError("empty event log");
  }
  return state;
}

FileEventSink::FileEventSink(const std::string& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw std::runtime_error("cannot open " + path + ": " + std::strerror(errno));
  }
}

FileEventSink::~FileEventSink() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

void FileEventSink::append(const SessionEvent& event) {
  const std::string line = event.dump() + "\n";
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw std::runtime_error("write to " + path_ + " failed: " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    throw std::runtime_error("fsync of " + path_ + " failed: " + std::strerror(errno));
  }
}

std::vector<SessionEvent> read_event_log(const std::string& path, std::size_t* valid_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::vector<SessionEvent> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) {
      break;  // torn tail
    }
    const std::string_view line(text.data() + pos, end - pos);
    if (!line.empty()) {
      try {
        out.push_back(json::parse(line));
      } catch (const json::exception& e) {
        throw ReplayError(path + ": unreadable event line: " + e.what());
      }
    }
    pos = end + 1;
  }
  if (valid_bytes) {
    *valid_bytes = pos;
  }
  return out;
}

Session::Session(const Scenario& scenario, const Catalog& catalog,
                 std::shared_ptr<EventSink> sink)
    : scenario_(&scenario), catalog_(&catalog), sink_(std::move(sink)) {}

Session Session::create(const Scenario& scenario, const Catalog& catalog, std::string id,
                        TeacherKind teacher, std::uint64_t seed,
                        std::shared_ptr<EventSink> sink) {
  Session s(scenario, catalog, std::move(sink));
  s.state_.id = id;
  s.emit({{"kind", "created"},
          {"scenario", scenario.id},
          {"teacher", std::string(to_string(teacher))},
          {"seed", seed}});
  return s;
}

Session Session::restore(const Scenario& scenario, const Catalog& catalog,
                         std::vector<SessionEvent> log, std::shared_ptr<EventSink> sink) {
  Session s(scenario, catalog, std::move(sink));
  s.state_ = replay(log, scenario);
  s.log_ = std::move(log);
  return s;
}

void Session::set_clock(std::chrono::system_clock::time_point started, Clock now) {
  started_ = started;
  now_ = std::move(now);
}

bool Session::wall_clock_expired() const {
  const auto& cap = scenario_->session.wall_clock_minutes;
  if (!cap || !now_) {
    return false;
  }
  const std::chrono::duration<double, std::ratio<60>> elapsed = now_() - started_;
  return elapsed.count() >= *cap;
}

void Session::emit(SessionEvent event) {
  event["seq"] = state_.next_seq;
  event["session"] = state_.id;
  SessionState next = state_;
  apply_event(next, event, *scenario_);
  if (sink_) {
    sink_->append(event);
  }
  state_ = std::move(next);
  log_.push_back(std::move(event));
}

const ExerciseInstance& Session::next_exercise() {
  if (state_.finished) {
    throw SessionError(SessionError::Kind::terminal, "session " + state_.id + " is finished");
  }
  if (state_.current) {
    throw SessionError(SessionError::Kind::sequencing,
                       "session " + state_.id + " already has an outstanding exercise");
  }
  if (wall_clock_expired()) {
    emit({{"kind", "finished"}, {"reason", std::string(to_string(FinishReason::wall_clock))}});
    throw SessionError(SessionError::Kind::terminal, "session " + state_.id + " ran out of time");
  }
  Rng rng = Rng::derive(state_.seed,
                        {kExerciseStream, static_cast<std::uint64_t>(state_.exercises)});
  const Activity a = state_.teacher.propose(*scenario_, state_.estimate.levels(), rng);
  const ExerciseInstance inst = instantiate(*scenario_, *catalog_, a, rng);
  emit({{"kind", "exercise_proposed"},
        {"index", state_.exercises},
        {"activity", activity_to_json(inst.activity, *scenario_)},
        {"exercise_type", inst.exercise_type},
        {"price_cents", inst.price.cents},
        {"object", inst.object_id},
        {"wallet", inst.wallet},
        {"money", inst.money == MoneyKind::token ? "token" : "real"},
        {"trial_limit", inst.trial_limit}});
  return *state_.current;
}

AnswerResult Session::submit_answer(const AnswerSubmission& submission) {
  if (state_.finished) {
    throw SessionError(SessionError::Kind::terminal, "session " + state_.id + " is finished");
  }
  if (!state_.current) {
    throw SessionError(SessionError::Kind::sequencing,
                       "session " + state_.id + " has no outstanding exercise");
  }
  if (submission.trial != state_.trials_used + 1) {
    throw SessionError(SessionError::Kind::protocol,
                       "expected trial " + std::to_string(state_.trials_used + 1) + ", got " +
                           std::to_string(submission.trial));
  }
  AnswerResult result;
  try {
    result.verdict = validate_answer(submission, *state_.current);
  } catch (const ProtocolError& e) {
    throw SessionError(SessionError::Kind::protocol, e.what());
  }
  result.round_closed = result.verdict.kind != Verdict::Kind::incorrect;

  json event = {{"kind", "answer_submitted"},
                {"trial", submission.trial},
                {"items", submission.items},
                {"hint", submission.hint_used},
                {"verdict", std::string(to_string(result.verdict.kind))},
                {"difference_cents", result.verdict.difference},
                {"closed", result.round_closed}};
  if (result.round_closed) {
    const bool correct = result.verdict.kind == Verdict::Kind::correct;
    const auto up = update(state_.estimate,
                           required_competence(scenario_->q_table, state_.current->activity),
                           correct);
    result.reward = up.reward.total;
    event["correct"] = correct;
    event["reward"] = up.reward.total;
    event["competence"] = up.estimate.levels();
  }
  emit(std::move(event));
  if (result.verdict.kind == Verdict::Kind::solution) {
    emit({{"kind", "solution_shown"}, {"solution", result.verdict.solution}});
  }
  if (result.round_closed) {
    const auto& rules = scenario_->session;
    std::optional<FinishReason> reason;
    if (state_.mastery_successes >= rules.mastery_successes) {
      reason = FinishReason::mastery;
    } else if (state_.exercises >= rules.max_exercises) {
      reason = FinishReason::max_exercises;
    }
    if (reason) {
      emit({{"kind", "finished"}, {"reason", std::string(to_string(*reason))}});
    }
  }
  result.finished = state_.finished;
  result.reason = state_.reason;
  return result;
}

json Session::snapshot() const {
  json competences = json::object();
  for (std::size_t i = 0; i < scenario_->kc_count(); ++i) {
    competences[scenario_->kcs[i].id] = state_.estimate.levels()[i];
  }
  json out = {
      {"session_id", state_.id},
      {"scenario", scenario_->id},
      {"teacher", std::string(to_string(state_.teacher_kind))},
      {"seed", state_.seed},
      {"status", state_.finished ? "finished" : "active"},
      {"reason", state_.reason ? json(std::string(to_string(*state_.reason))) : json(nullptr)},
      {"competences", competences},
      {"counters",
       {{"exercises", state_.exercises},
        {"successes", state_.successes},
        {"failures", state_.exercises - state_.successes},
        {"mastery_successes", state_.mastery_successes},
        {"trials_used", state_.trials_used},
        {"events", state_.next_seq}}},
      {"current", state_.current ? instance_to_json(*this, *state_.current) : json(nullptr)},
  };
  if (const auto* progress = state_.teacher.progress()) {
    out["stage"] = progress->stage;
  }
  return out;
}

json instance_to_json(const Session& session, const ExerciseInstance& instance) {
  json out = exercise_to_json(session.scenario(), session.catalog(), instance);
  out["session_id"] = session.state().id;
  out["exercise_index"] = session.state().exercises;
  out["next_trial"] = session.state().trials_used + 1;
  return out;
}

} // namespace riarit
