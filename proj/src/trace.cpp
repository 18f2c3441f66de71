#include "coop/trace.hpp"

#include <array>

namespace coop {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 12> kKindNames{{
    {EventKind::CommOpen, "COMM_OPEN"},
    {EventKind::Proposal, "PROPOSAL"},
    {EventKind::Commit, "COMMIT"},
    {EventKind::RoomClose, "ROOM_CLOSE"},
    {EventKind::PlanStart, "PLAN_START"},
    {EventKind::ActionStart, "ACTION_START"},
    {EventKind::ActionEnd, "ACTION_END"},
    {EventKind::PlanEnd, "PLAN_END"},
    {EventKind::BlockDone, "BLOCK_DONE"},
    {EventKind::EpisodeEnd, "EPISODE_END"},
    {EventKind::ProtocolViolation, "PROTOCOL_VIOLATION"},
    {EventKind::LlmFallback, "LLM_FALLBACK"},
}};

[[noreturn]] void violation(const TraceEvent& e, const std::string& what) {
  throw Error(ErrorCode::OrderingViolation, std::string(to_string(e.kind)) + " at tick " + std::to_string(e.tick) +
                                                " (agent " + std::to_string(to_int(e.agent)) + "): " + what);
}

}  // namespace

std::string_view to_string(EventKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames)
    if (name == s) return kind;
  return std::nullopt;
}

Json to_json(const TraceEvent& e) {
  Json j;
  j["tick"] = e.tick;
  j["agent"] = to_int(e.agent);
  j["kind"] = to_string(e.kind);
  j["payload"] = e.payload;
  return j;
}

TraceEvent event_from_json(const Json& j) {
  TraceEvent e;
  try {
    e.tick = j.at("tick").get<int>();
    e.agent = AgentId{j.at("agent").get<int>()};
    auto kind = parse_event_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::ParseError, "unknown event kind " + j.at("kind").dump());
    e.kind = *kind;
    e.payload = j.value("payload", Json::object());
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("malformed trace event: ") + ex.what());
  }
  return e;
}

const TraceEvent& EpisodeTrace::end_event() const {
  if (!terminal()) throw Error(ErrorCode::TraceIncomplete, "trace has no EPISODE_END event");
  return events.back();
}

void TraceOrderChecker::check(const TraceEvent& e) {
  if (ended_) violation(e, "event after EPISODE_END");
  if (e.tick < last_tick_) violation(e, "tick went backwards from " + std::to_string(last_tick_));
  switch (e.kind) {
    case EventKind::CommOpen:
      if (room_open_) violation(e, "room already open");
      room_open_ = true;
      break;
    case EventKind::Proposal:
    case EventKind::Commit:
      if (!room_open_) violation(e, "no open room");
      break;
    case EventKind::RoomClose:
      if (!room_open_) violation(e, "no open room");
      room_open_ = false;
      break;
    case EventKind::PlanStart:
      if (!open_plans_.insert(e.agent).second) violation(e, "plan already open");
      break;
    case EventKind::ActionStart:
      if (!open_plans_.contains(e.agent)) violation(e, "action outside a plan");
      if (!open_actions_.insert(e.agent).second) violation(e, "action already open");
      break;
    case EventKind::ActionEnd:
      if (open_actions_.erase(e.agent) == 0) violation(e, "no open action");
      break;
    case EventKind::PlanEnd:
      if (open_actions_.contains(e.agent)) violation(e, "plan ended with an open action");
      if (open_plans_.erase(e.agent) == 0) violation(e, "no open plan");
      break;
    case EventKind::EpisodeEnd:
      if (room_open_) violation(e, "room still open");
      if (!open_plans_.empty()) violation(e, "plans still open");
      ended_ = true;
      break;
    case EventKind::BlockDone:
    case EventKind::ProtocolViolation:
    case EventKind::LlmFallback:
      break;
  }
  last_tick_ = e.tick;
}

TraceRecorder::TraceRecorder(const std::filesystem::path& trace_path, const std::filesystem::path& timing_path)
    : trace_out_(trace_path), timing_out_(timing_path) {
  if (!trace_out_ || !timing_out_) throw Error(ErrorCode::IoError, "cannot open " + trace_path.string());
}

void TraceRecorder::record(TraceEvent e) {
  checker_.check(e);
  if (trace_out_.is_open()) {
    trace_out_ << to_json(e).dump() << '\n' << std::flush;
    timing_out_ << Json{{"wall_clock", e.wall_clock}}.dump() << '\n' << std::flush;
    if (!trace_out_ || !timing_out_) throw Error(ErrorCode::IoError, "trace write failed");
  }
  trace_.events.push_back(std::move(e));
}

void write_trace(const EpisodeTrace& trace, const std::filesystem::path& trace_path,
                 const std::optional<std::filesystem::path>& timing_path) {
  std::ofstream out(trace_path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + trace_path.string());
  for (const auto& e : trace.events) out << to_json(e).dump() << '\n';
  if (timing_path) {
    std::ofstream t(*timing_path);
    if (!t) throw Error(ErrorCode::IoError, "cannot open " + timing_path->string());
    for (const auto& e : trace.events) t << Json{{"wall_clock", e.wall_clock}}.dump() << '\n';
  }
}

EpisodeTrace read_trace(const std::filesystem::path& trace_path,
                        const std::optional<std::filesystem::path>& timing_path) {
  std::ifstream in(trace_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + trace_path.string());
  EpisodeTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ParseError, "bad JSON line in " + trace_path.string());
    trace.events.push_back(event_from_json(j));
  }
  if (timing_path && std::filesystem::exists(*timing_path)) {
    std::ifstream t(*timing_path);
    std::size_t i = 0;
    while (std::getline(t, line) && i < trace.events.size()) {
      Json j = Json::parse(line, nullptr, false);
      if (!j.is_discarded()) trace.events[i].wall_clock = j.value("wall_clock", 0.0);
      ++i;
    }
  }
  return trace;
}

std::vector<PlanRecord> extract_plans(const EpisodeTrace& trace) {
  trace.end_event();
  std::vector<PlanRecord> plans;
  std::map<AgentId, std::size_t> open;
  std::set<BlockId> delivered;
  for (const auto& e : trace.events) {
    switch (e.kind) {
      case EventKind::BlockDone:
        if (auto b = parse_block_name(e.payload.value("block", ""))) delivered.insert(*b);
        break;
      case EventKind::PlanStart: {
        PlanRecord r;
        r.agent = e.agent;
        auto task = parse_block_name(e.payload.value("task", ""));
        if (!task) throw Error(ErrorCode::ParseError, "PLAN_START without task");
        r.task = *task;
        for (const auto& a : e.payload.value("plan", Json::array())) r.actions.push_back(a.get<std::string>());
        r.start = e.tick;
        open[e.agent] = plans.size();
        plans.push_back(std::move(r));
        break;
      }
      case EventKind::PlanEnd: {
        auto it = open.find(e.agent);
        if (it == open.end()) throw Error(ErrorCode::OrderingViolation, "PLAN_END without PLAN_START");
        PlanRecord& r = plans[it->second];
        r.end = e.tick;
        r.truncated = e.payload.value("truncated", false);
        r.success = delivered.contains(r.task);
        open.erase(it);
        break;
      }
      default:
        break;
    }
  }
  for (auto& r : plans) {
    std::set<AgentId> team{r.agent};
    for (const auto& o : plans)
      if (o.task == r.task && o.start <= r.end && r.start <= o.end) team.insert(o.agent);
    r.team_size = static_cast<int>(team.size());
  }
  return plans;
}

std::filesystem::path timing_path_for(const std::filesystem::path& trace_path) {
  std::string name = trace_path.filename().string();
  const std::string suffix = ".trace.jsonl";
  if (name.size() > suffix.size() && name.ends_with(suffix))
    name = name.substr(0, name.size() - suffix.size()) + ".timing.jsonl";
  else
    name += ".timing";
  return trace_path.parent_path() / name;
}

}  // namespace coop
