#pragma once

// World trace: the append-only event log of one episode.
//
// On disk a trace is line-delimited JSON, one event per line, flushed as it
// is written. Wall-clock timestamps go to a sidecar file (one line per event,
// same order) so that trace files of deterministic runs are byte-identical.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "coop/types.hpp"

namespace coop {

using Json = nlohmann::json;

enum class EventKind : std::uint8_t {
  CommOpen,
  Proposal,
  Commit,
  RoomClose,
  PlanStart,
  ActionStart,
  ActionEnd,
  PlanEnd,
  BlockDone,
  EpisodeEnd,
  ProtocolViolation,
  LlmFallback,
};

std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

/// Agent value used for room-level events.
inline constexpr AgentId kRoom{-1};

struct TraceEvent {
  int tick = 0;
  double wall_clock = 0.0;  // seconds since episode start
  AgentId agent = kRoom;
  EventKind kind = EventKind::CommOpen;
  Json payload = Json::object();
};

/// Serialized form without wall_clock.
Json to_json(const TraceEvent& e);
TraceEvent event_from_json(const Json& j);

struct EpisodeTrace {
  std::vector<TraceEvent> events;

  bool terminal() const { return !events.empty() && events.back().kind == EventKind::EpisodeEnd; }
  const TraceEvent& end_event() const;  // throws TraceIncomplete
};

/// Incremental ordering checks shared by the recorder and trace loading.
class TraceOrderChecker {
 public:
  /// Throws Error(OrderingViolation).
  void check(const TraceEvent& e);

 private:
  int last_tick_ = 0;
  bool room_open_ = false;
  bool ended_ = false;
  std::set<AgentId> open_plans_;
  std::set<AgentId> open_actions_;
};

/// Append-only sink. Keeps the events in memory and optionally streams them
/// to a trace file plus timing sidecar.
class TraceRecorder {
 public:
  TraceRecorder() = default;
  TraceRecorder(const std::filesystem::path& trace_path, const std::filesystem::path& timing_path);

  void record(TraceEvent e);
  const EpisodeTrace& trace() const { return trace_; }
  EpisodeTrace take() { return std::move(trace_); }

 private:
  TraceOrderChecker checker_;
  EpisodeTrace trace_;
  std::ofstream trace_out_;
  std::ofstream timing_out_;
};

void write_trace(const EpisodeTrace& trace, const std::filesystem::path& trace_path,
                 const std::optional<std::filesystem::path>& timing_path = std::nullopt);

/// Loads a trace; reads wall-clock values from `timing_path` when given and present.
EpisodeTrace read_trace(const std::filesystem::path& trace_path,
                        const std::optional<std::filesystem::path>& timing_path = std::nullopt);

/// One executed plan reconstructed from PLAN_START/PLAN_END pairs.
struct PlanRecord {
  AgentId agent{};
  BlockId task{};
  std::vector<std::string> actions;  // canonical action texts
  int start = 0;
  int end = 0;
  bool truncated = false;  // cut off by the episode timeout
  bool success = false;    // target block delivered no later than PLAN_END
  int team_size = 1;       // distinct agents with overlapping plans on the same task
};

/// Plans in PLAN_START order. Throws Error(TraceIncomplete) on non-terminal traces.
std::vector<PlanRecord> extract_plans(const EpisodeTrace& trace);

/// Sidecar path convention: `x.trace.jsonl` -> `x.timing.jsonl`.
std::filesystem::path timing_path_for(const std::filesystem::path& trace_path);

}  // namespace coop
