#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coop/trace.hpp"

namespace coop {

struct EpisodeMetrics {
  int episode = 0;
  std::string reason;
  std::vector<BlockId> blocks;
  std::map<BlockId, std::optional<int>> completion;  // delivering tick when done
  int env_steps = 0;
  double wall_seconds = 0.0;
  int rooms = 0;
  std::map<AgentId, std::vector<BlockId>> commitments;  // COMMIT payloads in order
  std::map<BlockId, std::vector<int>> team_sizes;       // one entry per executed plan

  bool completed(BlockId b) const;
  int completed_count() const;
};

/// Throws Error(TraceIncomplete) for non-terminal traces.
EpisodeMetrics compute_metrics(const EpisodeTrace& trace);

Json metrics_to_json(const EpisodeMetrics& m);
EpisodeMetrics metrics_from_json(const Json& j);

struct TimelineStyle {
  double px_per_tick = 0.0;  // 0: fit the trace into ~900 px
  double lane_height = 22.0;
  double left_margin = 130.0;
};

/// SVG with a `comm` lane on top, then `agent-N-plan` and `agent-N-action`
/// lanes per agent. Bars carry data-start/data-end tick attributes.
std::string render_timeline(const EpisodeTrace& trace, const TimelineStyle& style = {});

struct ExperimentTables {
  std::string completion;   // block x episode matrix of 0/1
  std::string series;       // per-episode env-steps and seconds
  std::string commitments;  // per episode and agent, the commitment sequence
};

/// Tab-separated tables. Requires at least one episode.
ExperimentTables aggregate_runs(const std::vector<EpisodeMetrics>& metrics);

}  // namespace coop
