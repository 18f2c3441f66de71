#pragma once

// Episode orchestration. One tick loop owns every module interaction:
//
//   idle agents? -> room (clock paused) -> draft + refine -> PLAN_START
//   snapshot -> prepare_tick (all executors) -> env_step -> advance (all)
//
// Output layout of run_experiment under the output directory:
//   traces/episode_NNN.trace.jsonl (+ .timing.jsonl sidecar)
//   metrics/episode_NNN.json
//   timelines/episode_NNN.svg
//   graphs/world_epNNN.json, graphs/world_epNNN.dot
//   tables/completion.tsv, series.tsv, commitments.tsv
//   manifest.json

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "coop/analytics.hpp"
#include "coop/config.hpp"
#include "coop/world_model.hpp"

namespace coop {

/// Fresh policies for one episode, one per agent.
std::vector<std::unique_ptr<AgentPolicy>> make_policies(const ExperimentConfig& config);

struct EpisodeResult {
  EpisodeTrace trace;
  EpisodeMetrics metrics;
  GridState final_state;
};

/// Runs one episode against a read-only world model. When `trace_path` is
/// set the trace is streamed there as it is recorded.
EpisodeResult run_episode(const ExperimentConfig& config, const WorldModelGraph& world,
                          std::vector<std::unique_ptr<AgentPolicy>>& policies,
                          const std::optional<std::filesystem::path>& trace_path = std::nullopt);

EpisodeResult run_episode(const ExperimentConfig& config, const WorldModelGraph& world,
                          const std::optional<std::filesystem::path>& trace_path = std::nullopt);

struct ExperimentSummary {
  std::vector<EpisodeMetrics> metrics;
  std::vector<std::size_t> node_counts;  // world-model nodes after each episode
  std::vector<std::filesystem::path> files;
  std::filesystem::path world_path;
};

/// Runs all episodes, ingesting each into the persisted world model. On I/O
/// failure writes manifest.json with "complete": false and rethrows.
ExperimentSummary run_experiment(const ExperimentConfig& config);

std::string episode_stem(int episode);  // "episode_007"

}  // namespace coop
