#pragma once

// Layered symbolic world model built from episode traces.
//
//   episode -> task (one per executed plan) -> prototype -> instance
//
// Prototypes are argument-free action-name sequences, deduplicated per task.
// Instances are fully parameterized plans under a prototype; repeated
// attempts of the same instance increment its tallies. Every episode merge
// is additive: nodes and edges are only ever added.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coop/actions.hpp"
#include "coop/trace.hpp"

namespace coop {

struct PlanPrototype {
  std::vector<std::string> key;  // action names in order

  bool operator==(const PlanPrototype&) const = default;
};

PlanPrototype canonical_prototype(const PlanInstance& plan);

/// Same key from canonical action texts (`Push(block_1, steps=3)` -> `Push`).
PlanPrototype prototype_from_texts(const std::vector<std::string>& actions);

std::string format_prototype(const PlanPrototype& p);  // `A → B → C`

enum class EpisodeOutcome : std::uint8_t { Complete, Incomplete };

struct EpisodeNode {
  std::string id;
  int index = 0;
  EpisodeOutcome outcome = EpisodeOutcome::Incomplete;
  int start_tick = 0;
  int end_tick = 0;

  bool operator==(const EpisodeNode&) const = default;
};

struct TaskNode {
  std::string id;
  int episode = 0;
  BlockId task{};
  AgentId agent{};
  bool success = false;
  int start = 0;
  std::optional<int> duration;  // absent when the plan was cut off by timeout
  int team_size = 1;
  std::string prototype_id;
  std::string instance_id;

  bool operator==(const TaskNode&) const = default;
};

struct PrototypeNode {
  std::string id;
  BlockId task{};
  PlanPrototype prototype;

  bool operator==(const PrototypeNode&) const = default;
};

/// Success/duration/team tallies over a set of attempts.
struct OutcomeTally {
  long attempts = 0;
  long successes = 0;
  long duration_sum = 0;
  long duration_count = 0;
  long team_size_sum = 0;

  void add(bool success, std::optional<int> duration, int team_size);
  void add(const OutcomeTally& other);
  std::optional<double> success_rate() const;
  std::optional<double> mean_duration() const;
  std::optional<double> mean_team_size() const;

  bool operator==(const OutcomeTally&) const = default;
};

struct InstanceNode {
  std::string id;
  std::string prototype_id;
  BlockId task{};
  std::vector<std::string> actions;
  OutcomeTally tally;

  bool operator==(const InstanceNode&) const = default;
};

struct Edge {
  std::string from;
  std::string to;

  auto operator<=>(const Edge&) const = default;
};

/// Additive subgraph produced by one episode, plus tally increments for
/// instances that already exist.
struct GraphDelta {
  EpisodeNode episode;
  std::vector<TaskNode> tasks;
  std::vector<PrototypeNode> new_prototypes;
  std::vector<InstanceNode> new_instances;  // tallies start at zero
  std::vector<std::pair<std::string, OutcomeTally>> instance_updates;
  std::vector<Edge> edges;
};

class WorldModelGraph {
 public:
  const std::vector<EpisodeNode>& episodes() const { return episodes_; }
  const std::vector<TaskNode>& tasks() const { return tasks_; }
  const std::vector<PrototypeNode>& prototypes() const { return prototypes_; }
  const std::vector<InstanceNode>& instances() const { return instances_; }
  const std::vector<Edge>& edges() const { return edges_; }

  const PrototypeNode* find_prototype(const std::string& id) const;
  const InstanceNode* find_instance(const std::string& id) const;

  std::size_t node_count() const {
    return episodes_.size() + tasks_.size() + prototypes_.size() + instances_.size();
  }
  std::set<std::string> node_ids() const;

  void merge(const GraphDelta& delta);

  bool operator==(const WorldModelGraph& o) const {
    return episodes_ == o.episodes_ && tasks_ == o.tasks_ && prototypes_ == o.prototypes_ &&
           instances_ == o.instances_ && edges_ == o.edges_;
  }

 private:
  std::vector<EpisodeNode> episodes_;
  std::vector<TaskNode> tasks_;
  std::vector<PrototypeNode> prototypes_;
  std::vector<InstanceNode> instances_;
  std::vector<Edge> edges_;
  std::map<std::string, std::size_t> proto_index_;
  std::map<std::string, std::size_t> inst_index_;
  std::set<Edge> edge_set_;
};

std::string prototype_node_id(BlockId task, const PlanPrototype& p);
std::string instance_node_id(BlockId task, const std::vector<std::string>& actions);

/// Computes the episode's additive subgraph against `graph` without modifying it.
/// Throws Error(TraceIncomplete) if the trace lacks EPISODE_END.
GraphDelta compute_delta(const WorldModelGraph& graph, const EpisodeTrace& trace);

/// G_{k+1} = G_k ∪ ΔG_k. Returns ΔG_k.
GraphDelta ingest_episode(WorldModelGraph& graph, const EpisodeTrace& trace);

/// Cross-episode statistics for one task, aggregated over its task nodes.
struct TaskStats {
  BlockId task{};
  long attempts = 0;
  long successes = 0;
  std::optional<double> mean_start;
  std::optional<int> min_start;
  std::optional<int> max_start;
  std::optional<double> mean_duration;

  std::optional<double> success_rate() const;
};

TaskStats task_stats(const WorldModelGraph& graph, BlockId task);

struct RetrievedInstance {
  InstanceNode instance;
};

struct RetrievedPrototype {
  PrototypeNode prototype;
  OutcomeTally stats;  // summed over child instances
  std::vector<RetrievedInstance> instances;
};

struct RetrievalResult {
  BlockId task{};
  std::vector<RetrievedPrototype> prototypes;
};

/// Orders tallies by success rate (desc, unknown last), then mean duration
/// (asc, unknown last). Returns <0, 0, >0 like a three-way compare.
int compare_tallies(const OutcomeTally& a, const OutcomeTally& b);

/// Top-K prototypes for `task`, each with its top-L instances.
RetrievalResult retrieve_plans(const WorldModelGraph& graph, BlockId task, int k, int l);

std::string render_plan_library(const RetrievalResult& result);

enum class GraphFormat : std::uint8_t { Json, Dot };

std::optional<GraphFormat> parse_graph_format(std::string_view s);

/// Throws Error(UnsupportedFormat) for unknown format names.
std::string export_graph(const WorldModelGraph& graph, std::string_view format);
std::string export_graph(const WorldModelGraph& graph, GraphFormat format);

WorldModelGraph import_graph_json(const std::string& text);

/// Missing file -> empty graph.
WorldModelGraph load_world(const std::filesystem::path& path);
void save_world(const WorldModelGraph& graph, const std::filesystem::path& path);

/// Percent rounded to the nearest integer, e.g. "67%".
std::string format_percent(double fraction);
/// Integers print bare, other values with one decimal.
std::string format_number(double value);

}  // namespace coop
