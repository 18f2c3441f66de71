#pragma once

// Two-round communication room. Idle agents, in ascending id order, each
// PROPOSE a task with a rationale, then each COMMIT to a task. A task of
// weight w is finalized when committed agents plus agents already executing
// it number at least w. The environment clock does not advance while a room
// is open.

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coop/env.hpp"
#include "coop/world_model.hpp"

namespace coop {

class AgentPolicy;

enum class EntryKind : std::uint8_t { Proposal, Commit };

struct BufferEntry {
  AgentId agent{};
  EntryKind kind = EntryKind::Proposal;
  BlockId task{};
  std::string rationale;
  double wall_clock = 0.0;  // seconds since the room opened

  bool operator==(const BufferEntry& o) const {
    return agent == o.agent && kind == o.kind && task == o.task && rationale == o.rationale;
  }
};

/// Shared, append-only communication buffer of one room.
class NegotiationBuffer {
 public:
  SymbolicObservation sym_obs;
  std::map<BlockId, TaskStats> task_reports;  // every active task
  std::vector<AgentId> participants;          // ascending
  int tick = 0;

  const std::vector<BufferEntry>& entries() const { return entries_; }

  /// Throws Error(OrderingViolation) if the entry would break the buffer
  /// invariants (proposals before commits, one of each per participant).
  void append(BufferEntry e);

  bool has_entry(AgentId agent, EntryKind kind) const;
  std::vector<BlockId> proposed_tasks() const;
  double elapsed() const;

 private:
  std::vector<BufferEntry> entries_;
  std::chrono::steady_clock::time_point opened_ = std::chrono::steady_clock::now();
};

struct SizeTally {
  long attempts = 0;
  long successes = 0;

  bool operator==(const SizeTally&) const = default;
};

struct TeamSizeStats {
  BlockId task{};
  std::optional<int> best_size;
  std::optional<double> best_rate;
  std::map<int, SizeTally> per_size;
};

/// Per task, tallies of task nodes grouped by recorded team size. The best
/// size maximizes success rate, smallest size on ties.
std::vector<TeamSizeStats> team_size_stats(const WorldModelGraph& world, const std::set<BlockId>& tasks);

struct TaskMapping {
  std::map<AgentId, BlockId> assignments;  // quorum-backed
  std::map<AgentId, BlockId> forced;       // repeated-failure fallback
  std::vector<AgentId> unassigned;
  std::vector<AgentId> withdrawn;  // policies that returned no task
  bool finalized = false;

  std::optional<BlockId> task_of(AgentId a) const;
};

struct ProtocolViolation {
  AgentId agent{};
  EntryKind stage = EntryKind::Proposal;
  std::string detail;
  BlockId substituted{};
};

using PolicyMap = std::map<AgentId, AgentPolicy*>;

/// `idle` is normalized to ascending order.
NegotiationBuffer open_room(std::vector<AgentId> idle, int tick, const WorldModelGraph& world, const GridState& state);

/// Active block nearest to the goal, lowest id on ties.
std::optional<BlockId> fallback_task(const SymbolicObservation& obs);

/// Lightest active block, lowest id on ties.
std::optional<BlockId> lightest_task(const SymbolicObservation& obs);

/// Appends one PROPOSAL per participant in order. Participants whose policy
/// returns no task are withdrawn from the room and listed in `withdrawn`.
std::vector<ProtocolViolation> proposal_round(NegotiationBuffer& buffer, const PolicyMap& policies,
                                              std::vector<AgentId>& withdrawn);

/// Appends one COMMIT per remaining participant, then applies the quorum rule.
/// `executing` counts agents outside the room already executing each task.
TaskMapping commitment_round(NegotiationBuffer& buffer, const std::vector<TeamSizeStats>& team_stats,
                             const PolicyMap& policies, const std::map<BlockId, int>& executing,
                             std::vector<ProtocolViolation>& violations);

/// Consecutive failed rooms per agent. Agents unassigned for
/// kForcedAfterFailures rooms in a row are moved into `forced`.
class QuorumTracker {
 public:
  static constexpr int kForcedAfterFailures = 3;

  void apply(TaskMapping& mapping, const SymbolicObservation& obs);
  int failures(AgentId a) const;

 private:
  std::map<AgentId, int> failures_;
};

struct RoomOutcome {
  NegotiationBuffer buffer;
  std::vector<TeamSizeStats> team_stats;
  TaskMapping mapping;
  std::vector<ProtocolViolation> violations;
};

/// open_room + proposal_round + team_size_stats + commitment_round + tracker.
RoomOutcome run_room(std::vector<AgentId> idle, const GridState& state, const WorldModelGraph& world,
                     const PolicyMap& policies, const std::map<BlockId, int>& executing, QuorumTracker& tracker);

std::string render_guidebook(const NegotiationBuffer& buffer, const std::vector<TeamSizeStats>& team_stats);

}  // namespace coop
