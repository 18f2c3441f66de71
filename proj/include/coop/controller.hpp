#pragma once

// Per-agent plan execution. Each tick the orchestrator takes one snapshot,
// calls prepare_tick for every executor (precondition checks + decomposition
// into a primitive), applies a single env_step, then calls advance for every
// executor with the environment's feedback. The executor is a pure state
// machine over (plan, snapshots, feedback).

#include <optional>
#include <string>
#include <vector>

#include "coop/actions.hpp"
#include "coop/env.hpp"

namespace coop {

enum class RejectCode : std::uint8_t { EmptyPlan, UnknownAction, BadSide, BadParam, UnknownBlock, BlockDone, TaskMismatch };

std::string_view to_string(RejectCode code);

struct Rejection {
  std::size_t position = 0;
  RejectCode code = RejectCode::BadParam;
  std::string detail;
};

/// Admissibility only; feasibility is not simulated. Empty result means OK.
std::vector<Rejection> validate_plan(const PlanInstance& plan, const GridState& state);

enum class FailReason : std::uint8_t { None, NotAligned, Timeout, TargetGone, NoPath, Blocked, Stalled };

std::string_view to_string(FailReason r);

enum class PreStatus : std::uint8_t { Satisfied, Wait, Fail };

struct Precondition {
  PreStatus status = PreStatus::Satisfied;
  FailReason reason = FailReason::None;

  static Precondition satisfied() { return {}; }
  static Precondition wait() { return {PreStatus::Wait, FailReason::None}; }
  static Precondition fail(FailReason r) { return {PreStatus::Fail, r}; }
};

/// `action_start` is the tick the action began; waits time out once
/// state.tick - action_start >= timeout.
Precondition check_precondition(const SymbolicAction& action, AgentId agent, const GridState& state,
                                int action_start);

/// Agents standing on the alignment cells of `side` of block `b`.
int agents_at_side(const GridState& state, const Block& b, Dir side);

/// Agents counted by WaitAgents: `self` plus every other IDLE or WAITING agent.
int available_agents(const GridState& state, AgentId self);

/// First step of a breadth-first shortest path from `agent`'s cell to any
/// free cell in `targets`. Other agents and active blocks are obstacles.
/// Ties go to direction order N, S, E, W. nullopt when no path exists or the
/// agent is already on a target.
std::optional<Dir> first_step_toward(const GridState& state, AgentId agent, const std::vector<Cell>& targets);

bool has_path(const GridState& state, AgentId agent, const std::vector<Cell>& targets);

enum class ExecMode : std::uint8_t { Running, Waiting, StepCounting, DonePlan };

std::string_view to_string(ExecMode m);

struct ExecutorState {
  PlanInstance plan;
  std::size_t index = 0;
  ExecMode mode = ExecMode::Running;
  int deadline = 0;   // Waiting: action_start + timeout
  int remaining = 0;  // StepCounting: steps left
  bool action_started = false;
  int action_start = 0;
  int ticks_in_action = 0;
  int stalls = 0;
  int no_path_checks = 0;
  PrimitiveAction last_primitive;

  const SymbolicAction* current() const { return index < plan.actions.size() ? &plan.actions[index] : nullptr; }
  bool done() const { return mode == ExecMode::DonePlan; }

  bool operator==(const ExecutorState&) const = default;
};

ExecutorState start_plan(PlanInstance plan);

struct ControllerEvent {
  enum class Kind : std::uint8_t { ActionStart, ActionEnd } kind = Kind::ActionStart;
  int tick = 0;
  std::size_t index = 0;
  SymbolicAction action;
  bool success = false;
  FailReason reason = FailReason::None;

  bool operator==(const ControllerEvent&) const = default;
};

/// Maps the current action to this tick's primitive. Pure.
PrimitiveAction decompose_tick(const ExecutorState& exec, AgentId agent, const GridState& state);

struct TickResult {
  ExecutorState exec;
  PrimitiveAction primitive;
  std::vector<ControllerEvent> events;
};

/// Starts the current action if needed, resolves precondition failures
/// (advancing the index), and decomposes the action that will run this tick.
TickResult prepare_tick(ExecutorState exec, AgentId agent, const GridState& snapshot);

struct AdvanceResult {
  ExecutorState exec;
  std::vector<ControllerEvent> events;
};

/// Applies post-step feedback to the current action.
AdvanceResult advance(ExecutorState exec, AgentId agent, const StepReport& feedback, const GridState& after);

/// Upper bound on the ticks a single action can occupy.
int action_tick_bound(const SymbolicAction& action, const GridState& state);

inline constexpr int kNoPathRechecks = 3;

}  // namespace coop
