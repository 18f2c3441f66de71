#include "coop/controller.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace coop {

std::string_view to_string(RejectCode code) {
  switch (code) {
    case RejectCode::EmptyPlan: return "EMPTY_PLAN";
    case RejectCode::UnknownAction: return "UNKNOWN_ACTION";
    case RejectCode::BadSide: return "BAD_SIDE";
    case RejectCode::BadParam: return "BAD_PARAM";
    case RejectCode::UnknownBlock: return "UNKNOWN_BLOCK";
    case RejectCode::BlockDone: return "BLOCK_DONE";
    case RejectCode::TaskMismatch: return "TASK_MISMATCH";
  }
  return "?";
}

std::string_view to_string(FailReason r) {
  switch (r) {
    case FailReason::None: return "NONE";
    case FailReason::NotAligned: return "NOT_ALIGNED";
    case FailReason::Timeout: return "TIMEOUT";
    case FailReason::TargetGone: return "TARGET_GONE";
    case FailReason::NoPath: return "NO_PATH";
    case FailReason::Blocked: return "BLOCKED";
    case FailReason::Stalled: return "STALLED";
  }
  return "?";
}

std::string_view to_string(ExecMode m) {
  switch (m) {
    case ExecMode::Running: return "RUNNING";
    case ExecMode::Waiting: return "WAITING";
    case ExecMode::StepCounting: return "STEP_COUNTING";
    case ExecMode::DonePlan: return "DONE_PLAN";
  }
  return "?";
}

std::vector<Rejection> validate_plan(const PlanInstance& plan, const GridState& state) {
  std::vector<Rejection> out;
  if (plan.actions.empty()) out.push_back({0, RejectCode::EmptyPlan, "plan has no actions"});
  for (std::size_t i = 0; i < plan.actions.size(); ++i) {
    const auto& a = plan.actions[i];
    auto reject = [&](RejectCode c, std::string detail) { out.push_back({i, c, std::move(detail)}); };
    if (a.kind == ActionKind::Unknown) {
      reject(RejectCode::UnknownAction, a.raw_name);
      continue;
    }
    const bool needs_block = a.kind != ActionKind::WaitAgents;
    const bool needs_side = a.kind == ActionKind::Rendezvous || a.kind == ActionKind::MoveToBlock;
    const bool needs_count = a.kind == ActionKind::Rendezvous || a.kind == ActionKind::WaitAgents;
    const bool needs_steps = a.kind == ActionKind::Push || a.kind == ActionKind::YieldFace;

    if (needs_side && a.side == Side::Invalid) reject(RejectCode::BadSide, format_action(a));
    if (needs_count && (a.count < 1 || a.timeout < 1)) reject(RejectCode::BadParam, "count and timeout must be >= 1");
    if (needs_steps && a.steps < 1) reject(RejectCode::BadParam, "steps must be >= 1");
    if (needs_block) {
      if (!a.block) {
        reject(RejectCode::BadParam, "missing block");
        continue;
      }
      const Block* b = state.block(*a.block);
      if (!b)
        reject(RejectCode::UnknownBlock, block_name(*a.block));
      else if (!b->active())
        reject(RejectCode::BlockDone, block_name(*a.block));
      if (*a.block != plan.committed_task)
        reject(RejectCode::TaskMismatch, block_name(*a.block) + " != " + block_name(plan.committed_task));
    } else if (a.block) {
      reject(RejectCode::BadParam, "WaitAgents takes no block");
    }
  }
  return out;
}

int agents_at_side(const GridState& state, const Block& b, Dir side) {
  int n = 0;
  for (const auto& a : state.agents)
    if (aligned_face(b, a.position) == side) ++n;
  return n;
}

int available_agents(const GridState& state, AgentId self) {
  int n = 1;
  for (const auto& a : state.agents)
    if (a.id != self && (a.phase == AgentPhase::Idle || a.phase == AgentPhase::Waiting)) ++n;
  return n;
}

namespace {

// Distance field from the free target cells over passable cells.
std::vector<int> distance_field(const GridState& s, AgentId self, const std::vector<Cell>& targets) {
  const int w = s.config.width, h = s.config.height;
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<char> passable(static_cast<std::size_t>(w * h), 1);
  auto idx = [w](Cell c) { return static_cast<std::size_t>(c.row * w + c.col); };
  for (const auto& b : s.blocks) {
    if (!b.active()) continue;
    for (int r = 0; r < b.weight; ++r)
      for (int c = 0; c < b.weight; ++c) passable[idx({b.anchor.row + r, b.anchor.col + c})] = 0;
  }
  for (const auto& a : s.agents)
    if (a.id != self) passable[idx(a.position)] = 0;

  std::vector<int> dist(static_cast<std::size_t>(w * h), kInf);
  std::deque<Cell> queue;
  for (Cell t : targets) {
    if (!s.in_bounds(t) || !passable[idx(t)] || dist[idx(t)] == 0) continue;
    dist[idx(t)] = 0;
    queue.push_back(t);
  }
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (Dir d : kAllDirs) {
      const Cell n = step(c, d);
      if (!s.in_bounds(n) || !passable[idx(n)] || dist[idx(n)] != kInf) continue;
      dist[idx(n)] = dist[idx(c)] + 1;
      queue.push_back(n);
    }
  }
  return dist;
}

bool on_side(const GridState& s, AgentId agent, const Block& b, Dir side) {
  const AgentBody* body = s.agent(agent);
  return body && aligned_face(b, body->position) == side;
}

bool cell_free(const GridState& s, Cell c) {
  return s.in_bounds(c) && !s.block_at(c) && !s.agent_at(c);
}

// Candidate retreat directions: away from the nearest face, then the
// perpendicular directions in N, S, E, W order.
std::vector<Dir> retreat_dirs(const Block& b, Cell pos) {
  Dir nearest = Dir::N;
  int best = std::numeric_limits<int>::max();
  for (Dir f : kAllDirs) {
    for (Cell c : face_cells(b, f)) {
      const int d = std::abs(c.row - pos.row) + std::abs(c.col - pos.col);
      if (d < best) {
        best = d;
        nearest = f;
      }
    }
  }
  std::vector<Dir> out{nearest};
  for (Dir d : kAllDirs)
    if (d != nearest && d != opposite(nearest)) out.push_back(d);
  return out;
}

}  // namespace

std::optional<Dir> first_step_toward(const GridState& s, AgentId agent, const std::vector<Cell>& targets) {
  const AgentBody* body = s.agent(agent);
  if (!body) return std::nullopt;
  const auto dist = distance_field(s, agent, targets);
  const auto here = dist[static_cast<std::size_t>(body->position.row * s.config.width + body->position.col)];
  if (here == 0 || here == std::numeric_limits<int>::max()) return std::nullopt;
  for (Dir d : kAllDirs) {
    const Cell n = step(body->position, d);
    if (s.in_bounds(n) && dist[static_cast<std::size_t>(n.row * s.config.width + n.col)] == here - 1) return d;
  }
  return std::nullopt;
}

bool has_path(const GridState& s, AgentId agent, const std::vector<Cell>& targets) {
  const AgentBody* body = s.agent(agent);
  if (!body) return false;
  const auto dist = distance_field(s, agent, targets);
  return dist[static_cast<std::size_t>(body->position.row * s.config.width + body->position.col)] !=
         std::numeric_limits<int>::max();
}

Precondition check_precondition(const SymbolicAction& action, AgentId agent, const GridState& state,
                                int action_start) {
  const int elapsed = state.tick - action_start;
  const Block* b = action.block ? state.block(*action.block) : nullptr;
  const bool gone = action.kind != ActionKind::WaitAgents && (!b || !b->active());
  const AgentBody* body = state.agent(agent);
  if (!body) return Precondition::fail(FailReason::TargetGone);

  switch (action.kind) {
    case ActionKind::WaitAgents:
      if (available_agents(state, agent) >= action.count) return Precondition::satisfied();
      if (elapsed >= action.timeout) return Precondition::fail(FailReason::Timeout);
      return Precondition::wait();

    case ActionKind::Rendezvous: {
      if (gone) return Precondition::fail(FailReason::TargetGone);
      const Dir side = *dir_of(action.side);
      if (on_side(state, agent, *b, side) && agents_at_side(state, *b, side) >= action.count)
        return Precondition::satisfied();
      if (elapsed >= action.timeout) return Precondition::fail(FailReason::Timeout);
      return Precondition::wait();
    }

    case ActionKind::MoveToBlock: {
      if (gone) return Precondition::fail(FailReason::TargetGone);
      if (!has_path(state, agent, face_cells(*b, *dir_of(action.side)))) return Precondition::fail(FailReason::NoPath);
      return Precondition::satisfied();
    }

    case ActionKind::Push:
      if (gone) return Precondition::fail(FailReason::TargetGone);
      if (!aligned_face(*b, body->position)) return Precondition::fail(FailReason::NotAligned);
      return Precondition::satisfied();

    case ActionKind::YieldFace: {
      if (gone) return Precondition::fail(FailReason::TargetGone);
      for (Dir d : retreat_dirs(*b, body->position))
        if (cell_free(state, step(body->position, d))) return Precondition::satisfied();
      return Precondition::fail(FailReason::Blocked);
    }

    case ActionKind::Unknown:
      break;
  }
  return Precondition::fail(FailReason::TargetGone);
}

ExecutorState start_plan(PlanInstance plan) {
  ExecutorState e;
  e.plan = std::move(plan);
  if (e.plan.actions.empty()) e.mode = ExecMode::DonePlan;
  return e;
}

PrimitiveAction decompose_tick(const ExecutorState& exec, AgentId agent, const GridState& state) {
  const SymbolicAction* a = exec.current();
  const AgentBody* body = state.agent(agent);
  if (!a || exec.mode == ExecMode::DonePlan || !body) return PrimitiveAction::noop();
  const Block* b = a->block ? state.block(*a->block) : nullptr;

  switch (a->kind) {
    case ActionKind::MoveToBlock:
    case ActionKind::Rendezvous: {
      if (!b || !b->active()) return PrimitiveAction::noop();
      const Dir side = *dir_of(a->side);
      if (aligned_face(*b, body->position) == side) return PrimitiveAction::noop();
      if (auto d = first_step_toward(state, agent, face_cells(*b, side))) return PrimitiveAction::move(*d);
      return PrimitiveAction::noop();
    }
    case ActionKind::Push: {
      if (!b || !b->active()) return PrimitiveAction::noop();
      if (auto face = aligned_face(*b, body->position)) return PrimitiveAction::push(b->id, *face);
      return PrimitiveAction::noop();
    }
    case ActionKind::YieldFace: {
      if (!b || !b->active()) return PrimitiveAction::noop();
      for (Dir d : retreat_dirs(*b, body->position))
        if (cell_free(state, step(body->position, d))) return PrimitiveAction::move(d);
      return PrimitiveAction::noop();
    }
    case ActionKind::WaitAgents:
    case ActionKind::Unknown:
      break;
  }
  return PrimitiveAction::noop();
}

namespace {

void finish_action(ExecutorState& e, int tick, bool success, FailReason reason, std::vector<ControllerEvent>& events) {
  events.push_back({ControllerEvent::Kind::ActionEnd, tick, e.index, *e.current(), success, reason});
  ++e.index;
  e.action_started = false;
  e.mode = e.index >= e.plan.actions.size() ? ExecMode::DonePlan : ExecMode::Running;
}

}  // namespace

TickResult prepare_tick(ExecutorState e, AgentId agent, const GridState& s) {
  std::vector<ControllerEvent> events;
  while (true) {
    const SymbolicAction* a = e.current();
    if (!a) {
      e.mode = ExecMode::DonePlan;
      e.last_primitive = PrimitiveAction::noop();
      return {std::move(e), PrimitiveAction::noop(), std::move(events)};
    }
    if (!e.action_started) {
      e.action_started = true;
      e.action_start = s.tick;
      e.ticks_in_action = 0;
      e.stalls = 0;
      e.no_path_checks = 0;
      e.mode = ExecMode::Running;
      if (a->kind == ActionKind::Push || a->kind == ActionKind::YieldFace) {
        e.mode = ExecMode::StepCounting;
        e.remaining = a->steps;
      }
      events.push_back({ControllerEvent::Kind::ActionStart, s.tick, e.index, *a, false, FailReason::None});
    }

    const Precondition pre = check_precondition(*a, agent, s, e.action_start);
    bool fail_now = pre.status == PreStatus::Fail;
    switch (a->kind) {
      case ActionKind::MoveToBlock:
        if (pre.reason == FailReason::NoPath) {
          fail_now = ++e.no_path_checks > kNoPathRechecks;
        } else {
          e.no_path_checks = 0;
        }
        break;
      case ActionKind::Rendezvous:
        if (!fail_now) {
          const Block* b = s.block(*a->block);
          const bool there = aligned_face(*b, s.agent(agent)->position) == dir_of(a->side);
          e.mode = there ? ExecMode::Waiting : ExecMode::Running;
          e.deadline = e.action_start + a->timeout;
        }
        break;
      case ActionKind::WaitAgents:
        if (!fail_now) {
          e.mode = ExecMode::Waiting;
          e.deadline = e.action_start + a->timeout;
        }
        break;
      case ActionKind::Push:
        // Not aligned: stay idle; the tick counts as a stall in advance().
        if (pre.reason == FailReason::NotAligned) fail_now = false;
        break;
      case ActionKind::YieldFace:
        // Only the first step can fail outright on a fully blocked retreat.
        if (pre.reason == FailReason::Blocked && e.ticks_in_action > 0) fail_now = false;
        break;
      case ActionKind::Unknown:
        fail_now = true;
        break;
    }

    if (fail_now) {
      finish_action(e, s.tick, false, pre.reason, events);
      continue;
    }
    PrimitiveAction p = decompose_tick(e, agent, s);
    e.last_primitive = p;
    return {std::move(e), p, std::move(events)};
  }
}

AdvanceResult advance(ExecutorState e, AgentId agent, const StepReport& feedback, const GridState& after) {
  std::vector<ControllerEvent> events;
  const SymbolicAction* a = e.current();
  if (!a || e.mode == ExecMode::DonePlan || !e.action_started) return {std::move(e), std::move(events)};

  ++e.ticks_in_action;
  const int elapsed = after.tick - e.action_start;
  const bool achieved = feedback.achieved(agent);
  const Block* b = a->block ? after.block(*a->block) : nullptr;
  const AgentBody* body = after.agent(agent);

  switch (a->kind) {
    case ActionKind::MoveToBlock: {
      if (b && b->active() && aligned_face(*b, body->position) == dir_of(a->side)) {
        finish_action(e, after.tick, true, FailReason::None, events);
      } else if (e.ticks_in_action >= action_tick_bound(*a, after)) {
        finish_action(e, after.tick, false, FailReason::Timeout, events);
      }
      break;
    }
    case ActionKind::Rendezvous: {
      const bool active = b && b->active();
      const Dir side = *dir_of(a->side);
      if (active && aligned_face(*b, body->position) == side && agents_at_side(after, *b, side) >= a->count) {
        finish_action(e, after.tick, true, FailReason::None, events);
      } else if (elapsed >= a->timeout) {
        finish_action(e, after.tick, false, FailReason::Timeout, events);
      }
      break;
    }
    case ActionKind::WaitAgents:
      if (available_agents(after, agent) >= a->count) {
        finish_action(e, after.tick, true, FailReason::None, events);
      } else if (elapsed >= a->timeout) {
        finish_action(e, after.tick, false, FailReason::Timeout, events);
      }
      break;
    case ActionKind::Push: {
      const BlockEffect* effect = feedback.block(*a->block);
      const bool pushed = e.last_primitive.kind == PrimitiveKind::Push && achieved;
      if (pushed) {
        --e.remaining;
      } else {
        ++e.stalls;
      }
      if (pushed && effect && effect->done) {
        finish_action(e, after.tick, true, FailReason::None, events);
      } else if (e.remaining <= 0) {
        finish_action(e, after.tick, true, FailReason::None, events);
      } else if (e.stalls >= a->steps) {
        finish_action(e, after.tick, false, FailReason::Stalled, events);
      }
      break;
    }
    case ActionKind::YieldFace: {
      if (e.last_primitive.is_move() && achieved) {
        --e.remaining;
      } else {
        ++e.stalls;
      }
      if (e.remaining <= 0) {
        finish_action(e, after.tick, true, FailReason::None, events);
      } else if (e.stalls >= a->steps) {
        finish_action(e, after.tick, false, FailReason::Stalled, events);
      }
      break;
    }
    case ActionKind::Unknown:
      finish_action(e, after.tick, false, FailReason::None, events);
      break;
  }
  return {std::move(e), std::move(events)};
}

int action_tick_bound(const SymbolicAction& action, const GridState& state) {
  switch (action.kind) {
    case ActionKind::MoveToBlock: return state.config.width * state.config.height;
    case ActionKind::Rendezvous:
    case ActionKind::WaitAgents: return action.timeout;
    case ActionKind::Push:
    case ActionKind::YieldFace: return 2 * action.steps - 1;
    case ActionKind::Unknown: return 0;
  }
  return 0;
}

}  // namespace coop
