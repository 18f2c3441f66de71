#include "coop/negotiation.hpp"

#include <algorithm>
#include <sstream>

#include "coop/policy.hpp"

namespace coop {

namespace {

bool is_active(const SymbolicObservation& obs, BlockId b) { return obs.find_block(b) != nullptr; }

std::optional<BlockId> proposal_of(const NegotiationBuffer& buffer, AgentId a) {
  for (const auto& e : buffer.entries())
    if (e.agent == a && e.kind == EntryKind::Proposal) return e.task;
  return std::nullopt;
}

}  // namespace

void NegotiationBuffer::append(BufferEntry e) {
  if (!std::binary_search(participants.begin(), participants.end(), e.agent))
    throw Error(ErrorCode::OrderingViolation, agent_name(e.agent) + " is not in the room");
  if (has_entry(e.agent, e.kind)) throw Error(ErrorCode::OrderingViolation, agent_name(e.agent) + " already wrote this round");
  if (e.kind == EntryKind::Proposal) {
    for (const auto& x : entries_)
      if (x.kind == EntryKind::Commit) throw Error(ErrorCode::OrderingViolation, "proposal after a commitment");
  } else if (!has_entry(e.agent, EntryKind::Proposal)) {
    throw Error(ErrorCode::OrderingViolation, agent_name(e.agent) + " commits without proposing");
  }
  entries_.push_back(std::move(e));
}

bool NegotiationBuffer::has_entry(AgentId agent, EntryKind kind) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const BufferEntry& x) { return x.agent == agent && x.kind == kind; });
}

std::vector<BlockId> NegotiationBuffer::proposed_tasks() const {
  std::set<BlockId> s;
  for (const auto& e : entries_)
    if (e.kind == EntryKind::Proposal) s.insert(e.task);
  return {s.begin(), s.end()};
}

double NegotiationBuffer::elapsed() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - opened_).count();
}

std::optional<BlockId> TaskMapping::task_of(AgentId a) const {
  if (auto it = assignments.find(a); it != assignments.end()) return it->second;
  if (auto it = forced.find(a); it != forced.end()) return it->second;
  return std::nullopt;
}

std::vector<TeamSizeStats> team_size_stats(const WorldModelGraph& world, const std::set<BlockId>& tasks) {
  std::vector<TeamSizeStats> out;
  for (BlockId task : tasks) {
    TeamSizeStats s;
    s.task = task;
    for (const auto& t : world.tasks()) {
      if (t.task != task) continue;
      auto& tally = s.per_size[t.team_size];
      ++tally.attempts;
      if (t.success) ++tally.successes;
    }
    for (const auto& [size, tally] : s.per_size) {
      // strictly better only, so the smallest size wins ties
      if (!s.best_size) {
        s.best_size = size;
      } else {
        const auto& best = s.per_size.at(*s.best_size);
        if (tally.successes * best.attempts > best.successes * tally.attempts) s.best_size = size;
      }
    }
    if (s.best_size) {
      const auto& best = s.per_size.at(*s.best_size);
      s.best_rate = static_cast<double>(best.successes) / static_cast<double>(best.attempts);
    }
    out.push_back(std::move(s));
  }
  return out;
}

NegotiationBuffer open_room(std::vector<AgentId> idle, int tick, const WorldModelGraph& world, const GridState& state) {
  std::sort(idle.begin(), idle.end());
  idle.erase(std::unique(idle.begin(), idle.end()), idle.end());
  NegotiationBuffer buffer;
  buffer.participants = std::move(idle);
  buffer.tick = tick;
  buffer.sym_obs = observe_symbolic(state);
  for (const auto& b : buffer.sym_obs.blocks) buffer.task_reports[b.id] = task_stats(world, b.id);
  return buffer;
}

std::optional<BlockId> fallback_task(const SymbolicObservation& obs) {
  const BlockView* best = nullptr;
  for (const auto& b : obs.blocks)
    if (!best || b.distance_to_goal < best->distance_to_goal ||
        (b.distance_to_goal == best->distance_to_goal && b.id < best->id))
      best = &b;
  if (!best) return std::nullopt;
  return best->id;
}

std::optional<BlockId> lightest_task(const SymbolicObservation& obs) {
  const BlockView* best = nullptr;
  for (const auto& b : obs.blocks)
    if (!best || b.weight < best->weight || (b.weight == best->weight && b.id < best->id)) best = &b;
  if (!best) return std::nullopt;
  return best->id;
}

std::vector<ProtocolViolation> proposal_round(NegotiationBuffer& buffer, const PolicyMap& policies,
                                              std::vector<AgentId>& withdrawn) {
  std::vector<ProtocolViolation> violations;
  const std::vector<AgentId> order = buffer.participants;
  for (AgentId a : order) {
    auto it = policies.find(a);
    std::optional<Proposal> p;
    if (it != policies.end() && it->second) p = it->second->propose(a, buffer.sym_obs, buffer);
    if (p && !is_active(buffer.sym_obs, p->task)) {
      auto fb = fallback_task(buffer.sym_obs);
      if (fb) {
        violations.push_back({a, EntryKind::Proposal, "proposed inactive task " + block_name(p->task), *fb});
        p->task = *fb;
      } else {
        p.reset();
      }
    }
    if (!p) {
      withdrawn.push_back(a);
      buffer.participants.erase(std::find(buffer.participants.begin(), buffer.participants.end(), a));
      continue;
    }
    buffer.append(BufferEntry{a, EntryKind::Proposal, p->task, std::move(p->rationale), buffer.elapsed()});
  }
  return violations;
}

TaskMapping commitment_round(NegotiationBuffer& buffer, const std::vector<TeamSizeStats>& team_stats,
                             const PolicyMap& policies, const std::map<BlockId, int>& executing,
                             std::vector<ProtocolViolation>& violations) {
  TaskMapping m;
  std::map<BlockId, std::vector<AgentId>> committed;
  for (AgentId a : buffer.participants) {
    auto it = policies.find(a);
    std::optional<BlockId> c;
    if (it != policies.end() && it->second) c = it->second->commit(a, buffer.sym_obs, buffer, team_stats);
    if (!c || !is_active(buffer.sym_obs, *c)) {
      auto fb = fallback_task(buffer.sym_obs);
      if (!fb) fb = proposal_of(buffer, a);
      violations.push_back({a, EntryKind::Commit,
                            c ? "committed to inactive task " + block_name(*c) : std::string("no commitment"), *fb});
      c = fb;
    }
    buffer.append(BufferEntry{a, EntryKind::Commit, *c, {}, buffer.elapsed()});
    committed[*c].push_back(a);
  }
  for (const auto& [task, agents] : committed) {
    const BlockView* b = buffer.sym_obs.find_block(task);
    int already = 0;
    if (auto e = executing.find(task); e != executing.end()) already = e->second;
    bool quorum = b && static_cast<int>(agents.size()) + already >= b->weight;
    for (AgentId a : agents) {
      if (quorum)
        m.assignments[a] = task;
      else
        m.unassigned.push_back(a);
    }
  }
  std::sort(m.unassigned.begin(), m.unassigned.end());
  m.finalized = true;
  return m;
}

void QuorumTracker::apply(TaskMapping& mapping, const SymbolicObservation& obs) {
  for (const auto& [a, task] : mapping.assignments) failures_.erase(a);
  std::vector<AgentId> still;
  for (AgentId a : mapping.unassigned) {
    int& n = failures_[a];
    ++n;
    auto lightest = lightest_task(obs);
    if (n >= kForcedAfterFailures && lightest) {
      mapping.forced[a] = *lightest;
      failures_.erase(a);
    } else {
      still.push_back(a);
    }
  }
  mapping.unassigned = std::move(still);
}

int QuorumTracker::failures(AgentId a) const {
  auto it = failures_.find(a);
  return it == failures_.end() ? 0 : it->second;
}

RoomOutcome run_room(std::vector<AgentId> idle, const GridState& state, const WorldModelGraph& world,
                     const PolicyMap& policies, const std::map<BlockId, int>& executing, QuorumTracker& tracker) {
  RoomOutcome out;
  out.buffer = open_room(std::move(idle), state.tick, world, state);
  std::vector<AgentId> withdrawn;
  out.violations = proposal_round(out.buffer, policies, withdrawn);
  auto proposed = out.buffer.proposed_tasks();
  out.team_stats = team_size_stats(world, {proposed.begin(), proposed.end()});
  out.mapping = commitment_round(out.buffer, out.team_stats, policies, executing, out.violations);
  out.mapping.withdrawn = std::move(withdrawn);
  tracker.apply(out.mapping, out.buffer.sym_obs);
  return out;
}

std::string render_guidebook(const NegotiationBuffer& buffer, const std::vector<TeamSizeStats>& team_stats) {
  std::ostringstream os;
  os << "CURRENT SESSION INFO:\n";
  os << "  Current timestep:" << buffer.tick << ", Number of agents:" << buffer.sym_obs.agents.size() << "\n";
  os << "\n";
  os << "HISTORICAL TASK PERFORMANCE\n";
  for (const auto& [task, s] : buffer.task_reports) {
    os << "  " << block_name(task) << ": avg_start=" << (s.mean_start ? format_number(*s.mean_start) : "UNKNOWN")
       << ", range=[";
    if (s.min_start)
      os << *s.min_start << "-" << *s.max_start;
    else
      os << "UNKNOWN";
    os << "], success_rate=" << (s.success_rate() ? format_percent(*s.success_rate()) : "UNKNOWN") << " (/"
       << s.attempts << ")\n";
  }
  os << "\n";
  os << "OPTIMAL TEAM SIZE RECOMMENDATIONS\n";
  for (const auto& t : team_stats) {
    os << "  " << block_name(t.task) << ": optimal team size = "
       << (t.best_size ? std::to_string(*t.best_size) : "UNKNOWN")
       << " (success_rate_best:" << (t.best_rate ? format_percent(*t.best_rate) : "UNKNOWN") << ")\n";
  }
  return os.str();
}

}  // namespace coop
