#include <algorithm>
#include <sstream>

#include "coop/policy.hpp"

namespace coop {

std::optional<BlockId> baseline_target(const SymbolicObservation& obs) { return fallback_task(obs); }

PlanInstance baseline_plan(AgentId self, const SymbolicObservation& obs, BlockId task) {
  PlanInstance p;
  p.committed_task = task;
  p.author = self;
  p.created_at = obs.tick;
  int distance = 1;
  if (const BlockView* b = obs.find_block(task)) distance = std::max(1, b->distance_to_goal);
  // the goal band is east, so pushers stand on the west face
  p.actions = {SymbolicAction::move_to_block(task, Dir::W), SymbolicAction::push(task, distance)};
  return p;
}

namespace {

class BaselinePolicy final : public AgentPolicy {
 public:
  bool negotiates() const override { return false; }

  std::optional<Proposal> propose(AgentId, const SymbolicObservation& obs, const NegotiationBuffer&) override {
    auto t = baseline_target(obs);
    if (!t) return std::nullopt;
    return Proposal{*t, "closest to goal"};
  }

  std::optional<BlockId> commit(AgentId, const SymbolicObservation& obs, const NegotiationBuffer&,
                                const std::vector<TeamSizeStats>&) override {
    return baseline_target(obs);
  }

  std::optional<PlanInstance> draft(AgentId self, const SymbolicObservation& obs, BlockId task) override {
    if (!obs.find_block(task)) return std::nullopt;
    return baseline_plan(self, obs, task);
  }

  PlanInstance refine(AgentId, const PlanInstance& draft, const RetrievalResult&,
                      const SymbolicObservation&) override {
    return draft;
  }
};

class ScriptedPolicy final : public AgentPolicy {
 public:
  ScriptedPolicy(std::vector<ScriptStep> steps, int default_timeout)
      : steps_(std::move(steps)), default_timeout_(default_timeout) {}

  std::optional<Proposal> propose(AgentId, const SymbolicObservation&, const NegotiationBuffer&) override {
    const ScriptStep* s = current();
    if (!s || !s->propose) return std::nullopt;
    return Proposal{*s->propose, s->rationale};
  }

  std::optional<BlockId> commit(AgentId, const SymbolicObservation&, const NegotiationBuffer&,
                                const std::vector<TeamSizeStats>&) override {
    const ScriptStep* s = current();
    if (!s) return std::nullopt;
    return s->commit ? s->commit : s->propose;
  }

  // A step is consumed when its plan is drafted, so a room that fails
  // quorum replays the same step.
  std::optional<PlanInstance> draft(AgentId self, const SymbolicObservation& obs, BlockId task) override {
    const ScriptStep* s = current();
    if (!s) return std::nullopt;
    ++cursor_;
    PlanInstance p;
    p.committed_task = task;
    p.author = self;
    p.created_at = obs.tick;
    for (const auto& line : s->plan)
      if (auto a = parse_action(line, default_timeout_)) p.actions.push_back(*a);
    if (p.actions.empty()) return baseline_plan(self, obs, task);
    return p;
  }

  PlanInstance refine(AgentId, const PlanInstance& draft, const RetrievalResult&,
                      const SymbolicObservation&) override {
    return draft;
  }

 private:
  const ScriptStep* current() const { return cursor_ < steps_.size() ? &steps_[cursor_] : nullptr; }

  std::vector<ScriptStep> steps_;
  std::size_t cursor_ = 0;
  int default_timeout_;
};

}  // namespace

std::unique_ptr<AgentPolicy> baseline_policy() { return std::make_unique<BaselinePolicy>(); }

std::unique_ptr<AgentPolicy> scripted_policy(std::vector<ScriptStep> steps, int default_timeout) {
  return std::make_unique<ScriptedPolicy>(std::move(steps), default_timeout);
}

std::string render_observation(const SymbolicObservation& obs, AgentId self) {
  std::ostringstream os;
  os << "timestep: " << obs.tick << "\n";
  os << "grid: " << obs.width << "x" << obs.height << ", goal band: easternmost " << obs.goal_band_width
     << " columns\n";
  for (const auto& a : obs.agents)
    os << (a.id == self ? "you are " : "") << agent_name(a.id) << " at " << to_string(a.position) << "\n";
  os << "active blocks:\n";
  for (const auto& b : obs.blocks)
    os << "  " << block_name(b.id) << " weight=" << b.weight << " anchor=" << to_string(b.anchor)
       << " distance_to_goal=" << b.distance_to_goal << "\n";
  os << "done blocks:";
  for (BlockId b : obs.done) os << " " << block_name(b);
  os << "\n";
  return os.str();
}

std::string render_buffer(const NegotiationBuffer& buffer) {
  std::ostringstream os;
  for (const auto& e : buffer.entries()) {
    os << agent_name(e.agent) << (e.kind == EntryKind::Proposal ? " PROPOSE " : " COMMIT ") << block_name(e.task);
    if (!e.rationale.empty()) os << ": " << e.rationale;
    os << "\n";
  }
  return os.str();
}

}  // namespace coop
