#include "coop/env.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace coop {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

// Dense occupancy grid: -1 free, otherwise an index into the owning vector.
class Occupancy {
 public:
  Occupancy(int height, int width) : width_(width), cells_(static_cast<std::size_t>(height * width), -1) {}

  int& operator[](Cell c) { return cells_[static_cast<std::size_t>(c.row * width_ + c.col)]; }
  int operator[](Cell c) const { return cells_[static_cast<std::size_t>(c.row * width_ + c.col)]; }

 private:
  int width_;
  std::vector<int> cells_;
};

template <typename F>
void for_each_cell(Cell anchor, int weight, F&& f) {
  for (int r = 0; r < weight; ++r)
    for (int c = 0; c < weight; ++c) f(Cell{anchor.row + r, anchor.col + c});
}

}  // namespace

void validate_config(const EnvConfig& cfg) {
  if (cfg.width < 4 || cfg.height < 4) invalid("grid must be at least 4x4");
  if (cfg.max_steps < 1) invalid("max_steps must be positive");
  if (cfg.goal_band_width < 1 || cfg.goal_band_width > cfg.width) invalid("goal_band_width out of range");
  if (cfg.agent_starts.empty()) invalid("at least one agent is required");

  std::set<BlockId> ids;
  std::set<Cell> used;
  const int goal_col = cfg.width - cfg.goal_band_width;
  for (const auto& b : cfg.blocks) {
    const std::string name = block_name(b.id);
    if (to_int(b.id) < 0) invalid(name + ": negative id");
    if (!ids.insert(b.id).second) invalid(name + ": duplicate block id");
    if (b.weight < 1) invalid(name + ": weight must be >= 1");
    if (b.weight > cfg.goal_band_width) invalid(name + ": goal_band_width smaller than block weight");
    if (b.anchor.row < 0 || b.anchor.col < 0 || b.anchor.row + b.weight > cfg.height ||
        b.anchor.col + b.weight > cfg.width)
      invalid(name + ": footprint out of bounds");
    if (b.anchor.col >= goal_col) invalid(name + ": starts inside the goal zone");
    bool overlap = false;
    for_each_cell(b.anchor, b.weight, [&](Cell c) { overlap |= !used.insert(c).second; });
    if (overlap) invalid(name + ": footprint overlaps another block");
  }
  for (std::size_t i = 0; i < cfg.agent_starts.size(); ++i) {
    const Cell c = cfg.agent_starts[i];
    const std::string name = "agent_" + std::to_string(i);
    if (c.row < 0 || c.col < 0 || c.row >= cfg.height || c.col >= cfg.width) invalid(name + ": out of bounds");
    if (!used.insert(c).second) invalid(name + ": start cell overlaps a block or another agent");
  }
}

std::vector<Cell> face_cells(const Block& b, Dir face) {
  std::vector<Cell> out;
  out.reserve(static_cast<std::size_t>(b.weight));
  for (int i = 0; i < b.weight; ++i) {
    switch (face) {
      case Dir::N: out.push_back({b.anchor.row - 1, b.anchor.col + i}); break;
      case Dir::S: out.push_back({b.anchor.row + b.weight, b.anchor.col + i}); break;
      case Dir::E: out.push_back({b.anchor.row + i, b.anchor.col + b.weight}); break;
      case Dir::W: out.push_back({b.anchor.row + i, b.anchor.col - 1}); break;
    }
  }
  return out;
}

std::optional<Dir> aligned_face(const Block& b, Cell c) {
  const bool row_span = c.row >= b.anchor.row && c.row < b.anchor.row + b.weight;
  const bool col_span = c.col >= b.anchor.col && c.col < b.anchor.col + b.weight;
  if (row_span && c.col == b.anchor.col - 1) return Dir::W;
  if (row_span && c.col == b.anchor.col + b.weight) return Dir::E;
  if (col_span && c.row == b.anchor.row - 1) return Dir::N;
  if (col_span && c.row == b.anchor.row + b.weight) return Dir::S;
  return std::nullopt;
}

std::string_view to_string(AgentPhase phase) {
  switch (phase) {
    case AgentPhase::Idle: return "IDLE";
    case AgentPhase::Negotiating: return "NEGOTIATING";
    case AgentPhase::Executing: return "EXECUTING";
    case AgentPhase::Waiting: return "WAITING";
    case AgentPhase::Suspended: return "SUSPENDED";
  }
  return "?";
}

PrimitiveAction PrimitiveAction::move(Dir d) {
  switch (d) {
    case Dir::N: return {PrimitiveKind::MoveN};
    case Dir::S: return {PrimitiveKind::MoveS};
    case Dir::E: return {PrimitiveKind::MoveE};
    case Dir::W: return {PrimitiveKind::MoveW};
  }
  return {};
}

Dir PrimitiveAction::move_dir() const {
  switch (kind) {
    case PrimitiveKind::MoveN: return Dir::N;
    case PrimitiveKind::MoveS: return Dir::S;
    case PrimitiveKind::MoveE: return Dir::E;
    default: return Dir::W;
  }
}

std::string to_string(const PrimitiveAction& a) {
  switch (a.kind) {
    case PrimitiveKind::Noop: return "NOOP";
    case PrimitiveKind::MoveN: return "MOVE_N";
    case PrimitiveKind::MoveS: return "MOVE_S";
    case PrimitiveKind::MoveE: return "MOVE_E";
    case PrimitiveKind::MoveW: return "MOVE_W";
    case PrimitiveKind::Push:
      return "PUSH(" + block_name(a.block) + "," + std::string(1, dir_letter(a.face)) + ")";
  }
  return "?";
}

const AgentBody* GridState::agent(AgentId id) const {
  auto it = std::find_if(agents.begin(), agents.end(), [&](const AgentBody& a) { return a.id == id; });
  return it == agents.end() ? nullptr : &*it;
}

AgentBody* GridState::agent(AgentId id) {
  auto it = std::find_if(agents.begin(), agents.end(), [&](const AgentBody& a) { return a.id == id; });
  return it == agents.end() ? nullptr : &*it;
}

const Block* GridState::block(BlockId id) const {
  auto it = std::find_if(blocks.begin(), blocks.end(), [&](const Block& b) { return b.id == id; });
  return it == blocks.end() ? nullptr : &*it;
}

const Block* GridState::block_at(Cell c) const {
  for (const auto& b : blocks)
    if (b.active() && b.covers(c)) return &b;
  return nullptr;
}

const AgentBody* GridState::agent_at(Cell c) const {
  for (const auto& a : agents)
    if (a.position == c) return &a;
  return nullptr;
}

bool StepReport::achieved(AgentId id) const {
  for (const auto& e : agents)
    if (e.agent == id) return e.achieved;
  return false;
}

const BlockEffect* StepReport::block(BlockId id) const {
  for (const auto& e : blocks)
    if (e.block == id) return &e;
  return nullptr;
}

GridState init_env(const EnvConfig& config) {
  validate_config(config);
  GridState s;
  s.config = config;
  for (std::size_t i = 0; i < config.agent_starts.size(); ++i)
    s.agents.push_back({AgentId{static_cast<int>(i)}, config.agent_starts[i], AgentPhase::Idle});
  for (const auto& spec : config.blocks) s.blocks.push_back({spec.id, spec.weight, spec.anchor, BlockStatus::Active});
  std::sort(s.blocks.begin(), s.blocks.end(), [](const Block& a, const Block& b) { return a.id < b.id; });
  return s;
}

StepResult env_step(const GridState& in, const JointAction& joint) {
  if (in.tick >= in.config.max_steps)
    throw Error(ErrorCode::EpisodeOver, "tick " + std::to_string(in.tick) + " reached max_steps");

  StepResult out{in, {}};
  GridState& s = out.state;
  const int n_agents = static_cast<int>(s.agents.size());

  std::vector<PrimitiveAction> intent(s.agents.size());
  for (int i = 0; i < n_agents; ++i) {
    const auto& a = s.agents[static_cast<std::size_t>(i)];
    if (a.phase == AgentPhase::Suspended) continue;
    if (auto it = joint.find(a.id); it != joint.end()) intent[static_cast<std::size_t>(i)] = it->second;
  }

  Occupancy agent_grid(s.config.height, s.config.width);
  Occupancy block_grid(s.config.height, s.config.width);
  for (int i = 0; i < n_agents; ++i) agent_grid[s.agents[static_cast<std::size_t>(i)].position] = i;
  for (std::size_t bi = 0; bi < s.blocks.size(); ++bi)
    if (s.blocks[bi].active())
      for_each_cell(s.blocks[bi].anchor, s.blocks[bi].weight,
                    [&](Cell c) { block_grid[c] = static_cast<int>(bi); });

  std::vector<char> achieved(s.agents.size(), 0);

  // Moves, ascending agent id. A cell vacated earlier in this pass is free.
  for (int i = 0; i < n_agents; ++i) {
    auto& agent = s.agents[static_cast<std::size_t>(i)];
    const auto& act = intent[static_cast<std::size_t>(i)];
    if (act.kind == PrimitiveKind::Noop) {
      achieved[static_cast<std::size_t>(i)] = 1;
      continue;
    }
    if (!act.is_move()) continue;
    const Cell dest = step(agent.position, act.move_dir());
    if (!s.in_bounds(dest) || block_grid[dest] >= 0 || agent_grid[dest] >= 0) continue;
    agent_grid[agent.position] = -1;
    agent_grid[dest] = i;
    agent.position = dest;
    achieved[static_cast<std::size_t>(i)] = 1;
  }

  // Pushes, ascending block id.
  for (std::size_t bi = 0; bi < s.blocks.size(); ++bi) {
    Block& block = s.blocks[bi];
    if (!block.active()) continue;
    BlockEffect effect{block.id, false, false};

    std::vector<int> pushers[4];
    for (int i = 0; i < n_agents; ++i) {
      const auto& act = intent[static_cast<std::size_t>(i)];
      if (act.kind != PrimitiveKind::Push || act.block != block.id) continue;
      if (aligned_face(block, s.agents[static_cast<std::size_t>(i)].position) == act.face)
        pushers[static_cast<int>(act.face)].push_back(i);
    }
    int best = -1;
    bool tie = false;
    for (int f = 0; f < 4; ++f) {
      if (pushers[f].empty()) continue;
      if (best < 0 || pushers[f].size() > pushers[best].size()) {
        best = f;
        tie = false;
      } else if (pushers[f].size() == pushers[best].size()) {
        tie = true;
      }
    }

    if (best >= 0 && !tie && static_cast<int>(pushers[best].size()) >= block.weight) {
      const Dir dir = opposite(static_cast<Dir>(best));
      const Cell dest_anchor = step(block.anchor, dir);
      bool free = s.in_bounds(dest_anchor) &&
                  s.in_bounds(Cell{dest_anchor.row + block.weight - 1, dest_anchor.col + block.weight - 1});
      if (free) {
        for_each_cell(dest_anchor, block.weight, [&](Cell c) {
          if (agent_grid[c] >= 0) free = false;
          const int owner = block_grid[c];
          if (owner >= 0 && owner != static_cast<int>(bi)) free = false;
        });
      }
      if (free) {
        for_each_cell(block.anchor, block.weight, [&](Cell c) { block_grid[c] = -1; });
        block.anchor = dest_anchor;
        for_each_cell(block.anchor, block.weight, [&](Cell c) { block_grid[c] = static_cast<int>(bi); });
        for (int i : pushers[best]) {
          auto& agent = s.agents[static_cast<std::size_t>(i)];
          agent_grid[agent.position] = -1;
          agent.position = step(agent.position, dir);
          agent_grid[agent.position] = i;
          achieved[static_cast<std::size_t>(i)] = 1;
        }
        effect.moved = true;
        if (s.in_goal(block)) {
          block.status = BlockStatus::Done;
          for_each_cell(block.anchor, block.weight, [&](Cell c) { block_grid[c] = -1; });
          effect.done = true;
        }
      }
    }
    out.report.blocks.push_back(effect);
  }

  for (int i = 0; i < n_agents; ++i)
    out.report.agents.push_back({s.agents[static_cast<std::size_t>(i)].id, achieved[static_cast<std::size_t>(i)] != 0});
  ++s.tick;
  return out;
}

ObservationTensor observe_tensor(const GridState& s) {
  ObservationTensor t;
  t.height = s.config.height;
  t.width = s.config.width;
  for (auto& ch : t.channels) ch.assign(static_cast<std::size_t>(t.height * t.width), 0);
  auto idx = [&](Cell c) { return static_cast<std::size_t>(c.row * t.width + c.col); };
  for (const auto& a : s.agents) t.channels[0][idx(a.position)] = 1;
  for (const auto& b : s.blocks) {
    if (!b.active()) continue;
    for_each_cell(b.anchor, b.weight, [&](Cell c) {
      t.channels[1][idx(c)] = 1;
      t.channels[2][idx(c)] = b.weight;
    });
  }
  return t;
}

int distance_to_goal(const GridState& s, const Block& b) {
  return std::max(0, s.goal_start_col() - b.east_col());
}

const BlockView* SymbolicObservation::find_block(BlockId id) const {
  for (const auto& b : blocks)
    if (b.id == id) return &b;
  return nullptr;
}

SymbolicObservation observe_symbolic(const GridState& s) {
  SymbolicObservation o;
  o.tick = s.tick;
  o.width = s.config.width;
  o.height = s.config.height;
  o.goal_band_width = s.config.goal_band_width;
  for (const auto& a : s.agents) o.agents.push_back({a.id, a.position});
  for (const auto& b : s.blocks) {
    if (b.active())
      o.blocks.push_back({b.id, b.weight, b.anchor, distance_to_goal(s, b)});
    else
      o.done.push_back(b.id);
  }
  o.terminal = is_terminal(s).terminal;
  return o;
}

std::string_view to_string(TerminalReason r) {
  switch (r) {
    case TerminalReason::None: return "NONE";
    case TerminalReason::AllDone: return "ALL_DONE";
    case TerminalReason::Timeout: return "TIMEOUT";
  }
  return "?";
}

Terminal is_terminal(const GridState& s) {
  const bool any_active = std::any_of(s.blocks.begin(), s.blocks.end(), [](const Block& b) { return b.active(); });
  if (!any_active) return {true, TerminalReason::AllDone};
  if (s.tick >= s.config.max_steps) return {true, TerminalReason::Timeout};
  return {};
}

}  // namespace coop
