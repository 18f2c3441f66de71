#pragma once

// Cooperative block-pushing grid world.
//
// Blocks are w x w squares of weight w. A block advances one cell when at
// least w agents push it from the same face in the same tick. The goal zone
// is the band of easternmost columns; a block whose whole footprint is inside
// it is delivered (DONE) and leaves the grid.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coop/types.hpp"

namespace coop {

struct BlockSpec {
  BlockId id{};
  int weight = 1;
  Cell anchor;  // northwest corner

  bool operator==(const BlockSpec&) const = default;
};

struct EnvConfig {
  int width = 10;
  int height = 10;
  int goal_band_width = 2;
  std::vector<BlockSpec> blocks;
  std::vector<Cell> agent_starts;  // agent i starts at agent_starts[i]
  int max_steps = 150;
  std::uint64_t seed = 0;

  bool operator==(const EnvConfig&) const = default;
};

/// Throws Error(ConfigInvalid) describing the first violated invariant.
void validate_config(const EnvConfig& config);

enum class BlockStatus : std::uint8_t { Active, Done };

struct Block {
  BlockId id{};
  int weight = 1;
  Cell anchor;
  BlockStatus status = BlockStatus::Active;

  bool active() const { return status == BlockStatus::Active; }
  bool covers(Cell c) const {
    return c.row >= anchor.row && c.row < anchor.row + weight && c.col >= anchor.col &&
           c.col < anchor.col + weight;
  }
  int east_col() const { return anchor.col + weight - 1; }

  bool operator==(const Block&) const = default;
};

/// Cells orthogonally adjacent to face `face` of the block, within the face's span.
std::vector<Cell> face_cells(const Block& b, Dir face);

/// Face of `b` that `c` is aligned to, if any.
std::optional<Dir> aligned_face(const Block& b, Cell c);

enum class AgentPhase : std::uint8_t { Idle, Negotiating, Executing, Waiting, Suspended };

std::string_view to_string(AgentPhase phase);

struct AgentBody {
  AgentId id{};
  Cell position;
  AgentPhase phase = AgentPhase::Idle;

  bool operator==(const AgentBody&) const = default;
};

enum class PrimitiveKind : std::uint8_t { Noop, MoveN, MoveS, MoveE, MoveW, Push };

struct PrimitiveAction {
  PrimitiveKind kind = PrimitiveKind::Noop;
  BlockId block{};  // Push only
  Dir face = Dir::W;  // Push only: the face pushed from

  static PrimitiveAction noop() { return {}; }
  static PrimitiveAction move(Dir d);
  static PrimitiveAction push(BlockId b, Dir face) { return {PrimitiveKind::Push, b, face}; }

  bool is_move() const {
    return kind == PrimitiveKind::MoveN || kind == PrimitiveKind::MoveS || kind == PrimitiveKind::MoveE ||
           kind == PrimitiveKind::MoveW;
  }
  Dir move_dir() const;

  bool operator==(const PrimitiveAction&) const = default;
};

std::string to_string(const PrimitiveAction& a);

using JointAction = std::map<AgentId, PrimitiveAction>;

struct GridState {
  EnvConfig config;
  int tick = 0;
  std::vector<AgentBody> agents;  // ascending id
  std::vector<Block> blocks;      // ascending id

  const AgentBody* agent(AgentId id) const;
  AgentBody* agent(AgentId id);
  const Block* block(BlockId id) const;

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.col >= 0 && c.row < config.height && c.col < config.width;
  }
  int goal_start_col() const { return config.width - config.goal_band_width; }
  bool in_goal(const Block& b) const { return b.anchor.col >= goal_start_col(); }

  /// Active block whose footprint covers `c`.
  const Block* block_at(Cell c) const;
  const AgentBody* agent_at(Cell c) const;

  bool operator==(const GridState&) const = default;
};

struct AgentEffect {
  AgentId agent{};
  bool achieved = false;
};

struct BlockEffect {
  BlockId block{};
  bool moved = false;
  bool done = false;  // delivered on this tick
};

struct StepReport {
  std::vector<AgentEffect> agents;
  std::vector<BlockEffect> blocks;

  bool achieved(AgentId id) const;
  const BlockEffect* block(BlockId id) const;
};

struct StepResult {
  GridState state;
  StepReport report;
};

GridState init_env(const EnvConfig& config);

/// Agents without an entry in `joint` (and all SUSPENDED agents) NOOP.
/// Throws Error(EpisodeOver) when tick == max_steps.
StepResult env_step(const GridState& state, const JointAction& joint);

struct ObservationTensor {
  int height = 0;
  int width = 0;
  // channel 0: agents, 1: active block occupancy, 2: block weight; each row-major.
  std::vector<std::int32_t> channels[3];

  std::int32_t at(int channel, int row, int col) const { return channels[channel][row * width + col]; }
};

ObservationTensor observe_tensor(const GridState& state);

struct AgentView {
  AgentId id{};
  Cell position;
};

struct BlockView {
  BlockId id{};
  int weight = 1;
  Cell anchor;
  int distance_to_goal = 0;
};

struct SymbolicObservation {
  int tick = 0;
  int width = 0;
  int height = 0;
  int goal_band_width = 0;
  std::vector<AgentView> agents;
  std::vector<BlockView> blocks;  // active only
  std::vector<BlockId> done;
  bool terminal = false;

  const BlockView* find_block(BlockId id) const;
};

/// Pushes needed before the block's east edge enters the goal band.
int distance_to_goal(const GridState& state, const Block& b);

SymbolicObservation observe_symbolic(const GridState& state);

enum class TerminalReason : std::uint8_t { None, AllDone, Timeout };

std::string_view to_string(TerminalReason r);

struct Terminal {
  bool terminal = false;
  TerminalReason reason = TerminalReason::None;
};

Terminal is_terminal(const GridState& state);

}  // namespace coop
