#pragma once

// Symbolic macro-actions and their canonical text form, e.g.
//
//   MoveToBlock(block_1, N)
//   Rendezvous(block_1, N, count=2, timeout=10)
//   Push(block_1, steps=5)
//   YieldFace(block_1, steps=2)
//   WaitAgents(count=2, timeout=10)
//
// The same grammar is the plan wire format for agents and the trace log.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coop/types.hpp"

namespace coop {

enum class ActionKind : std::uint8_t { WaitAgents, Rendezvous, MoveToBlock, Push, YieldFace, Unknown };

std::string_view action_name(ActionKind kind);

/// Side of a block named by an action. `Invalid` keeps a malformed side
/// around so validation can report it.
enum class Side : std::uint8_t { N, S, E, W, Invalid };

Side side_of(Dir d);
std::optional<Dir> dir_of(Side s);

inline constexpr int kDefaultTimeout = 10;

struct SymbolicAction {
  ActionKind kind = ActionKind::Unknown;
  std::optional<BlockId> block;  // absent for WaitAgents
  Side side = Side::Invalid;     // Rendezvous, MoveToBlock
  int count = 0;                 // Rendezvous, WaitAgents
  int timeout = 0;               // Rendezvous, WaitAgents
  int steps = 0;                 // Push, YieldFace
  std::string raw_name;          // original name for Unknown actions

  static SymbolicAction wait_agents(int count, int timeout = kDefaultTimeout);
  static SymbolicAction rendezvous(BlockId b, Dir side, int count, int timeout = kDefaultTimeout);
  static SymbolicAction move_to_block(BlockId b, Dir side);
  static SymbolicAction push(BlockId b, int steps);
  static SymbolicAction yield_face(BlockId b, int steps);

  bool operator==(const SymbolicAction&) const = default;
};

struct PlanInstance {
  std::vector<SymbolicAction> actions;
  BlockId committed_task{};
  AgentId author{};
  int created_at = 0;

  bool operator==(const PlanInstance&) const = default;
};

std::string format_action(const SymbolicAction& a);

/// `A → B → C` over the canonical action texts.
std::string format_plan_chain(const std::vector<SymbolicAction>& actions);

/// One canonical line per action.
std::string format_plan_lines(const std::vector<SymbolicAction>& actions);

/// Parses one action in the canonical grammar. Keyword names are optional
/// (`Push(block_1, 5)` is accepted); a missing timeout takes
/// `default_timeout`. Unrecognized action names parse to ActionKind::Unknown
/// and unrecognized sides to Side::Invalid; text that does not have the
/// shape `Name(args)` returns nullopt.
std::optional<SymbolicAction> parse_action(std::string_view text, int default_timeout = kDefaultTimeout);

/// Parses a multi-line reply. Leading list markers (`-`, `*`, `1.`, `2)`)
/// are stripped; lines that do not parse are dropped.
std::vector<SymbolicAction> parse_plan_text(std::string_view text, int default_timeout = kDefaultTimeout);

}  // namespace coop
