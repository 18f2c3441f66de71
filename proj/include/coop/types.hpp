#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coop {

enum class AgentId : std::int32_t {};
enum class BlockId : std::int32_t {};

constexpr std::int32_t to_int(AgentId id) { return static_cast<std::int32_t>(id); }
constexpr std::int32_t to_int(BlockId id) { return static_cast<std::int32_t>(id); }

/// Textual task identifier used in plans, prompts and trace payloads: `block_<n>`.
std::string block_name(BlockId id);
std::string agent_name(AgentId id);

/// Accepts `block_<n>` or a bare integer.
std::optional<BlockId> parse_block_name(std::string_view text);

/// Grid cell. Rows grow southward, columns grow eastward.
struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

std::string to_string(const Cell& c);

/// Compass direction; also used for the four faces of a block.
enum class Dir : std::uint8_t { N, S, E, W };

inline constexpr Dir kAllDirs[] = {Dir::N, Dir::S, Dir::E, Dir::W};

constexpr Cell step(Cell c, Dir d) {
  switch (d) {
    case Dir::N: return {c.row - 1, c.col};
    case Dir::S: return {c.row + 1, c.col};
    case Dir::E: return {c.row, c.col + 1};
    case Dir::W: return {c.row, c.col - 1};
  }
  return c;
}

constexpr Dir opposite(Dir d) {
  switch (d) {
    case Dir::N: return Dir::S;
    case Dir::S: return Dir::N;
    case Dir::E: return Dir::W;
    case Dir::W: return Dir::E;
  }
  return d;
}

char dir_letter(Dir d);
std::optional<Dir> parse_dir(std::string_view text);

enum class ErrorCode {
  ConfigInvalid,
  EpisodeOver,
  TraceIncomplete,
  OrderingViolation,
  UnsupportedFormat,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace coop

template <>
struct std::hash<coop::Cell> {
  std::size_t operator()(const coop::Cell& c) const noexcept {
    return std::hash<long long>{}((static_cast<long long>(c.row) << 32) ^ static_cast<unsigned>(c.col));
  }
};
