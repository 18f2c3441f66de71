#include "coop/types.hpp"

#include <charconv>

namespace coop {

std::string block_name(BlockId id) { return "block_" + std::to_string(to_int(id)); }

std::string agent_name(AgentId id) { return "agent_" + std::to_string(to_int(id)); }

std::optional<BlockId> parse_block_name(std::string_view text) {
  if (text.starts_with("block_")) text.remove_prefix(6);
  if (text.empty()) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value < 0) return std::nullopt;
  return BlockId{value};
}

std::string to_string(const Cell& c) {
  return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

char dir_letter(Dir d) {
  switch (d) {
    case Dir::N: return 'N';
    case Dir::S: return 'S';
    case Dir::E: return 'E';
    case Dir::W: return 'W';
  }
  return '?';
}

std::optional<Dir> parse_dir(std::string_view text) {
  if (text.size() != 1) return std::nullopt;
  switch (text[0]) {
    case 'N': return Dir::N;
    case 'S': return Dir::S;
    case 'E': return Dir::E;
    case 'W': return Dir::W;
    default: return std::nullopt;
  }
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::EpisodeOver: return "EPISODE_OVER";
    case ErrorCode::TraceIncomplete: return "TRACE_INCOMPLETE";
    case ErrorCode::OrderingViolation: return "ORDERING_VIOLATION";
    case ErrorCode::UnsupportedFormat: return "UNSUPPORTED_FORMAT";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::IoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace coop
