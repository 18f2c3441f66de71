#include "coop/actions.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

namespace coop {

std::string_view action_name(ActionKind kind) {
  switch (kind) {
    case ActionKind::WaitAgents: return "WaitAgents";
    case ActionKind::Rendezvous: return "Rendezvous";
    case ActionKind::MoveToBlock: return "MoveToBlock";
    case ActionKind::Push: return "Push";
    case ActionKind::YieldFace: return "YieldFace";
    case ActionKind::Unknown: return "Unknown";
  }
  return "Unknown";
}

Side side_of(Dir d) {
  switch (d) {
    case Dir::N: return Side::N;
    case Dir::S: return Side::S;
    case Dir::E: return Side::E;
    case Dir::W: return Side::W;
  }
  return Side::Invalid;
}

std::optional<Dir> dir_of(Side s) {
  switch (s) {
    case Side::N: return Dir::N;
    case Side::S: return Dir::S;
    case Side::E: return Dir::E;
    case Side::W: return Dir::W;
    case Side::Invalid: return std::nullopt;
  }
  return std::nullopt;
}

SymbolicAction SymbolicAction::wait_agents(int count, int timeout) {
  SymbolicAction a;
  a.kind = ActionKind::WaitAgents;
  a.count = count;
  a.timeout = timeout;
  return a;
}

SymbolicAction SymbolicAction::rendezvous(BlockId b, Dir side, int count, int timeout) {
  SymbolicAction a;
  a.kind = ActionKind::Rendezvous;
  a.block = b;
  a.side = side_of(side);
  a.count = count;
  a.timeout = timeout;
  return a;
}

SymbolicAction SymbolicAction::move_to_block(BlockId b, Dir side) {
  SymbolicAction a;
  a.kind = ActionKind::MoveToBlock;
  a.block = b;
  a.side = side_of(side);
  return a;
}

SymbolicAction SymbolicAction::push(BlockId b, int steps) {
  SymbolicAction a;
  a.kind = ActionKind::Push;
  a.block = b;
  a.steps = steps;
  return a;
}

SymbolicAction SymbolicAction::yield_face(BlockId b, int steps) {
  SymbolicAction a;
  a.kind = ActionKind::YieldFace;
  a.block = b;
  a.steps = steps;
  return a;
}

namespace {

std::string side_text(Side s) {
  if (auto d = dir_of(s)) return std::string(1, dir_letter(*d));
  return "?";
}

std::string block_text(const SymbolicAction& a) { return a.block ? block_name(*a.block) : "?"; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<int> parse_int(std::string_view s) {
  s = trim(s);
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_ident(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

struct Args {
  std::vector<std::string_view> positional;
  std::map<std::string, std::string_view, std::less<>> named;
};

std::optional<Args> split_args(std::string_view body) {
  Args args;
  if (trim(body).empty()) return args;
  std::size_t start = 0;
  while (start <= body.size()) {
    std::size_t comma = body.find(',', start);
    if (comma == std::string_view::npos) comma = body.size();
    std::string_view item = trim(body.substr(start, comma - start));
    if (item.empty()) return std::nullopt;
    if (auto eq = item.find('='); eq != std::string_view::npos) {
      std::string key(trim(item.substr(0, eq)));
      std::string_view value = trim(item.substr(eq + 1));
      if (!is_ident(key) || value.empty() || !args.named.emplace(key, value).second) return std::nullopt;
    } else {
      if (!args.named.empty()) return std::nullopt;  // positional after keyword
      args.positional.push_back(item);
    }
    start = comma + 1;
  }
  return args;
}

// Looks up parameter `index`/`name`; keyword wins, positional is fallback.
std::optional<std::string_view> arg(const Args& a, std::size_t index, std::string_view name) {
  if (auto it = a.named.find(name); it != a.named.end()) return it->second;
  if (index < a.positional.size()) return a.positional[index];
  return std::nullopt;
}

Side parse_side(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
  if (auto d = parse_dir(s)) return side_of(*d);
  return Side::Invalid;
}

}  // namespace

std::string format_action(const SymbolicAction& a) {
  std::ostringstream os;
  switch (a.kind) {
    case ActionKind::WaitAgents:
      os << "WaitAgents(count=" << a.count << ", timeout=" << a.timeout << ")";
      break;
    case ActionKind::Rendezvous:
      os << "Rendezvous(" << block_text(a) << ", " << side_text(a.side) << ", count=" << a.count
         << ", timeout=" << a.timeout << ")";
      break;
    case ActionKind::MoveToBlock:
      os << "MoveToBlock(" << block_text(a) << ", " << side_text(a.side) << ")";
      break;
    case ActionKind::Push:
      os << "Push(" << block_text(a) << ", steps=" << a.steps << ")";
      break;
    case ActionKind::YieldFace:
      os << "YieldFace(" << block_text(a) << ", steps=" << a.steps << ")";
      break;
    case ActionKind::Unknown:
      os << (a.raw_name.empty() ? "Unknown" : a.raw_name) << "()";
      break;
  }
  return os.str();
}

std::string format_plan_chain(const std::vector<SymbolicAction>& actions) {
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += " → ";
    out += format_action(actions[i]);
  }
  return out;
}

std::string format_plan_lines(const std::vector<SymbolicAction>& actions) {
  std::string out;
  for (const auto& a : actions) out += format_action(a) + "\n";
  return out;
}

std::optional<SymbolicAction> parse_action(std::string_view text, int default_timeout) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') return std::nullopt;
  const std::string_view name = trim(text.substr(0, open));
  if (!is_ident(name)) return std::nullopt;
  const std::string_view body = text.substr(open + 1, text.size() - open - 2);
  if (body.find_first_of("()") != std::string_view::npos) return std::nullopt;
  auto args = split_args(body);
  if (!args) return std::nullopt;

  auto block_arg = [&](std::size_t idx) -> std::optional<BlockId> {
    auto v = arg(*args, idx, "block");
    return v ? parse_block_name(trim(*v)) : std::nullopt;
  };
  auto int_arg = [&](std::size_t idx, std::string_view key) -> std::optional<int> {
    auto v = arg(*args, idx, key);
    return v ? parse_int(*v) : std::nullopt;
  };

  SymbolicAction a;
  if (name == "WaitAgents") {
    auto count = int_arg(0, "count");
    if (!count) return std::nullopt;
    auto timeout = arg(*args, 1, "timeout") ? int_arg(1, "timeout") : std::optional<int>(default_timeout);
    if (!timeout) return std::nullopt;
    a = SymbolicAction::wait_agents(*count, *timeout);
  } else if (name == "Rendezvous") {
    auto b = block_arg(0);
    auto side = arg(*args, 1, "side");
    auto count = int_arg(2, "count");
    if (!b || !side || !count) return std::nullopt;
    auto timeout = arg(*args, 3, "timeout") ? int_arg(3, "timeout") : std::optional<int>(default_timeout);
    if (!timeout) return std::nullopt;
    a.kind = ActionKind::Rendezvous;
    a.block = b;
    a.side = parse_side(*side);
    a.count = *count;
    a.timeout = *timeout;
  } else if (name == "MoveToBlock") {
    auto b = block_arg(0);
    auto side = arg(*args, 1, "side");
    if (!b || !side) return std::nullopt;
    a.kind = ActionKind::MoveToBlock;
    a.block = b;
    a.side = parse_side(*side);
  } else if (name == "Push" || name == "YieldFace") {
    auto b = block_arg(0);
    auto steps = int_arg(1, "steps");
    if (!b || !steps) return std::nullopt;
    a = name == "Push" ? SymbolicAction::push(*b, *steps) : SymbolicAction::yield_face(*b, *steps);
  } else {
    a.kind = ActionKind::Unknown;
    a.raw_name = std::string(name);
  }
  return a;
}

std::vector<SymbolicAction> parse_plan_text(std::string_view text, int default_timeout) {
  std::vector<SymbolicAction> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(text.substr(start, nl - start));
    start = nl + 1;
    if (!line.empty() && (line[0] == '-' || line[0] == '*')) line = trim(line.substr(1));
    std::size_t digits = 0;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
    if (digits > 0 && digits < line.size() && (line[digits] == '.' || line[digits] == ')'))
      line = trim(line.substr(digits + 1));
    if (auto a = parse_action(line, default_timeout)) out.push_back(std::move(*a));
  }
  return out;
}

}  // namespace coop
