#include "coop/analytics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace coop {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string short_action(const std::string& text) {
  auto p = text.find('(');
  return p == std::string::npos ? text : text.substr(0, p);
}

BlockId block_or_throw(const Json& j) {
  auto b = parse_block_name(j.get<std::string>());
  if (!b) throw Error(ErrorCode::ParseError, "bad block id " + j.dump());
  return *b;
}

struct Bar {
  int start = 0;
  int end = 0;
  std::string label;
  std::string title;
  bool success = false;
};

}  // namespace

bool EpisodeMetrics::completed(BlockId b) const {
  auto it = completion.find(b);
  return it != completion.end() && it->second.has_value();
}

int EpisodeMetrics::completed_count() const {
  int n = 0;
  for (const auto& [b, t] : completion)
    if (t) ++n;
  return n;
}

EpisodeMetrics compute_metrics(const EpisodeTrace& trace) {
  const TraceEvent& end = trace.end_event();
  EpisodeMetrics m;
  m.episode = end.payload.value("episode", 0);
  m.reason = end.payload.value("reason", "");
  m.env_steps = end.tick;
  m.wall_seconds = end.wall_clock;
  for (const auto& b : end.payload.value("blocks", Json::array())) {
    BlockId id = block_or_throw(b);
    m.blocks.push_back(id);
    m.completion[id] = std::nullopt;
  }
  for (const auto& e : trace.events) {
    switch (e.kind) {
      case EventKind::BlockDone: {
        BlockId id = block_or_throw(e.payload.at("block"));
        if (!m.completion[id]) m.completion[id] = e.tick;
        break;
      }
      case EventKind::Commit:
        m.commitments[e.agent].push_back(block_or_throw(e.payload.at("task")));
        break;
      case EventKind::CommOpen:
        ++m.rooms;
        break;
      default:
        break;
    }
  }
  for (const auto& p : extract_plans(trace)) m.team_sizes[p.task].push_back(p.team_size);
  return m;
}

Json metrics_to_json(const EpisodeMetrics& m) {
  Json j;
  j["episode"] = m.episode;
  j["reason"] = m.reason;
  j["env_steps"] = m.env_steps;
  j["wall_seconds"] = m.wall_seconds;
  j["rooms"] = m.rooms;
  j["blocks"] = Json::array();
  for (BlockId b : m.blocks) {
    auto it = m.completion.find(b);
    bool done = it != m.completion.end() && it->second;
    j["blocks"].push_back(
        Json{{"id", block_name(b)}, {"completed", done}, {"tick", done ? Json(*it->second) : Json(nullptr)}});
  }
  j["commitments"] = Json::object();
  for (const auto& [a, seq] : m.commitments) {
    Json arr = Json::array();
    for (BlockId b : seq) arr.push_back(block_name(b));
    j["commitments"][agent_name(a)] = arr;
  }
  j["team_sizes"] = Json::object();
  for (const auto& [b, sizes] : m.team_sizes) j["team_sizes"][block_name(b)] = sizes;
  return j;
}

EpisodeMetrics metrics_from_json(const Json& j) {
  EpisodeMetrics m;
  try {
    m.episode = j.at("episode").get<int>();
    m.reason = j.at("reason").get<std::string>();
    m.env_steps = j.at("env_steps").get<int>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    m.rooms = j.value("rooms", 0);
    for (const auto& b : j.at("blocks")) {
      BlockId id = block_or_throw(b.at("id"));
      m.blocks.push_back(id);
      m.completion[id] = b.at("tick").is_null() ? std::nullopt : std::optional<int>(b.at("tick").get<int>());
    }
    const Json commitments = j.value("commitments", Json::object());
    for (const auto& [name, seq] : commitments.items()) {
      AgentId a{std::stoi(name.substr(name.find('_') + 1))};
      for (const auto& b : seq) m.commitments[a].push_back(block_or_throw(b));
    }
    const Json team_sizes = j.value("team_sizes", Json::object());
    for (const auto& [name, sizes] : team_sizes.items())
      m.team_sizes[block_or_throw(Json(name))] = sizes.get<std::vector<int>>();
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("malformed metrics: ") + ex.what());
  } catch (const std::logic_error& ex) {
    throw Error(ErrorCode::ParseError, std::string("malformed metrics: ") + ex.what());
  }
  return m;
}

std::string render_timeline(const EpisodeTrace& trace, const TimelineStyle& style) {
  int last_tick = 0;
  std::set<AgentId> agents;
  std::vector<int> comm_ticks;
  std::map<AgentId, std::vector<Bar>> plans, actions;
  std::map<AgentId, Bar> open_plan, open_action;
  for (const auto& e : trace.events) {
    last_tick = std::max(last_tick, e.tick);
    if (to_int(e.agent) >= 0) agents.insert(e.agent);
    switch (e.kind) {
      case EventKind::CommOpen:
        comm_ticks.push_back(e.tick);
        break;
      case EventKind::PlanStart:
        open_plan[e.agent] = Bar{e.tick, e.tick, e.payload.value("task", ""), "", false};
        break;
      case EventKind::PlanEnd:
        if (auto it = open_plan.find(e.agent); it != open_plan.end()) {
          it->second.end = e.tick;
          it->second.success = e.payload.value("outcome", 0) == 1;
          plans[e.agent].push_back(it->second);
          open_plan.erase(it);
        }
        break;
      case EventKind::ActionStart: {
        std::string text = e.payload.value("action", "");
        open_action[e.agent] = Bar{e.tick, e.tick, short_action(text), text, false};
        break;
      }
      case EventKind::ActionEnd:
        if (auto it = open_action.find(e.agent); it != open_action.end()) {
          it->second.end = e.tick;
          it->second.success = e.payload.value("outcome", "") == "success";
          actions[e.agent].push_back(it->second);
          open_action.erase(it);
        }
        break;
      case EventKind::EpisodeEnd:
        for (int i = 0; i < e.payload.value("agents", 0); ++i) agents.insert(AgentId{i});
        break;
      default:
        break;
    }
  }

  const double scale = style.px_per_tick > 0 ? style.px_per_tick : (last_tick > 0 ? 900.0 / last_tick : 10.0);
  const double lh = style.lane_height;
  const double x0 = style.left_margin;
  const double top = 20.0;
  const bool has_lanes = !trace.events.empty();
  const int lane_count = has_lanes ? 1 + 2 * static_cast<int>(agents.size()) : 0;
  const double axis_y = top + lane_count * lh + 10.0;
  const double width = x0 + last_tick * scale + 40.0;
  const double height = axis_y + 30.0;
  auto x_of = [&](int tick) { return x0 + tick * scale; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
     << "\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"10\">\n";
  os << "<style>.plan-success{fill:#4caf50}.plan-fail{fill:#e53935}.action-success{fill:#90caf9}"
        ".action-fail{fill:#ffcc80}.comm-marker{fill:#5e35b1}.lane-label{fill:#333}</style>\n";

  int lane = 0;
  auto lane_open = [&](const std::string& id) {
    double y = top + lane * lh;
    os << "<g class=\"lane\" id=\"lane-" << id << "\">\n";
    os << "<text class=\"lane-label\" x=\"4\" y=\"" << num(y + lh * 0.65) << "\">" << xml_escape(id) << "</text>\n";
    os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y + lh) << "\" x2=\"" << num(width - 20) << "\" y2=\""
       << num(y + lh) << "\" stroke=\"#ddd\"/>\n";
    return y;
  };
  auto bar = [&](const Bar& b, const char* kind, double y) {
    const char* cls = b.success ? "success" : "fail";
    os << "<rect class=\"" << kind << "-bar " << kind << "-" << cls << "\" x=\"" << num(x_of(b.start)) << "\" y=\""
       << num(y + 3) << "\" width=\"" << num((b.end - b.start) * scale) << "\" height=\"" << num(lh - 6)
       << "\" data-start=\"" << b.start << "\" data-end=\"" << b.end << "\">";
    os << "<title>" << xml_escape(b.title.empty() ? b.label : b.title) << " [" << b.start << "-" << b.end
       << "]</title></rect>\n";
    os << "<text x=\"" << num(x_of(b.start) + 2) << "\" y=\"" << num(y + lh * 0.65) << "\">" << xml_escape(b.label)
       << "</text>\n";
  };

  if (has_lanes) {
    double y = lane_open("comm");
    for (int t : comm_ticks)
      os << "<rect class=\"comm-marker\" x=\"" << num(x_of(t) - 1.5) << "\" y=\"" << num(y + 2) << "\" width=\"3\" height=\""
         << num(lh - 4) << "\" data-tick=\"" << t << "\"/>\n";
    os << "</g>\n";
    ++lane;
    for (AgentId a : agents) {
      const std::string base = "agent-" + std::to_string(to_int(a));
      y = lane_open(base + "-plan");
      for (const auto& b : plans[a]) bar(b, "plan", y);
      os << "</g>\n";
      ++lane;
      y = lane_open(base + "-action");
      for (const auto& b : actions[a]) bar(b, "action", y);
      os << "</g>\n";
      ++lane;
    }
  }

  os << "<g class=\"axis\">\n";
  os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(axis_y) << "\" x2=\"" << num(x_of(last_tick)) << "\" y2=\""
     << num(axis_y) << "\" stroke=\"#000\"/>\n";
  const int step = last_tick <= 50 ? 5 : (last_tick <= 200 ? 10 : 50);
  for (int t = 0; t <= last_tick; t += step) {
    os << "<line x1=\"" << num(x_of(t)) << "\" y1=\"" << num(axis_y) << "\" x2=\"" << num(x_of(t)) << "\" y2=\""
       << num(axis_y + 4) << "\" stroke=\"#000\"/>\n";
    os << "<text x=\"" << num(x_of(t) - 3) << "\" y=\"" << num(axis_y + 15) << "\">" << t << "</text>\n";
  }
  os << "<text x=\"4\" y=\"" << num(axis_y + 15) << "\">env-step</text>\n";
  os << "</g>\n";
  os << "</svg>\n";
  return os.str();
}

ExperimentTables aggregate_runs(const std::vector<EpisodeMetrics>& metrics) {
  if (metrics.empty()) throw Error(ErrorCode::ConfigInvalid, "aggregate_runs needs at least one episode");
  std::set<BlockId> blocks;
  for (const auto& m : metrics) blocks.insert(m.blocks.begin(), m.blocks.end());

  ExperimentTables t;
  std::ostringstream c;
  c << "block";
  for (const auto& m : metrics) c << "\tep" << m.episode;
  c << "\n";
  for (BlockId b : blocks) {
    c << block_name(b);
    for (const auto& m : metrics) c << "\t" << (m.completed(b) ? 1 : 0);
    c << "\n";
  }
  t.completion = c.str();

  std::ostringstream s;
  s << "episode\tenv_steps\tseconds\tcompleted\treason\n";
  for (const auto& m : metrics)
    s << m.episode << "\t" << m.env_steps << "\t" << num(m.wall_seconds) << "\t" << m.completed_count() << "\t"
      << m.reason << "\n";
  t.series = s.str();

  std::ostringstream k;
  k << "episode\tagent\tcommitments\n";
  for (const auto& m : metrics) {
    for (const auto& [a, seq] : m.commitments) {
      k << m.episode << "\t" << agent_name(a) << "\t";
      for (std::size_t i = 0; i < seq.size(); ++i) k << (i ? "," : "") << block_name(seq[i]);
      k << "\n";
    }
  }
  t.commitments = k.str();
  return t;
}

}  // namespace coop
