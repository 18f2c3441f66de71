#include "coop/world_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace coop {

namespace {

std::string action_name_of(const std::string& text) {
  auto p = text.find('(');
  std::string name = p == std::string::npos ? text : text.substr(0, p);
  while (!name.empty() && name.back() == ' ') name.pop_back();
  return name;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Three-way compare of a/b against c/d for nonnegative b, d > 0.
int compare_ratio(long a, long b, long c, long d) {
  long long lhs = static_cast<long long>(a) * d;
  long long rhs = static_cast<long long>(c) * b;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

std::string_view outcome_name(EpisodeOutcome o) { return o == EpisodeOutcome::Complete ? "COMPLETE" : "INCOMPLETE"; }

Json tally_json(const OutcomeTally& t) {
  return Json{{"attempts", t.attempts},
              {"successes", t.successes},
              {"duration_sum", t.duration_sum},
              {"duration_count", t.duration_count},
              {"team_size_sum", t.team_size_sum}};
}

OutcomeTally tally_from(const Json& j) {
  OutcomeTally t;
  t.attempts = j.at("attempts").get<long>();
  t.successes = j.at("successes").get<long>();
  t.duration_sum = j.at("duration_sum").get<long>();
  t.duration_count = j.at("duration_count").get<long>();
  t.team_size_sum = j.at("team_size_sum").get<long>();
  return t;
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

constexpr const char* kGreen = "#4caf50";
constexpr const char* kRed = "#e53935";
constexpr const char* kOrange = "#fb8c00";
constexpr const char* kBlue = "#90caf9";

std::string to_dot(const WorldModelGraph& g) {
  std::ostringstream os;
  os << "digraph world_model {\n";
  os << "  rankdir=LR;\n";
  os << "  node [shape=box, style=filled, fontname=\"Helvetica\"];\n";
  auto layer = [&](const char* name, auto&& body) {
    os << "  subgraph cluster_" << name << " {\n    label=\"" << name << "\";\n    rank=same;\n";
    body();
    os << "  }\n";
  };
  layer("episodes", [&] {
    for (const auto& e : g.episodes()) {
      bool ok = e.outcome == EpisodeOutcome::Complete;
      os << "    \"" << e.id << "\" [label=\"Episode " << e.index << "\\n" << outcome_name(e.outcome) << "\\nticks "
         << e.start_tick << "-" << e.end_tick << "\", fillcolor=\"" << (ok ? kGreen : kOrange) << "\", class=\""
         << (ok ? "episode-complete" : "episode-incomplete") << "\"];\n";
    }
  });
  layer("tasks", [&] {
    for (const auto& t : g.tasks()) {
      os << "    \"" << t.id << "\" [label=\"" << block_name(t.task) << " (" << agent_name(t.agent) << ")\\nstart="
         << t.start << " duration=" << (t.duration ? std::to_string(*t.duration) : "UNKNOWN")
         << " team=" << t.team_size << "\", fillcolor=\"" << (t.success ? kGreen : kRed) << "\", class=\""
         << (t.success ? "task-success" : "task-fail") << "\"];\n";
    }
  });
  layer("prototypes", [&] {
    for (const auto& p : g.prototypes())
      os << "    \"" << dot_escape(p.id) << "\" [label=\"" << block_name(p.task) << "\\n"
         << dot_escape(format_prototype(p.prototype)) << "\", fillcolor=\"" << kBlue << "\", class=\"prototype\"];\n";
  });
  layer("instances", [&] {
    for (const auto& i : g.instances()) {
      bool ok = i.tally.successes > 0;
      os << "    \"" << dot_escape(i.id) << "\" [label=\"" << dot_escape(join(i.actions, "\\n"))
         << "\\nsuccess " << i.tally.successes << "/" << i.tally.attempts << "\", fillcolor=\"" << (ok ? kGreen : kRed)
         << "\", class=\"" << (ok ? "instance-success" : "instance-fail") << "\"];\n";
    }
  });
  for (const auto& e : g.edges())
    os << "  \"" << dot_escape(e.from) << "\" -> \"" << dot_escape(e.to) << "\";\n";
  os << "}\n";
  return os.str();
}

Json to_json(const WorldModelGraph& g) {
  Json j;
  j["episodes"] = Json::array();
  for (const auto& e : g.episodes())
    j["episodes"].push_back(Json{{"id", e.id},
                                 {"index", e.index},
                                 {"outcome", outcome_name(e.outcome)},
                                 {"start_tick", e.start_tick},
                                 {"end_tick", e.end_tick}});
  j["tasks"] = Json::array();
  for (const auto& t : g.tasks())
    j["tasks"].push_back(Json{{"id", t.id},
                              {"episode", t.episode},
                              {"task", block_name(t.task)},
                              {"agent", to_int(t.agent)},
                              {"success", t.success},
                              {"start", t.start},
                              {"duration", t.duration ? Json(*t.duration) : Json(nullptr)},
                              {"team_size", t.team_size},
                              {"prototype", t.prototype_id},
                              {"instance", t.instance_id}});
  j["prototypes"] = Json::array();
  for (const auto& p : g.prototypes())
    j["prototypes"].push_back(Json{{"id", p.id}, {"task", block_name(p.task)}, {"key", p.prototype.key}});
  j["instances"] = Json::array();
  for (const auto& i : g.instances())
    j["instances"].push_back(Json{{"id", i.id},
                                  {"prototype", i.prototype_id},
                                  {"task", block_name(i.task)},
                                  {"actions", i.actions},
                                  {"stats", tally_json(i.tally)}});
  j["edges"] = Json::array();
  for (const auto& e : g.edges()) j["edges"].push_back(Json::array({e.from, e.to}));
  return j;
}

BlockId block_from(const Json& j) {
  auto b = parse_block_name(j.get<std::string>());
  if (!b) throw Error(ErrorCode::ParseError, "bad task id " + j.dump());
  return *b;
}

}  // namespace

PlanPrototype canonical_prototype(const PlanInstance& plan) {
  PlanPrototype p;
  for (const auto& a : plan.actions)
    p.key.emplace_back(a.kind == ActionKind::Unknown ? a.raw_name : std::string(action_name(a.kind)));
  return p;
}

PlanPrototype prototype_from_texts(const std::vector<std::string>& actions) {
  PlanPrototype p;
  for (const auto& a : actions) p.key.push_back(action_name_of(a));
  return p;
}

std::string format_prototype(const PlanPrototype& p) { return join(p.key, " → "); }

void OutcomeTally::add(bool success, std::optional<int> duration, int team_size) {
  ++attempts;
  if (success) ++successes;
  if (duration) {
    duration_sum += *duration;
    ++duration_count;
  }
  team_size_sum += team_size;
}

void OutcomeTally::add(const OutcomeTally& o) {
  attempts += o.attempts;
  successes += o.successes;
  duration_sum += o.duration_sum;
  duration_count += o.duration_count;
  team_size_sum += o.team_size_sum;
}

std::optional<double> OutcomeTally::success_rate() const {
  if (attempts == 0) return std::nullopt;
  return static_cast<double>(successes) / static_cast<double>(attempts);
}

std::optional<double> OutcomeTally::mean_duration() const {
  if (duration_count == 0) return std::nullopt;
  return static_cast<double>(duration_sum) / static_cast<double>(duration_count);
}

std::optional<double> OutcomeTally::mean_team_size() const {
  if (attempts == 0) return std::nullopt;
  return static_cast<double>(team_size_sum) / static_cast<double>(attempts);
}

const PrototypeNode* WorldModelGraph::find_prototype(const std::string& id) const {
  auto it = proto_index_.find(id);
  return it == proto_index_.end() ? nullptr : &prototypes_[it->second];
}

const InstanceNode* WorldModelGraph::find_instance(const std::string& id) const {
  auto it = inst_index_.find(id);
  return it == inst_index_.end() ? nullptr : &instances_[it->second];
}

std::set<std::string> WorldModelGraph::node_ids() const {
  std::set<std::string> ids;
  for (const auto& e : episodes_) ids.insert(e.id);
  for (const auto& t : tasks_) ids.insert(t.id);
  for (const auto& p : prototypes_) ids.insert(p.id);
  for (const auto& i : instances_) ids.insert(i.id);
  return ids;
}

void WorldModelGraph::merge(const GraphDelta& d) {
  episodes_.push_back(d.episode);
  for (const auto& t : d.tasks) tasks_.push_back(t);
  for (const auto& p : d.new_prototypes) {
    if (proto_index_.contains(p.id)) continue;
    proto_index_[p.id] = prototypes_.size();
    prototypes_.push_back(p);
  }
  for (const auto& i : d.new_instances) {
    if (inst_index_.contains(i.id)) continue;
    inst_index_[i.id] = instances_.size();
    instances_.push_back(i);
  }
  for (const auto& [id, inc] : d.instance_updates) {
    auto it = inst_index_.find(id);
    if (it == inst_index_.end()) throw Error(ErrorCode::ParseError, "update for unknown instance " + id);
    instances_[it->second].tally.add(inc);
  }
  for (const auto& e : d.edges)
    if (edge_set_.insert(e).second) edges_.push_back(e);
}

std::string prototype_node_id(BlockId task, const PlanPrototype& p) {
  return "proto:" + block_name(task) + ":" + join(p.key, ">");
}

std::string instance_node_id(BlockId task, const std::vector<std::string>& actions) {
  return "inst:" + block_name(task) + ":" + join(actions, "|");
}

GraphDelta compute_delta(const WorldModelGraph& graph, const EpisodeTrace& trace) {
  const TraceEvent& end = trace.end_event();
  auto plans = extract_plans(trace);

  GraphDelta d;
  const int index = static_cast<int>(graph.episodes().size()) + 1;
  d.episode.index = index;
  d.episode.id = "ep:" + std::to_string(index);
  d.episode.start_tick = trace.events.front().tick;
  d.episode.end_tick = end.tick;
  d.episode.outcome =
      end.payload.value("reason", "") == "ALL_DONE" ? EpisodeOutcome::Complete : EpisodeOutcome::Incomplete;

  std::set<std::string> seen_protos;
  std::map<std::string, std::size_t> update_pos;
  for (std::size_t n = 0; n < plans.size(); ++n) {
    const PlanRecord& r = plans[n];
    TaskNode t;
    t.id = "task:" + std::to_string(index) + ":" + std::to_string(n);
    t.episode = index;
    t.task = r.task;
    t.agent = r.agent;
    t.success = r.success;
    t.start = r.start;
    if (!r.truncated) t.duration = r.end - r.start;
    t.team_size = r.team_size;
    PlanPrototype proto = prototype_from_texts(r.actions);
    t.prototype_id = prototype_node_id(r.task, proto);
    t.instance_id = instance_node_id(r.task, r.actions);

    if (!graph.find_prototype(t.prototype_id) && seen_protos.insert(t.prototype_id).second)
      d.new_prototypes.push_back(PrototypeNode{t.prototype_id, r.task, proto});
    if (!graph.find_instance(t.instance_id) && !update_pos.contains(t.instance_id))
      d.new_instances.push_back(InstanceNode{t.instance_id, t.prototype_id, r.task, r.actions, {}});

    auto [it, fresh] = update_pos.try_emplace(t.instance_id, d.instance_updates.size());
    if (fresh) d.instance_updates.emplace_back(t.instance_id, OutcomeTally{});
    d.instance_updates[it->second].second.add(t.success, t.duration, t.team_size);

    d.edges.push_back(Edge{d.episode.id, t.id});
    d.edges.push_back(Edge{t.id, t.prototype_id});
    d.edges.push_back(Edge{t.prototype_id, t.instance_id});
    d.tasks.push_back(std::move(t));
  }
  return d;
}

GraphDelta ingest_episode(WorldModelGraph& graph, const EpisodeTrace& trace) {
  GraphDelta d = compute_delta(graph, trace);
  graph.merge(d);
  return d;
}

std::optional<double> TaskStats::success_rate() const {
  if (attempts == 0) return std::nullopt;
  return static_cast<double>(successes) / static_cast<double>(attempts);
}

TaskStats task_stats(const WorldModelGraph& graph, BlockId task) {
  TaskStats s;
  s.task = task;
  long start_sum = 0;
  long dur_sum = 0;
  long dur_n = 0;
  for (const auto& t : graph.tasks()) {
    if (t.task != task) continue;
    ++s.attempts;
    if (t.success) ++s.successes;
    start_sum += t.start;
    s.min_start = s.min_start ? std::min(*s.min_start, t.start) : t.start;
    s.max_start = s.max_start ? std::max(*s.max_start, t.start) : t.start;
    if (t.duration) {
      dur_sum += *t.duration;
      ++dur_n;
    }
  }
  if (s.attempts > 0) s.mean_start = static_cast<double>(start_sum) / static_cast<double>(s.attempts);
  if (dur_n > 0) s.mean_duration = static_cast<double>(dur_sum) / static_cast<double>(dur_n);
  return s;
}

int compare_tallies(const OutcomeTally& a, const OutcomeTally& b) {
  // success rate, descending; no attempts sorts last
  if ((a.attempts == 0) != (b.attempts == 0)) return a.attempts == 0 ? 1 : -1;
  if (a.attempts > 0) {
    int c = compare_ratio(a.successes, a.attempts, b.successes, b.attempts);
    if (c != 0) return -c;
  }
  // mean duration, ascending; unknown sorts last
  if ((a.duration_count == 0) != (b.duration_count == 0)) return a.duration_count == 0 ? 1 : -1;
  if (a.duration_count > 0) return compare_ratio(a.duration_sum, a.duration_count, b.duration_sum, b.duration_count);
  return 0;
}

RetrievalResult retrieve_plans(const WorldModelGraph& graph, BlockId task, int k, int l) {
  RetrievalResult result;
  result.task = task;
  std::map<std::string, RetrievedPrototype> by_id;
  for (const auto& p : graph.prototypes())
    if (p.task == task) by_id[p.id].prototype = p;
  for (const auto& i : graph.instances()) {
    auto it = by_id.find(i.prototype_id);
    if (it == by_id.end()) continue;
    it->second.stats.add(i.tally);
    it->second.instances.push_back(RetrievedInstance{i});
  }
  for (auto& [id, rp] : by_id) {
    std::sort(rp.instances.begin(), rp.instances.end(), [](const RetrievedInstance& a, const RetrievedInstance& b) {
      int c = compare_tallies(a.instance.tally, b.instance.tally);
      return c != 0 ? c < 0 : a.instance.id < b.instance.id;
    });
    if (static_cast<int>(rp.instances.size()) > l) rp.instances.resize(static_cast<std::size_t>(std::max(l, 0)));
    result.prototypes.push_back(std::move(rp));
  }
  std::sort(result.prototypes.begin(), result.prototypes.end(),
            [](const RetrievedPrototype& a, const RetrievedPrototype& b) {
              int c = compare_tallies(a.stats, b.stats);
              return c != 0 ? c < 0 : a.prototype.id < b.prototype.id;
            });
  if (static_cast<int>(result.prototypes.size()) > k)
    result.prototypes.resize(static_cast<std::size_t>(std::max(k, 0)));
  return result;
}

std::string format_percent(double fraction) {
  return std::to_string(static_cast<long>(std::lround(fraction * 100.0))) + "%";
}

std::string format_number(double value) {
  double r = std::round(value);
  if (std::fabs(value - r) < 1e-9) return std::to_string(static_cast<long>(r));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", value);
  return buf;
}

std::string render_plan_library(const RetrievalResult& result) {
  auto opt = [](std::optional<double> v, bool percent) {
    if (!v) return std::string("UNKNOWN");
    return percent ? format_percent(*v) : format_number(*v);
  };
  std::ostringstream os;
  os << "--- PROTOTYPES ---\n";
  os << "Planning for " << block_name(result.task) << "...\n";
  os << "Historical Plan Prototypes (ranked by success rate):\n";
  int n = 1;
  for (const auto& p : result.prototypes) {
    os << "  " << n++ << ". Success rate=" << opt(p.stats.success_rate(), true)
       << " | avg team=" << opt(p.stats.mean_team_size(), false)
       << " | avg duration=" << opt(p.stats.mean_duration(), false) << "\n";
    os << "     Prototype:[" << format_prototype(p.prototype.prototype) << "]\n";
  }
  os << "--- INSTANCES ---\n";
  os << "Detailed Plan Instances (ranked by success then duration):\n";
  n = 1;
  for (const auto& p : result.prototypes) {
    for (const auto& ri : p.instances) {
      const auto& i = ri.instance;
      os << "  " << n++ << ". Success rate=" << opt(i.tally.success_rate(), true) << " | attempts=" << i.tally.attempts
         << " | duration=" << opt(i.tally.mean_duration(), false) << "\n";
      os << "     Plan:[" << join(i.actions, " → ") << "]\n";
    }
  }
  return os.str();
}

std::optional<GraphFormat> parse_graph_format(std::string_view s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "json") return GraphFormat::Json;
  if (lower == "dot") return GraphFormat::Dot;
  return std::nullopt;
}

std::string export_graph(const WorldModelGraph& graph, std::string_view format) {
  auto f = parse_graph_format(format);
  if (!f) throw Error(ErrorCode::UnsupportedFormat, "unknown graph format '" + std::string(format) + "'");
  return export_graph(graph, *f);
}

std::string export_graph(const WorldModelGraph& graph, GraphFormat format) {
  if (format == GraphFormat::Dot) return to_dot(graph);
  return to_json(graph).dump(2) + "\n";
}

WorldModelGraph import_graph_json(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::ParseError, "world model is not a JSON object");
  try {
    // Rebuild through merge so indices and dedup sets are consistent.
    WorldModelGraph g;
    std::map<int, GraphDelta> deltas;
    for (const auto& e : j.at("episodes")) {
      EpisodeNode n;
      n.id = e.at("id").get<std::string>();
      n.index = e.at("index").get<int>();
      n.outcome = e.at("outcome").get<std::string>() == "COMPLETE" ? EpisodeOutcome::Complete
                                                                   : EpisodeOutcome::Incomplete;
      n.start_tick = e.at("start_tick").get<int>();
      n.end_tick = e.at("end_tick").get<int>();
      deltas[n.index].episode = n;
    }
    GraphDelta rest;
    for (const auto& p : j.at("prototypes")) {
      PrototypeNode n;
      n.id = p.at("id").get<std::string>();
      n.task = block_from(p.at("task"));
      n.prototype.key = p.at("key").get<std::vector<std::string>>();
      rest.new_prototypes.push_back(std::move(n));
    }
    for (const auto& i : j.at("instances")) {
      InstanceNode n;
      n.id = i.at("id").get<std::string>();
      n.prototype_id = i.at("prototype").get<std::string>();
      n.task = block_from(i.at("task"));
      n.actions = i.at("actions").get<std::vector<std::string>>();
      n.tally = tally_from(i.at("stats"));
      rest.new_instances.push_back(std::move(n));
    }
    for (const auto& t : j.at("tasks")) {
      TaskNode n;
      n.id = t.at("id").get<std::string>();
      n.episode = t.at("episode").get<int>();
      n.task = block_from(t.at("task"));
      n.agent = AgentId{t.at("agent").get<int>()};
      n.success = t.at("success").get<bool>();
      n.start = t.at("start").get<int>();
      if (!t.at("duration").is_null()) n.duration = t.at("duration").get<int>();
      n.team_size = t.at("team_size").get<int>();
      n.prototype_id = t.at("prototype").get<std::string>();
      n.instance_id = t.at("instance").get<std::string>();
      auto it = deltas.find(n.episode);
      if (it == deltas.end()) throw Error(ErrorCode::ParseError, "task " + n.id + " references a missing episode");
      it->second.tasks.push_back(std::move(n));
    }
    for (const auto& e : j.at("edges")) rest.edges.push_back(Edge{e.at(0).get<std::string>(), e.at(1).get<std::string>()});

    // Episodes in order; prototypes, instances and edges are attached to the last merge.
    if (deltas.empty()) {
      if (!rest.new_prototypes.empty() || !rest.new_instances.empty() || !rest.edges.empty())
        throw Error(ErrorCode::ParseError, "world model has nodes but no episodes");
      return g;
    }
    std::size_t left = deltas.size();
    for (auto& [idx, d] : deltas) {
      if (--left == 0) {
        d.new_prototypes = std::move(rest.new_prototypes);
        d.new_instances = std::move(rest.new_instances);
        d.edges = std::move(rest.edges);
      }
      g.merge(d);
    }
    return g;
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("malformed world model: ") + ex.what());
  }
}

WorldModelGraph load_world(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return import_graph_json(ss.str());
}

void save_world(const WorldModelGraph& graph, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << export_graph(graph, GraphFormat::Json);
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace coop
