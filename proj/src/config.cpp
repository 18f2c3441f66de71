#include "coop/config.hpp"

#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace coop {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

// Absent keys take the default; present keys must convert.
template <class T>
T value_or(const YAML::Node& n, const T& fallback) {
  if (!n || n.IsNull()) return fallback;
  return n.as<T>();
}

Cell cell_of(const YAML::Node& n, const std::string& where) {
  if (!n.IsSequence() || n.size() != 2) bad(where + ": expected [row, col]");
  return Cell{n[0].as<int>(), n[1].as<int>()};
}

PolicyKind policy_of(const std::string& s) {
  if (s == "baseline") return PolicyKind::Baseline;
  if (s == "scripted") return PolicyKind::Scripted;
  if (s == "llm") return PolicyKind::Llm;
  bad("unknown policy '" + s + "'");
}

std::optional<BlockId> block_of(const YAML::Node& n) {
  if (!n || n.IsNull()) return std::nullopt;
  auto b = parse_block_name(n.as<std::string>());
  if (!b) bad("bad block id '" + n.as<std::string>() + "'");
  return b;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

}  // namespace

std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Baseline: return "baseline";
    case PolicyKind::Scripted: return "scripted";
    case PolicyKind::Llm: return "llm";
  }
  return "?";
}

std::vector<Cell> seeded_agent_starts(const EnvConfig& env, int count, std::uint64_t seed) {
  std::vector<Cell> free;
  for (int r = 0; r < env.height; ++r)
    for (int c = 0; c < std::max(1, env.width / 2); ++c) {
      Cell cell{r, c};
      bool covered = false;
      for (const auto& b : env.blocks)
        if (r >= b.anchor.row && r < b.anchor.row + b.weight && c >= b.anchor.col && c < b.anchor.col + b.weight)
          covered = true;
      if (!covered) free.push_back(cell);
    }
  if (static_cast<int>(free.size()) < count) bad("not enough free cells for agents");
  std::mt19937_64 rng(seed);
  std::shuffle(free.begin(), free.end(), rng);
  free.resize(static_cast<std::size_t>(count));
  return free;
}

void validate_experiment(const ExperimentConfig& c) {
  validate_config(c.env);
  if (c.episodes < 1) bad("episodes must be >= 1");
  if (c.policies.size() != c.env.agent_starts.size()) bad("policy list length must equal the agent count");
  if (c.k < 1 || c.l < 1) bad("K and L must be >= 1");
  if (c.default_timeout < 1) bad("default_timeout must be >= 1");
  for (const auto& [agent, steps] : c.scripts)
    if (agent < 0 || agent >= static_cast<int>(c.policies.size())) bad("script for unknown agent " + std::to_string(agent));
  for (PolicyKind p : c.policies)
    if (p == PolicyKind::Llm) validate_llm_config(c.llm);
}

ExperimentConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  try {
    YAML::Node root = YAML::Load(yaml_text);
    if (!root.IsMap()) bad("config must be a mapping");
    if (auto env = root["env"]) {
      c.env.width = value_or<int>(env["width"], c.env.width);
      c.env.height = value_or<int>(env["height"], c.env.height);
      c.env.goal_band_width = value_or<int>(env["goal_band_width"], c.env.goal_band_width);
      c.env.max_steps = value_or<int>(env["max_steps"], c.env.max_steps);
      c.env.seed = value_or<std::uint64_t>(env["seed"], c.env.seed);
      int next_id = 1;
      for (const auto& b : env["blocks"]) {
        BlockSpec s;
        s.id = b["id"] ? *block_of(b["id"]) : BlockId{next_id};
        s.weight = value_or<int>(b["weight"], 1);
        s.anchor = cell_of(b["anchor"], "block anchor");
        next_id = to_int(s.id) + 1;
        c.env.blocks.push_back(s);
      }
      for (const auto& a : env["agents"]) c.env.agent_starts.push_back(cell_of(a, "agent start"));
      if (c.env.agent_starts.empty() && env["num_agents"])
        c.env.agent_starts = seeded_agent_starts(c.env, env["num_agents"].as<int>(), c.env.seed);
    }
    c.episodes = value_or<int>(root["episodes"], c.episodes);
    if (auto p = root["policies"]) {
      if (p.IsScalar()) {
        c.policies.assign(c.env.agent_starts.size(), policy_of(p.as<std::string>()));
      } else {
        for (const auto& x : p) c.policies.push_back(policy_of(x.as<std::string>()));
      }
    } else {
      c.policies.assign(c.env.agent_starts.size(), PolicyKind::Baseline);
    }
    c.k = value_or<int>(root["K"], c.k);
    c.l = value_or<int>(root["L"], c.l);
    c.default_timeout = value_or<int>(root["default_timeout"], c.default_timeout);
    if (auto w = root["world"]) c.world_path = resolve(base_dir, w.as<std::string>());
    if (auto o = root["out"]) c.out_dir = resolve(base_dir, o.as<std::string>());
    if (auto s = root["snapshot_episodes"]) c.snapshot_episodes = s.as<std::vector<int>>();
    if (auto t = root["templates"]) c.templates_dir = resolve(base_dir, t.as<std::string>());
    for (const auto& entry : root["scripts"]) {
      int agent = entry.first.as<int>();
      std::vector<ScriptStep> steps;
      for (const auto& s : entry.second) {
        ScriptStep step;
        step.propose = block_of(s["propose"]);
        step.rationale = value_or<std::string>(s["rationale"], "");
        step.commit = block_of(s["commit"]);
        if (s["plan"]) step.plan = s["plan"].as<std::vector<std::string>>();
        steps.push_back(std::move(step));
      }
      c.scripts[agent] = std::move(steps);
    }
    if (auto l = root["llm"]) {
      c.llm.base_url = value_or<std::string>(l["base_url"], c.llm.base_url);
      c.llm.path = value_or<std::string>(l["path"], c.llm.path);
      c.llm.model = value_or<std::string>(l["model"], c.llm.model);
      c.llm.timeout_seconds = value_or<double>(l["timeout"], c.llm.timeout_seconds);
      c.llm.max_tokens = value_or<int>(l["max_tokens"], c.llm.max_tokens);
      c.llm.temperature = value_or<double>(l["temperature"], c.llm.temperature);
      c.llm.retries = value_or<int>(l["retries"], c.llm.retries);
    }
  } catch (const YAML::Exception& ex) {
    bad(std::string("YAML: ") + ex.what());
  }
  if (const char* url = std::getenv("COOP_LLM_BASE_URL"); url && *url) c.llm.base_url = url;
  validate_experiment(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace coop
