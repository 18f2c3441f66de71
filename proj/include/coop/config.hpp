#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "coop/env.hpp"
#include "coop/policy.hpp"

namespace coop {

enum class PolicyKind : std::uint8_t { Baseline, Scripted, Llm };

std::string_view to_string(PolicyKind k);

struct ExperimentConfig {
  EnvConfig env;
  int episodes = 1;
  std::vector<PolicyKind> policies;  // one per agent
  int k = 3;
  int l = 3;
  int default_timeout = kDefaultTimeout;
  std::filesystem::path world_path;  // empty: <out>/world.json
  std::filesystem::path out_dir = "out";
  std::vector<int> snapshot_episodes{1, 5, 10};
  std::map<int, std::vector<ScriptStep>> scripts;  // by agent index
  LlmEndpointConfig llm;
  std::filesystem::path templates_dir = "templates";
};

/// Throws Error(ConfigInvalid).
void validate_experiment(const ExperimentConfig& config);

/// Parses YAML text. Relative paths resolve against `base_dir`. Agent start
/// cells missing from the file are drawn from the seed.
ExperimentConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Draws `count` distinct free cells in the western half of the grid.
std::vector<Cell> seeded_agent_starts(const EnvConfig& env, int count, std::uint64_t seed);

}  // namespace coop
