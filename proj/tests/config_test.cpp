#include <gtest/gtest.h>

#include <cstdlib>

#include "coop/config.hpp"
#include "fixtures.hpp"

using namespace coop;

namespace {

void expect_invalid(const std::string& yaml) {
  try {
    parse_config(yaml);
    ADD_FAILURE() << yaml;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid) << yaml;
  }
}

const char* kMinimal = R"y(
env:
  width: 8
  height: 6
  goal_band_width: 2
  max_steps: 50
  blocks:
    - {id: block_3, weight: 2, anchor: [1, 1]}
    - {weight: 1, anchor: [4, 2]}
  agents:
    - [0, 0]
episodes: 4
policies: [scripted]
K: 2
L: 1
world: state/world.json
scripts:
  0:
    - propose: block_3
      rationale: only option
      plan: ["Push(block_3, steps=2)"]
    - propose: null
)y";

}  // namespace

TEST(Config, ParsesFields) {
  auto c = parse_config(kMinimal, "/base");
  EXPECT_EQ(c.env.width, 8);
  EXPECT_EQ(c.env.height, 6);
  EXPECT_EQ(c.env.goal_band_width, 2);
  ASSERT_EQ(c.env.blocks.size(), 2u);
  EXPECT_EQ(c.env.blocks[1].id, BlockId{4});
  EXPECT_EQ(c.env.blocks[0].weight, 2);
  EXPECT_EQ(c.episodes, 4);
  EXPECT_EQ(c.policies, (std::vector<PolicyKind>{PolicyKind::Scripted}));
  EXPECT_EQ(c.k, 2);
  EXPECT_EQ(c.l, 1);
  EXPECT_EQ(c.world_path, std::filesystem::path("/base/state/world.json"));
  ASSERT_EQ(c.scripts.at(0).size(), 2u);
  EXPECT_EQ(c.scripts.at(0)[0].propose, BlockId{3});
  EXPECT_EQ(c.scripts.at(0)[0].plan.size(), 1u);
  EXPECT_FALSE(c.scripts.at(0)[1].propose);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"default.yaml", "cooperative.yaml", "baseline_heavy.yaml", "llm.yaml"}) {
    auto c = load_config(fixture::source_dir() / "configs" / name);
    EXPECT_EQ(c.policies.size(), c.env.agent_starts.size()) << name;
  }
  auto d = load_config(fixture::source_dir() / "configs" / "default.yaml");
  EXPECT_EQ(d.env.blocks.size(), 3u);
  EXPECT_EQ(d.episodes, 10);
}

TEST(Config, SeededAgentStarts) {
  const char* yaml = R"(
env:
  width: 10
  height: 10
  seed: 42
  blocks: [{weight: 2, anchor: [0, 0]}]
  num_agents: 3
)";
  auto a = parse_config(yaml);
  auto b = parse_config(yaml);
  ASSERT_EQ(a.env.agent_starts.size(), 3u);
  EXPECT_EQ(a.env.agent_starts, b.env.agent_starts);
  std::set<Cell> distinct(a.env.agent_starts.begin(), a.env.agent_starts.end());
  EXPECT_EQ(distinct.size(), 3u);
  for (Cell c : a.env.agent_starts) {
    EXPECT_LT(c.col, 5);
    EXPECT_FALSE(c.row < 2 && c.col < 2);
  }
  EXPECT_EQ(a.policies.size(), 3u);
}

TEST(Config, RejectsInvalid) {
  expect_invalid("[1, 2]");
  expect_invalid("env: {width: 10, height: 10, agents: [[0, 0]]}\npolicies: magic\n");
  expect_invalid("env: {width: 10, height: 10, agents: [[0, 0]]}\nepisodes: 0\n");
  expect_invalid("env: {width: 10, height: 10, agents: [[0, 0]]}\npolicies: [baseline, baseline]\n");
  expect_invalid("env: {width: 10, height: 10, agents: [[0, 0]], blocks: [{id: nope, anchor: [1, 1]}]}\n");
  expect_invalid("env: {width: 10, height: 10, agents: [[0]]}\n");
  expect_invalid("env: {width: 10, height: 10, agents: [[0, 0]]}\nK: 0\n");
  expect_invalid("env: {width: 10, height: 10, agents: [[0, 0]]}\nscripts: {3: []}\n");
  expect_invalid("env: {width: 10, height: 10, agents: [[0, 0]]}\nepisodes: many\n");
}

TEST(Config, LoadMissingFileIsIoError) {
  try {
    load_config("/nonexistent/config.yaml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Config, BaseUrlEnvOverride) {
  const char* yaml = "env: {width: 10, height: 10, agents: [[0, 0]]}\npolicies: llm\nllm: {base_url: http://a:1}\n";
  ::unsetenv("COOP_LLM_BASE_URL");
  EXPECT_EQ(parse_config(yaml).llm.base_url, "http://a:1");
  ::setenv("COOP_LLM_BASE_URL", "http://b:2", 1);
  EXPECT_EQ(parse_config(yaml).llm.base_url, "http://b:2");
  ::unsetenv("COOP_LLM_BASE_URL");
}
