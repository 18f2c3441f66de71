#include "fixtures.hpp"

#include <fstream>
#include <sstream>

namespace fixture {

std::filesystem::path test_dir() { return COOP_TEST_DIR; }
std::filesystem::path source_dir() { return COOP_SOURCE_DIR; }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

coop::EpisodeTrace episode_a() { return coop::read_trace(test_dir() / "fixtures" / "episode_a.trace.jsonl"); }
coop::EpisodeTrace episode_b() { return coop::read_trace(test_dir() / "fixtures" / "episode_b.trace.jsonl"); }

coop::WorldModelGraph world_ab() {
  coop::WorldModelGraph g;
  coop::ingest_episode(g, episode_a());
  coop::ingest_episode(g, episode_b());
  return g;
}

coop::GridState three_block_state() {
  coop::EnvConfig cfg;
  cfg.blocks = {{coop::BlockId{1}, 1, {1, 5}}, {coop::BlockId{2}, 2, {4, 3}}, {coop::BlockId{3}, 2, {7, 1}}};
  cfg.agent_starts = {{0, 0}, {9, 0}};
  auto s = coop::init_env(cfg);
  for (int i = 0; i < 5; ++i) s = coop::env_step(s, {}).state;
  return s;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("coop_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
