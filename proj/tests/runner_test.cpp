#include <gtest/gtest.h>

#include "coop/runner.hpp"
#include "fixtures.hpp"

using namespace coop;

namespace {

ExperimentConfig config_from(const std::string& name) { return load_config(fixture::source_dir() / "configs" / name); }

std::string dump_events(const EpisodeTrace& t) {
  std::string out;
  for (const auto& e : t.events) out += to_json(e).dump() + "\n";
  return out;
}

Json read_json(const std::filesystem::path& p) { return Json::parse(fixture::read_file(p)); }

}  // namespace

TEST(Runner, NoBlocksEndsAtTickZero) {
  auto c = parse_config("env: {width: 6, height: 6, agents: [[0, 0], [5, 0]]}\n");
  auto r = run_episode(c, WorldModelGraph{});
  EXPECT_EQ(r.metrics.reason, "ALL_DONE");
  EXPECT_EQ(r.metrics.env_steps, 0);
  EXPECT_EQ(r.trace.events.back().kind, EventKind::EpisodeEnd);
}

TEST(Runner, CooperativeScriptDelivers) {
  auto r = run_episode(config_from("cooperative.yaml"), WorldModelGraph{});
  EXPECT_EQ(r.metrics.reason, "ALL_DONE");
  EXPECT_LE(r.metrics.env_steps, 150);
  EXPECT_EQ(r.metrics.team_sizes.at(BlockId{1}), (std::vector<int>{2, 2}));
  EXPECT_FALSE(r.final_state.block(BlockId{1})->active());
}

TEST(Runner, EpisodesAreDeterministic) {
  auto c = config_from("default.yaml");
  auto a = run_episode(c, fixture::world_ab());
  auto b = run_episode(c, fixture::world_ab());
  EXPECT_EQ(dump_events(a.trace), dump_events(b.trace));
  EXPECT_FALSE(a.trace.events.empty());
}

TEST(Runner, BaselineNeverOpensRooms) {
  auto r = run_episode(config_from("default.yaml"), WorldModelGraph{});
  EXPECT_EQ(r.metrics.rooms, 0);
  for (const auto& e : r.trace.events) EXPECT_NE(e.kind, EventKind::Proposal);
}

TEST(Runner, ExperimentLayout) {
  auto c = config_from("default.yaml");
  c.out_dir = fixture::scratch("runner_layout");
  auto s = run_experiment(c);
  ASSERT_EQ(s.metrics.size(), 10u);
  ASSERT_EQ(s.node_counts.size(), 10u);
  for (std::size_t i = 1; i < s.node_counts.size(); ++i) EXPECT_GE(s.node_counts[i], s.node_counts[i - 1]);
  namespace fs = std::filesystem;
  for (int ep = 1; ep <= 10; ++ep) {
    const auto stem = episode_stem(ep);
    EXPECT_TRUE(fs::exists(c.out_dir / "traces" / (stem + ".trace.jsonl")));
    EXPECT_TRUE(fs::exists(c.out_dir / "traces" / (stem + ".timing.jsonl")));
    EXPECT_TRUE(fs::exists(c.out_dir / "metrics" / (stem + ".json")));
    EXPECT_TRUE(fs::exists(c.out_dir / "timelines" / (stem + ".svg")));
  }
  for (const char* g : {"world_ep001", "world_ep005", "world_ep010"}) {
    EXPECT_TRUE(fs::exists(c.out_dir / "graphs" / (std::string(g) + ".json"))) << g;
    EXPECT_TRUE(fs::exists(c.out_dir / "graphs" / (std::string(g) + ".dot"))) << g;
  }
  EXPECT_FALSE(fs::exists(c.out_dir / "graphs" / "world_ep002.json"));
  EXPECT_TRUE(fs::exists(c.out_dir / "tables" / "completion.tsv"));
  auto manifest = read_json(c.out_dir / "manifest.json");
  EXPECT_TRUE(manifest["complete"].get<bool>());
  EXPECT_EQ(manifest["episodes"], 10);

  auto world = load_world(s.world_path);
  EXPECT_EQ(world.episodes().size(), 10u);
  EXPECT_EQ(world.node_count(), s.node_counts.back());
}

TEST(Runner, OneEpisodeWorldHasOneEpisodeNode) {
  auto c = config_from("cooperative.yaml");
  c.out_dir = fixture::scratch("runner_one");
  auto s = run_experiment(c);
  auto world = load_world(s.world_path);
  EXPECT_EQ(world.episodes().size(), 1u);
  EXPECT_EQ(world.episodes()[0].outcome, EpisodeOutcome::Complete);
}

TEST(Runner, ResumesFromPersistedWorld) {
  auto c = config_from("default.yaml");
  auto dir = fixture::scratch("runner_resume");
  c.world_path = dir / "world.json";
  c.episodes = 2;
  c.out_dir = dir / "first";
  auto first = run_experiment(c);
  auto before = load_world(c.world_path);

  c.episodes = 1;
  c.out_dir = dir / "second";
  auto second = run_experiment(c);
  auto after = load_world(c.world_path);
  EXPECT_EQ(after.episodes().size(), 3u);
  EXPECT_GT(second.node_counts[0], first.node_counts.back());
  auto ids = [](const WorldModelGraph& g) {
    std::set<std::string> out;
    for (const auto& p : g.prototypes()) out.insert(p.id);
    for (const auto& i : g.instances()) out.insert(i.id);
    for (const auto& t : g.tasks()) out.insert(t.id);
    return out;
  };
  auto a = ids(before), b = ids(after);
  EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
}

TEST(Runner, IoFailureMarksManifestIncomplete) {
  auto c = config_from("cooperative.yaml");
  auto dir = fixture::scratch("runner_io");
  c.out_dir = dir;
  std::ofstream(dir / "blocker") << "not a directory";
  c.world_path = dir / "blocker" / "world.json";
  try {
    run_experiment(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  auto manifest = read_json(dir / "manifest.json");
  EXPECT_FALSE(manifest["complete"].get<bool>());
  EXPECT_TRUE(manifest.contains("error"));
}
