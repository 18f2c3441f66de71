#include <gtest/gtest.h>

#include "coop/negotiation.hpp"
#include "coop/policy.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace coop;

namespace {

// Fixed answers; remembers how many buffer entries it saw at each call.
class Probe : public AgentPolicy {
 public:
  Probe(std::optional<BlockId> propose, std::optional<BlockId> commit, std::string why = "because")
      : propose_(propose), commit_(commit), why_(std::move(why)) {}

  std::optional<Proposal> propose(AgentId, const SymbolicObservation&, const NegotiationBuffer& b) override {
    seen_at_propose = b.entries();
    if (!propose_) return std::nullopt;
    return Proposal{*propose_, why_};
  }
  std::optional<BlockId> commit(AgentId, const SymbolicObservation&, const NegotiationBuffer& b,
                                const std::vector<TeamSizeStats>& stats) override {
    seen_at_commit = b.entries();
    stats_seen = stats.size();
    return commit_;
  }
  std::optional<PlanInstance> draft(AgentId, const SymbolicObservation&, BlockId) override { return std::nullopt; }
  PlanInstance refine(AgentId, const PlanInstance& d, const RetrievalResult&, const SymbolicObservation&) override {
    return d;
  }

  std::vector<BufferEntry> seen_at_propose, seen_at_commit;
  std::size_t stats_seen = 0;

 private:
  std::optional<BlockId> propose_, commit_;
  std::string why_;
};

const BlockId kB1{1}, kB2{2}, kB3{3};
const AgentId kA0{0}, kA1{1};

GridState heavy_light_state() {
  EnvConfig cfg;
  cfg.blocks = {{kB1, 2, {4, 2}}, {kB2, 1, {1, 6}}};
  cfg.agent_starts = {{0, 0}, {9, 0}, {9, 9}};
  return init_env(cfg);
}

}  // namespace

TEST(Negotiation, OpenRoomFreshModel) {
  auto s = fixture::three_block_state();
  auto buf = open_room({kA1, kA0}, s.tick, WorldModelGraph{}, s);
  EXPECT_EQ(buf.participants, (std::vector<AgentId>{kA0, kA1}));
  ASSERT_EQ(buf.task_reports.size(), 3u);
  for (const auto& [b, r] : buf.task_reports) {
    EXPECT_EQ(r.attempts, 0);
    EXPECT_FALSE(r.success_rate());
  }
}

TEST(Negotiation, OpenRoomReportsHistory) {
  // two successes out of three attempts on block_1
  WorldModelGraph g;
  for (int i = 0; i < 3; ++i) {
    oracle::EpisodeTruth t;
    t.plans.push_back({0, 1, {"Push(block_1, steps=1)"}, 0, 10, false});
    if (i < 2) t.delivered[1] = 10;
    t.end_tick = 10;
    ingest_episode(g, oracle::build_trace(t));
  }
  auto s = fixture::three_block_state();
  auto buf = open_room({kA0}, s.tick, g, s);
  EXPECT_NEAR(*buf.task_reports.at(kB1).success_rate(), 0.667, 5e-4);
  EXPECT_NE(render_guidebook(buf, {}).find("success_rate=67% (/3)"), std::string::npos);
}

TEST(Negotiation, ProposalsAreVisibleInOrder) {
  auto s = heavy_light_state();
  Probe p0(kB2, kB2, "closest to goal, solo-feasible"), p1(kB1, kB1);
  PolicyMap pm{{kA0, &p0}, {kA1, &p1}};
  auto buf = open_room({kA0, kA1}, 0, WorldModelGraph{}, s);
  std::vector<AgentId> withdrawn;
  auto v = proposal_round(buf, pm, withdrawn);
  EXPECT_TRUE(v.empty());
  ASSERT_EQ(buf.entries().size(), 2u);
  EXPECT_EQ(buf.entries()[0].agent, kA0);
  EXPECT_EQ(buf.entries()[0].rationale, "closest to goal, solo-feasible");
  EXPECT_TRUE(p0.seen_at_propose.empty());
  ASSERT_EQ(p1.seen_at_propose.size(), 1u);
  EXPECT_EQ(p1.seen_at_propose[0].task, kB2);
}

TEST(Negotiation, SingleAgentRoom) {
  auto s = heavy_light_state();
  Probe p0(kB2, kB2);
  PolicyMap pm{{kA0, &p0}};
  QuorumTracker tracker;
  auto out = run_room({kA0}, s, WorldModelGraph{}, pm, {}, tracker);
  EXPECT_EQ(std::count_if(out.buffer.entries().begin(), out.buffer.entries().end(),
                          [](const BufferEntry& e) { return e.kind == EntryKind::Proposal; }),
            1);
  EXPECT_EQ(out.mapping.task_of(kA0), kB2);
}

TEST(Negotiation, DoneBlockProposalIsReplaced) {
  auto s = heavy_light_state();
  Probe p0(kB3, kB2);  // block_3 does not exist
  PolicyMap pm{{kA0, &p0}};
  auto buf = open_room({kA0}, 0, WorldModelGraph{}, s);
  std::vector<AgentId> withdrawn;
  auto v = proposal_round(buf, pm, withdrawn);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].stage, EntryKind::Proposal);
  // fallback: block_2 is two pushes from the goal, block_1 five
  EXPECT_EQ(v[0].substituted, kB2);
  EXPECT_EQ(buf.entries()[0].task, kB2);
}

TEST(Negotiation, NoTaskWithdraws) {
  auto s = heavy_light_state();
  Probe p0(std::nullopt, std::nullopt), p1(kB2, kB2);
  PolicyMap pm{{kA0, &p0}, {kA1, &p1}};
  QuorumTracker tracker;
  auto out = run_room({kA0, kA1}, s, WorldModelGraph{}, pm, {}, tracker);
  EXPECT_EQ(out.mapping.withdrawn, (std::vector<AgentId>{kA0}));
  EXPECT_EQ(out.buffer.participants, (std::vector<AgentId>{kA1}));
  EXPECT_FALSE(out.mapping.task_of(kA0));
  EXPECT_EQ(out.mapping.task_of(kA1), kB2);
}

TEST(Negotiation, QuorumExamples) {
  auto s = heavy_light_state();
  QuorumTracker tracker;
  {
    Probe p0(kB1, kB1), p1(kB1, kB1);
    auto out = run_room({kA0, kA1}, s, WorldModelGraph{}, {{kA0, &p0}, {kA1, &p1}}, {}, tracker);
    EXPECT_EQ(out.mapping.assignments, (std::map<AgentId, BlockId>{{kA0, kB1}, {kA1, kB1}}));
    EXPECT_EQ(p1.stats_seen, 1u);
  }
  {
    Probe p0(kB1, kB1);
    auto out = run_room({kA0}, s, WorldModelGraph{}, {{kA0, &p0}}, {}, tracker);
    EXPECT_TRUE(out.mapping.assignments.empty());
    EXPECT_EQ(out.mapping.unassigned, (std::vector<AgentId>{kA0}));
  }
  {
    Probe p0(kB1, kB1);
    auto out = run_room({kA0}, s, WorldModelGraph{}, {{kA0, &p0}}, {{kB1, 1}}, tracker);
    EXPECT_EQ(out.mapping.task_of(kA0), kB1);  // one executor already on it
  }
  {
    Probe p0(kB2, kB2);
    auto out = run_room({kA0}, s, WorldModelGraph{}, {{kA0, &p0}}, {}, tracker);
    EXPECT_EQ(out.mapping.task_of(kA0), kB2);
  }
}

TEST(Negotiation, ForcedAfterThreeFailures) {
  auto s = heavy_light_state();
  QuorumTracker tracker;
  Probe p0(kB1, kB1);
  for (int i = 1; i <= 3; ++i) {
    auto out = run_room({kA0}, s, WorldModelGraph{}, {{kA0, &p0}}, {}, tracker);
    if (i < 3) {
      EXPECT_FALSE(out.mapping.task_of(kA0));
      EXPECT_EQ(tracker.failures(kA0), i);
    } else {
      EXPECT_EQ(out.mapping.forced.at(kA0), kB2);  // lightest block
      EXPECT_EQ(tracker.failures(kA0), 0);
    }
  }
}

TEST(Negotiation, TeamSizeStats) {
  // sizes {1: 0/2, 2: 3/3}
  auto make = [](std::vector<std::pair<int, bool>> rows) {
    WorldModelGraph g;
    GraphDelta d;
    d.episode.id = "ep:1";
    d.episode.index = 1;
    int n = 0;
    for (auto [size, ok] : rows) {
      TaskNode t;
      t.id = "task:1:" + std::to_string(n++);
      t.task = kB1;
      t.team_size = size;
      t.success = ok;
      d.tasks.push_back(t);
    }
    g.merge(d);
    return g;
  };
  auto g = make({{1, false}, {1, false}, {2, true}, {2, true}, {2, true}});
  auto st = team_size_stats(g, {kB1, kB2});
  ASSERT_EQ(st.size(), 2u);
  EXPECT_EQ(st[0].best_size, 2);
  EXPECT_DOUBLE_EQ(*st[0].best_rate, 1.0);
  EXPECT_FALSE(st[1].best_size);

  g = make({{1, true}, {2, true}, {2, true}});
  st = team_size_stats(g, {kB1});
  EXPECT_EQ(st[0].best_size, 1);
}

TEST(Negotiation, BufferInvariants) {
  NegotiationBuffer b;
  b.participants = {kA0, kA1};
  b.append({kA0, EntryKind::Proposal, kB1, "x"});
  EXPECT_THROW(b.append({kA0, EntryKind::Proposal, kB1, "again"}), Error);
  EXPECT_THROW(b.append({kA1, EntryKind::Commit, kB1, ""}), Error);
  EXPECT_THROW(b.append({AgentId{7}, EntryKind::Proposal, kB1, ""}), Error);
  b.append({kA0, EntryKind::Commit, kB1, ""});
  EXPECT_THROW(b.append({kA1, EntryKind::Proposal, kB1, ""}), Error);
}

TEST(Negotiation, GuidebookGolden) {
  auto g = fixture::world_ab();
  auto s = fixture::three_block_state();
  auto buf = open_room({kA0, kA1}, s.tick, g, s);
  EXPECT_EQ(render_guidebook(buf, {}), fixture::read_file(fixture::test_dir() / "golden" / "guidebook_propose.txt"));
  auto stats = team_size_stats(g, {kB1, kB2});
  EXPECT_EQ(render_guidebook(buf, stats), fixture::read_file(fixture::test_dir() / "golden" / "guidebook_commit.txt"));
}

TEST(Negotiation, GuidebookFreshModelIsUnknown) {
  auto s = fixture::three_block_state();
  auto text = render_guidebook(open_room({kA0}, s.tick, WorldModelGraph{}, s), {});
  EXPECT_NE(text.find("block_1: avg_start=UNKNOWN, range=[UNKNOWN], success_rate=UNKNOWN (/0)"), std::string::npos);
  EXPECT_NE(text.find("HISTORICAL TASK PERFORMANCE"), std::string::npos);
  EXPECT_NE(text.find("OPTIMAL TEAM SIZE RECOMMENDATIONS"), std::string::npos);
}
