#include <gtest/gtest.h>

#include "coop/trace.hpp"
#include "fixtures.hpp"

using namespace coop;

namespace {

TraceEvent ev(int tick, int agent, EventKind kind, Json payload = Json::object()) {
  TraceEvent e;
  e.tick = tick;
  e.agent = AgentId{agent};
  e.kind = kind;
  e.payload = std::move(payload);
  return e;
}

void expect_violation(const std::vector<TraceEvent>& events) {
  TraceRecorder r;
  try {
    for (const auto& e : events) r.record(e);
    ADD_FAILURE() << "sequence was accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OrderingViolation);
  }
}

}  // namespace

TEST(Trace, OrderingViolations) {
  expect_violation({ev(0, 0, EventKind::PlanEnd)});
  expect_violation({ev(5, -1, EventKind::CommOpen), ev(5, -1, EventKind::RoomClose), ev(4, -1, EventKind::CommOpen)});
  expect_violation({ev(0, 0, EventKind::Proposal)});
  expect_violation({ev(0, 0, EventKind::PlanStart), ev(1, 0, EventKind::EpisodeEnd)});
  expect_violation({ev(0, 0, EventKind::PlanStart), ev(0, 0, EventKind::ActionStart), ev(1, 0, EventKind::PlanEnd)});
  expect_violation({ev(0, -1, EventKind::EpisodeEnd), ev(0, -1, EventKind::BlockDone)});
  expect_violation({ev(0, 0, EventKind::ActionStart)});
}

TEST(Trace, FileRoundTripKeepsWallClockInSidecar) {
  auto dir = fixture::scratch("trace_rt");
  auto path = dir / "x.trace.jsonl";
  auto timing = timing_path_for(path);
  EXPECT_EQ(timing.filename(), "x.timing.jsonl");
  {
    TraceRecorder r(path, timing);
    auto a = ev(0, -1, EventKind::CommOpen, {{"room", 1}});
    a.wall_clock = 0.25;
    r.record(a);
    r.record(ev(0, -1, EventKind::RoomClose, {{"room", 1}}));
    r.record(ev(3, -1, EventKind::BlockDone, {{"block", "block_1"}, {"tick", 3}}));
    r.record(ev(3, -1, EventKind::EpisodeEnd, {{"reason", "ALL_DONE"}}));
  }
  auto text = fixture::read_file(path);
  EXPECT_EQ(text.find("wall"), std::string::npos);
  auto back = read_trace(path, timing);
  ASSERT_EQ(back.events.size(), 4u);
  EXPECT_DOUBLE_EQ(back.events[0].wall_clock, 0.25);
  EXPECT_EQ(back.events[2].payload["tick"], 3);
  EXPECT_TRUE(back.terminal());
}

TEST(Trace, ReadRejectsMalformedLines) {
  auto dir = fixture::scratch("trace_bad");
  {
    std::ofstream(dir / "a.trace.jsonl") << "{\"tick\":0,\"agent\":-1,\"kind\":\"NOPE\"}\n";
    std::ofstream(dir / "b.trace.jsonl") << "{not json\n";
  }
  for (auto name : {"a.trace.jsonl", "b.trace.jsonl"}) {
    try {
      read_trace(dir / name);
      ADD_FAILURE() << name;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError);
    }
  }
}

TEST(Trace, IncompleteTraceIsRejected) {
  EpisodeTrace t;
  t.events.push_back(ev(0, 0, EventKind::PlanStart, {{"task", "block_1"}, {"plan", Json::array()}}));
  try {
    extract_plans(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TraceIncomplete);
  }
}

TEST(Trace, ExtractPlansFromFixture) {
  auto plans = extract_plans(fixture::episode_b());
  ASSERT_EQ(plans.size(), 3u);
  // agent 1, ticks 8..10, before block_1 was delivered
  EXPECT_EQ(plans[0].agent, AgentId{1});
  EXPECT_FALSE(plans[0].success);
  EXPECT_EQ(plans[0].team_size, 1);
  // agent 0, ticks 12..30, delivered at 30; overlaps agent 1's second plan
  EXPECT_EQ(plans[1].agent, AgentId{0});
  EXPECT_TRUE(plans[1].success);
  EXPECT_EQ(plans[1].start, 12);
  EXPECT_EQ(plans[1].end, 30);
  EXPECT_EQ(plans[1].team_size, 2);
  EXPECT_EQ(plans[2].team_size, 2);
  EXPECT_FALSE(plans[2].success);

  auto a = extract_plans(fixture::episode_a());
  ASSERT_EQ(a.size(), 2u);
  EXPECT_TRUE(a[1].truncated);
  EXPECT_FALSE(a[1].success);
}
