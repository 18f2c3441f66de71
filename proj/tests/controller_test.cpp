#include <gtest/gtest.h>

#include "coop/controller.hpp"

using namespace coop;

namespace {

const AgentId kA{0};
const AgentId kB{1};
const BlockId kB1{1};

GridState state_with(std::vector<BlockSpec> blocks, std::vector<Cell> agents) {
  EnvConfig cfg;
  cfg.blocks = std::move(blocks);
  cfg.agent_starts = std::move(agents);
  return init_env(cfg);
}

PlanInstance plan_of(std::vector<SymbolicAction> actions, BlockId task = kB1) {
  PlanInstance p;
  p.actions = std::move(actions);
  p.committed_task = task;
  return p;
}

// One tick for a single executor; other agents NOOP.
std::vector<ControllerEvent> tick_once(ExecutorState& exec, GridState& s) {
  auto prep = prepare_tick(exec, kA, s);
  auto step = env_step(s, {{kA, prep.primitive}});
  auto adv = advance(prep.exec, kA, step.report, step.state);
  s = step.state;
  exec = adv.exec;
  auto events = prep.events;
  events.insert(events.end(), adv.events.begin(), adv.events.end());
  return events;
}

}  // namespace

TEST(Controller, ValidatesAdmissiblePlan) {
  auto s = state_with({{kB1, 1, {3, 3}}}, {{0, 0}});
  auto p = plan_of({SymbolicAction::move_to_block(kB1, Dir::N), SymbolicAction::rendezvous(kB1, Dir::N, 2, 10),
                    SymbolicAction::push(kB1, 5)});
  EXPECT_TRUE(validate_plan(p, s).empty());
}

TEST(Controller, RejectsUnknownBlockAndBadSide) {
  auto s = state_with({{kB1, 1, {3, 3}}}, {{0, 0}});
  auto r = validate_plan(plan_of({SymbolicAction::push(BlockId{9}, 3)}, BlockId{9}), s);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].code, RejectCode::UnknownBlock);
  EXPECT_EQ(r[0].position, 0u);

  auto bad = parse_action("Rendezvous(block_1, NE, count=2, timeout=10)");
  r = validate_plan(plan_of({*bad}), s);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].code, RejectCode::BadSide);

  r = validate_plan(plan_of({}), s);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].code, RejectCode::EmptyPlan);

  r = validate_plan(plan_of({SymbolicAction::push(kB1, 0)}), s);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].code, RejectCode::BadParam);

  r = validate_plan(plan_of({SymbolicAction::push(kB1, 2)}, BlockId{2}), s);
  ASSERT_FALSE(r.empty());
  EXPECT_EQ(r.back().code, RejectCode::TaskMismatch);
}

TEST(Controller, RendezvousWaitsThenTimesOut) {
  // one agent on the north face of block_1, the other far away
  auto s = state_with({{kB1, 1, {3, 3}}}, {{2, 3}, {9, 9}});
  auto rv = SymbolicAction::rendezvous(kB1, Dir::N, 2, 10);
  s.tick = 3;
  EXPECT_EQ(check_precondition(rv, kA, s, 0).status, PreStatus::Wait);
  s.tick = 10;
  auto pre = check_precondition(rv, kA, s, 0);
  EXPECT_EQ(pre.status, PreStatus::Fail);
  EXPECT_EQ(pre.reason, FailReason::Timeout);
}

TEST(Controller, PushOnDoneBlockFails) {
  auto s = state_with({{kB1, 1, {2, 7}}}, {{2, 6}});
  s = env_step(s, {{kA, PrimitiveAction::push(kB1, Dir::W)}}).state;
  ASSERT_FALSE(s.block(kB1)->active());
  auto pre = check_precondition(SymbolicAction::push(kB1, 3), kA, s, s.tick);
  EXPECT_EQ(pre.status, PreStatus::Fail);
  EXPECT_EQ(pre.reason, FailReason::TargetGone);
}

TEST(Controller, DecomposePushUsesCurrentFace) {
  auto s = state_with({{kB1, 1, {3, 3}}}, {{3, 2}});
  auto e = start_plan(plan_of({SymbolicAction::push(kB1, 3)}));
  auto prep = prepare_tick(e, kA, s);
  EXPECT_EQ(prep.primitive, PrimitiveAction::push(kB1, Dir::W));
  EXPECT_EQ(prep.exec.remaining, 3);
}

TEST(Controller, MoveToBlockOnTargetCompletesAtOnce) {
  auto s = state_with({{kB1, 1, {3, 3}}}, {{3, 2}});
  auto e = start_plan(plan_of({SymbolicAction::move_to_block(kB1, Dir::W)}));
  auto prep = prepare_tick(e, kA, s);
  EXPECT_EQ(prep.primitive, PrimitiveAction::noop());
  auto events = tick_once(e, s);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_TRUE(events[1].success);
  EXPECT_TRUE(e.done());
}

TEST(Controller, ShortestPathFirstStep) {
  // block_1 at (0,4): its west face cell is (0,3), straight east along row 0
  auto s = state_with({{kB1, 1, {0, 4}}}, {{0, 0}});
  auto e = start_plan(plan_of({SymbolicAction::move_to_block(kB1, Dir::W)}));
  EXPECT_EQ(prepare_tick(e, kA, s).primitive, PrimitiveAction::move(Dir::E));
  int ticks = 0;
  while (!e.done() && ticks < 20) {
    tick_once(e, s);
    ++ticks;
  }
  EXPECT_EQ(ticks, 3);
  EXPECT_EQ(s.agent(kA)->position, (Cell{0, 3}));
}

TEST(Controller, PushCountsDownAndCompletes) {
  auto s = state_with({{kB1, 1, {3, 3}}}, {{3, 2}});
  auto e = start_plan(plan_of({SymbolicAction::push(kB1, 2)}));
  tick_once(e, s);
  EXPECT_EQ(e.remaining, 1);
  auto events = tick_once(e, s);
  ASSERT_FALSE(events.empty());
  EXPECT_TRUE(events.back().success);
  EXPECT_EQ(e.mode, ExecMode::DonePlan);
  EXPECT_EQ(s.block(kB1)->anchor, (Cell{3, 5}));
}

TEST(Controller, HeavyPushAloneStalls) {
  auto s = state_with({{kB1, 2, {3, 3}}}, {{3, 2}});
  auto e = start_plan(plan_of({SymbolicAction::push(kB1, 3)}));
  std::vector<ControllerEvent> all;
  for (int i = 0; i < 3; ++i) {
    auto ev = tick_once(e, s);
    all.insert(all.end(), ev.begin(), ev.end());
  }
  ASSERT_EQ(all.size(), 2u);
  EXPECT_FALSE(all.back().success);
  EXPECT_EQ(all.back().reason, FailReason::Stalled);
  EXPECT_TRUE(e.done());
}

TEST(Controller, RendezvousTimeoutAdvancesIndex) {
  auto s = state_with({{kB1, 1, {3, 3}}}, {{2, 3}, {9, 9}});
  auto e = start_plan(plan_of({SymbolicAction::rendezvous(kB1, Dir::N, 2, 4), SymbolicAction::push(kB1, 1)}));
  std::vector<ControllerEvent> ends;
  for (int i = 0; i < 4; ++i)
    for (const auto& ev : tick_once(e, s))
      if (ev.kind == ControllerEvent::Kind::ActionEnd) ends.push_back(ev);
  ASSERT_EQ(ends.size(), 1u);
  EXPECT_EQ(ends[0].reason, FailReason::Timeout);
  EXPECT_EQ(ends[0].tick, 4);
  EXPECT_EQ(e.index, 1u);
}

TEST(Controller, RendezvousMeetsQuorum) {
  auto s = state_with({{kB1, 2, {3, 3}}}, {{3, 2}, {4, 2}});
  auto rv = SymbolicAction::rendezvous(kB1, Dir::W, 2, 10);
  EXPECT_EQ(check_precondition(rv, kA, s, 0).status, PreStatus::Satisfied);
  EXPECT_EQ(agents_at_side(s, *s.block(kB1), Dir::W), 2);
}

TEST(Controller, WaitAgentsCountsIdleAndWaiting) {
  auto s = state_with({}, {{0, 0}, {1, 1}, {2, 2}});
  s.agents[1].phase = AgentPhase::Executing;
  EXPECT_EQ(available_agents(s, kA), 2);
  s.agents[1].phase = AgentPhase::Waiting;
  EXPECT_EQ(available_agents(s, kA), 3);
}

TEST(Controller, YieldFaceStepsAway) {
  auto s = state_with({{kB1, 1, {3, 3}}}, {{3, 2}});
  auto e = start_plan(plan_of({SymbolicAction::yield_face(kB1, 2)}));
  tick_once(e, s);
  tick_once(e, s);
  EXPECT_TRUE(e.done());
  EXPECT_FALSE(aligned_face(*s.block(kB1), s.agent(kA)->position));
}

TEST(Controller, NoPathFailsAfterRechecks) {
  // agent boxed into the corner by two blocks and another agent
  auto s = state_with({{kB1, 1, {5, 5}}, {BlockId{2}, 1, {0, 1}}}, {{0, 0}, {1, 0}});
  auto e = start_plan(plan_of({SymbolicAction::move_to_block(kB1, Dir::W)}));
  std::vector<ControllerEvent> ends;
  for (int i = 0; i < kNoPathRechecks + 1; ++i) {
    auto prep = prepare_tick(e, kA, s);
    for (const auto& ev : prep.events)
      if (ev.kind == ControllerEvent::Kind::ActionEnd) ends.push_back(ev);
    auto step = env_step(s, {{kA, prep.primitive}});
    e = advance(prep.exec, kA, step.report, step.state).exec;
    s = step.state;
  }
  ASSERT_EQ(ends.size(), 1u);
  EXPECT_EQ(ends[0].reason, FailReason::NoPath);
}

TEST(Controller, TickBoundsArePositive) {
  auto s = state_with({{kB1, 1, {3, 3}}}, {{0, 0}});
  EXPECT_EQ(action_tick_bound(SymbolicAction::push(kB1, 3), s), 5);
  EXPECT_EQ(action_tick_bound(SymbolicAction::wait_agents(2, 7), s), 7);
  EXPECT_EQ(action_tick_bound(SymbolicAction::move_to_block(kB1, Dir::N), s), 100);
}
