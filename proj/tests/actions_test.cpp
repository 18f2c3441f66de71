#include <gtest/gtest.h>

#include "coop/actions.hpp"
#include "oracles.hpp"

using namespace coop;

TEST(Actions, CanonicalText) {
  EXPECT_EQ(format_action(SymbolicAction::move_to_block(BlockId{1}, Dir::N)), "MoveToBlock(block_1, N)");
  EXPECT_EQ(format_action(SymbolicAction::rendezvous(BlockId{1}, Dir::N, 2, 10)),
            "Rendezvous(block_1, N, count=2, timeout=10)");
  EXPECT_EQ(format_action(SymbolicAction::push(BlockId{1}, 5)), "Push(block_1, steps=5)");
  EXPECT_EQ(format_action(SymbolicAction::yield_face(BlockId{3}, 2)), "YieldFace(block_3, steps=2)");
  EXPECT_EQ(format_action(SymbolicAction::wait_agents(2, 10)), "WaitAgents(count=2, timeout=10)");
}

TEST(Actions, ParsesLenientForms) {
  auto a = parse_action("Push(block_1, 5)");
  ASSERT_TRUE(a);
  EXPECT_EQ(*a, SymbolicAction::push(BlockId{1}, 5));

  a = parse_action("  Rendezvous(block=block_2, side=S, count=2)  ");
  ASSERT_TRUE(a);
  EXPECT_EQ(*a, SymbolicAction::rendezvous(BlockId{2}, Dir::S, 2, kDefaultTimeout));

  a = parse_action("Rendezvous(block_2, S, 2)", 7);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->timeout, 7);

  a = parse_action("MoveToBlock(2, \"W\")");
  ASSERT_TRUE(a);
  EXPECT_EQ(*a, SymbolicAction::move_to_block(BlockId{2}, Dir::W));
}

TEST(Actions, MalformedInputs) {
  EXPECT_FALSE(parse_action("Push block_1"));
  EXPECT_FALSE(parse_action("Push(block_1, steps=)"));
  EXPECT_FALSE(parse_action("Push(steps=3)"));
  EXPECT_FALSE(parse_action("(block_1)"));

  auto a = parse_action("Dance(block_1)");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->kind, ActionKind::Unknown);
  EXPECT_EQ(a->raw_name, "Dance");

  a = parse_action("Rendezvous(block_1, NE, count=2, timeout=10)");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->side, Side::Invalid);
}

TEST(Actions, PlanTextDropsGarbage) {
  auto plan = parse_plan_text(
      "Here is my plan:\n"
      "1. MoveToBlock(block_1, N)\n"
      "- Rendezvous(block_1, N, count=2, timeout=10)\n"
      "2) Push(block_1, 5)\n");
  ASSERT_EQ(plan.size(), 3u);
  EXPECT_EQ(plan[2], SymbolicAction::push(BlockId{1}, 5));

  plan = parse_plan_text("MoveToBlock(block_1, N)\nthis is not an action\nPush(block_1, steps=2)");
  EXPECT_EQ(plan.size(), 2u);
}

TEST(Actions, ChainFormat) {
  std::vector<SymbolicAction> v{SymbolicAction::move_to_block(BlockId{1}, Dir::W), SymbolicAction::push(BlockId{1}, 3)};
  EXPECT_EQ(format_plan_chain(v), "MoveToBlock(block_1, W) → Push(block_1, steps=3)");
}

TEST(Actions, RoundTripRandomPlans) {
  oracle::Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    auto p = oracle::random_plan(rng);
    auto back = parse_plan_text(format_plan_lines(p.actions));
    ASSERT_EQ(back, p.actions) << format_plan_lines(p.actions);
    for (const auto& a : p.actions) ASSERT_EQ(parse_action(format_action(a)), a);
  }
}
