#include <gtest/gtest.h>

#include "ufsim/model.hpp"
#include "ufsim/runnable_tree.hpp"

namespace ufsim {
namespace {

TEST(Clamp, RaisesLaggingTaskToOneSliceBehind) {
  EXPECT_EQ(clamp_vruntime(0, ms(1000), ms(4)), ms(996));
  EXPECT_EQ(clamp_vruntime(ms(999), ms(1000), ms(4)), ms(999));
  EXPECT_EQ(clamp_vruntime(ms(1200), ms(1000), ms(4)), ms(1200));
  EXPECT_EQ(clamp_vruntime(ms(1), ms(3), ms(4)), ms(1));
}

TEST(ScaleRuntime, InverseInWeight) {
  EXPECT_EQ(scale_runtime(ms(4), Rational::make(100, 1)), ms(4));
  EXPECT_EQ(scale_runtime(ms(4), Rational::make(200, 1)), ms(2));
  EXPECT_EQ(scale_runtime(ms(4), Rational::make(1, 1)), ms(400));
  EXPECT_EQ(scale_runtime(ms(3), Rational::make(300, 2)), ms(2));
}

TEST(Rational, ReducesAndMultiplies) {
  EXPECT_EQ(Rational::make(6, 4), (Rational{3, 2}));
  EXPECT_EQ(Rational::make(2, 5) * Rational::make(5, 8), (Rational{1, 4}));
  EXPECT_THROW(Rational::make(1, 0), std::invalid_argument);
}

TEST(Weight, Bounds) {
  EXPECT_NO_THROW(Weight(1));
  EXPECT_NO_THROW(Weight(10000));
  EXPECT_THROW(Weight(0), std::invalid_argument);
  EXPECT_THROW(Weight(10001), std::invalid_argument);
}

TEST(CpuSet, Membership) {
  const CpuSet s = CpuSet::of({1, 3});
  EXPECT_TRUE(s.contains(1));
  EXPECT_FALSE(s.contains(2));
  EXPECT_FALSE(s.contains(-1));
  EXPECT_EQ(s.first(), 1);
  EXPECT_EQ(s.size(), 2);
  EXPECT_EQ(CpuSet::all(4).bits(), 0xFULL);
  EXPECT_EQ(CpuSet().first(), kNoCpu);
}

TEST(CgroupTree, TierFromName) {
  EXPECT_EQ(CgroupTree::tier_from_name("ts_web"), Tier::TimeSensitive);
  EXPECT_EQ(CgroupTree::tier_from_name("bg_batch"), Tier::Background);
  EXPECT_THROW(CgroupTree::tier_from_name("web"), ConfigError);
}

TEST(CgroupTree, RejectsDuplicatesUnknownParentsAndMixedTiers) {
  CgroupTree t;
  t.add("bg_a", std::nullopt, Weight(100));
  EXPECT_THROW(t.add("bg_a", std::nullopt, Weight(100)), ConfigError);
  EXPECT_THROW(t.add("bg_b", std::string("bg_missing"), Weight(100)), ConfigError);
  EXPECT_THROW(t.add("ts_c", std::string("bg_a"), Weight(100)), ConfigError);
}

TEST(CgroupTree, EffectiveWeightOfSiblings) {
  CgroupTree t;
  const CgroupId a = t.add("bg_a", std::nullopt, Weight(2));
  const CgroupId b = t.add("bg_b", std::nullopt, Weight(3));
  EXPECT_EQ(t.effective_weight(a), (Rational{2, 5}));
  EXPECT_EQ(t.effective_weight(b), (Rational{3, 5}));
  EXPECT_EQ(t.scaled_weight(a), (Rational{2, 1}));
}

TEST(CgroupTree, EffectiveWeightTwoLevels) {
  CgroupTree t;
  t.add("bg_p", std::nullopt, Weight(100));
  t.add("bg_q", std::nullopt, Weight(100));
  const CgroupId c1 = t.add("bg_c1", std::string("bg_p"), Weight(100));
  t.add("bg_c2", std::string("bg_p"), Weight(100));
  EXPECT_EQ(t.effective_weight(c1), (Rational{1, 4}));
  EXPECT_DOUBLE_EQ(t.effective_weight(c1).to_double(), 0.25);
  // A quarter of the tier's total top-level weight of 200.
  EXPECT_EQ(t.scaled_weight(c1), (Rational{50, 1}));
  EXPECT_FALSE(t.is_leaf(t.find("bg_p").value()));
  EXPECT_TRUE(t.is_leaf(c1));
}

TEST(CgroupTree, EffectiveWeightIgnoresIdleSiblings) {
  CgroupTree t;
  t.add("bg_p", std::nullopt, Weight(100));
  const CgroupId q = t.add("bg_q", std::nullopt, Weight(100));
  const CgroupId c1 = t.add("bg_c1", std::string("bg_p"), Weight(100));
  const CgroupId c2 = t.add("bg_c2", std::string("bg_p"), Weight(100));
  std::vector<bool> runnable(t.size(), false);
  runnable[static_cast<std::size_t>(c1)] = true;
  runnable[static_cast<std::size_t>(c2)] = true;
  EXPECT_EQ(t.effective_weight(c1, &runnable), (Rational{1, 2}));
  runnable[static_cast<std::size_t>(q)] = true;
  EXPECT_EQ(t.effective_weight(c1, &runnable), (Rational{1, 4}));
}

TEST(CgroupTree, ScaledWeightIsTierLocal) {
  CgroupTree t;
  t.add("ts_x", std::nullopt, Weight(10000));
  const CgroupId p = t.add("bg_p", std::nullopt, Weight(100));
  const CgroupId c = t.add("bg_c", std::string("bg_p"), Weight(5));
  EXPECT_EQ(t.scaled_weight(p), (Rational{100, 1}));
  EXPECT_EQ(t.scaled_weight(c), (Rational{100, 1}));
}

TEST(TaskState, ValidTransitions) {
  using S = TaskState;
  EXPECT_TRUE(valid_transition(S::Runnable, S::Running));
  EXPECT_TRUE(valid_transition(S::Running, S::Blocked));
  EXPECT_TRUE(valid_transition(S::Running, S::Runnable));
  EXPECT_TRUE(valid_transition(S::Running, S::Finished));
  EXPECT_TRUE(valid_transition(S::Running, S::Panicked));
  EXPECT_TRUE(valid_transition(S::Blocked, S::Runnable));
  EXPECT_FALSE(valid_transition(S::Blocked, S::Running));
  EXPECT_FALSE(valid_transition(S::Runnable, S::Blocked));
  EXPECT_FALSE(valid_transition(S::Finished, S::Runnable));
  EXPECT_FALSE(valid_transition(S::Panicked, S::Running));
}

TEST(RunnableTree, PeekReturnsSmallestKey) {
  RunnableTree t;
  t.activate(0, 5);
  t.activate(1, 3);
  t.activate(2, 9);
  ASSERT_TRUE(t.peek());
  EXPECT_EQ(t.peek()->cgroup, 1);
  EXPECT_EQ(t.peek()->key, 3U);
  EXPECT_EQ(t.min_key_by_scan(), 3U);
}

TEST(RunnableTree, TiesBreakByCgroupId) {
  RunnableTree t;
  t.activate(4, 7);
  t.activate(2, 7);
  EXPECT_EQ(t.peek()->cgroup, 2);
}

TEST(RunnableTree, RekeyReorders) {
  RunnableTree t;
  t.activate(0, 5);
  t.activate(1, 3);
  t.rekey(1, 11);
  EXPECT_EQ(t.peek()->cgroup, 0);
  EXPECT_EQ(t.key_of(1), 11U);
}

TEST(RunnableTree, NodeLivesInTreeOrStashNeverBoth) {
  RunnableTree t;
  t.activate(0, 5);
  EXPECT_TRUE(t.in_tree(0));
  EXPECT_FALSE(t.parked(0));
  t.park(0);
  EXPECT_FALSE(t.in_tree(0));
  EXPECT_TRUE(t.parked(0));
  EXPECT_TRUE(t.empty());
  EXPECT_EQ(t.stash_size(), 1U);
  t.activate(0, 8);
  EXPECT_TRUE(t.in_tree(0));
  EXPECT_FALSE(t.parked(0));
  EXPECT_EQ(t.stash_size(), 0U);
  EXPECT_EQ(t.key_of(0), 8U);
}

TEST(RunnableTree, ActivateIsIdempotent) {
  RunnableTree t;
  t.activate(0, 5);
  t.activate(0, 1);
  EXPECT_EQ(t.size(), 1U);
  EXPECT_EQ(t.key_of(0), 5U);
}

}  // namespace
}  // namespace ufsim
