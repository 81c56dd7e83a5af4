#include "vqa/common.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <vector>

namespace {

TEST(MixSeed, DeterministicAndSpread) {
  EXPECT_EQ(vqa::mix_seed(42), vqa::mix_seed(42));
  EXPECT_NE(vqa::mix_seed(42), vqa::mix_seed(43));

  std::set<uint64_t> seen;
  for (uint64_t i = 0; i < 1000; ++i) seen.insert(vqa::mix_seed(i));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(MixSeed, TaggedChainsAreIndependent) {
  const uint64_t base = 7;
  EXPECT_NE(vqa::mix_seed(base, 0xdec0u), vqa::mix_seed(base, 0xc4a9u));
  EXPECT_NE(vqa::mix_seed(base, 1, 2), vqa::mix_seed(base, 2, 1));
  EXPECT_EQ(vqa::mix_seed(base, 5, 9), vqa::mix_seed(base, 5, 9));
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(257);
  vqa::parallel_for(257, 4, [&](int64_t i) { hits[static_cast<size_t>(i)]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, ZeroAndSingleThread) {
  int count = 0;
  vqa::parallel_for(0, 3, [&](int64_t) { ++count; });
  EXPECT_EQ(count, 0);
  vqa::parallel_for(5, 1, [&](int64_t) { ++count; });
  EXPECT_EQ(count, 5);
}

TEST(Errors, HierarchyGroupsNumericFailures) {
  EXPECT_THROW(throw vqa::UndefinedCorrelation("x"), vqa::NumericError);
  EXPECT_THROW(throw vqa::DomainError("x"), vqa::NumericError);
  EXPECT_THROW(throw vqa::NumericError("x"), vqa::Error);
  EXPECT_THROW(throw vqa::InvalidArgument("x"), vqa::Error);
  EXPECT_THROW(throw vqa::IoError("x"), vqa::Error);
  EXPECT_THROW(throw vqa::ValidationError("x"), vqa::Error);
  EXPECT_THROW(throw vqa::ContractViolation("x"), vqa::Error);
}

}  // namespace
