#include <gtest/gtest.h>

#include <set>

#include "lrperc/rng.hpp"
#include "lrperc/statistics.hpp"

using namespace lrperc;

TEST(Philox, KnownAnswerZeros) {
  const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, SameCoordinatesSameSequence) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(counter_bits(42, 7, 5), RngStream(42, 7, 5).next_u64());
}

TEST(RngStream, DistinctStreamsAndSeedsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 10; ++s) {
    for (std::uint64_t idx = 0; idx < 10; ++idx) seen.insert(counter_bits(s, idx, 0));
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_NE(derive_stream(1, 2), derive_stream(2, 1));
  EXPECT_EQ(RngStream(3, 4).substream(9).index(), derive_stream(4, 9));
}

TEST(RngStream, UniformRanges) {
  RngStream r(1, 1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.next_uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.next_open_uniform();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(RngStream, NextBelowIsUniform) {
  RngStream r(5, 3);
  const int bins = 10, draws = 100000;
  std::vector<std::uint64_t> counts(bins, 0);
  for (int i = 0; i < draws; ++i) {
    const auto v = r.next_below(bins);
    ASSERT_LT(v, static_cast<std::uint64_t>(bins));
    ++counts[v];
  }
  double stat = 0;
  const double expected = static_cast<double>(draws) / bins;
  for (auto c : counts) stat += (c - expected) * (c - expected) / expected;
  EXPECT_GT(chi_square_sf(stat, bins - 1), 1e-3);
}
