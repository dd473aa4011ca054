#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "lrperc/errors.hpp"
#include "lrperc/sampler.hpp"
#include "lrperc/statistics.hpp"

using namespace lrperc;

TEST(Sampler, ZeroBetaIsEmpty) {
  const TorusBox box(1, 64);
  const Kernel k = Kernel::pure_power(1, 0.5);
  const EdgeClassTable t(box, k);
  EXPECT_TRUE(sample_configuration(t, k, 0.0, 1, 0).open_edges.empty());
  EXPECT_TRUE(sample_naive(t, k, 0.0, 1, 0).open_edges.empty());
}

TEST(Sampler, SaturatedTorusIsComplete) {
  const TorusBox box(1, 4);
  const Kernel k = Kernel::radial_table(1, 0.5, {{2, 1e3}});
  const EdgeClassTable t(box, k);
  EXPECT_EQ(sample_configuration(t, k, 1.0, 1, 0).open_edges.size(), 6u);
  EXPECT_EQ(sample_naive(t, k, 1.0, 1, 0).open_edges.size(), 6u);
}

TEST(Sampler, OutputSortedAndCanonical) {
  const TorusBox box(2, 16);
  const Kernel k = normalize_kernel(Kernel::pure_power(2, 1.0), box);
  const EdgeClassTable t(box, k);
  const auto c = sample_configuration(t, k, 3.0, 9, 4);
  ASSERT_FALSE(c.open_edges.empty());
  for (std::size_t i = 0; i < c.open_edges.size(); ++i) {
    EXPECT_LT(c.open_edges[i].first, c.open_edges[i].second);
    if (i) EXPECT_LT(c.open_edges[i - 1], c.open_edges[i]);
  }
}

// Expected open-edge count summed pair by pair, independent of the class table.
TEST(Sampler, MeanOpenEdgesMatchesPairSum) {
  const TorusBox box(1, 256);
  const Kernel k = Kernel::pure_power(1, 0.5);
  const EdgeClassTable t(box, k);
  const double beta = 0.5;
  double exact = 0;
  for (VertexId u = 0; u < box.vertex_count(); ++u) {
    for (VertexId w = u + 1; w < box.vertex_count(); ++w) {
      exact += edge_probability(k, beta, box.displacement(u, w));
    }
  }
  EXPECT_NEAR(expected_open_edges(t, beta), exact, 1e-9 * exact);
  std::vector<double> counts;
  for (int r = 0; r < 10000; ++r) {
    counts.push_back(static_cast<double>(sample_configuration(t, k, beta, 2, r).open_edges.size()));
  }
  EXPECT_NEAR(mean(counts), exact, 3 * standard_error(counts));
}

TEST(Sampler, SingleClassFrequency) {
  const TorusBox box(1, 2);
  const Kernel k = Kernel::pure_power(1, 0.5);
  const EdgeClassTable t(box, k);
  const double beta = 0.8;
  const double p = 1 - std::exp(-beta * t.weight(0));
  const int draws = 100000;
  int open = 0;
  for (int r = 0; r < draws; ++r) open += static_cast<int>(sample_configuration(t, k, beta, 3, r).open_edges.size());
  EXPECT_NEAR(open / static_cast<double>(draws), p, 3 * std::sqrt(p * (1 - p) / draws));
}

namespace {

ChiSquare skip_vs_naive(int replicas, double beta) {
  const TorusBox box(1, 32);
  const Kernel k = normalize_kernel(Kernel::pure_power(1, 0.5), box);
  const EdgeClassTable t(box, k);
  std::vector<std::vector<std::uint64_t>> a(t.size()), b(t.size());
  for (int r = 0; r < replicas; ++r) {
    const auto ca = class_counts(t, sample_configuration(t, k, beta, 11, r));
    const auto cb = class_counts(t, sample_naive(t, k, beta, 12, r));
    for (std::size_t c = 0; c < t.size(); ++c) {
      if (a[c].size() <= ca[c]) a[c].resize(ca[c] + 1);
      if (b[c].size() <= cb[c]) b[c].resize(cb[c] + 1);
      ++a[c][ca[c]];
      ++b[c][cb[c]];
    }
  }
  std::vector<ChiSquare> tests;
  for (std::size_t c = 0; c < t.size(); ++c) tests.push_back(chi_square_two_sample(a[c], b[c]));
  return combine(tests);
}

}  // namespace

TEST(Sampler, SkipMatchesNaivePerClass) {
  const auto chi = skip_vs_naive(2000, 1.5);
  EXPECT_GT(chi.p_value, 1e-3) << "statistic " << chi.statistic << " dof " << chi.dof;
}

TEST(Sampler, DeterministicReplicas) {
  const TorusBox box(1, 1024);
  const Kernel k = normalize_kernel(Kernel::pure_power(1, 0.5), box);
  const EdgeClassTable t(box, k);
  const auto a = sample_configuration(t, k, 1.2, 5, 17);
  const auto b = sample_configuration(t, k, 1.2, 5, 17);
  const auto c = sample_configuration(t, k, 1.2, 5, 18);
  EXPECT_EQ(a.open_edges, b.open_edges);
  EXPECT_NE(a.open_edges, c.open_edges);
}

TEST(Sampler, CoupledConfigurationsAreMonotone) {
  const TorusBox box(2, 16);
  const Kernel k = normalize_kernel(Kernel::pure_power(2, 1.0), box);
  const EdgeClassTable t(box, k);
  const auto s = sample_coupled(t, k, 4.0, 1, 2);
  auto prev = s.at(0.0);
  EXPECT_TRUE(prev.open_edges.empty());
  for (double beta : {0.5, 1.0, 2.0, 3.0, 4.0}) {
    const auto cur = s.at(beta);
    EXPECT_TRUE(std::includes(cur.open_edges.begin(), cur.open_edges.end(), prev.open_edges.begin(),
                              prev.open_edges.end()));
    prev = cur;
  }
  EXPECT_EQ(prev.open_edges, s.edges);
}

TEST(Sampler, CoupledMarginalsBelowCeiling) {
  const TorusBox box(1, 128);
  const Kernel k = normalize_kernel(Kernel::pure_power(1, 0.5), box);
  const EdgeClassTable t(box, k);
  const double beta = 0.7;
  std::vector<double> counts;
  for (int r = 0; r < 4000; ++r) {
    counts.push_back(static_cast<double>(sample_coupled(t, k, 3.0, 4, r).at(beta).open_edges.size()));
  }
  EXPECT_NEAR(mean(counts), expected_open_edges(t, beta), 4 * standard_error(counts));
}

TEST(Sampler, EdgeCapAndNaiveGuard) {
  const TorusBox box(1, 4096);
  const Kernel k = normalize_kernel(Kernel::pure_power(1, 0.5), box);
  const EdgeClassTable t(box, k);
  SamplerOptions tiny;
  tiny.edge_cap = 10;
  EXPECT_THROW(sample_configuration(t, k, 2.0, 1, 0, tiny), ResourceError);
  const TorusBox big(1, 8192);
  const EdgeClassTable tb(big, k);
  EXPECT_THROW(sample_naive(tb, k, 1.0, 1, 0), GuardError);
}

TEST(Sampler, EdgeDumpRoundTrip) {
  const TorusBox box(2, 8);
  const Kernel k = normalize_kernel(Kernel::pure_power(2, 1.0), box);
  const EdgeClassTable t(box, k);
  const auto c = sample_configuration(t, k, 2.0, 6, 1);
  const auto stem = (std::filesystem::temp_directory_path() / "lrperc_dump_test").string();
  write_edge_dump(c, stem);
  const auto back = read_edge_dump(stem);
  EXPECT_EQ(back.open_edges, c.open_edges);
  EXPECT_EQ(back.box, c.box);
  EXPECT_EQ(back.beta, c.beta);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.replica_index, c.replica_index);
  EXPECT_EQ(back.kernel_id, c.kernel_id);
}
