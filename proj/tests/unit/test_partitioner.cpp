#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "lrperc/errors.hpp"
#include "lrperc/partitioner.hpp"
#include "lrperc/rng.hpp"

using namespace lrperc;

namespace {

SimpleGraph path(std::uint32_t n) {
  SimpleGraph g{n, {}};
  for (std::uint32_t v = 0; v + 1 < n; ++v) g.edges.push_back({v, v + 1});
  return g;
}

std::vector<std::uint32_t> all_vertices(std::uint32_t n) {
  std::vector<std::uint32_t> a(n);
  for (std::uint32_t v = 0; v < n; ++v) a[v] = v;
  return a;
}

std::set<std::uint32_t> covered(const SimpleGraph& g, const std::vector<std::size_t>& edges) {
  std::set<std::uint32_t> out;
  for (auto e : edges) {
    out.insert(g.edges[e].first);
    out.insert(g.edges[e].second);
  }
  return out;
}

std::uint64_t count_in(const std::set<std::uint32_t>& vs, const std::vector<std::uint32_t>& A) {
  return std::count_if(A.begin(), A.end(), [&](std::uint32_t a) { return vs.count(a) > 0; });
}

bool edge_set_connected(const SimpleGraph& g, const std::vector<std::size_t>& edges) {
  SimpleGraph sub;
  std::vector<std::uint32_t> ids;
  for (auto v : covered(g, edges)) ids.push_back(v);
  sub.vertex_count = static_cast<std::uint32_t>(ids.size());
  auto idx = [&](std::uint32_t v) {
    return static_cast<std::uint32_t>(std::lower_bound(ids.begin(), ids.end(), v) - ids.begin());
  };
  for (auto e : edges) sub.edges.push_back({idx(g.edges[e].first), idx(g.edges[e].second)});
  return is_connected(sub);
}

SimpleGraph random_tree(std::uint32_t n, RngStream& rng) {
  SimpleGraph g{n, {}};
  for (std::uint32_t v = 1; v < n; ++v) g.edges.push_back({static_cast<std::uint32_t>(rng.next_below(v)), v});
  return g;
}

std::vector<std::uint32_t> random_subset(std::uint32_t n, std::uint32_t size, RngStream& rng) {
  auto a = all_vertices(n);
  for (std::uint32_t i = 0; i < size; ++i) std::swap(a[i], a[i + rng.next_below(n - i)]);
  a.resize(size);
  std::sort(a.begin(), a.end());
  return a;
}

}  // namespace

TEST(SplitTwo, PathOfThree) {
  const auto g = path(3);
  const auto A = all_vertices(3);
  const auto [w, rest] = split_two(g, A);
  EXPECT_EQ(w.size(), 1u);
  EXPECT_EQ(rest.size(), 1u);
  EXPECT_EQ(count_in(covered(g, w), A), 2u);
  EXPECT_EQ(count_in(covered(g, rest), A), 2u);
}

TEST(SplitTwo, StarLeaves) {
  const SimpleGraph star{4, {{0, 1}, {0, 2}, {0, 3}}};
  const std::vector<std::uint32_t> A{1, 2, 3};
  const auto [w, rest] = split_two(star, A);
  std::multiset<std::uint64_t> counts{count_in(covered(star, w), A), count_in(covered(star, rest), A)};
  EXPECT_EQ(counts, (std::multiset<std::uint64_t>{1, 2}));
}

TEST(SplitTwo, NinePathSparseTargets) {
  const auto g = path(9);
  const std::vector<std::uint32_t> A{0, 4, 8};
  const auto [w, rest] = split_two(g, A);
  std::vector<std::size_t> all(w);
  all.insert(all.end(), rest.begin(), rest.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}));
  EXPECT_TRUE(edge_set_connected(g, w));
  EXPECT_TRUE(edge_set_connected(g, rest));
  for (const auto& side : {w, rest}) {
    const auto c = count_in(covered(g, side), A);
    EXPECT_TRUE(c == 1 || c == 2) << c;
  }
}

// On a 4-vertex path with every vertex targeted, no split into two connected
// edge sets keeps both counts at most 2|A|/3: the shared cut vertex is
// counted on both sides.
TEST(SplitTwo, PathOfFourHasNoTwoThirdsSplit) {
  const auto g = path(4);
  const auto A = all_vertices(4);
  int valid_splits = 0;
  for (unsigned mask = 1; mask + 1 < (1u << 3); ++mask) {
    std::vector<std::size_t> left, right;
    for (std::size_t e = 0; e < 3; ++e) (mask >> e & 1 ? left : right).push_back(e);
    if (!edge_set_connected(g, left) || !edge_set_connected(g, right)) continue;
    ++valid_splits;
    const auto a = count_in(covered(g, left), A), b = count_in(covered(g, right), A);
    EXPECT_FALSE(3 * a <= 2 * 4 && 3 * b <= 2 * 4);
  }
  EXPECT_EQ(valid_splits, 4);  // two cuts, each in both orders
  // The algorithm's absorbed side lands in (|A|/3, 2|A|/3]; the rest keeps at least |A|/3.
  const auto [w, rest] = split_two(g, A);
  const auto cw = count_in(covered(g, w), A), cr = count_in(covered(g, rest), A);
  EXPECT_GT(3 * cw, 4u);
  EXPECT_LE(3 * cw, 8u);
  EXPECT_GE(3 * cr, 4u);
}

TEST(SplitTwo, RandomTreesKeepBounds) {
  RngStream rng(4, 4);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::uint32_t>(3 + rng.next_below(40));
    const auto g = random_tree(n, rng);
    const auto A = random_subset(n, static_cast<std::uint32_t>(3 + rng.next_below(n - 2)), rng);
    const auto [w, rest] = split_two(g, A);
    ASSERT_FALSE(w.empty());
    ASSERT_FALSE(rest.empty());
    EXPECT_TRUE(edge_set_connected(g, w));
    EXPECT_TRUE(edge_set_connected(g, rest));
    EXPECT_EQ(w.size() + rest.size(), g.edges.size());
    const double total = static_cast<double>(A.size());
    const double cw = static_cast<double>(count_in(covered(g, w), A));
    const double cr = static_cast<double>(count_in(covered(g, rest), A));
    EXPECT_GT(cw, total / 3);
    EXPECT_LE(cw, 2 * total / 3);
    EXPECT_GE(cr, total / 3);
  }
}

TEST(SplitTwo, Errors) {
  EXPECT_THROW(split_two(path(3), {0, 1}), DomainError);
  const SimpleGraph cycle{3, {{0, 1}, {1, 2}, {0, 2}}};
  EXPECT_THROW(split_two(cycle, {0, 1, 2}), DomainError);
  const SimpleGraph split{4, {{0, 1}, {2, 3}}};
  EXPECT_THROW(split_two(split, {0, 1, 2}), DomainError);
}

TEST(PartitionK, NinePathAllTargets) {
  const auto g = path(9);
  const auto A = all_vertices(9);
  const auto r = partition_k(g, A, 2);
  EXPECT_EQ(r.m(), 8u);
  for (std::size_t i = 0; i < r.m(); ++i) {
    EXPECT_EQ(r.pieces[i].size(), 1u);
    EXPECT_EQ(r.counts[i], 2u);
  }
  EXPECT_TRUE(verify_partition(g, A, 2, r).ok);
}

TEST(PartitionK, TrivialLowerBound) {
  RngStream rng(8, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = random_tree(27 + static_cast<std::uint32_t>(rng.next_below(20)), rng);
    const auto A = random_subset(g.vertex_count, 27, rng);
    const auto r = partition_k(g, A, 3);
    for (auto c : r.counts) {
      EXPECT_GE(c, 1u);
      EXPECT_LT(c, 3u);
    }
    EXPECT_TRUE(verify_partition(g, A, 3, r).ok);
  }
}

TEST(PartitionK, RandomTreesAndGraphs) {
  RngStream rng(12, 3);
  auto run = [&](const SimpleGraph& g) {
    int kmax = 0;
    while (std::pow(3.0, kmax + 1) <= g.vertex_count) ++kmax;
    const int k = 1 + static_cast<int>(rng.next_below(kmax));
    const auto lo = static_cast<std::uint32_t>(std::pow(3.0, k));
    const auto size = lo + static_cast<std::uint32_t>(rng.next_below(g.vertex_count - lo + 1));
    const auto A = random_subset(g.vertex_count, size, rng);
    const auto r = partition_k(g, A, k);
    const auto report = verify_partition(g, A, k, r);
    ASSERT_TRUE(report.ok) << (report.violations.empty() ? "" : report.violations.front());
  };
  for (int t = 0; t < 500; ++t) run(random_tree(3 + static_cast<std::uint32_t>(rng.next_below(58)), rng));
  for (int t = 0; t < 200; ++t) {
    auto g = random_tree(3 + static_cast<std::uint32_t>(rng.next_below(40)), rng);
    const auto extra = rng.next_below(2 * g.vertex_count);
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges(g.edges.begin(), g.edges.end());
    for (std::uint64_t i = 0; i < extra; ++i) {
      auto a = static_cast<std::uint32_t>(rng.next_below(g.vertex_count));
      auto b = static_cast<std::uint32_t>(rng.next_below(g.vertex_count));
      if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
    }
    g.edges.assign(edges.begin(), edges.end());
    run(g);
  }
}

TEST(PartitionK, Preconditions) {
  EXPECT_THROW(partition_k(path(5), {0, 1, 2}, 0), DomainError);
  EXPECT_THROW(partition_k(path(5), {0, 1, 2, 3}, 2), DomainError);
  EXPECT_THROW(partition_k(SimpleGraph{4, {{0, 1}, {2, 3}}}, {0, 1, 2}, 1), DomainError);
}

TEST(VerifyPartition, DetectsViolations) {
  const auto g = path(9);
  const auto A = all_vertices(9);
  auto r = partition_k(g, A, 2);
  ASSERT_TRUE(verify_partition(g, A, 2, r).ok);

  auto shared = r;
  shared.pieces[1].push_back(shared.pieces[0][0]);
  const auto rep = verify_partition(g, A, 2, shared);
  EXPECT_FALSE(rep.ok);
  EXPECT_NE(std::find(rep.violations.begin(), rep.violations.end(), "disjointness"), rep.violations.end());

  // One piece holding the whole path has count 3^{-k+1}|A| for k = 1.
  PartitionResult whole;
  whole.pieces = {{0, 1, 2, 3, 4, 5, 6, 7}};
  whole.vertex_sets = {A};
  whole.counts = {9};
  const auto rep2 = verify_partition(g, A, 1, whole);
  EXPECT_NE(std::find(rep2.violations.begin(), rep2.violations.end(), "balance upper bound is strict"),
            rep2.violations.end());
}
