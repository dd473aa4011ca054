#include <gtest/gtest.h>

#include <queue>

#include "lrperc/cluster_engine.hpp"
#include "lrperc/errors.hpp"
#include "lrperc/rng.hpp"
#include "lrperc/sampler.hpp"

using namespace lrperc;

namespace {

std::vector<int> bfs_labels(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<VertexId>> adj(n);
  for (auto [u, w] : edges) {
    adj[u].push_back(w);
    adj[w].push_back(u);
  }
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::queue<VertexId> q;
    q.push(static_cast<VertexId>(s));
    label[s] = next;
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      for (auto w : adj[v]) {
        if (label[w] < 0) {
          label[w] = next;
          q.push(w);
        }
      }
    }
    ++next;
  }
  return label;
}

std::vector<Edge> random_edges(std::size_t n, std::size_t m, RngStream& rng) {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < m; ++i) {
    auto a = static_cast<VertexId>(rng.next_below(n)), b = static_cast<VertexId>(rng.next_below(n));
    if (a != b) out.push_back({std::min(a, b), std::max(a, b)});
  }
  return out;
}

// Brute force: for every x, count y in the window around x with x <-> y.
std::uint64_t brute_two_point(const ClusterForest& f, const TorusBox& box, std::int64_t r) {
  std::uint64_t total = 0;
  for (VertexId x = 0; x < box.vertex_count(); ++x) {
    for (auto y : window_box(box, x, r)) total += f.connected(x, y);
  }
  return total;
}

}  // namespace

TEST(Clusters, EmptyAndFull) {
  const auto empty = build_clusters(10, {});
  EXPECT_EQ(empty.cluster_count(), 10u);
  EXPECT_EQ(empty.max_cluster_size(), 1u);
  std::vector<Edge> all;
  for (VertexId u = 0; u < 10; ++u) {
    for (VertexId w = u + 1; w < 10; ++w) all.push_back({u, w});
  }
  const auto full = build_clusters(10, all);
  EXPECT_EQ(full.cluster_count(), 1u);
  EXPECT_EQ(full.max_cluster_size(), 10u);
}

TEST(Clusters, MatchBreadthFirstSearch) {
  RngStream rng(3, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.next_below(64);
    const auto edges = random_edges(n, rng.next_below(2 * n), rng);
    const auto f = build_clusters(n, edges);
    const auto label = bfs_labels(n, edges);
    std::size_t components = 0;
    for (std::size_t u = 0; u < n; ++u) {
      components = std::max<std::size_t>(components, label[u] + 1);
      for (std::size_t w = 0; w < n; ++w) {
        ASSERT_EQ(f.connected(u, w), label[u] == label[w]);
      }
    }
    EXPECT_EQ(f.cluster_count(), components);
    std::uint64_t total = 0;
    for (auto s : f.cluster_sizes()) total += s;
    EXPECT_EQ(total, n);
  }
}

TEST(Window, Examples) {
  const auto empty = build_clusters(5, {});
  EXPECT_EQ(window_stats(empty, {2}).max_in_window, 1u);
  EXPECT_EQ(window_stats(empty, {0, 1, 2, 3}).max_in_window, 1u);
  const auto path = build_clusters(3, {{0, 1}, {1, 2}});
  const auto s = window_stats(path, {0, 2});
  EXPECT_EQ(s.max_in_window, 2u);
  EXPECT_EQ(s.intersections[0], 2u);
  EXPECT_EQ(s.origin_cluster_size, 3u);
  EXPECT_THROW(window_stats(path, {}), DomainError);
  EXPECT_THROW(window_stats(path, {0, 7}), DomainError);
  EXPECT_THROW(window_stats(path, {1, 1}), DomainError);
}

TEST(TwoPoint, Examples) {
  const TorusBox box(1, 8);
  EXPECT_EQ(two_point_window_sum(build_clusters(8, {}), box, 1), 8u);
  EXPECT_EQ(two_point_window_sum(build_clusters(8, {{0, 1}}), box, 1), 10u);
  std::vector<Edge> chain;
  for (VertexId v = 0; v + 1 < 8; ++v) chain.push_back({v, v + 1});
  EXPECT_EQ(two_point_window_sum(build_clusters(8, chain), box, 2), 8u * 5u);
  EXPECT_THROW(two_point_window_sum(build_clusters(8, chain), box, 4), DomainError);
}

TEST(TwoPoint, MatchesBruteForce) {
  RngStream rng(9, 2);
  for (const TorusBox box : {TorusBox(1, 64), TorusBox(1, 66), TorusBox(2, 10), TorusBox(3, 6)}) {
    const std::size_t N = box.vertex_count();
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = build_clusters(N, random_edges(N, N * (trial + 1) / 5, rng));
      for (std::int64_t r = 1; 2 * r + 1 <= box.side(); r += (box.side() > 10 ? 7 : 1)) {
        EXPECT_EQ(two_point_window_sum(f, box, r), brute_two_point(f, box, r));
      }
    }
  }
}
