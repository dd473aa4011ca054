#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "lrperc/sampler.hpp"

namespace lrperc {

// Union-find with union by size and path halving.
class ClusterForest {
 public:
  explicit ClusterForest(std::size_t vertex_count = 0);

  std::size_t vertex_count() const { return parent_.size(); }
  VertexId find(VertexId v);
  VertexId find(VertexId v) const;
  // Returns true when u and w were in different clusters.
  bool unite(VertexId u, VertexId w);
  bool connected(VertexId u, VertexId w) const { return find(u) == find(w); }
  std::uint32_t cluster_size(VertexId v) const { return size_[find(v)]; }
  std::uint32_t max_cluster_size() const { return max_size_; }
  std::size_t cluster_count() const { return clusters_; }
  std::vector<std::uint32_t> cluster_sizes() const;
  // Root of every vertex; a fully compressed snapshot.
  std::vector<VertexId> roots() const;

 private:
  std::vector<VertexId> parent_;
  std::vector<std::uint32_t> size_;
  std::uint32_t max_size_ = 0;
  std::size_t clusters_ = 0;
};

ClusterForest build_clusters(std::size_t vertex_count, const std::vector<Edge>& edges);
ClusterForest build_clusters(const Configuration& c);

struct ClusterStats {
  std::uint32_t max_in_window = 0;        // |K_max(window)|
  std::uint32_t origin_cluster_size = 0;  // |K_0|
  std::map<std::uint32_t, std::uint64_t> histogram;  // cluster size -> cluster count
  std::vector<std::uint32_t> intersections;  // |K_v ∩ window| for each window vertex
};

ClusterStats window_stats(const ClusterForest& forest, const std::vector<VertexId>& window);

// Vertices of center + [-r, r]^d in the torus metric.
std::vector<VertexId> window_box(const TorusBox& box, VertexId center, std::int64_t r);

// Sum over all v of |K_v ∩ (v + [-r, r]^d)|. Requires 2r + 1 <= L.
std::uint64_t two_point_window_sum(const ClusterForest& forest, const TorusBox& box,
                                   std::int64_t r);

}  // namespace lrperc
