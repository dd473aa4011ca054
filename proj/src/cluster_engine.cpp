#include "lrperc/cluster_engine.hpp"

#include <algorithm>
#include <unordered_map>

#include "lrperc/errors.hpp"

namespace lrperc {

ClusterForest::ClusterForest(std::size_t vertex_count)
    : parent_(vertex_count), size_(vertex_count, 1), max_size_(vertex_count ? 1 : 0),
      clusters_(vertex_count) {
  for (std::size_t v = 0; v < vertex_count; ++v) parent_[v] = static_cast<VertexId>(v);
}

VertexId ClusterForest::find(VertexId v) {
  while (parent_[v] != v) {
    parent_[v] = parent_[parent_[v]];
    v = parent_[v];
  }
  return v;
}

VertexId ClusterForest::find(VertexId v) const {
  while (parent_[v] != v) v = parent_[v];
  return v;
}

bool ClusterForest::unite(VertexId u, VertexId w) {
  VertexId a = find(u), b = find(w);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  max_size_ = std::max(max_size_, size_[a]);
  --clusters_;
  return true;
}

std::vector<std::uint32_t> ClusterForest::cluster_sizes() const {
  std::vector<std::uint32_t> out;
  out.reserve(clusters_);
  for (std::size_t v = 0; v < parent_.size(); ++v) {
    if (parent_[v] == v) out.push_back(size_[v]);
  }
  return out;
}

std::vector<VertexId> ClusterForest::roots() const {
  std::vector<VertexId> out(parent_.size());
  for (std::size_t v = 0; v < parent_.size(); ++v) out[v] = find(static_cast<VertexId>(v));
  return out;
}

ClusterForest build_clusters(std::size_t vertex_count, const std::vector<Edge>& edges) {
  ClusterForest f(vertex_count);
  for (const auto& [u, w] : edges) f.unite(u, w);
  return f;
}

ClusterForest build_clusters(const Configuration& c) {
  return build_clusters(c.box.vertex_count(), c.open_edges);
}

ClusterStats window_stats(const ClusterForest& forest, const std::vector<VertexId>& window) {
  if (window.empty()) throw DomainError("window is empty");
  ClusterStats s;
  std::unordered_map<VertexId, std::uint32_t> in_window;
  std::vector<VertexId> roots;
  roots.reserve(window.size());
  for (VertexId v : window) {
    if (v >= forest.vertex_count()) throw DomainError("window vertex outside the box");
    roots.push_back(forest.find(v));
  }
  std::vector<VertexId> sorted(window);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("window has repeated vertices");
  }
  for (VertexId r : roots) ++in_window[r];
  s.intersections.reserve(window.size());
  for (VertexId r : roots) {
    s.intersections.push_back(in_window[r]);
    s.max_in_window = std::max(s.max_in_window, in_window[r]);
  }
  s.origin_cluster_size = forest.cluster_size(0);
  for (auto size : forest.cluster_sizes()) ++s.histogram[size];
  return s;
}

std::vector<VertexId> window_box(const TorusBox& box, VertexId center, std::int64_t r) {
  if (r < 0 || 2 * r + 1 > box.side()) throw DomainError("window exceeds the box");
  const int d = box.dimension();
  const Displacement c = box.coords(center);
  std::vector<VertexId> out;
  Displacement off(d, -r);
  for (;;) {
    Displacement x(c);
    bool inside = true;
    for (int j = 0; j < d; ++j) {
      x[j] += off[j];
      if (box.boundary() == Boundary::FreeBox && (x[j] < 0 || x[j] >= box.side())) inside = false;
    }
    if (inside) out.push_back(box.vertex(x));
    int j = 0;
    while (j < d && off[j] == r) off[j++] = -r;
    if (j == d) break;
    ++off[j];
  }
  return out;
}

std::uint64_t two_point_window_sum(const ClusterForest& forest, const TorusBox& box,
                                   std::int64_t r) {
  const std::int64_t L = box.side();
  if (r < 0 || 2 * r + 1 > L) throw DomainError("window exceeds the torus");
  if (box.boundary() != Boundary::Torus) throw DomainError("two-point sums need a torus");
  const std::uint64_t N = box.vertex_count();
  const std::vector<VertexId> roots = forest.roots();

  if (box.dimension() == 1) {
    // Positions of each non-singleton cluster, ascending.
    std::unordered_map<VertexId, std::vector<std::int64_t>> members;
    for (std::uint64_t v = 0; v < N; ++v) {
      if (forest.cluster_size(static_cast<VertexId>(v)) > 1) {
        members[roots[v]].push_back(static_cast<std::int64_t>(v));
      }
    }
    std::uint64_t forward = 0;
    for (auto& [root, pos] : members) {
      const std::size_t m = pos.size();
      // For each a, count b with (b - a) mod L in [1, r] by scanning the
      // circularly doubled list.
      std::size_t j = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (j < i + 1) j = i + 1;
        while (j < i + m) {
          const std::int64_t b = pos[j % m] + (j >= m ? L : 0);
          if (b - pos[i] > r) break;
          ++j;
        }
        forward += j - i - 1;
      }
    }
    return N + 2 * forward;
  }

  std::uint64_t total = 0;
  for (std::uint64_t v = 0; v < N; ++v) {
    if (forest.cluster_size(static_cast<VertexId>(v)) == 1) {
      ++total;
      continue;
    }
    for (VertexId w : window_box(box, static_cast<VertexId>(v), r)) {
      if (roots[w] == roots[v]) ++total;
    }
  }
  return total;
}

}  // namespace lrperc
