#include "lrperc/partitioner.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>

#include "lrperc/errors.hpp"

namespace lrperc {

namespace {

std::uint64_t pow3(int k) {
  std::uint64_t p = 1;
  for (int i = 0; i < k; ++i) p *= 3;
  return p;
}

std::vector<char> membership(std::uint32_t n, const std::vector<std::uint32_t>& A) {
  std::vector<char> in(n, 0);
  for (auto a : A) {
    if (a >= n) throw DomainError("marked vertex outside the graph");
    if (in[a]) throw DomainError("marked set has repeated vertices");
    in[a] = 1;
  }
  return in;
}

std::vector<std::uint32_t> incident_vertices(const SimpleGraph& g,
                                             const std::vector<std::size_t>& piece) {
  std::vector<std::uint32_t> out;
  for (auto i : piece) {
    out.push_back(g.edges[i].first);
    out.push_back(g.edges[i].second);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::uint64_t marked_count(const std::vector<std::uint32_t>& vertices,
                           const std::vector<char>& in_A) {
  std::uint64_t c = 0;
  for (auto v : vertices) c += in_A[v];
  return c;
}

// Connectivity of the subgraph spanned by a set of edges.
bool piece_connected(const SimpleGraph& g, const std::vector<std::size_t>& piece) {
  if (piece.empty()) return false;
  std::map<std::uint32_t, std::uint32_t> parent;
  auto find = [&](std::uint32_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (auto i : piece) {
    parent.emplace(g.edges[i].first, g.edges[i].first);
    parent.emplace(g.edges[i].second, g.edges[i].second);
  }
  std::size_t components = parent.size();
  for (auto i : piece) {
    const auto a = find(g.edges[i].first), b = find(g.edges[i].second);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

// The exploration on the tree spanned by `piece` (indices into g.edges).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_piece(
    const SimpleGraph& g, const std::vector<std::size_t>& piece, const std::vector<char>& in_A) {
  const std::vector<std::uint32_t> verts = incident_vertices(g, piece);
  const std::uint64_t total = marked_count(verts, in_A);
  if (total < 3) throw DomainError("split needs at least 3 marked vertices");
  if (piece.size() + 1 != verts.size() || !piece_connected(g, piece)) {
    throw DomainError("split input is not a tree");
  }

  // Local relabelling; the root is the smallest vertex.
  std::map<std::uint32_t, std::uint32_t> local;
  for (std::uint32_t i = 0; i < verts.size(); ++i) local[verts[i]] = i;
  const std::uint32_t n = static_cast<std::uint32_t>(verts.size());
  std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> adj(n);
  for (auto e : piece) {
    const auto a = local[g.edges[e].first], b = local[g.edges[e].second];
    adj[a].emplace_back(b, e);
    adj[b].emplace_back(a, e);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());

  std::vector<std::uint32_t> parent(n, n), order;
  std::vector<std::size_t> parent_edge(n, 0);
  std::vector<std::vector<std::uint32_t>> children(n);
  order.reserve(n);
  order.push_back(0);
  parent[0] = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto v = order[i];
    for (auto [w, e] : adj[v]) {
      if (parent[w] != n) continue;
      parent[w] = v;
      parent_edge[w] = e;
      children[v].push_back(w);
      order.push_back(w);
    }
  }
  std::vector<std::uint64_t> sub(n, 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    sub[*it] += in_A[verts[*it]];
    if (*it != 0) sub[parent[*it]] += sub[*it];
  }

  std::vector<char> absorbed(n, 0);  // child vertex whose parent edge is in W
  std::vector<std::size_t> W;
  auto absorb_subtree = [&](std::uint32_t root) {
    std::vector<std::uint32_t> stack{root};
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      absorbed[v] = 1;
      W.push_back(parent_edge[v]);
      for (auto c : children[v]) stack.push_back(c);
    }
  };

  std::uint32_t v = 0;
  std::uint64_t count = in_A[verts[0]];  // V_n contains the root
  std::uint64_t remaining = total - count;
  while (3 * count <= total) {
    std::vector<std::uint32_t> open;
    for (auto c : children[v]) {
      if (!absorbed[c]) open.push_back(c);
    }
    if (open.empty()) throw std::logic_error("split exploration ran out of edges");
    if (open.size() == 1) {
      const auto c = open.front();
      absorbed[c] = 1;
      W.push_back(parent_edge[c]);
      count += in_A[verts[c]];
      remaining -= in_A[verts[c]];
      v = c;
    } else {
      // Lightest subtree with at most half of the remaining marks; ties go to
      // the smallest root id. Children are already in ascending id order.
      std::uint32_t best = n;
      for (auto c : open) {
        if (2 * sub[c] > remaining) continue;
        if (best == n || sub[c] < sub[best]) best = c;
      }
      absorb_subtree(best);
      count += sub[best];
      remaining -= sub[best];
    }
  }

  std::sort(W.begin(), W.end());
  std::vector<std::size_t> rest;
  std::set_difference(piece.begin(), piece.end(), W.begin(), W.end(), std::back_inserter(rest));
  return {W, rest};
}

}  // namespace

bool is_connected(const SimpleGraph& graph) {
  if (graph.vertex_count == 0) return false;
  std::vector<std::vector<std::uint32_t>> adj(graph.vertex_count);
  for (const auto& [a, b] : graph.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(graph.vertex_count, 0);
  std::vector<std::uint32_t> stack{0};
  seen[0] = 1;
  std::uint32_t reached = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == graph.vertex_count;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_two(
    const SimpleGraph& tree, const std::vector<std::uint32_t>& A) {
  if (A.size() < 3) throw DomainError("split_two needs |A| >= 3");
  for (const auto& [a, b] : tree.edges) {
    if (a >= tree.vertex_count || b >= tree.vertex_count) {
      throw DomainError("edge endpoint outside the graph");
    }
  }
  if (!is_connected(tree)) throw DomainError("split_two input is disconnected");
  if (tree.edges.size() + 1 != tree.vertex_count) throw DomainError("split_two input is not a tree");
  const auto in_A = membership(tree.vertex_count, A);
  std::vector<std::size_t> all(tree.edges.size());
  std::iota(all.begin(), all.end(), 0);
  return split_piece(tree, all, in_A);
}

PartitionResult partition_k(const SimpleGraph& graph, const std::vector<std::uint32_t>& A,
                            int k) {
  if (k < 1) throw DomainError("partition_k needs k >= 1");
  const std::uint64_t a = A.size();
  if (a < pow3(k)) throw DomainError("partition_k needs |A| >= 3^k");
  for (const auto& [u, w] : graph.edges) {
    if (u >= graph.vertex_count || w >= graph.vertex_count) {
      throw DomainError("edge endpoint outside the graph");
    }
  }
  if (!is_connected(graph)) throw DomainError("partition_k input is disconnected");
  const auto in_A = membership(graph.vertex_count, A);

  // BFS spanning tree from vertex 0, neighbours in ascending order; ties
  // between parallel edges go to the lower edge index.
  std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> adj(graph.vertex_count);
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const auto& [u, w] = graph.edges[i];
    adj[u].emplace_back(w, i);
    adj[w].emplace_back(u, i);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  std::vector<char> seen(graph.vertex_count, 0);
  std::queue<std::uint32_t> q;
  std::vector<std::size_t> tree_edges;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    const auto v = q.front();
    q.pop();
    for (auto [w, e] : adj[v]) {
      if (seen[w]) continue;
      seen[w] = 1;
      tree_edges.push_back(e);
      q.push(w);
    }
  }
  std::sort(tree_edges.begin(), tree_edges.end());

  const std::uint64_t upper_scale = pow3(k - 1);
  std::vector<std::vector<std::size_t>> pieces{tree_edges};
  for (;;) {
    auto heavy = std::find_if(pieces.begin(), pieces.end(), [&](const auto& piece) {
      return marked_count(incident_vertices(graph, piece), in_A) * upper_scale >= a;
    });
    if (heavy == pieces.end()) break;
    auto [first, second] = split_piece(graph, *heavy, in_A);
    *heavy = std::move(first);
    pieces.insert(heavy + 1, std::move(second));
  }

  PartitionResult r;
  r.pieces = std::move(pieces);
  for (const auto& piece : r.pieces) {
    r.vertex_sets.push_back(incident_vertices(graph, piece));
    r.counts.push_back(marked_count(r.vertex_sets.back(), in_A));
  }
  return r;
}

PartitionReport verify_partition(const SimpleGraph& graph, const std::vector<std::uint32_t>& A,
                                 int k, const PartitionResult& result) {
  PartitionReport rep;
  auto fail = [&](const std::string& what) {
    rep.ok = false;
    if (std::find(rep.violations.begin(), rep.violations.end(), what) == rep.violations.end()) {
      rep.violations.push_back(what);
    }
  };
  if (k < 1) {
    fail("k must be >= 1");
    return rep;
  }
  std::vector<char> in_A(graph.vertex_count, 0);
  for (auto v : A) {
    if (v < graph.vertex_count) in_A[v] = 1;
  }
  const std::uint64_t a = A.size();
  std::vector<char> used(graph.edges.size(), 0), covered(graph.vertex_count, 0);
  for (const auto& piece : result.pieces) {
    if (piece.empty()) fail("empty piece");
    bool valid = true;
    for (auto i : piece) {
      if (i >= graph.edges.size()) {
        fail("edge index out of range");
        valid = false;
        continue;
      }
      if (used[i]) fail("disjointness");
      used[i] = 1;
      covered[graph.edges[i].first] = covered[graph.edges[i].second] = 1;
    }
    if (!valid || piece.empty()) continue;
    if (!piece_connected(graph, piece)) fail("connectivity");
    const std::uint64_t c = marked_count(incident_vertices(graph, piece), in_A);
    if (c * pow3(k) < a) fail("balance lower bound");
    if (c * pow3(k - 1) >= a) fail("balance upper bound is strict");
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) fail("coverage");
  if (result.pieces.size() < pow3(k - 1) + 1) fail("piece count m >= 3^(k-1)+1");
  return rep;
}

}  // namespace lrperc
