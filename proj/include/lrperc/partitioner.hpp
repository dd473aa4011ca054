#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lrperc {

struct SimpleGraph {
  std::uint32_t vertex_count = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

struct PartitionResult {
  // Each piece is a list of indices into the input graph's edge list.
  std::vector<std::vector<std::size_t>> pieces;
  std::vector<std::vector<std::uint32_t>> vertex_sets;
  std::vector<std::uint64_t> counts;  // |A ∩ V_i|
  std::size_t m() const { return pieces.size(); }
};

struct PartitionReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Two connected edge sets covering a tree, found by the rooted exploration
// that absorbs single edges or light subtrees until the absorbed side holds
// more than |A|/3 marked vertices. The absorbed side holds at most 2|A|/3;
// the other side holds at least |A|/3 and fewer than |A|.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_two(
    const SimpleGraph& tree, const std::vector<std::uint32_t>& A);

// Pieces E_1..E_m of a BFS spanning tree with 3^-k |A| <= |A ∩ V_i| < 3^-k+1 |A|.
PartitionResult partition_k(const SimpleGraph& graph, const std::vector<std::uint32_t>& A,
                            int k);

PartitionReport verify_partition(const SimpleGraph& graph, const std::vector<std::uint32_t>& A,
                                 int k, const PartitionResult& result);

bool is_connected(const SimpleGraph& graph);

}  // namespace lrperc
