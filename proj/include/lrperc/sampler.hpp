#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lrperc/model_kernel.hpp"

namespace lrperc {

using Edge = std::pair<VertexId, VertexId>;

struct Configuration {
  TorusBox box{1, 2};
  std::string kernel_id;
  double beta = 0;
  std::vector<Edge> open_edges;  // sorted, u < w
  std::uint64_t seed = 0;
  std::uint64_t replica_index = 0;
};

struct SamplerOptions {
  std::uint64_t edge_cap = 200'000'000;
  // Classes whose probability exceeds this use direct per-edge Bernoulli.
  double skip_threshold = 0.5;
};

// Every edge open at some beta <= `ceiling`, each tagged with the smallest
// beta at which it is open. Restricting to beta_e <= beta gives an exact
// sample at beta, and the samples are nested in beta.
struct CoupledSample {
  TorusBox box{1, 2};
  std::string kernel_id;
  double ceiling = 0;
  std::uint64_t seed = 0;
  std::uint64_t replica_index = 0;
  std::vector<Edge> edges;         // sorted, u < w
  std::vector<double> thresholds;  // parallel to edges

  Configuration at(double beta) const;
};

// Canonical id of an unordered pair: u * N + w with u < w.
inline std::uint64_t edge_id(const TorusBox& box, VertexId u, VertexId w) {
  if (u > w) std::swap(u, w);
  return static_cast<std::uint64_t>(u) * box.vertex_count() + w;
}

CoupledSample sample_coupled(const EdgeClassTable& table, const Kernel& kernel, double ceiling,
                             std::uint64_t seed, std::uint64_t replica,
                             const SamplerOptions& options = {});

Configuration sample_configuration(const EdgeClassTable& table, const Kernel& kernel,
                                   double beta, std::uint64_t seed, std::uint64_t replica,
                                   const SamplerOptions& options = {});

// Reference sampler: one keyed uniform per unordered pair. N <= 4096.
Configuration sample_naive(const EdgeClassTable& table, const Kernel& kernel, double beta,
                           std::uint64_t seed, std::uint64_t replica);

// Expected number of open edges, sum over classes of multiplicity * p.
double expected_open_edges(const EdgeClassTable& table, double beta);

// Per-class open-edge counts of a configuration.
std::vector<std::uint64_t> class_counts(const EdgeClassTable& table, const Configuration& c);

// Debug dump: `<stem>.bin` holds u64 little-endian vertex ids (two per edge),
// `<stem>.json` the header.
void write_edge_dump(const Configuration& c, const std::string& stem);
Configuration read_edge_dump(const std::string& stem);

}  // namespace lrperc
