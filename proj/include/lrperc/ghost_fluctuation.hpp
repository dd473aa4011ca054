#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "lrperc/cluster_engine.hpp"
#include "lrperc/model_kernel.hpp"
#include "lrperc/sampler.hpp"

namespace lrperc {

// Translation-invariant edge weights, one value per displacement class,
// normalized so that the oriented edges at a vertex carry total weight 1.
class GoodWeight {
 public:
  // w proportional to J.
  static GoodWeight from_kernel(const EdgeClassTable& table);
  // Arbitrary nonnegative per-class values, normalized.
  static GoodWeight from_values(const EdgeClassTable& table, std::vector<double> values);
  // The optimizing choice w ∝ E[1(S'_{e,n}) sqrt(p/(1-p))]^2 from per-class
  // two-arm probabilities.
  static GoodWeight optimized(const EdgeClassTable& table, const std::vector<double>& two_arm,
                              double beta);

  double operator[](std::size_t c) const { return w_[c]; }
  const std::vector<double>& values() const { return w_; }

 private:
  std::vector<double> w_;
};

struct GhostParams {
  GoodWeight weight;
  double h;
};

// Probability that a set of edges of total weight `w_total` contains a green
// edge of the ghost field with intensity h.
double ghost_hit_probability(double w_total, double h);

// Green edges touching `vertices`, sampled explicitly (test oracle for tiny boxes).
std::vector<Edge> sample_ghost_edges(const EdgeClassTable& table, const GhostParams& ghost,
                                     const std::vector<VertexId>& vertices, std::uint64_t seed,
                                     std::uint64_t stream);

// True iff x and y lie in distinct clusters that both have at least n vertices.
bool two_arm_indicator(const ClusterForest& forest, VertexId x, VertexId y, std::uint64_t n);

// Open-edge adjacency, neighbour lists ascending.
class Adjacency {
 public:
  explicit Adjacency(const Configuration& c);
  std::size_t vertex_count() const { return offsets_.size() - 1; }
  bool is_open(VertexId u, VertexId w) const;
  std::span<const VertexId> neighbours(VertexId v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<VertexId> targets_;
};

// Vertex set of the cluster of v, ascending.
std::vector<VertexId> cluster_vertices(const Adjacency& adj, VertexId v);

// Per-class edge probabilities 1 - exp(-beta J).
std::vector<double> class_probabilities(const EdgeClassTable& table, double beta);

// h_{p,w}(K) summed directly over the edges touching K.
double fluctuation(const EdgeClassTable& table, const Adjacency& adj,
                   const std::vector<VertexId>& cluster, const std::vector<double>& p,
                   const GoodWeight& w);

// w(E(K)): total weight of the edges touching K.
double touching_weight(const EdgeClassTable& table, const std::vector<VertexId>& cluster,
                       const std::vector<double>& w);

struct ExplorationStep {
  VertexId u;
  VertexId w;
  bool open;
};

struct ExplorationTrace {
  std::vector<ExplorationStep> steps;
  std::vector<double> Z;  // Z_0 .. Z_T
  std::vector<double> Q;  // Q_0 .. Q_T
  std::vector<VertexId> cluster;
  std::size_t T() const { return steps.size(); }
};

// Explores the cluster of v one touching edge at a time: vertices leave a
// FIFO queue in discovery order and query their unqueried edges in ascending
// order of the other endpoint.
ExplorationTrace explore_cluster(const EdgeClassTable& table, const Adjacency& adj, VertexId v,
                                 const std::vector<double>& p, const GoodWeight& w);

// Per-replica two-arm statistics accumulated over an ensemble.
class TwoGhostAccumulator {
 public:
  // `n_grid`: vertex-count thresholds; `lambda_grid`: touching-J-weight thresholds.
  TwoGhostAccumulator(const EdgeClassTable& table, double beta, std::vector<std::uint64_t> n_grid,
                      std::vector<double> lambda_grid);
  ~TwoGhostAccumulator();
  TwoGhostAccumulator(const TwoGhostAccumulator&) = delete;
  TwoGhostAccumulator& operator=(const TwoGhostAccumulator&) = delete;

  void add(const Configuration& c);
  // Merge another accumulator built with identical parameters.
  void merge(const TwoGhostAccumulator& other);

  std::uint64_t replicas() const { return replicas_; }
  double beta() const { return beta_; }
  const std::vector<std::uint64_t>& n_grid() const { return n_grid_; }
  const std::vector<double>& lambda_grid() const { return lambda_grid_; }
  // Estimated P(S'_{e,n}) per class for n_grid[i].
  std::vector<double> two_arm_probabilities(std::size_t i) const;
  std::vector<double> weight_arm_probabilities(std::size_t i) const;
  // Estimated P(|K_o| >= n) for every n in 1..N.
  std::vector<double> tail() const;
  const EdgeClassTable& table() const { return table_; }

 private:
  struct Fft;
  const EdgeClassTable& table_;
  double beta_;
  std::vector<std::uint64_t> n_grid_;
  std::vector<double> lambda_grid_;
  std::uint64_t replicas_ = 0;
  std::vector<std::vector<double>> vertex_counts_;  // [n index][class]
  std::vector<std::vector<double>> weight_counts_;  // [lambda index][class]
  std::vector<std::uint64_t> size_vertices_;        // vertices in clusters of size s
  std::vector<std::uint32_t> offset_class_;
  std::unique_ptr<Fft> fft_;
};

enum class TwoGhostVariant { Vertex, Weight };

struct TwoGhostResult {
  double lhs = 0;
  double rhs = 0;
  double margin = 0;  // rhs / lhs; +inf when lhs = 0
  double A = 0;
  double theta = 0;
  double threshold = 0;  // n or lambda
  std::uint64_t replicas = 0;
};

// Minimal A with P(|K| >= n) <= A n^-theta over the ensemble's tail.
double tail_prefactor(const std::vector<double>& tail, double theta);

// Vertex variant: sum_e E[1(S'_{e,n}) sqrt(p/(1-p))]^2 vs 10000 A^2/((1-2θ)^2 n^{1+2θ}).
// Weight variant: sum_e sqrt(J(e^{βJ}-1)) P(S_{e,λ}) vs 42/sqrt(λ).
TwoGhostResult two_ghost_audit(const TwoGhostAccumulator& acc, std::size_t index,
                               TwoGhostVariant variant, double theta);

}  // namespace lrperc
