#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace lrperc {

// A small weighted graph given directly by its edge probabilities.
struct TinyGraph {
  std::uint32_t vertex_count = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<double> p;  // per edge
  std::uint32_t window = 0;  // bitmask of Λ

  static constexpr std::uint32_t kMaxVertices = 12;
  static constexpr std::size_t kMaxEdges = 14;

  std::uint32_t window_size() const;
  void validate() const;
};

// Exact law of the configuration (edge bitmask) together with per-configuration
// cluster statistics.
class ExactModel {
 public:
  explicit ExactModel(const TinyGraph& g);

  const TinyGraph& graph() const { return g_; }
  std::size_t configurations() const { return prob_.size(); }
  const std::vector<double>& probabilities() const { return prob_; }
  // |K_max(Λ)| and |K_u ∩ Λ| in configuration omega.
  std::uint32_t kmax(std::uint32_t omega) const { return kmax_[omega]; }
  std::uint32_t rooted(std::uint32_t u, std::uint32_t omega) const {
    return inter_[static_cast<std::size_t>(omega) * g_.vertex_count + u];
  }
  // Vertex mask of the cluster of u in omega.
  std::uint32_t cluster_mask(std::uint32_t u, std::uint32_t omega) const;

  double maxcluster_tail(double lambda) const;
  double rooted_tail(std::uint32_t u, double lambda) const;
  // min{n >= 0 : P(|K_max(Λ)| >= n) <= 1/e}.
  std::uint32_t typical_max() const;

 private:
  TinyGraph g_;
  std::vector<double> prob_;
  std::vector<std::uint8_t> kmax_;
  std::vector<std::uint8_t> inter_;
};

std::vector<double> enumerate_measure(const TinyGraph& g);
double maxcluster_tail_exact(const TinyGraph& g, double lambda);
double rooted_tail_exact(const TinyGraph& g, std::uint32_t u, double lambda);
std::uint32_t typical_max_exact(const TinyGraph& g);

// An event is its indicator over all edge bitmasks.
using Event = std::vector<char>;

bool is_increasing(const Event& a, std::size_t edge_count);
// Minimal elements of an increasing event: its edge-minimal witnesses.
std::vector<std::uint32_t> minimal_witnesses(const Event& a, std::size_t edge_count);
// Indicator of A_1 ∘ ... ∘ A_k.
Event disjoint_occurrence(const std::vector<Event>& events, std::size_t edge_count);
double disjoint_occurrence_exact(const TinyGraph& g, const std::vector<Event>& events);

struct OracleViolation {
  std::string graph;
  std::string inequality;
  double lhs;
  double rhs;
  nlohmann::json params;
};

struct OracleReport {
  std::uint64_t checks = 0;
  std::vector<OracleViolation> violations;
  void merge(OracleReport other);
  bool ok() const { return violations.empty(); }
};

constexpr double kOracleTolerance = 1e-9;

// P(|K_max| >= 3^k λ) <= P(|K_max| >= λ)^(3^(k-1)+1) and its rooted analogue,
// for k >= 1 and λ on a half-integer grid with 3^k λ <= |Λ|; also checks that
// the cluster partition supplies the disjoint witnesses behind both.
OracleReport verify_maximum_tail(const ExactModel& m, const std::string& id);
OracleReport verify_maximum_tail(const ExactModel& m, const std::string& id, bool witnesses);
// Tightness of |K_max(Λ)| around its typical value M.
OracleReport verify_tightness(const ExactModel& m, const std::string& id);
// Susceptibility and maximum-size bounds with explicit constants for a
// measured tail prefactor A(θ).
OracleReport verify_hyperscaling_bounds(const ExactModel& m, double theta, const std::string& id);
// P(A ∘ B) <= P(A) P(B) for `count` random increasing events pairs.
OracleReport verify_bk(const ExactModel& m, std::uint64_t seed, int count, const std::string& id);

// All connected simple graphs on n vertices up to isomorphism.
std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> connected_graphs(
    std::uint32_t n);

struct OracleSuiteOptions {
  std::uint32_t max_exhaustive_vertices = 5;
  int random_graphs = 200;
  std::uint32_t random_max_vertices = 7;
  std::uint64_t seed = 1;
  std::vector<double> thetas{0.0, 0.2, 0.4};
  int workers = 1;
};

struct OracleSuiteSummary {
  OracleReport report;
  std::uint64_t graphs = 0;
  std::uint64_t instances = 0;
  double seconds = 0;
};

OracleSuiteSummary run_oracle_suite(const OracleSuiteOptions& options);

}  // namespace lrperc
