#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrperc/cluster_engine.hpp"
#include "lrperc/model_kernel.hpp"
#include "lrperc/sampler.hpp"
#include "lrperc/statistics.hpp"

namespace lrperc {

struct EstimateRecord {
  std::string quantity;
  nlohmann::json params = nlohmann::json::object();
  double estimate = 0;
  std::uint64_t samples = 0;
  double stderr_ = 0;
  double ci_level = 0.95;
  double ci_lo = 0;
  double ci_hi = 0;
  std::uint64_t seed = 0;
  std::string run_id;
};

nlohmann::json to_json(const EstimateRecord& r);
EstimateRecord estimate_from_json(const nlohmann::json& j);

// Everything later estimators need from one sampled configuration.
struct ReplicaSummary {
  std::uint64_t replica = 0;
  std::uint64_t open_edges = 0;
  std::uint32_t max_cluster = 0;    // |K_max| over the window
  std::map<std::uint32_t, std::uint64_t> size_counts;  // cluster size -> clusters
  std::vector<std::uint64_t> two_point_sums;  // aligned with the ensemble's r grid
};

nlohmann::json to_json(const ReplicaSummary& r);
ReplicaSummary replica_from_json(const nlohmann::json& j);

struct Ensemble {
  TorusBox box{1, 2};
  std::string kernel_id;
  double beta = 0;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> r_grid;
  std::vector<ReplicaSummary> replicas;
};

// `window` empty means the whole box.
ReplicaSummary summarize_replica(const Configuration& c, const std::vector<std::int64_t>& r_grid,
                                 const std::vector<VertexId>& window = {});

struct EnsembleOptions {
  std::uint64_t replicas = 100;
  std::uint64_t first_replica = 0;
  std::vector<std::int64_t> r_grid;
  std::vector<VertexId> window;
  int workers = 1;
  SamplerOptions sampler;
};

Ensemble run_ensemble(const EdgeClassTable& table, const Kernel& kernel, double beta,
                      std::uint64_t seed, const EnsembleOptions& options);

struct BootstrapOptions {
  int resamples = 1000;
  double level = 0.95;
};

// P(|K_v| >= n) from the fraction of vertices in clusters of size >= n.
std::vector<EstimateRecord> tail_estimate(const Ensemble& e, const std::vector<std::uint64_t>& n_grid,
                                          const BootstrapOptions& b = {});
// (1/|Λ_r|) sum_{x ∈ Λ_r} P(0 <-> x); r must be in the ensemble's grid.
EstimateRecord two_point_avg_estimate(const Ensemble& e, std::int64_t r,
                                      const BootstrapOptions& b = {});
// min{n >= 0 : P̂(|K_max| >= n) <= 1/e}.
std::uint32_t m_typical_estimate(const Ensemble& e);

struct FitPoint {
  double x;
  double y;
};

struct ExponentFit {
  double exponent = 0;  // decay exponent, minus the log-log slope
  double intercept = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  double ci_level = 0.95;
  double window_lo = 0;
  double window_hi = 0;
  std::size_t points = 0;
  double r2 = 1;
};

nlohmann::json to_json(const ExponentFit& f);

// Log-log least squares over points with window_lo <= x <= window_hi;
// residual bootstrap CI.
ExponentFit exponent_fit(const std::vector<FitPoint>& points, double window_lo, double window_hi,
                         std::uint64_t seed, const BootstrapOptions& b = {});
std::vector<FitPoint> fit_points(const std::vector<EstimateRecord>& records, const std::string& key);
// Default tail window [10, N^0.8 / 10].
std::pair<double, double> default_tail_window(std::uint64_t vertex_count);

struct AuditLine {
  std::string quantity;
  double fitted = 0;
  double bound = 0;
  double predicted = 0;
  double tolerance = 0;
  bool pass = false;
};

struct BoundAudit {
  int dimension = 0;
  double alpha = 0;
  std::vector<AuditLine> lines;
  std::vector<std::string> flags;
  bool pass() const;
};

nlohmann::json to_json(const BoundAudit& a);

// Fitted decay exponents against the proven lower bounds (asserted, with
// tolerance) and the predicted values (reported only).
BoundAudit bound_audit(int dimension, double alpha, const std::optional<ExponentFit>& tail_fit,
                       const std::optional<ExponentFit>& two_point_fit, double tolerance = 0.05);

struct BetaCOptions {
  std::uint64_t replicas = 200;
  std::uint64_t seed = 1;
  double threshold_exponent = 0.75;  // |K_max| >= N^threshold_exponent
  double level = 0.5;
  double initial_ceiling = 2.0;
  double max_ceiling = 1e6;
  int bisection_steps = 60;
  int susceptibility_points = 32;
  int workers = 1;
  BootstrapOptions bootstrap;
  SamplerOptions sampler;
  // Relative growth of the crossing over the last size doubling above which
  // a monotone drift is called non-convergent.
  double drift_tolerance = 0.05;
  // Rescale the kernel to unit total weight on the largest torus first.
  bool normalize = true;
};

struct BetaCLevel {
  std::int64_t side = 0;
  std::uint64_t threshold = 0;
  double crossing = 0;
  double stderr_ = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  double ceiling = 0;
  double susceptibility_peak = 0;
  std::vector<double> replica_crossings;
  std::vector<double> beta_grid;
  std::vector<double> susceptibility;  // mean (sum |C|^2 - max^2)/N on beta_grid
};

struct BetaCResult {
  double beta_hat = 0;
  double stderr_ = 0;
  double systematic = 0;  // spread of crossings across sizes
  double kernel_scale = 1;  // factor applied to normalize the kernel
  bool non_convergent = false;
  std::vector<std::string> flags;
  std::vector<BetaCLevel> levels;
};

nlohmann::json to_json(const BetaCResult& r);

// Empirical D_L(β) = P̂(|K_max| >= N^{3/4}) on the exact monotone coupling of
// each replica; its level crossing is found by bisection for every side in
// `sides` (increasing). The kernel is normalized on the largest torus.
BetaCResult beta_c_search(const Kernel& kernel, const std::vector<std::int64_t>& sides,
                          const BetaCOptions& options = {});

// D̂(β) for a set of replica crossing points.
double crossing_fraction(const std::vector<double>& replica_crossings, double beta);

}  // namespace lrperc
