#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrperc/estimators.hpp"
#include "lrperc/exact_oracle.hpp"
#include "lrperc/model_kernel.hpp"

namespace lrperc {

constexpr int kConfigSchemaVersion = 1;
constexpr int kResultSchemaVersion = 1;

struct TailAuditSpec {
  bool enabled = false;
  std::vector<std::uint64_t> n_grid;  // empty: half-octave grid up to N
  std::optional<std::pair<double, double>> window;
};

struct TwoPointAuditSpec {
  bool enabled = false;
  std::vector<std::int64_t> r_grid;  // empty: powers of two below L/2
  std::optional<std::pair<double, double>> window;
};

struct TwoGhostAuditSpec {
  bool enabled = false;
  std::vector<std::uint64_t> n_grid{16, 64, 256};
  std::vector<double> lambda_grid{16, 64, 256};
  // Either explicit β values or fractions of the searched β̂_c.
  std::vector<double> betas;
  std::vector<double> fractions;
  std::uint64_t replicas = 0;  // 0: the run's replica count
};

struct OracleAuditSpec {
  bool enabled = false;
  OracleSuiteOptions options;
};

struct BetaSearchSpec {
  std::vector<std::int64_t> sides;  // empty: L/16, L/4, L for the largest box
  std::uint64_t replicas = 200;
  double level = 0.5;
  double threshold_exponent = 0.75;
  double initial_ceiling = 2.0;
  double drift_tolerance = 0.05;
};

struct RunConfig {
  Kernel kernel = Kernel::pure_power(1, 0.5);
  bool normalize = true;
  std::vector<std::int64_t> sides;
  Boundary boundary = Boundary::Torus;
  std::vector<double> beta_grid;
  std::optional<BetaSearchSpec> search;
  std::uint64_t replicas = 0;
  std::uint64_t seed = 1;
  TailAuditSpec tail;
  TwoPointAuditSpec two_point;
  TwoGhostAuditSpec two_ghost;
  OracleAuditSpec oracle;
  BootstrapOptions bootstrap;
  double tolerance = 0.05;
  std::uint64_t edge_cap = 200'000'000;
  std::string output_dir;
  int workers = 1;
};

// Strict validation; unknown keys and bad values raise SchemaError with a
// JSON pointer to the offending entry.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
// Fully resolved config with every default spelled out.
nlohmann::json to_json(const RunConfig& c);
// FNV-1a 64 of the resolved config without output_dir and workers.
std::string run_id(const RunConfig& c);

nlohmann::json kernel_to_json(const Kernel& k);
Kernel kernel_from_json(const nlohmann::json& j, const std::string& path = "/kernel");

enum class Stage { Sample, Estimate, Audit };

struct RunSummary {
  std::string run_id;
  std::string output_dir;
  std::uint64_t audits = 0;
  std::uint64_t failures = 0;
  std::uint64_t oracle_violations = 0;
  bool ok() const { return failures == 0 && oracle_violations == 0; }
};

// Runs every stage up to `stage`. Completed replicas found in the output
// directory are reused.
RunSummary run(const RunConfig& c, Stage stage, std::ostream& log);
// Oracle suite only.
RunSummary run_oracle(const RunConfig& c, std::ostream& log);

// Files a completed run of `c` leaves in its output directory.
std::vector<std::string> expected_files(const RunConfig& c);
// Human-readable summary of a results directory.
std::string report(const std::string& dir);

}  // namespace lrperc
