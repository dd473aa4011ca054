#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "lrperc/errors.hpp"
#include "lrperc/harness.hpp"
#include "lrperc/sampler.hpp"

namespace fs = std::filesystem;
using namespace lrperc;

namespace {

enum Exit { kOk = 0, kAuditFailed = 1, kSchema = 2, kResource = 3, kMissing = 4, kOther = 5 };

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "run config (JSON, schema v1)")->required()->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "override the config seed");
  app->add_option("-j,--workers", o.workers, "override the worker count")->check(CLI::Range(1, 1024));
  app->add_option("-o,--out", o.out, "override the output directory");
}

// Output directory precedence: --out, then the config, then
// $LRPERC_OUTPUT_ROOT/<run id>. Relative paths resolve against
// $LRPERC_OUTPUT_ROOT when it is set.
RunConfig resolve(const Overrides& o) {
  RunConfig c = load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (!o.out.empty()) c.output_dir = o.out;
  const char* root = std::getenv("LRPERC_OUTPUT_ROOT");
  const fs::path base = root && *root ? fs::path(root) : fs::path("runs");
  if (c.output_dir.empty()) {
    c.output_dir = (base / run_id(c)).string();
  } else if (fs::path(c.output_dir).is_relative() && root && *root) {
    c.output_dir = (base / c.output_dir).string();
  }
  return c;
}

int finish(const RunSummary& s) {
  std::cout << "run " << s.run_id << " -> " << s.output_dir << "\n";
  if (s.audits) std::cout << s.audits - s.failures << "/" << s.audits << " audit lines passed\n";
  return s.ok() ? kOk : kAuditFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-range percolation sampler, estimators and inequality audits"};
  app.require_subcommand(1);

  Overrides sample_o, estimate_o, audit_o, run_o, oracle_o;
  std::string dump_stem;
  std::uint64_t dump_replica = 0;
  auto* sample = app.add_subcommand("sample", "sample replicas and store per-replica summaries");
  add_common(sample, sample_o);
  sample->add_option("--dump-edges", dump_stem, "also write the open edges of one replica to STEM.bin/STEM.json");
  sample->add_option("--replica", dump_replica, "replica to dump (default 0)");
  auto* estimate = app.add_subcommand("estimate", "sample, then write estimates and CSV exports");
  add_common(estimate, estimate_o);
  auto* audit = app.add_subcommand("audit", "sample, estimate and run every configured audit");
  add_common(audit, audit_o);
  auto* run_cmd = app.add_subcommand("run", "same as audit");
  add_common(run_cmd, run_o);
  auto* oracle = app.add_subcommand("oracle", "run the exact tiny-graph oracle suite only");
  add_common(oracle, oracle_o);
  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "summarize a results directory");
  report_cmd->add_option("dir", report_dir, "results directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      const RunConfig c = resolve(sample_o);
      const RunSummary s = run(c, Stage::Sample, std::cerr);
      if (!dump_stem.empty()) {
        if (c.search) throw SchemaError("/beta", "--dump-edges needs a beta grid");
        const TorusBox box(c.kernel.dimension(), c.sides.back(), c.boundary);
        const Kernel k = c.normalize ? normalize_kernel(c.kernel, TorusBox(box.dimension(), box.side())) : c.kernel;
        const EdgeClassTable table(box, k);
        SamplerOptions so;
        so.edge_cap = c.edge_cap;
        write_edge_dump(sample_configuration(table, k, c.beta_grid.front(), c.seed, dump_replica, so), dump_stem);
        std::cerr << "wrote " << dump_stem << ".bin and " << dump_stem << ".json\n";
      }
      return finish(s);
    }
    if (*estimate) return finish(run(resolve(estimate_o), Stage::Estimate, std::cerr));
    if (*audit) return finish(run(resolve(audit_o), Stage::Audit, std::cerr));
    if (*run_cmd) return finish(run(resolve(run_o), Stage::Audit, std::cerr));
    if (*oracle) return finish(run_oracle(resolve(oracle_o), std::cerr));
    if (*report_cmd) {
      std::cout << report(report_dir);
      return kOk;
    }
  } catch (const SchemaError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return kSchema;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kResource;
  } catch (const MissingFilesError& e) {
    std::cerr << e.what() << "\n";
    return kMissing;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOk;
}
