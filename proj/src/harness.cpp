#include "lrperc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "lrperc/errors.hpp"
#include "lrperc/ghost_fluctuation.hpp"
#include "lrperc/rng.hpp"
#include "lrperc/sampler.hpp"

namespace lrperc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Schema validation

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_.empty() ? "/" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const std::string& key) {
    if (!has(key)) throw SchemaError(child(key), "required field is missing");
    return j_.at(key);
  }
  std::string child(const std::string& key) const { return path_ + "/" + key; }

  double number(const std::string& key) { return as_number(at(key), child(key)); }
  double number(const std::string& key, double fallback) {
    return has(key) ? as_number(j_.at(key), child(key)) : fallback;
  }
  std::uint64_t uint(const std::string& key) { return as_uint(at(key), child(key)); }
  std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
    return has(key) ? as_uint(j_.at(key), child(key)) : fallback;
  }
  std::string string(const std::string& key) { return as_string(at(key), child(key)); }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? as_string(j_.at(key), child(key)) : fallback;
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) throw SchemaError(child(key), "expected a boolean");
    return j_.at(key).get<bool>();
  }

  // Rejects keys that no accessor asked for.
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw SchemaError(child(key), "unknown field");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw SchemaError(path, "expected a finite number");
    return x;
  }
  static std::uint64_t as_uint(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (x >= 0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
    }
    throw SchemaError(path, "expected a nonnegative integer");
  }
  static std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw SchemaError(path, "expected a string");
    return v.get<std::string>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
auto list(const json& v, const std::string& path, F&& element) {
  if (!v.is_array() || v.empty()) throw SchemaError(path, "expected a nonempty array");
  std::vector<decltype(element(v[0], path))> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(element(v[i], path + "/" + std::to_string(i)));
  return out;
}

std::vector<double> number_list(const json& v, const std::string& path) {
  return list(v, path, [](const json& x, const std::string& p) { return Reader::as_number(x, p); });
}

std::vector<std::uint64_t> uint_list(const json& v, const std::string& path) {
  return list(v, path, [](const json& x, const std::string& p) { return Reader::as_uint(x, p); });
}

std::pair<double, double> window_from(const json& v, const std::string& path) {
  const auto w = number_list(v, path);
  if (w.size() != 2 || !(w[0] > 0) || !(w[1] > w[0])) {
    throw SchemaError(path, "expected [lo, hi] with 0 < lo < hi");
  }
  return {w[0], w[1]};
}

std::vector<std::int64_t> increasing_sides(const json& v, const std::string& path) {
  std::vector<std::int64_t> out;
  for (auto s : uint_list(v, path)) out.push_back(static_cast<std::int64_t>(s));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 2) throw SchemaError(path + "/" + std::to_string(i), "side must be at least 2");
    if (i > 0 && out[i] <= out[i - 1]) {
      throw SchemaError(path + "/" + std::to_string(i), "sides must be strictly increasing");
    }
  }
  return out;
}

// A section may be `true`, `false` or an options object.
bool section(Reader& r, const std::string& key, std::optional<Reader>& body) {
  if (!r.has(key)) return false;
  const json& v = r.at(key);
  if (v.is_boolean()) return v.get<bool>();
  body.emplace(v, r.child(key));
  return true;
}

}  // namespace

nlohmann::json kernel_to_json(const Kernel& k) {
  json j{{"form", to_string(k.form())},
         {"d", k.dimension()},
         {"alpha", k.alpha()},
         {"norm", to_string(k.norm())}};
  if (k.form() == KernelForm::PurePower) {
    j["amplitude"] = k.amplitude();
  } else {
    json t = json::array();
    for (const auto& e : k.table()) t.push_back({{"radius", e.radius}, {"weight", e.weight}});
    j["table"] = t;
  }
  return j;
}

Kernel kernel_from_json(const nlohmann::json& j, const std::string& path) {
  Reader r(j, path);
  const std::string form = r.string("form", "pure_power");
  const auto d = r.uint("d");
  if (d < 1 || d > 8) throw SchemaError(r.child("d"), "dimension must be in 1..8");
  const double alpha = r.number("alpha");
  Norm norm = Norm::L2;
  if (r.has("norm")) {
    try {
      norm = parse_norm(r.string("norm"));
    } catch (const DomainError& e) {
      throw SchemaError(r.child("norm"), e.what());
    }
  }
  try {
    if (form == "pure_power") {
      const double amplitude = r.number("amplitude", 1.0);
      r.finish();
      return Kernel::pure_power(static_cast<int>(d), alpha, amplitude, norm);
    }
    if (form == "radial_table") {
      const std::string tpath = r.child("table");
      auto table = list(r.at("table"), tpath, [](const json& e, const std::string& p) {
        Reader er(e, p);
        RadialEntry entry{er.number("radius"), er.number("weight")};
        er.finish();
        return entry;
      });
      r.finish();
      return Kernel::radial_table(static_cast<int>(d), alpha, std::move(table), norm);
    }
  } catch (const DomainError& e) {
    throw SchemaError(path, e.what());
  }
  throw SchemaError(r.child("form"), "expected \"pure_power\" or \"radial_table\"");
}

RunConfig parse_config(const nlohmann::json& j) {
  Reader r(j, "");
  RunConfig c;
  const auto version = r.uint("schema_version");
  if (version != kConfigSchemaVersion) {
    throw SchemaError("/schema_version", "unsupported version " + std::to_string(version));
  }

  {
    json kernel = r.at("kernel");
    if (kernel.is_object() && kernel.contains("normalize")) {
      if (!kernel["normalize"].is_boolean()) throw SchemaError("/kernel/normalize", "expected a boolean");
      c.normalize = kernel["normalize"].get<bool>();
      kernel.erase("normalize");
    }
    c.kernel = kernel_from_json(kernel, "/kernel");
  }
  const int d = c.kernel.dimension();

  {
    Reader b(r.at("boxes"), "/boxes");
    c.sides = increasing_sides(b.at("sides"), "/boxes/sides");
    try {
      c.boundary = parse_boundary(b.string("boundary", "torus"));
    } catch (const DomainError& e) {
      throw SchemaError("/boxes/boundary", e.what());
    }
    b.finish();
    for (auto L : c.sides) TorusBox(d, L, c.boundary);
  }

  {
    Reader b(r.at("beta"), "/beta");
    const bool grid = b.has("grid"), search = b.has("search");
    if (grid == search) throw SchemaError("/beta", "expected exactly one of \"grid\" or \"search\"");
    if (grid) {
      c.beta_grid = number_list(b.at("grid"), "/beta/grid");
      for (std::size_t i = 0; i < c.beta_grid.size(); ++i) {
        if (c.beta_grid[i] < 0) throw SchemaError("/beta/grid/" + std::to_string(i), "beta must be >= 0");
      }
    } else {
      if (c.boundary != Boundary::Torus) throw SchemaError("/beta/search", "search needs torus boxes");
      const json& sv = b.at("search");
      BetaSearchSpec s;
      const json search_body = sv.is_boolean() ? json::object() : sv;
      Reader sr(search_body, "/beta/search");
      if (sr.has("sides")) s.sides = increasing_sides(sr.at("sides"), "/beta/search/sides");
      s.replicas = sr.uint("replicas", s.replicas);
      s.level = sr.number("level", s.level);
      s.threshold_exponent = sr.number("threshold_exponent", s.threshold_exponent);
      s.initial_ceiling = sr.number("initial_ceiling", s.initial_ceiling);
      s.drift_tolerance = sr.number("drift_tolerance", s.drift_tolerance);
      sr.finish();
      const std::int64_t largest = c.sides.back();
      if (s.sides.empty()) {
        for (std::int64_t f : {16, 4, 1}) {
          if (largest / f >= 2) s.sides.push_back(largest / f);
        }
      }
      if (s.sides.size() < 2) throw SchemaError("/beta/search/sides", "need at least two sizes");
      if (c.normalize && s.sides.back() != largest) {
        throw SchemaError("/beta/search/sides",
                          "the largest search size must equal the largest box when normalizing");
      }
      if (s.replicas < 2) throw SchemaError("/beta/search/replicas", "need at least 2 replicas");
      if (!(s.level > 0 && s.level < 1)) throw SchemaError("/beta/search/level", "must lie in (0, 1)");
      if (!(s.threshold_exponent > 0 && s.threshold_exponent <= 1)) {
        throw SchemaError("/beta/search/threshold_exponent", "must lie in (0, 1]");
      }
      if (!(s.initial_ceiling > 0)) throw SchemaError("/beta/search/initial_ceiling", "must be positive");
      if (!(s.drift_tolerance > 0)) throw SchemaError("/beta/search/drift_tolerance", "must be positive");
      c.search = s;
    }
    b.finish();
  }

  c.replicas = r.uint("replicas");
  if (c.replicas < 1) throw SchemaError("/replicas", "need at least one replica");
  c.seed = r.uint("seed", c.seed);

  if (r.has("audits")) {
    Reader a(r.at("audits"), "/audits");
    std::optional<Reader> body;
    if ((c.tail.enabled = section(a, "tail", body)) && body) {
      if (body->has("n_grid")) c.tail.n_grid = uint_list(body->at("n_grid"), "/audits/tail/n_grid");
      for (std::size_t i = 0; i < c.tail.n_grid.size(); ++i) {
        if (c.tail.n_grid[i] < 1) throw SchemaError("/audits/tail/n_grid/" + std::to_string(i), "n must be >= 1");
      }
      if (body->has("window")) c.tail.window = window_from(body->at("window"), "/audits/tail/window");
      body->finish();
    }
    body.reset();
    if ((c.two_point.enabled = section(a, "two_point", body)) && body) {
      if (body->has("r_grid")) {
        for (auto v : uint_list(body->at("r_grid"), "/audits/two_point/r_grid")) {
          c.two_point.r_grid.push_back(static_cast<std::int64_t>(v));
        }
      }
      if (body->has("window")) c.two_point.window = window_from(body->at("window"), "/audits/two_point/window");
      body->finish();
    }
    if (c.two_point.enabled) {
      if (c.boundary != Boundary::Torus) throw SchemaError("/audits/two_point", "needs torus boxes");
      for (std::size_t i = 0; i < c.two_point.r_grid.size(); ++i) {
        const auto rr = c.two_point.r_grid[i];
        if (rr < 1 || 2 * rr + 1 > c.sides.front()) {
          throw SchemaError("/audits/two_point/r_grid/" + std::to_string(i), "need 1 <= r and 2r+1 <= L");
        }
      }
    }
    body.reset();
    if ((c.two_ghost.enabled = section(a, "two_ghost", body)) && body) {
      auto& g = c.two_ghost;
      if (body->has("n_grid")) g.n_grid = uint_list(body->at("n_grid"), "/audits/two_ghost/n_grid");
      if (body->has("lambda_grid")) g.lambda_grid = number_list(body->at("lambda_grid"), "/audits/two_ghost/lambda_grid");
      if (body->has("betas")) g.betas = number_list(body->at("betas"), "/audits/two_ghost/betas");
      if (body->has("fractions")) g.fractions = number_list(body->at("fractions"), "/audits/two_ghost/fractions");
      g.replicas = body->uint("replicas", 0);
      body->finish();
    }
    if (c.two_ghost.enabled) {
      auto& g = c.two_ghost;
      if (c.boundary != Boundary::Torus) throw SchemaError("/audits/two_ghost", "needs torus boxes");
      if (!g.betas.empty() && !g.fractions.empty()) {
        throw SchemaError("/audits/two_ghost", "give either betas or fractions, not both");
      }
      if (g.betas.empty() && g.fractions.empty()) {
        if (!c.search) throw SchemaError("/audits/two_ghost/betas", "required without a beta search");
        g.fractions = {0.8, 0.9, 0.97};
      }
      if (!g.fractions.empty() && !c.search) {
        throw SchemaError("/audits/two_ghost/fractions", "fractions need a beta search");
      }
      for (std::size_t i = 0; i < g.fractions.size(); ++i) {
        if (!(g.fractions[i] > 0 && g.fractions[i] <= 1)) {
          throw SchemaError("/audits/two_ghost/fractions/" + std::to_string(i), "must lie in (0, 1]");
        }
      }
      for (std::size_t i = 0; i < g.betas.size(); ++i) {
        if (g.betas[i] < 0) throw SchemaError("/audits/two_ghost/betas/" + std::to_string(i), "beta must be >= 0");
      }
      for (std::size_t i = 0; i < g.n_grid.size(); ++i) {
        if (g.n_grid[i] < 1) throw SchemaError("/audits/two_ghost/n_grid/" + std::to_string(i), "n must be >= 1");
      }
      for (std::size_t i = 0; i < g.lambda_grid.size(); ++i) {
        if (!(g.lambda_grid[i] > 0)) {
          throw SchemaError("/audits/two_ghost/lambda_grid/" + std::to_string(i), "lambda must be positive");
        }
      }
    }
    body.reset();
    if ((c.oracle.enabled = section(a, "oracle", body)) && body) {
      auto& o = c.oracle.options;
      o.max_exhaustive_vertices = static_cast<std::uint32_t>(body->uint("max_exhaustive_vertices", o.max_exhaustive_vertices));
      o.random_graphs = static_cast<int>(body->uint("random_graphs", static_cast<std::uint64_t>(o.random_graphs)));
      o.random_max_vertices = static_cast<std::uint32_t>(body->uint("random_max_vertices", o.random_max_vertices));
      o.seed = body->uint("seed", o.seed);
      if (body->has("thetas")) o.thetas = number_list(body->at("thetas"), "/audits/oracle/thetas");
      body->finish();
      if (o.max_exhaustive_vertices > 6) {
        throw SchemaError("/audits/oracle/max_exhaustive_vertices", "at most 6");
      }
      if (o.random_max_vertices < 2 || o.random_max_vertices > 12) {
        throw SchemaError("/audits/oracle/random_max_vertices", "must lie in 2..12");
      }
      for (std::size_t i = 0; i < o.thetas.size(); ++i) {
        if (!(o.thetas[i] >= 0 && o.thetas[i] < 1)) {
          throw SchemaError("/audits/oracle/thetas/" + std::to_string(i), "must lie in [0, 1)");
        }
      }
    }
    a.finish();
  }

  if (r.has("bootstrap")) {
    Reader b(r.at("bootstrap"), "/bootstrap");
    c.bootstrap.resamples = static_cast<int>(b.uint("resamples", static_cast<std::uint64_t>(c.bootstrap.resamples)));
    c.bootstrap.level = b.number("level", c.bootstrap.level);
    b.finish();
    if (c.bootstrap.resamples < 10) throw SchemaError("/bootstrap/resamples", "need at least 10");
    if (!(c.bootstrap.level > 0 && c.bootstrap.level < 1)) {
      throw SchemaError("/bootstrap/level", "must lie in (0, 1)");
    }
  }
  c.tolerance = r.number("tolerance", c.tolerance);
  if (!(c.tolerance >= 0)) throw SchemaError("/tolerance", "must be >= 0");
  c.edge_cap = r.uint("edge_cap", c.edge_cap);
  if (c.edge_cap < 1) throw SchemaError("/edge_cap", "must be positive");
  c.output_dir = r.string("output_dir", "");
  const auto workers = r.uint("workers", 1);
  if (workers < 1 || workers > 1024) throw SchemaError("/workers", "must lie in 1..1024");
  c.workers = static_cast<int>(workers);
  r.finish();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("/", "cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json to_json(const RunConfig& c) {
  json kernel = kernel_to_json(c.kernel);
  kernel["normalize"] = c.normalize;
  json beta;
  if (c.search) {
    const auto& s = *c.search;
    beta["search"] = {{"sides", s.sides},
                      {"replicas", s.replicas},
                      {"level", s.level},
                      {"threshold_exponent", s.threshold_exponent},
                      {"initial_ceiling", s.initial_ceiling},
                      {"drift_tolerance", s.drift_tolerance}};
  } else {
    beta["grid"] = c.beta_grid;
  }
  json audits = json::object();
  if (c.tail.enabled) {
    audits["tail"] = json::object();
    if (!c.tail.n_grid.empty()) audits["tail"]["n_grid"] = c.tail.n_grid;
    if (c.tail.window) audits["tail"]["window"] = {c.tail.window->first, c.tail.window->second};
  }
  if (c.two_point.enabled) {
    audits["two_point"] = json::object();
    if (!c.two_point.r_grid.empty()) audits["two_point"]["r_grid"] = c.two_point.r_grid;
    if (c.two_point.window) {
      audits["two_point"]["window"] = {c.two_point.window->first, c.two_point.window->second};
    }
  }
  if (c.two_ghost.enabled) {
    const auto& g = c.two_ghost;
    audits["two_ghost"] = {{"n_grid", g.n_grid}, {"lambda_grid", g.lambda_grid}, {"replicas", g.replicas}};
    if (!g.betas.empty()) audits["two_ghost"]["betas"] = g.betas;
    if (!g.fractions.empty()) audits["two_ghost"]["fractions"] = g.fractions;
  }
  if (c.oracle.enabled) {
    const auto& o = c.oracle.options;
    audits["oracle"] = {{"max_exhaustive_vertices", o.max_exhaustive_vertices},
                        {"random_graphs", o.random_graphs},
                        {"random_max_vertices", o.random_max_vertices},
                        {"seed", o.seed},
                        {"thetas", o.thetas}};
  }
  return {{"schema_version", kConfigSchemaVersion},
          {"kernel", kernel},
          {"boxes", {{"sides", c.sides}, {"boundary", to_string(c.boundary)}}},
          {"beta", beta},
          {"replicas", c.replicas},
          {"seed", c.seed},
          {"audits", audits},
          {"bootstrap", {{"resamples", c.bootstrap.resamples}, {"level", c.bootstrap.level}}},
          {"tolerance", c.tolerance},
          {"edge_cap", c.edge_cap},
          {"output_dir", c.output_dir},
          {"workers", c.workers}};
}

std::string run_id(const RunConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  j.erase("workers");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Run orchestration

namespace {

const char* kConfigFile = "config.resolved.json";
const char* kResultsFile = "results.jsonl";
const char* kAuditFile = "audit.jsonl";
const char* kTailCsv = "tail.csv";
const char* kTwoPointCsv = "two_point.csv";
const char* kBetaCsv = "beta_diagnostics.csv";
const char* kOracleSummary = "oracle_summary.json";
const char* kOracleViolations = "oracle_violations.jsonl";

std::string num(double x) { return json(x).dump(); }

std::vector<std::uint64_t> default_n_grid(std::uint64_t N) {
  std::vector<std::uint64_t> out;
  for (int k = 0;; ++k) {
    const auto n = static_cast<std::uint64_t>(std::llround(std::pow(2.0, k / 2.0)));
    if (n > N) break;
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  return out;
}

std::vector<std::int64_t> default_r_grid(std::int64_t L) {
  std::vector<std::int64_t> out;
  for (std::int64_t r = 1; 2 * r + 1 <= L; r *= 2) out.push_back(r);
  return out;
}

// Writes a file atomically: temp file then rename.
void write_file(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

// Loads the valid prefix of a replica file and truncates any torn tail.
std::vector<ReplicaSummary> load_replicas(const fs::path& path) {
  std::vector<ReplicaSummary> out;
  if (!fs::exists(path)) return out;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  std::uint64_t good_bytes = 0;
  while (std::getline(in, line)) {
    if (in.eof()) break;  // no trailing newline: torn write
    try {
      ReplicaSummary r = replica_from_json(json::parse(line));
      if (r.replica != out.size()) break;
      out.push_back(std::move(r));
    } catch (const std::exception&) {
      break;
    }
    good_bytes += line.size() + 1;
  }
  in.close();
  if (fs::file_size(path) != good_bytes) fs::resize_file(path, good_bytes);
  return out;
}

struct Point {
  std::int64_t side;
  double beta;
  std::size_t beta_index;
};

class Runner {
 public:
  Runner(const RunConfig& c, std::ostream& log)
      : c_(c), log_(log), id_(run_id(c)), dir_(c.output_dir) {
    const std::int64_t largest = c.sides.back();
    kernel_ = c.normalize ? normalize_kernel(c.kernel, TorusBox(c.kernel.dimension(), largest)) : c.kernel;
  }

  RunSummary go(Stage stage) {
    prepare_dir();
    RunSummary summary;
    summary.run_id = id_;
    summary.output_dir = dir_.string();

    std::optional<BetaCResult> beta_c;
    std::vector<double> betas = c_.beta_grid;
    if (c_.search) {
      beta_c = search();
      betas = {beta_c->beta_hat};
    }
    std::vector<std::string> results, audits;
    std::ostringstream tail_csv, tp_csv;
    tail_csv << "L,beta,n,estimate,stderr,ci_lo,ci_hi,samples\n";
    tp_csv << "L,beta,r,estimate,stderr,ci_lo,ci_hi,samples\n";
    if (beta_c) {
      EstimateRecord rec;
      rec.quantity = "beta_c";
      rec.params = {{"sides", c_.search->sides}, {"level", c_.search->level},
                    {"threshold_exponent", c_.search->threshold_exponent},
                    {"systematic", beta_c->systematic}, {"kernel_scale", beta_c->kernel_scale}};
      rec.estimate = beta_c->beta_hat;
      rec.samples = c_.search->replicas;
      rec.stderr_ = beta_c->stderr_;
      rec.ci_level = c_.bootstrap.level;
      rec.ci_lo = beta_c->levels.back().ci_lo;
      rec.ci_hi = beta_c->levels.back().ci_hi;
      rec.seed = c_.seed;
      push(results, rec);
      json line{{"audit", "beta_c"},
                {"beta_hat", beta_c->beta_hat},
                {"non_convergent", beta_c->non_convergent},
                {"flags", beta_c->flags},
                {"status", "info"}};
      audits.push_back(line.dump());
    }

    for (std::size_t bi = 0; bi < betas.size(); ++bi) {
      for (auto L : c_.sides) {
        const Point pt{L, betas[bi], bi};
        const Ensemble e = sample(pt);
        if (stage == Stage::Sample) continue;
        estimate(e, pt, stage, results, audits, tail_csv, tp_csv);
      }
    }
    if (stage == Stage::Sample) {
      log_ << "sampled " << betas.size() * c_.sides.size() << " ensemble(s) into " << dir_.string() << "\n";
      return summary;
    }
    write_file(dir_ / kResultsFile, join(results));
    if (c_.tail.enabled) write_file(dir_ / kTailCsv, tail_csv.str());
    if (c_.two_point.enabled) write_file(dir_ / kTwoPointCsv, tp_csv.str());
    if (stage == Stage::Audit) {
      if (c_.two_ghost.enabled) two_ghost(beta_c, audits);
      if (c_.oracle.enabled) oracle(audits, summary);
      write_file(dir_ / kAuditFile, join(audits));
      for (const auto& a : audits) {
        const json j = json::parse(a);
        if (j.value("status", "") == "pass" || j.value("status", "") == "fail") ++summary.audits;
        if (j.value("status", "") == "fail") ++summary.failures;
      }
    }
    log_ << "run " << id_ << " wrote " << dir_.string() << "\n";
    return summary;
  }

  RunSummary oracle_only() {
    prepare_dir();
    RunSummary summary;
    summary.run_id = id_;
    summary.output_dir = dir_.string();
    std::vector<std::string> audits;
    oracle(audits, summary);
    write_file(dir_ / kAuditFile, join(audits));
    summary.audits = 1;
    summary.failures = summary.oracle_violations ? 1 : 0;
    return summary;
  }

 private:
  static std::string join(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
  }

  void push(std::vector<std::string>& results, EstimateRecord rec) {
    rec.run_id = id_;
    json j = to_json(rec);
    j["schema_version"] = kResultSchemaVersion;
    results.push_back(j.dump());
  }

  void prepare_dir() {
    fs::create_directories(dir_);
    const fs::path cfg = dir_ / kConfigFile;
    if (fs::exists(cfg)) {
      std::ifstream in(cfg);
      json old;
      try {
        old = json::parse(in);
      } catch (const json::parse_error&) {
        throw SchemaError("/output_dir", "unreadable " + cfg.string());
      }
      if (old.value("run_id", "") != id_) {
        throw SchemaError("/output_dir", dir_.string() + " holds the outputs of run " +
                                             old.value("run_id", "?") + "; choose another directory");
      }
    }
    json resolved = to_json(c_);
    resolved["run_id"] = id_;
    write_file(cfg, resolved.dump(2) + "\n");
  }

  BetaCResult search() {
    const auto& s = *c_.search;
    BetaCOptions o;
    o.replicas = s.replicas;
    o.seed = c_.seed;
    o.threshold_exponent = s.threshold_exponent;
    o.level = s.level;
    o.initial_ceiling = s.initial_ceiling;
    o.drift_tolerance = s.drift_tolerance;
    o.workers = c_.workers;
    o.bootstrap = c_.bootstrap;
    o.sampler.edge_cap = c_.edge_cap;
    o.normalize = c_.normalize;
    BetaCResult r = beta_c_search(c_.kernel, s.sides, o);
    std::ostringstream csv;
    csv << "L,beta,crossing_fraction,susceptibility\n";
    for (const auto& l : r.levels) {
      for (std::size_t g = 0; g < l.beta_grid.size(); ++g) {
        csv << l.side << "," << num(l.beta_grid[g]) << ","
            << num(crossing_fraction(l.replica_crossings, l.beta_grid[g])) << ","
            << num(l.susceptibility[g]) << "\n";
      }
    }
    write_file(dir_ / kBetaCsv, csv.str());
    log_ << "beta_c = " << r.beta_hat << " +- " << r.stderr_ << " (systematic " << r.systematic << ")";
    for (const auto& f : r.flags) log_ << "\n  flag: " << f;
    log_ << "\n";
    return r;
  }

  std::vector<std::int64_t> r_grid(std::int64_t L) const {
    if (!c_.two_point.enabled) return {};
    return c_.two_point.r_grid.empty() ? default_r_grid(L) : c_.two_point.r_grid;
  }

  Ensemble sample(const Point& pt) {
    const TorusBox box(c_.kernel.dimension(), pt.side, c_.boundary);
    const EdgeClassTable table(box, kernel_);
    const double expected = expected_open_edges(table, pt.beta);
    if (expected > static_cast<double>(c_.edge_cap)) {
      throw ResourceError("expected " + std::to_string(expected) + " open edges at L = " +
                          std::to_string(pt.side) + " exceeds edge_cap " + std::to_string(c_.edge_cap));
    }
    const fs::path path =
        dir_ / ("replicas_L" + std::to_string(pt.side) + "_b" + std::to_string(pt.beta_index) + ".jsonl");
    Ensemble e;
    e.box = box;
    e.kernel_id = kernel_.id();
    e.beta = pt.beta;
    e.seed = c_.seed;
    e.r_grid = r_grid(pt.side);
    e.replicas = load_replicas(path);
    if (e.replicas.size() > c_.replicas) e.replicas.resize(c_.replicas);
    const std::size_t resumed = e.replicas.size();

    EnsembleOptions o;
    o.r_grid = e.r_grid;
    o.workers = c_.workers;
    o.sampler.edge_cap = c_.edge_cap;
    const std::uint64_t batch = static_cast<std::uint64_t>(c_.workers) * 8;
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw ResourceError("cannot write " + path.string());
    while (e.replicas.size() < c_.replicas) {
      o.first_replica = e.replicas.size();
      o.replicas = std::min<std::uint64_t>(batch, c_.replicas - e.replicas.size());
      Ensemble part = run_ensemble(table, kernel_, pt.beta, c_.seed, o);
      for (auto& r : part.replicas) {
        out << to_json(r).dump() << "\n";
        e.replicas.push_back(std::move(r));
      }
      out.flush();
    }
    log_ << "L=" << pt.side << " beta=" << pt.beta << ": " << e.replicas.size() << " replicas";
    if (resumed) log_ << " (" << resumed << " resumed)";
    log_ << "\n";
    return e;
  }

  void estimate(const Ensemble& e, const Point& pt, Stage stage, std::vector<std::string>& results,
                std::vector<std::string>& audits, std::ostringstream& tail_csv,
                std::ostringstream& tp_csv) {
    const std::uint64_t N = e.box.vertex_count();
    auto csv_row = [&](std::ostringstream& os, const json& x, const EstimateRecord& r) {
      os << pt.side << "," << num(pt.beta) << "," << x.dump() << "," << num(r.estimate) << ","
         << num(r.stderr_) << "," << num(r.ci_lo) << "," << num(r.ci_hi) << "," << r.samples << "\n";
    };
    std::optional<ExponentFit> tail_fit, tp_fit;
    std::string tail_skip, tp_skip;

    if (e.replicas.size() >= 100) {
      EstimateRecord m;
      m.quantity = "m_typical";
      m.params = {{"d", e.box.dimension()}, {"L", pt.side}, {"beta", pt.beta}, {"kernel", e.kernel_id}};
      m.estimate = m_typical_estimate(e);
      m.samples = e.replicas.size();
      m.ci_level = c_.bootstrap.level;
      m.ci_lo = m.ci_hi = m.estimate;
      m.seed = c_.seed;
      push(results, m);
    }
    if (c_.tail.enabled) {
      const auto grid = c_.tail.n_grid.empty() ? default_n_grid(N) : c_.tail.n_grid;
      try {
        const auto recs = tail_estimate(e, grid, c_.bootstrap);
        for (const auto& r : recs) {
          push(results, r);
          csv_row(tail_csv, r.params["n"], r);
        }
        const auto w = c_.tail.window.value_or(default_tail_window(N));
        tail_fit = exponent_fit(fit_points(recs, "n"), w.first, w.second, c_.seed, c_.bootstrap);
        push(results, fit_record("tail_exponent", *tail_fit, pt));
      } catch (const InsufficientDataError& ex) {
        tail_skip = ex.what();
      } catch (const DomainError& ex) {
        tail_skip = ex.what();
      }
    }
    if (c_.two_point.enabled) {
      std::vector<EstimateRecord> recs;
      for (auto r : e.r_grid) {
        recs.push_back(two_point_avg_estimate(e, r, c_.bootstrap));
        push(results, recs.back());
        csv_row(tp_csv, r, recs.back());
      }
      const auto w = c_.two_point.window.value_or(
          std::pair<double, double>{4.0, std::max(8.0, static_cast<double>(pt.side) / 16)});
      try {
        tp_fit = exponent_fit(fit_points(recs, "r"), w.first, w.second, c_.seed, c_.bootstrap);
        push(results, fit_record("two_point_exponent", *tp_fit, pt));
      } catch (const InsufficientDataError& ex) {
        tp_skip = ex.what();
      } catch (const DomainError& ex) {
        tp_skip = ex.what();
      }
    }
    if (stage != Stage::Audit) return;

    const ExponentBounds eb = exponent_bounds(c_.kernel.dimension(), c_.kernel.alpha());
    auto line = [&](const std::string& name, const std::optional<ExponentFit>& fit,
                    const std::string& skip, double bound, double predicted) {
      json j{{"audit", name}, {"L", pt.side}, {"beta", pt.beta}, {"bound", bound},
             {"predicted", predicted}, {"tolerance", c_.tolerance}, {"flags", eb.flags}};
      if (fit) {
        const bool pass = fit->exponent >= bound - c_.tolerance;
        j["fitted"] = fit->exponent;
        j["ci"] = {fit->ci_lo, fit->ci_hi};
        j["margin"] = fit->exponent - (bound - c_.tolerance);
        j["prediction_gap"] = fit->exponent - predicted;
        j["status"] = pass ? "pass" : "fail";
      } else {
        j["status"] = "skipped";
        j["reason"] = skip;
      }
      audits.push_back(j.dump());
    };
    if (c_.tail.enabled) line("tail_exponent", tail_fit, tail_skip, eb.theta, 1 / eb.delta_predicted);
    if (c_.two_point.enabled) {
      line("two_point_exponent", tp_fit, tp_skip, eb.two_point_decay,
           c_.kernel.dimension() - eb.two_minus_eta_predicted);
    }
  }

  EstimateRecord fit_record(const std::string& quantity, const ExponentFit& f, const Point& pt) const {
    EstimateRecord r;
    r.quantity = quantity;
    r.params = {{"d", c_.kernel.dimension()}, {"L", pt.side}, {"beta", pt.beta},
                {"kernel", kernel_.id()}, {"window", {f.window_lo, f.window_hi}}, {"r2", f.r2},
                {"intercept", f.intercept}};
    r.estimate = f.exponent;
    r.samples = f.points;
    r.stderr_ = (f.ci_hi - f.ci_lo) / (2 * 1.959963984540054);
    r.ci_level = f.ci_level;
    r.ci_lo = f.ci_lo;
    r.ci_hi = f.ci_hi;
    r.seed = c_.seed;
    return r;
  }

  void two_ghost(const std::optional<BetaCResult>& beta_c, std::vector<std::string>& audits) {
    const auto& g = c_.two_ghost;
    std::vector<double> betas = g.betas;
    for (double f : g.fractions) betas.push_back(f * beta_c->beta_hat);
    const TorusBox box(c_.kernel.dimension(), c_.sides.back());
    const EdgeClassTable table(box, kernel_);
    const std::uint64_t replicas = g.replicas ? g.replicas : c_.replicas;
    const double theta = std::clamp(exponent_bounds(c_.kernel.dimension(), c_.kernel.alpha()).theta, 0.0, 0.49);
    for (std::size_t bi = 0; bi < betas.size(); ++bi) {
      const double beta = betas[bi];
      const int workers = std::max(1, std::min<int>(c_.workers, static_cast<int>(replicas)));
      std::vector<std::unique_ptr<TwoGhostAccumulator>> accs;
      for (int t = 0; t < workers; ++t) {
        accs.push_back(std::make_unique<TwoGhostAccumulator>(table, beta, g.n_grid, g.lambda_grid));
      }
      SamplerOptions so;
      so.edge_cap = c_.edge_cap;
      // Pair counts are integers or halves, so the merged sums do not depend
      // on how replicas are split across workers.
      const std::uint64_t stream = derive_stream(0x67686f7374ull, bi);
      std::vector<std::thread> pool;
      std::exception_ptr error;
      std::mutex error_mutex;
      for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t]() {
          try {
            for (std::uint64_t r = t; r < replicas; r += workers) {
              accs[t]->add(sample_configuration(table, kernel_, beta, c_.seed, derive_stream(stream, r), so));
            }
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      if (error) std::rethrow_exception(error);
      for (int t = 1; t < workers; ++t) accs[0]->merge(*accs[t]);

      auto emit = [&](const char* name, TwoGhostVariant v, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
          json j{{"audit", name}, {"L", c_.sides.back()}, {"beta", beta}};
          if (beta_c) j["beta_fraction"] = beta / beta_c->beta_hat;
          try {
            const TwoGhostResult r = two_ghost_audit(*accs[0], i, v, theta);
            j.update({{"threshold", r.threshold}, {"lhs", r.lhs}, {"rhs", r.rhs},
                      {"margin", std::isfinite(r.margin) ? json(r.margin) : json("inf")},
                      {"A", r.A}, {"theta", r.theta}, {"replicas", r.replicas},
                      {"status", r.lhs <= r.rhs ? "pass" : "fail"}});
          } catch (const InsufficientDataError& ex) {
            j["status"] = "skipped";
            j["reason"] = ex.what();
          }
          audits.push_back(j.dump());
        }
      };
      emit("two_ghost_vertex", TwoGhostVariant::Vertex, g.n_grid.size());
      emit("two_ghost_weight", TwoGhostVariant::Weight, g.lambda_grid.size());
      log_ << "two-ghost audit at beta=" << beta << " done\n";
    }
  }

  void oracle(std::vector<std::string>& audits, RunSummary& summary) {
    OracleSuiteOptions o = c_.oracle.options;
    o.workers = c_.workers;
    const OracleSuiteSummary s = run_oracle_suite(o);
    std::string violations;
    for (const auto& v : s.report.violations) {
      violations += json{{"graph", v.graph}, {"inequality", v.inequality}, {"lhs", v.lhs},
                         {"rhs", v.rhs}, {"params", v.params}}.dump() + "\n";
    }
    write_file(dir_ / kOracleViolations, violations);
    const json j{{"run_id", id_},
                 {"checks", s.report.checks},
                 {"violations", s.report.violations.size()},
                 {"graphs", s.graphs},
                 {"instances", s.instances},
                 {"tolerance", kOracleTolerance}};
    write_file(dir_ / kOracleSummary, j.dump(2) + "\n");
    audits.push_back(json{{"audit", "oracle"}, {"checks", s.report.checks},
                          {"violations", s.report.violations.size()},
                          {"status", s.report.ok() ? "pass" : "fail"}}.dump());
    summary.oracle_violations = s.report.violations.size();
    log_ << "oracle: " << s.report.violations.size() << " violations / " << s.report.checks
         << " checks (" << s.seconds << " s)\n";
  }

  const RunConfig& c_;
  std::ostream& log_;
  std::string id_;
  fs::path dir_;
  Kernel kernel_ = Kernel::pure_power(1, 0.5);
};

}  // namespace

RunSummary run(const RunConfig& c, Stage stage, std::ostream& log) {
  if (c.output_dir.empty()) throw SchemaError("/output_dir", "no output directory");
  return Runner(c, log).go(stage);
}

RunSummary run_oracle(const RunConfig& c, std::ostream& log) {
  if (c.output_dir.empty()) throw SchemaError("/output_dir", "no output directory");
  return Runner(c, log).oracle_only();
}

std::vector<std::string> expected_files(const RunConfig& c) {
  std::vector<std::string> out{kConfigFile, kResultsFile, kAuditFile};
  if (c.tail.enabled) out.push_back(kTailCsv);
  if (c.two_point.enabled) out.push_back(kTwoPointCsv);
  if (c.search) out.push_back(kBetaCsv);
  if (c.oracle.enabled) {
    out.push_back(kOracleSummary);
    out.push_back(kOracleViolations);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report

namespace {

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string margin_text(const json& m) {
  return m.is_string() ? m.get<std::string>() : fmt("%.3g", m.get<double>());
}

}  // namespace

std::string report(const std::string& dir) {
  const fs::path root(dir);
  const std::vector<std::string> all{kConfigFile, kResultsFile, kAuditFile, kTailCsv, kTwoPointCsv,
                                     kBetaCsv, kOracleSummary, kOracleViolations};
  if (!fs::is_directory(root) || !fs::exists(root / kConfigFile)) {
    std::string msg = "no run found in '" + dir + "'; expected files:";
    for (const auto& f : all) msg += "\n  " + f;
    throw MissingFilesError(all, msg);
  }
  std::ifstream cin_(root / kConfigFile);
  const json cfg_json = json::parse(cin_);
  json cfg_copy = cfg_json;
  cfg_copy.erase("run_id");
  const RunConfig cfg = parse_config(cfg_copy);
  std::vector<std::string> missing;
  for (const auto& f : expected_files(cfg)) {
    if (!fs::exists(root / f)) missing.push_back(f);
  }
  // An oracle-only run has no results file.
  const bool oracle_only = fs::exists(root / kOracleSummary) && !fs::exists(root / kResultsFile);
  if (oracle_only) {
    missing.erase(std::remove_if(missing.begin(), missing.end(),
                                 [](const std::string& f) { return f != kOracleSummary && f != kOracleViolations; }),
                  missing.end());
  }
  if (!missing.empty()) {
    std::string msg = "incomplete run in '" + dir + "'; missing files:";
    for (const auto& f : missing) msg += "\n  " + f;
    throw MissingFilesError(missing, msg);
  }

  std::ostringstream os;
  const int d = cfg.kernel.dimension();
  const double alpha = cfg.kernel.alpha();
  os << "run " << cfg_json.value("run_id", "?") << "\n";
  os << "kernel " << cfg.kernel.id() << (cfg.normalize ? " (normalized)" : "") << "\n";
  const ExponentBounds eb = exponent_bounds(d, alpha);

  std::vector<json> results, audits;
  if (fs::exists(root / kResultsFile)) results = read_jsonl(root / kResultsFile);
  if (fs::exists(root / kAuditFile)) audits = read_jsonl(root / kAuditFile);

  for (const auto& r : results) {
    if (r["quantity"] == "beta_c") {
      os << "beta_c " << fmt("%.6g", r["estimate"].get<double>()) << " +- "
         << fmt("%.2g", r["stderr"].get<double>()) << " (systematic "
         << fmt("%.2g", r["params"]["systematic"].get<double>()) << ")\n";
    }
  }
  for (const auto& r : results) {
    if (r["quantity"] == "m_typical") {
      os << "typical maximum M at L=" << r["params"]["L"] << " beta="
         << fmt("%.6g", r["params"]["beta"].get<double>()) << ": " << r["estimate"] << "\n";
    }
  }

  bool header = false;
  for (const auto& a : audits) {
    const std::string kind = a.value("audit", "");
    if (kind != "tail_exponent" && kind != "two_point_exponent") continue;
    if (!header) {
      os << "\nexponents (d=" << d << ", alpha=" << fmt("%g", alpha) << ")\n";
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-20s %8s %10s %10s %18s %8s %10s %8s\n", "quantity", "L", "beta",
                    "fitted", "ci", "bound", "predicted", "status");
      os << buf;
      header = true;
    }
    char buf[200];
    const std::string ci = a.contains("ci") ? fmt("[%.3f", a["ci"][0].get<double>()) +
                                                  fmt(", %.3f]", a["ci"][1].get<double>())
                                            : "-";
    std::snprintf(buf, sizeof buf, "%-20s %8lld %10.5g %10s %18s %8.4f %10.4f %8s\n", kind.c_str(),
                  a["L"].get<long long>(), a["beta"].get<double>(),
                  a.contains("fitted") ? fmt("%.4f", a["fitted"].get<double>()).c_str() : "-",
                  ci.c_str(), a["bound"].get<double>(), a["predicted"].get<double>(),
                  a["status"].get<std::string>().c_str());
    os << buf;
  }

  header = false;
  for (const auto& a : audits) {
    const std::string kind = a.value("audit", "");
    if (kind != "two_ghost_vertex" && kind != "two_ghost_weight") continue;
    if (!header) {
      os << "\ntwo-ghost inequalities\n";
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-18s %10s %10s %12s %12s %10s %8s\n", "form", "beta", "n/lambda",
                    "lhs", "rhs", "margin", "status");
      os << buf;
      header = true;
    }
    char buf[200];
    if (a["status"] == "skipped") {
      std::snprintf(buf, sizeof buf, "%-18s %10.5g skipped: %s\n", kind.c_str(), a["beta"].get<double>(),
                    a.value("reason", "").c_str());
    } else {
      std::snprintf(buf, sizeof buf, "%-18s %10.5g %10g %12.4g %12.4g %10s %8s\n", kind.c_str(),
                    a["beta"].get<double>(), a["threshold"].get<double>(), a["lhs"].get<double>(),
                    a["rhs"].get<double>(), margin_text(a["margin"]).c_str(),
                    a["status"].get<std::string>().c_str());
    }
    os << buf;
  }

  if (fs::exists(root / kOracleSummary)) {
    std::ifstream in(root / kOracleSummary);
    const json o = json::parse(in);
    os << "\noracle: " << o["violations"] << " violations / " << o["checks"] << " checks\n";
  }

  std::set<std::string> flags(eb.flags.begin(), eb.flags.end());
  for (const auto& a : audits) {
    if (a.contains("flags")) {
      for (const auto& f : a["flags"]) flags.insert(f.get<std::string>());
    }
  }
  std::uint64_t failed = 0;
  for (const auto& a : audits) failed += a.value("status", "") == "fail";
  if (!flags.empty()) {
    os << "\nflags\n";
    for (const auto& f : flags) os << "  " << f << "\n";
  }
  os << "\n" << failed << " failed audit line(s)\n";
  return os.str();
}

}  // namespace lrperc
