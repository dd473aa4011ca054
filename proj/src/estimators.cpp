#include "lrperc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <mutex>
#include <thread>

#include "lrperc/errors.hpp"
#include "lrperc/rng.hpp"

namespace lrperc {

namespace {

constexpr std::uint64_t kStreamTail = 0x7461696cull;
constexpr std::uint64_t kStreamTwoPoint = 0x74776f70ull;
constexpr std::uint64_t kStreamFit = 0x666974ull;
constexpr std::uint64_t kStreamBetaC = 0x62657461ull;

void clamp_ci(EstimateRecord& r) {
  r.ci_lo = std::min(r.ci_lo, r.estimate);
  r.ci_hi = std::max(r.ci_hi, r.estimate);
}

nlohmann::json ensemble_params(const Ensemble& e) {
  return {{"d", e.box.dimension()},
          {"L", e.box.side()},
          {"beta", e.beta},
          {"kernel", e.kernel_id}};
}

// Runs f(i) for i in [0, count) on `workers` threads; f writes its own slot.
template <typename F>
void parallel_for(std::size_t count, int workers, F&& f) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < count; i += workers) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

EstimateRecord mean_record(const std::string& quantity, const std::vector<double>& values,
                           const BootstrapOptions& b, std::uint64_t seed, std::uint64_t stream) {
  EstimateRecord r;
  r.quantity = quantity;
  r.estimate = mean(values);
  r.samples = values.size();
  r.stderr_ = standard_error(values);
  r.ci_level = b.level;
  const Interval ci = bootstrap_percentile(
      values.size(),
      [&](const std::vector<std::size_t>& idx) {
        double s = 0;
        for (auto i : idx) s += values[i];
        return s / static_cast<double>(idx.size());
      },
      b.resamples, b.level, seed, stream);
  r.ci_lo = ci.lo;
  r.ci_hi = ci.hi;
  r.seed = seed;
  clamp_ci(r);
  return r;
}

}  // namespace

nlohmann::json to_json(const EstimateRecord& r) {
  return {{"quantity", r.quantity},
          {"params", r.params},
          {"estimate", r.estimate},
          {"samples", r.samples},
          {"stderr", r.stderr_},
          {"ci", {{"level", r.ci_level}, {"lo", r.ci_lo}, {"hi", r.ci_hi}}},
          {"seed", r.seed},
          {"run_id", r.run_id}};
}

EstimateRecord estimate_from_json(const nlohmann::json& j) {
  EstimateRecord r;
  r.quantity = j.at("quantity").get<std::string>();
  r.params = j.at("params");
  r.estimate = j.at("estimate").get<double>();
  r.samples = j.at("samples").get<std::uint64_t>();
  r.stderr_ = j.at("stderr").get<double>();
  r.ci_level = j.at("ci").at("level").get<double>();
  r.ci_lo = j.at("ci").at("lo").get<double>();
  r.ci_hi = j.at("ci").at("hi").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.run_id = j.value("run_id", "");
  return r;
}

nlohmann::json to_json(const ReplicaSummary& r) {
  nlohmann::json sizes = nlohmann::json::array();
  for (const auto& [s, c] : r.size_counts) sizes.push_back({s, c});
  return {{"replica", r.replica},
          {"open_edges", r.open_edges},
          {"max_cluster", r.max_cluster},
          {"size_counts", sizes},
          {"two_point_sums", r.two_point_sums}};
}

ReplicaSummary replica_from_json(const nlohmann::json& j) {
  ReplicaSummary r;
  r.replica = j.at("replica").get<std::uint64_t>();
  r.open_edges = j.at("open_edges").get<std::uint64_t>();
  r.max_cluster = j.at("max_cluster").get<std::uint32_t>();
  for (const auto& pair : j.at("size_counts")) {
    r.size_counts[pair.at(0).get<std::uint32_t>()] = pair.at(1).get<std::uint64_t>();
  }
  r.two_point_sums = j.at("two_point_sums").get<std::vector<std::uint64_t>>();
  return r;
}

ReplicaSummary summarize_replica(const Configuration& c, const std::vector<std::int64_t>& r_grid,
                                 const std::vector<VertexId>& window) {
  ReplicaSummary s;
  s.replica = c.replica_index;
  s.open_edges = c.open_edges.size();
  const ClusterForest f = build_clusters(c);
  for (auto size : f.cluster_sizes()) ++s.size_counts[size];
  s.max_cluster = window.empty() ? f.max_cluster_size() : window_stats(f, window).max_in_window;
  for (auto r : r_grid) s.two_point_sums.push_back(two_point_window_sum(f, c.box, r));
  return s;
}

Ensemble run_ensemble(const EdgeClassTable& table, const Kernel& kernel, double beta,
                      std::uint64_t seed, const EnsembleOptions& options) {
  Ensemble e;
  e.box = table.box();
  e.kernel_id = kernel.id();
  e.beta = beta;
  e.seed = seed;
  e.r_grid = options.r_grid;
  e.replicas.resize(options.replicas);
  parallel_for(options.replicas, options.workers, [&](std::size_t i) {
    const Configuration c = sample_configuration(table, kernel, beta, seed,
                                                 options.first_replica + i, options.sampler);
    e.replicas[i] = summarize_replica(c, options.r_grid, options.window);
  });
  return e;
}

std::vector<EstimateRecord> tail_estimate(const Ensemble& e, const std::vector<std::uint64_t>& n_grid,
                                          const BootstrapOptions& b) {
  if (n_grid.empty()) throw DomainError("tail estimate needs a nonempty n grid");
  if (e.replicas.size() < 50) {
    throw InsufficientDataError("tail estimate needs at least 50 replicas, got " +
                                std::to_string(e.replicas.size()));
  }
  const double N = static_cast<double>(e.box.vertex_count());
  std::vector<EstimateRecord> out;
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    const auto n = n_grid[k];
    std::vector<double> values;
    values.reserve(e.replicas.size());
    for (const auto& r : e.replicas) {
      std::uint64_t covered = 0;
      for (auto it = r.size_counts.lower_bound(static_cast<std::uint32_t>(std::min<std::uint64_t>(n, UINT32_MAX)));
           it != r.size_counts.end(); ++it) {
        covered += static_cast<std::uint64_t>(it->first) * it->second;
      }
      values.push_back(static_cast<double>(covered) / N);
    }
    EstimateRecord rec = mean_record("tail", values, b, e.seed, derive_stream(kStreamTail, n));
    rec.params = ensemble_params(e);
    rec.params["n"] = n;
    out.push_back(std::move(rec));
  }
  return out;
}

EstimateRecord two_point_avg_estimate(const Ensemble& e, std::int64_t r, const BootstrapOptions& b) {
  if (r < 0 || 2 * r + 1 > e.box.side()) throw DomainError("window exceeds the torus");
  const auto it = std::find(e.r_grid.begin(), e.r_grid.end(), r);
  if (it == e.r_grid.end()) throw DomainError("r not in the ensemble's two-point grid");
  if (e.replicas.empty()) throw InsufficientDataError("empty ensemble");
  const std::size_t k = static_cast<std::size_t>(it - e.r_grid.begin());
  const double volume = std::pow(static_cast<double>(2 * r + 1), e.box.dimension());
  const double N = static_cast<double>(e.box.vertex_count());
  std::vector<double> values;
  for (const auto& rep : e.replicas) {
    values.push_back(static_cast<double>(rep.two_point_sums.at(k)) / (N * volume));
  }
  EstimateRecord rec =
      mean_record("two_point", values, b, e.seed, derive_stream(kStreamTwoPoint, static_cast<std::uint64_t>(r)));
  rec.params = ensemble_params(e);
  rec.params["r"] = r;
  return rec;
}

std::uint32_t m_typical_estimate(const Ensemble& e) {
  if (e.replicas.size() < 100) {
    throw InsufficientDataError("typical maximum needs at least 100 replicas, got " +
                                std::to_string(e.replicas.size()));
  }
  std::vector<std::uint32_t> maxima;
  for (const auto& r : e.replicas) maxima.push_back(r.max_cluster);
  std::sort(maxima.begin(), maxima.end());
  const double R = static_cast<double>(maxima.size());
  const double cut = std::exp(-1.0);
  for (std::uint32_t n = 0;; ++n) {
    const auto at_least = maxima.end() - std::lower_bound(maxima.begin(), maxima.end(), n);
    if (static_cast<double>(at_least) / R <= cut) return n;
  }
}

// ---------------------------------------------------------------------------
// Fits and audits

nlohmann::json to_json(const ExponentFit& f) {
  return {{"exponent", f.exponent},
          {"intercept", f.intercept},
          {"ci", {{"level", f.ci_level}, {"lo", f.ci_lo}, {"hi", f.ci_hi}}},
          {"window", {f.window_lo, f.window_hi}},
          {"points", f.points},
          {"r2", f.r2}};
}

ExponentFit exponent_fit(const std::vector<FitPoint>& points, double window_lo, double window_hi,
                         std::uint64_t seed, const BootstrapOptions& b) {
  std::vector<double> x, y;
  for (const auto& p : points) {
    if (p.x < window_lo || p.x > window_hi) continue;
    if (!(p.x > 0) || !(p.y > 0)) throw DomainError("nonpositive point in fit window");
    x.push_back(std::log(p.x));
    y.push_back(std::log(p.y));
  }
  if (x.size() < 4) {
    throw InsufficientDataError("exponent fit needs at least 4 points in the window, got " +
                                std::to_string(x.size()));
  }
  const LinearFit fit = least_squares(x, y);
  ExponentFit out;
  out.exponent = -fit.slope;
  out.intercept = fit.intercept;
  out.window_lo = window_lo;
  out.window_hi = window_hi;
  out.points = x.size();
  out.r2 = fit.r2;
  out.ci_level = b.level;
  // Residual bootstrap; residuals inflated to undo the least-squares shrinkage.
  const double n = static_cast<double>(x.size());
  const double inflate = std::sqrt(n / (n - 2));
  std::vector<double> yb(y.size());
  const Interval ci = bootstrap_percentile(
      x.size(),
      [&](const std::vector<std::size_t>& idx) {
        for (std::size_t i = 0; i < y.size(); ++i) {
          yb[i] = fit.intercept + fit.slope * x[i] + inflate * fit.residuals[idx[i]];
        }
        return -least_squares(x, yb).slope;
      },
      b.resamples, b.level, seed, derive_stream(kStreamFit, x.size()));
  out.ci_lo = std::min(ci.lo, out.exponent);
  out.ci_hi = std::max(ci.hi, out.exponent);
  return out;
}

std::vector<FitPoint> fit_points(const std::vector<EstimateRecord>& records, const std::string& key) {
  std::vector<FitPoint> out;
  for (const auto& r : records) out.push_back({r.params.at(key).get<double>(), r.estimate});
  return out;
}

std::pair<double, double> default_tail_window(std::uint64_t vertex_count) {
  return {10.0, std::pow(static_cast<double>(vertex_count), 0.8) / 10.0};
}

bool BoundAudit::pass() const {
  return std::all_of(lines.begin(), lines.end(), [](const AuditLine& l) { return l.pass; });
}

nlohmann::json to_json(const BoundAudit& a) {
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& l : a.lines) {
    lines.push_back({{"quantity", l.quantity},
                     {"fitted", l.fitted},
                     {"bound", l.bound},
                     {"predicted", l.predicted},
                     {"tolerance", l.tolerance},
                     {"pass", l.pass}});
  }
  return {{"d", a.dimension}, {"alpha", a.alpha}, {"lines", lines}, {"flags", a.flags},
          {"pass", a.pass()}};
}

BoundAudit bound_audit(int dimension, double alpha, const std::optional<ExponentFit>& tail_fit,
                       const std::optional<ExponentFit>& two_point_fit, double tolerance) {
  if (!tail_fit || !two_point_fit) throw DomainError("bound audit needs both tail and two-point fits");
  const ExponentBounds eb = exponent_bounds(dimension, alpha);
  BoundAudit a;
  a.dimension = dimension;
  a.alpha = alpha;
  a.flags = eb.flags;
  const double d = dimension;
  AuditLine tail{"tail_exponent", tail_fit->exponent, eb.theta, 1 / eb.delta_predicted, tolerance,
                 tail_fit->exponent >= eb.theta - tolerance};
  AuditLine two{"two_point_exponent", two_point_fit->exponent, eb.two_point_decay,
                d - eb.two_minus_eta_predicted, tolerance,
                two_point_fit->exponent >= eb.two_point_decay - tolerance};
  a.lines = {tail, two};
  return a;
}

// ---------------------------------------------------------------------------
// Pseudo-critical point

double crossing_fraction(const std::vector<double>& replica_crossings, double beta) {
  if (replica_crossings.empty()) return 0;
  const auto hit = std::count_if(replica_crossings.begin(), replica_crossings.end(),
                                 [beta](double b) { return b <= beta; });
  return static_cast<double>(hit) / static_cast<double>(replica_crossings.size());
}

nlohmann::json to_json(const BetaCResult& r) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"L", l.side},
                      {"threshold", l.threshold},
                      {"crossing", l.crossing},
                      {"stderr", l.stderr_},
                      {"ci", {l.ci_lo, l.ci_hi}},
                      {"ceiling", l.ceiling},
                      {"susceptibility_peak", l.susceptibility_peak},
                      {"replicas", l.replica_crossings.size()}});
  }
  return {{"beta_hat", r.beta_hat},     {"stderr", r.stderr_},
          {"systematic", r.systematic}, {"kernel_scale", r.kernel_scale},
          {"non_convergent", r.non_convergent}, {"flags", r.flags},
          {"levels", levels}};
}

namespace {

// Smallest β with D̂(β) >= level, i.e. the ceil(level R)-th order statistic.
double level_quantile(std::vector<double> crossings, double level) {
  std::sort(crossings.begin(), crossings.end());
  const auto R = crossings.size();
  auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(R) - 1e-12));
  k = std::clamp<std::size_t>(k, 1, R);
  return crossings[k - 1];
}

struct SweepResult {
  double crossing = std::numeric_limits<double>::infinity();
  std::vector<double> susceptibility;
};

SweepResult sweep(const CoupledSample& s, std::uint64_t threshold, const std::vector<double>& grid) {
  const std::size_t N = s.box.vertex_count();
  std::vector<std::size_t> order(s.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.thresholds[a] < s.thresholds[b] || (s.thresholds[a] == s.thresholds[b] && a < b);
  });
  ClusterForest f(N);
  double sum_sq = static_cast<double>(N);
  SweepResult out;
  out.susceptibility.resize(grid.size());
  std::size_t g = 0;
  auto record_until = [&](double beta) {
    while (g < grid.size() && grid[g] < beta) {
      const double m = f.max_cluster_size();
      out.susceptibility[g++] = (sum_sq - m * m) / static_cast<double>(N);
    }
  };
  if (threshold <= 1) out.crossing = 0;
  for (auto i : order) {
    record_until(s.thresholds[i]);
    const auto [u, w] = s.edges[i];
    const double a = f.cluster_size(u), b = f.cluster_size(w);
    if (f.unite(u, w)) sum_sq += 2 * a * b;
    if (out.crossing == std::numeric_limits<double>::infinity() && f.max_cluster_size() >= threshold) {
      out.crossing = s.thresholds[i];
    }
  }
  record_until(std::numeric_limits<double>::infinity());
  return out;
}

}  // namespace

BetaCResult beta_c_search(const Kernel& kernel, const std::vector<std::int64_t>& sides,
                          const BetaCOptions& options) {
  if (sides.size() < 2) throw DomainError("beta_c search needs at least two sizes");
  for (std::size_t i = 1; i < sides.size(); ++i) {
    if (sides[i] <= sides[i - 1]) throw DomainError("sizes must be increasing");
  }
  if (options.replicas < 2) throw InsufficientDataError("beta_c search needs replicas");
  const int d = kernel.dimension();
  const Kernel K = options.normalize ? normalize_kernel(kernel, TorusBox(d, sides.back())) : kernel;
  BetaCResult res;
  if (options.normalize) {
    const TorusBox ref(d, sides.back());
    res.kernel_scale = 1.0 / EdgeClassTable(ref, kernel).oriented_weight_sum();
  } else {
    res.kernel_scale = 1.0;
  }

  for (std::size_t li = 0; li < sides.size(); ++li) {
    const TorusBox box(d, sides[li]);
    const EdgeClassTable table(box, K);
    BetaCLevel level;
    level.side = sides[li];
    level.threshold = static_cast<std::uint64_t>(
        std::ceil(std::pow(static_cast<double>(box.vertex_count()), options.threshold_exponent) - 1e-9));
    double ceiling = options.initial_ceiling;
    std::vector<SweepResult> sweeps(options.replicas);
    for (;;) {
      std::vector<double> grid(options.susceptibility_points);
      for (int g = 0; g < options.susceptibility_points; ++g) {
        grid[g] = ceiling * (g + 1) / options.susceptibility_points;
      }
      const std::uint64_t stream_seed = options.seed;
      parallel_for(options.replicas, options.workers, [&](std::size_t r) {
        const CoupledSample s =
            sample_coupled(table, K, ceiling, stream_seed, derive_stream(kStreamBetaC, r), options.sampler);
        sweeps[r] = sweep(s, level.threshold, grid);
      });
      const bool all = std::all_of(sweeps.begin(), sweeps.end(), [](const SweepResult& s) {
        return std::isfinite(s.crossing);
      });
      if (all) {
        level.beta_grid = grid;
        break;
      }
      ceiling *= 2;
      if (ceiling > options.max_ceiling) {
        throw SearchError("D_L does not reach the crossing level below beta = " +
                          std::to_string(options.max_ceiling) + " at L = " + std::to_string(sides[li]));
      }
    }
    level.ceiling = ceiling;
    for (const auto& s : sweeps) level.replica_crossings.push_back(s.crossing);

    // Bisection on the monotone empirical D_L.
    double lo = 0, hi = ceiling;
    if (crossing_fraction(level.replica_crossings, lo) >= options.level ||
        crossing_fraction(level.replica_crossings, hi) < options.level) {
      throw SearchError("initial interval does not bracket the crossing at L = " +
                        std::to_string(sides[li]));
    }
    for (int step = 0; step < options.bisection_steps; ++step) {
      const double mid = 0.5 * (lo + hi);
      if (crossing_fraction(level.replica_crossings, mid) >= options.level) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    level.crossing = hi;

    const auto& xs = level.replica_crossings;
    std::vector<double> boot;
    RngStream rng(options.seed, derive_stream(kStreamBetaC, 0xb007 + li));
    std::vector<double> sample(xs.size());
    for (int b = 0; b < options.bootstrap.resamples; ++b) {
      for (auto& v : sample) v = xs[rng.next_below(xs.size())];
      boot.push_back(level_quantile(sample, options.level));
    }
    const double m = mean(boot);
    double ss = 0;
    for (double v : boot) ss += (v - m) * (v - m);
    level.stderr_ = std::sqrt(ss / static_cast<double>(boot.size() - 1));
    const double tail = (1 - options.bootstrap.level) / 2;
    level.ci_lo = std::min(quantile(boot, tail), level.crossing);
    level.ci_hi = std::max(quantile(boot, 1 - tail), level.crossing);

    level.susceptibility.assign(level.beta_grid.size(), 0);
    for (const auto& s : sweeps) {
      for (std::size_t g = 0; g < s.susceptibility.size(); ++g) level.susceptibility[g] += s.susceptibility[g];
    }
    for (auto& v : level.susceptibility) v /= static_cast<double>(sweeps.size());
    const auto peak = std::max_element(level.susceptibility.begin(), level.susceptibility.end());
    level.susceptibility_peak = level.beta_grid[peak - level.susceptibility.begin()];
    res.levels.push_back(std::move(level));
  }

  const auto& last = res.levels.back();
  res.beta_hat = last.crossing;
  res.stderr_ = last.stderr_;
  double lo = last.crossing, hi = last.crossing;
  for (const auto& l : res.levels) {
    lo = std::min(lo, l.crossing);
    hi = std::max(hi, l.crossing);
  }
  res.systematic = hi - lo;

  // Non-convergence: the crossing rises with every size step, and over the
  // last step by more than both the noise and the drift tolerance.
  bool rising = true;
  for (std::size_t i = 1; i < res.levels.size(); ++i) {
    if (!(res.levels[i].crossing > res.levels[i - 1].crossing)) rising = false;
  }
  const auto& prev = res.levels[res.levels.size() - 2];
  const double jump = last.crossing - prev.crossing;
  const double noise = 2 * std::hypot(last.stderr_, prev.stderr_);
  const double doublings = std::log2(static_cast<double>(last.side) / static_cast<double>(prev.side));
  const double relative = jump / prev.crossing / doublings;
  if (rising && jump > noise && relative > options.drift_tolerance) {
    res.non_convergent = true;
    res.flags.push_back("non-convergent: crossing grows with L (" + std::to_string(relative * 100) +
                        "% per doubling over the last step)");
  }
  if (options.normalize && res.beta_hat <= 0.5) {
    res.flags.push_back("beta_hat <= 1/2, inside the region where E|K| <= 2 for the normalized kernel");
  }
  return res;
}

}  // namespace lrperc
