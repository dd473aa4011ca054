#include "lrperc/exact_oracle.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <thread>
#include <atomic>
#include <limits>

#include "lrperc/errors.hpp"
#include "lrperc/partitioner.hpp"
#include "lrperc/rng.hpp"

namespace lrperc {

namespace {

struct TinyForest {
  std::uint8_t parent[TinyGraph::kMaxVertices];
  explicit TinyForest(std::uint32_t n) {
    for (std::uint32_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint8_t>(i);
  }
  std::uint8_t find(std::uint8_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(std::uint8_t a, std::uint8_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

TinyForest forest_of(const TinyGraph& g, std::uint32_t omega) {
  TinyForest f(g.vertex_count);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (omega >> e & 1u) {
      f.unite(static_cast<std::uint8_t>(g.edges[e].first),
              static_cast<std::uint8_t>(g.edges[e].second));
    }
  }
  return f;
}

std::string mask_string(std::uint32_t mask, std::uint32_t bits) {
  std::string s;
  for (std::uint32_t i = 0; i < bits; ++i) s.push_back((mask >> i & 1u) ? '1' : '0');
  return s;
}

nlohmann::json graph_params(const TinyGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    edges.push_back({g.edges[e].first, g.edges[e].second, g.p[e]});
  }
  return {{"vertices", g.vertex_count},
          {"edges", edges},
          {"window", mask_string(g.window, g.vertex_count)}};
}

class Checker {
 public:
  Checker(const ExactModel& m, std::string id) : m_(m), id_(std::move(id)) {}

  void check(const std::string& inequality, double lhs, double rhs, nlohmann::json params) {
    ++report.checks;
    if (lhs <= rhs + kOracleTolerance) return;
    params["graph"] = graph_params(m_.graph());
    report.violations.push_back({id_, inequality, lhs, rhs, std::move(params)});
  }

  OracleReport report;

 private:
  const ExactModel& m_;
  std::string id_;
};

std::vector<double> lambda_grid(double limit) {
  std::vector<double> out;
  for (double l = 1; l <= limit + 1e-12; l += 0.5) out.push_back(l);
  return out;
}

}  // namespace

std::uint32_t TinyGraph::window_size() const { return std::popcount(window); }

void TinyGraph::validate() const {
  if (vertex_count == 0 || vertex_count > kMaxVertices) {
    throw GuardError("tiny graphs have 1.." + std::to_string(kMaxVertices) + " vertices");
  }
  if (edges.size() > kMaxEdges) {
    throw GuardError("tiny graphs have at most " + std::to_string(kMaxEdges) + " edges");
  }
  if (p.size() != edges.size()) throw DomainError("one probability per edge expected");
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (auto [a, b] : edges) {
    if (a >= vertex_count || b >= vertex_count) throw DomainError("edge endpoint out of range");
    if (a == b) throw DomainError("self-loop in tiny graph");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) {
      throw DomainError("parallel edge in tiny graph");
    }
  }
  for (double q : p) {
    if (!(q >= 0 && q <= 1)) throw DomainError("edge probability outside [0, 1]");
  }
  if (window == 0 || (window >> vertex_count) != 0) throw DomainError("window must be a nonempty vertex subset");
}

ExactModel::ExactModel(const TinyGraph& g) : g_(g) {
  g_.validate();
  const std::size_t E = g_.edges.size();
  const std::size_t configs = std::size_t{1} << E;
  const std::uint32_t n = g_.vertex_count;
  prob_.assign(configs, 1.0);
  kmax_.assign(configs, 0);
  inter_.assign(configs * n, 0);
  for (std::uint32_t omega = 0; omega < configs; ++omega) {
    double pr = 1;
    for (std::size_t e = 0; e < E; ++e) pr *= (omega >> e & 1u) ? g_.p[e] : 1 - g_.p[e];
    prob_[omega] = pr;
    TinyForest f = forest_of(g_, omega);
    std::uint8_t count[TinyGraph::kMaxVertices] = {};
    std::uint8_t root[TinyGraph::kMaxVertices];
    for (std::uint32_t v = 0; v < n; ++v) {
      root[v] = f.find(static_cast<std::uint8_t>(v));
      if (g_.window >> v & 1u) ++count[root[v]];
    }
    std::uint8_t best = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
      inter_[omega * n + v] = count[root[v]];
      best = std::max(best, count[root[v]]);
    }
    kmax_[omega] = best;
  }
}

std::uint32_t ExactModel::cluster_mask(std::uint32_t u, std::uint32_t omega) const {
  TinyForest f = forest_of(g_, omega);
  const auto r = f.find(static_cast<std::uint8_t>(u));
  std::uint32_t mask = 0;
  for (std::uint32_t v = 0; v < g_.vertex_count; ++v) {
    if (f.find(static_cast<std::uint8_t>(v)) == r) mask |= 1u << v;
  }
  return mask;
}

double ExactModel::maxcluster_tail(double lambda) const {
  double s = 0;
  for (std::size_t w = 0; w < prob_.size(); ++w) {
    if (kmax_[w] >= lambda) s += prob_[w];
  }
  return s;
}

double ExactModel::rooted_tail(std::uint32_t u, double lambda) const {
  if (u >= g_.vertex_count) throw DomainError("root vertex out of range");
  double s = 0;
  for (std::size_t w = 0; w < prob_.size(); ++w) {
    if (inter_[w * g_.vertex_count + u] >= lambda) s += prob_[w];
  }
  return s;
}

std::uint32_t ExactModel::typical_max() const {
  const double cut = std::exp(-1.0);
  for (std::uint32_t n = 0;; ++n) {
    if (maxcluster_tail(n) <= cut) return n;
  }
}

std::vector<double> enumerate_measure(const TinyGraph& g) { return ExactModel(g).probabilities(); }

double maxcluster_tail_exact(const TinyGraph& g, double lambda) {
  return ExactModel(g).maxcluster_tail(lambda);
}

double rooted_tail_exact(const TinyGraph& g, std::uint32_t u, double lambda) {
  return ExactModel(g).rooted_tail(u, lambda);
}

std::uint32_t typical_max_exact(const TinyGraph& g) { return ExactModel(g).typical_max(); }

// ---------------------------------------------------------------------------
// Disjoint occurrence

bool is_increasing(const Event& a, std::size_t edge_count) {
  const std::size_t configs = std::size_t{1} << edge_count;
  if (a.size() != configs) throw DomainError("event size does not match edge count");
  for (std::uint32_t w = 0; w < configs; ++w) {
    if (!a[w]) continue;
    for (std::size_t e = 0; e < edge_count; ++e) {
      if (!a[w | (1u << e)]) return false;
    }
  }
  return true;
}

std::vector<std::uint32_t> minimal_witnesses(const Event& a, std::size_t edge_count) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t w = 0; w < a.size(); ++w) {
    if (!a[w]) continue;
    bool minimal = true;
    for (std::size_t e = 0; e < edge_count && minimal; ++e) {
      if ((w >> e & 1u) && a[w & ~(1u << e)]) minimal = false;
    }
    if (minimal) out.push_back(w);
  }
  return out;
}

Event disjoint_occurrence(const std::vector<Event>& events, std::size_t edge_count) {
  if (edge_count > TinyGraph::kMaxEdges) throw GuardError("too many edges for witness search");
  const std::size_t configs = std::size_t{1} << edge_count;
  const std::size_t k = events.size();
  std::vector<std::vector<std::uint32_t>> witnesses;
  for (const auto& a : events) {
    if (!is_increasing(a, edge_count)) throw DomainError("disjoint occurrence needs increasing events");
    witnesses.push_back(minimal_witnesses(a, edge_count));
  }
  // memo[i][avail]: events i..k-1 have disjoint witnesses inside `avail`.
  std::vector<std::vector<std::int8_t>> memo(k, std::vector<std::int8_t>(configs, -1));
  std::function<bool(std::size_t, std::uint32_t)> solve = [&](std::size_t i, std::uint32_t avail) {
    if (i == k) return true;
    auto& slot = memo[i][avail];
    if (slot >= 0) return slot == 1;
    bool ok = false;
    for (auto w : witnesses[i]) {
      if ((w & ~avail) == 0 && solve(i + 1, avail & ~w)) {
        ok = true;
        break;
      }
    }
    slot = ok ? 1 : 0;
    return ok;
  };
  Event out(configs, 0);
  for (std::uint32_t omega = 0; omega < configs; ++omega) out[omega] = solve(0, omega);
  return out;
}

double disjoint_occurrence_exact(const TinyGraph& g, const std::vector<Event>& events) {
  const ExactModel m(g);
  const Event occ = disjoint_occurrence(events, g.edges.size());
  double s = 0;
  for (std::size_t w = 0; w < occ.size(); ++w) {
    if (occ[w]) s += m.probabilities()[w];
  }
  return s;
}

void OracleReport::merge(OracleReport other) {
  checks += other.checks;
  for (auto& v : other.violations) violations.push_back(std::move(v));
}

// ---------------------------------------------------------------------------
// Inequality checks

namespace {

std::uint64_t pow3(int k) {
  std::uint64_t p = 1;
  for (int i = 0; i < k; ++i) p *= 3;
  return p;
}

// Partition every cluster meeting Λ in at least 3^k vertices and confirm the
// pieces are disjoint open witnesses with the required counts.
void check_witnesses(const ExactModel& m, int k, Checker& chk) {
  const TinyGraph& g = m.graph();
  const std::uint64_t need = pow3(k);
  for (std::uint32_t omega = 0; omega < m.configurations(); ++omega) {
    if (m.kmax(omega) < need) continue;
    std::uint32_t done = 0;
    for (std::uint32_t u = 0; u < g.vertex_count; ++u) {
      if (done >> u & 1u || m.rooted(u, omega) < need) continue;
      const std::uint32_t cluster = m.cluster_mask(u, omega);
      done |= cluster;
      std::vector<std::uint32_t> local(g.vertex_count, 0), A;
      std::uint32_t n = 0;
      for (std::uint32_t v = 0; v < g.vertex_count; ++v) {
        if (cluster >> v & 1u) {
          local[v] = n;
          if (g.window >> v & 1u) A.push_back(n);
          ++n;
        }
      }
      SimpleGraph sub{n, {}};
      std::vector<std::size_t> edge_of;
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if ((omega >> e & 1u) && (cluster >> g.edges[e].first & 1u)) {
          sub.edges.emplace_back(local[g.edges[e].first], local[g.edges[e].second]);
          edge_of.push_back(e);
        }
      }
      const PartitionResult r = partition_k(sub, A, k);
      const PartitionReport rep = verify_partition(sub, A, k, r);
      // Witness conditions: valid partition, enough pieces, each piece's
      // window count at least |A|/3^k.
      double min_count = std::numeric_limits<double>::infinity();
      for (auto c : r.counts) min_count = std::min(min_count, static_cast<double>(c));
      const double pieces = static_cast<double>(r.m());
      nlohmann::json params = {{"k", k}, {"omega", mask_string(omega, g.edges.size())}, {"root", u}};
      chk.check("max_tail_witness_valid", rep.ok ? 0 : 1, 0, params);
      chk.check("max_tail_witness_pieces", static_cast<double>(pow3(k - 1) + 1), pieces, params);
      chk.check("max_tail_witness_counts", static_cast<double>(A.size()) / need, min_count, params);
    }
  }
}

}  // namespace

OracleReport verify_maximum_tail(const ExactModel& m, const std::string& id, bool witnesses) {
  Checker chk(m, id);
  const TinyGraph& g = m.graph();
  const double s = g.window_size();
  const std::size_t E = g.edges.size();
  for (int k = 1; static_cast<double>(pow3(k)) <= s; ++k) {
    const double copies = static_cast<double>(pow3(k - 1) + 1);
    for (double lambda : lambda_grid(s / pow3(k))) {
      const double big = pow3(k) * lambda;
      const double base = m.maxcluster_tail(lambda);
      const double lhs = m.maxcluster_tail(big);
      nlohmann::json params = {{"k", k}, {"lambda", lambda}};
      chk.check("max_tail_unrooted", lhs, std::pow(base, copies), params);
      for (std::uint32_t u = 0; u < g.vertex_count; ++u) {
        params["u"] = u;
        chk.check("max_tail_rooted", m.rooted_tail(u, big),
                  std::pow(base, copies - 1) * m.rooted_tail(u, lambda), params);
      }
      params.erase("u");
      if (copies <= 4) {
        Event a(m.configurations(), 0);
        for (std::uint32_t w = 0; w < a.size(); ++w) a[w] = m.kmax(w) >= lambda;
        const Event occ = disjoint_occurrence(
            std::vector<Event>(static_cast<std::size_t>(copies), a), E);
        double p_occ = 0;
        for (std::size_t w = 0; w < occ.size(); ++w) {
          if (occ[w]) p_occ += m.probabilities()[w];
        }
        chk.check("max_tail_inclusion", lhs, p_occ, params);
        chk.check("bk_max_tail", p_occ, std::pow(base, copies), params);
      }
    }
    if (witnesses) check_witnesses(m, k, chk);
  }
  return std::move(chk.report);
}

OracleReport verify_maximum_tail(const ExactModel& m, const std::string& id) {
  return verify_maximum_tail(m, id, true);
}

OracleReport verify_tightness(const ExactModel& m, const std::string& id) {
  Checker chk(m, id);
  const TinyGraph& g = m.graph();
  const double M = m.typical_max();
  for (double alpha : {1.0, 2.0, 4.0, 8.0, 9.0, 12.0, 18.0, 27.0}) {
    nlohmann::json params = {{"alpha", alpha}, {"M", M}};
    chk.check("tightness_upper", m.maxcluster_tail(alpha * M), std::exp(-alpha / 9), params);
    for (std::uint32_t u = 0; u < g.vertex_count; ++u) {
      params["u"] = u;
      chk.check("tightness_rooted", m.rooted_tail(u, alpha * M),
                std::exp(1.0) * m.rooted_tail(u, M) * std::exp(-alpha / 9), params);
    }
  }
  for (double eps : {0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
    double below = 0;
    for (std::uint32_t w = 0; w < m.configurations(); ++w) {
      if (m.kmax(w) < eps * M) below += m.probabilities()[w];
    }
    chk.check("tightness_lower", below, 27 * eps, {{"epsilon", eps}, {"M", M}});
  }
  return std::move(chk.report);
}

OracleReport verify_hyperscaling_bounds(const ExactModel& m, double theta, const std::string& id) {
  if (!(theta >= 0 && theta < 1)) throw DomainError("theta must lie in [0, 1)");
  Checker chk(m, id);
  const TinyGraph& g = m.graph();
  const double s = g.window_size();
  const double M = m.typical_max();
  const double gamma = std::tgamma(1 - theta);
  const double e = std::exp(1.0);
  double A_all = 0;
  for (std::uint32_t u = 0; u < g.vertex_count; ++u) {
    std::vector<double> tail(static_cast<std::size_t>(s) + 2, 0);
    double A = 0, mean = 0;
    for (std::size_t n = 1; n < tail.size(); ++n) {
      tail[n] = m.rooted_tail(u, static_cast<double>(n));
      A = std::max(A, tail[n] * std::pow(static_cast<double>(n), theta));
      mean += tail[n];
    }
    A_all = std::max(A_all, A);
    nlohmann::json params = {{"theta", theta}, {"u", u}, {"A", A}, {"M", M}};
    chk.check("susceptibility_bound", mean, 18 * e * gamma * A * std::pow(M, 1 - theta), params);
    for (std::size_t n = 1; n < tail.size(); ++n) {
      params["n"] = n;
      const double dn = static_cast<double>(n);
      chk.check("rooted_tail_bound", tail[n],
                e * A * std::pow(18 / dn, theta) * std::exp(-dn / (18 * M)), params);
    }
  }
  chk.check("max_size_bound", std::pow(M, 1 + theta), 72 * e * e * gamma * A_all * s,
            {{"theta", theta}, {"A", A_all}, {"M", M}});
  return std::move(chk.report);
}

OracleReport verify_bk(const ExactModel& m, std::uint64_t seed, int count, const std::string& id) {
  Checker chk(m, id);
  const std::size_t E = m.graph().edges.size();
  const std::uint32_t configs = static_cast<std::uint32_t>(m.configurations());
  RngStream rng(seed, derive_stream(mix64(std::hash<std::string>{}(id)), 7));
  auto random_event = [&]() {
    Event a(configs, 0);
    const int generators = 1 + static_cast<int>(rng.next_below(3));
    for (int i = 0; i < generators; ++i) {
      std::uint32_t gen = 0;
      for (std::size_t e = 0; e < E; ++e) {
        if (rng.next_uniform() < 0.35) gen |= 1u << e;
      }
      for (std::uint32_t w = 0; w < configs; ++w) {
        if ((gen & ~w) == 0) a[w] = 1;
      }
    }
    return a;
  };
  auto prob = [&](const Event& a) {
    double s = 0;
    for (std::uint32_t w = 0; w < configs; ++w) {
      if (a[w]) s += m.probabilities()[w];
    }
    return s;
  };
  for (int i = 0; i < count; ++i) {
    const Event a = random_event(), b = random_event();
    const double both = prob(disjoint_occurrence({a, b}, E));
    chk.check("bk", both, prob(a) * prob(b), {{"pair", i}});
  }
  return std::move(chk.report);
}

// ---------------------------------------------------------------------------
// Corpus

std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> connected_graphs(
    std::uint32_t n) {
  if (n == 0 || n > 6) throw GuardError("connected graph enumeration limited to 1..6 vertices");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  }
  std::vector<std::vector<std::uint32_t>> index(n, std::vector<std::uint32_t>(n, 0));
  for (std::uint32_t i = 0; i < pairs.size(); ++i) {
    index[pairs[i].first][pairs[i].second] = index[pairs[i].second][pairs[i].first] = i;
  }
  std::vector<std::uint32_t> perm(n);
  std::set<std::uint32_t> canon;
  const std::uint32_t total = 1u << pairs.size();
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    SimpleGraph sg{n, {}};
    for (std::uint32_t i = 0; i < pairs.size(); ++i) {
      if (mask >> i & 1u) sg.edges.push_back(pairs[i]);
    }
    if (!is_connected(sg)) continue;
    std::iota(perm.begin(), perm.end(), 0);
    std::uint32_t best = mask;
    do {
      std::uint32_t img = 0;
      for (std::uint32_t i = 0; i < pairs.size(); ++i) {
        if (mask >> i & 1u) img |= 1u << index[perm[pairs[i].first]][perm[pairs[i].second]];
      }
      best = std::min(best, img);
    } while (std::next_permutation(perm.begin(), perm.end()));
    canon.insert(best);
  }
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> out;
  for (auto mask : canon) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t i = 0; i < pairs.size(); ++i) {
      if (mask >> i & 1u) edges.push_back(pairs[i]);
    }
    out.push_back(std::move(edges));
  }
  return out;
}

namespace {

struct CorpusItem {
  std::string id;
  TinyGraph graph;            // window and p filled per instance
  std::vector<double> p_grid;  // uniform p values; empty means graph.p is used as is
  bool all_windows = true;
  bool bk = false;
};

OracleReport run_item(const CorpusItem& item, const OracleSuiteOptions& options) {
  OracleReport report;
  TinyGraph g = item.graph;
  std::vector<std::uint32_t> windows;
  if (item.all_windows) {
    for (std::uint32_t w = 1; w < (1u << g.vertex_count); ++w) windows.push_back(w);
  } else {
    windows.push_back(g.window);
  }
  std::vector<std::vector<double>> p_sets;
  if (item.p_grid.empty()) {
    p_sets.push_back(g.p);
  } else {
    for (double q : item.p_grid) p_sets.emplace_back(g.edges.size(), q);
  }
  for (std::uint32_t w : windows) {
    for (std::size_t pi = 0; pi < p_sets.size(); ++pi) {
      g.window = w;
      g.p = p_sets[pi];
      const ExactModel m(g);
      const std::string id = item.id + "/w" + mask_string(w, g.vertex_count) +
                             (item.p_grid.empty() ? "" : "/p" + std::to_string(pi));
      // The witness construction does not depend on p; check it once.
      report.merge(verify_maximum_tail(m, id, pi == 0));
      report.merge(verify_tightness(m, id));
      for (double theta : options.thetas) report.merge(verify_hyperscaling_bounds(m, theta, id));
      if (item.bk) report.merge(verify_bk(m, options.seed, 5, id));
    }
  }
  return report;
}

}  // namespace

OracleSuiteSummary run_oracle_suite(const OracleSuiteOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<CorpusItem> items;
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  for (std::uint32_t n = 1; n <= options.max_exhaustive_vertices; ++n) {
    const auto graphs = connected_graphs(n);
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      CorpusItem item;
      item.id = "connected" + std::to_string(n) + "_" + std::to_string(i);
      item.graph.vertex_count = n;
      item.graph.edges = graphs[i];
      item.graph.p.assign(graphs[i].size(), 0.5);
      item.p_grid = grid;
      items.push_back(std::move(item));
    }
  }
  RngStream rng(options.seed, derive_stream(0x6f7261636c65ull, 1));
  for (int i = 0; i < options.random_graphs; ++i) {
    CorpusItem item;
    item.id = "random_" + std::to_string(i);
    const auto n = 2 + static_cast<std::uint32_t>(rng.next_below(options.random_max_vertices - 1));
    TinyGraph& g = item.graph;
    g.vertex_count = n;
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t v = 1; v < n; ++v) {
      edges.insert({static_cast<std::uint32_t>(rng.next_below(v)), v});
    }
    const std::size_t max_edges = std::min<std::size_t>(TinyGraph::kMaxEdges, n * (n - 1) / 2);
    const std::size_t target = edges.size() + rng.next_below(max_edges - edges.size() + 1);
    while (edges.size() < target) {
      auto a = static_cast<std::uint32_t>(rng.next_below(n));
      auto b = static_cast<std::uint32_t>(rng.next_below(n));
      if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
    }
    g.edges.assign(edges.begin(), edges.end());
    for (std::size_t e = 0; e < g.edges.size(); ++e) g.p.push_back(grid[rng.next_below(grid.size())]);
    g.window = 1 + static_cast<std::uint32_t>(rng.next_below((1u << n) - 1));
    item.all_windows = false;
    item.bk = true;
    items.push_back(std::move(item));
  }

  std::vector<OracleReport> reports(items.size());
  const int workers = std::max(1, options.workers);
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (std::size_t i = next++; i < items.size(); i = next++) reports[i] = run_item(items[i], options);
    });
  }
  for (auto& t : pool) t.join();

  OracleSuiteSummary summary;
  for (auto& r : reports) summary.report.merge(std::move(r));
  summary.graphs = items.size();
  for (const auto& item : items) {
    const std::uint64_t w = item.all_windows ? (1u << item.graph.vertex_count) - 1 : 1;
    summary.instances += w * std::max<std::size_t>(1, item.p_grid.size());
  }
  summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

}  // namespace lrperc
