#include "lrperc/ghost_fluctuation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>

#include "lrperc/errors.hpp"
#include "lrperc/rng.hpp"

namespace lrperc {

namespace {

void require_torus(const EdgeClassTable& table) {
  if (table.box().boundary() != Boundary::Torus) {
    throw DomainError("good weights need a translation-invariant torus");
  }
}

// Oriented edges at a vertex that fall in class c.
double oriented_multiplicity(const EdgeClassTable& table, std::size_t c) {
  return 2.0 * static_cast<double>(table.classes()[c].multiplicity) /
         static_cast<double>(table.box().vertex_count());
}

void check_open_interval(double p) {
  if (!(p > 0 && p < 1)) throw DomainError("edge probability must lie in (0, 1)");
}

}  // namespace

GoodWeight GoodWeight::from_kernel(const EdgeClassTable& table) {
  return from_values(table, table.weights());
}

GoodWeight GoodWeight::from_values(const EdgeClassTable& table, std::vector<double> values) {
  require_torus(table);
  if (values.size() != table.size()) throw DomainError("one weight per class expected");
  double total = 0;
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (!(values[c] >= 0)) throw DomainError("good weights must be nonnegative");
    total += oriented_multiplicity(table, c) * values[c];
  }
  if (!(total > 0)) throw DomainError("good weights vanish identically");
  for (auto& v : values) v /= total;
  GoodWeight g;
  g.w_ = std::move(values);
  return g;
}

GoodWeight GoodWeight::optimized(const EdgeClassTable& table, const std::vector<double>& two_arm,
                                 double beta) {
  if (two_arm.size() != table.size()) throw DomainError("one probability per class expected");
  std::vector<double> v(table.size());
  for (std::size_t c = 0; c < v.size(); ++c) {
    const double s = two_arm[c] * std::sqrt(std::expm1(beta * table.weight(c)));
    v[c] = s * s;
  }
  return from_values(table, std::move(v));
}

double ghost_hit_probability(double w_total, double h) {
  if (!(h > 0)) throw DomainError("ghost intensity must be positive");
  return -std::expm1(-h * w_total);
}

std::vector<Edge> sample_ghost_edges(const EdgeClassTable& table, const GhostParams& ghost,
                                     const std::vector<VertexId>& vertices, std::uint64_t seed,
                                     std::uint64_t stream) {
  if (!(ghost.h > 0)) throw DomainError("ghost intensity must be positive");
  const TorusBox& box = table.box();
  const auto N = static_cast<VertexId>(box.vertex_count());
  std::vector<char> in(N, 0);
  for (auto v : vertices) in[v] = 1;
  std::vector<Edge> out;
  for (auto x : vertices) {
    for (VertexId y = 0; y < N; ++y) {
      if (y == x || (in[y] && y < x)) continue;
      const double p = -std::expm1(-ghost.h * ghost.weight[table.class_of(x, y)]);
      if (counter_uniform(seed, stream, edge_id(box, x, y)) < p) {
        out.emplace_back(std::min(x, y), std::max(x, y));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool two_arm_indicator(const ClusterForest& forest, VertexId x, VertexId y, std::uint64_t n) {
  const VertexId rx = forest.find(x), ry = forest.find(y);
  if (rx == ry) return false;
  return forest.cluster_size(rx) >= n && forest.cluster_size(ry) >= n;
}

Adjacency::Adjacency(const Configuration& c) {
  const std::size_t N = c.box.vertex_count();
  offsets_.assign(N + 1, 0);
  for (const auto& [u, w] : c.open_edges) {
    ++offsets_[u + 1];
    ++offsets_[w + 1];
  }
  for (std::size_t v = 0; v < N; ++v) offsets_[v + 1] += offsets_[v];
  targets_.resize(offsets_[N]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [u, w] : c.open_edges) {
    targets_[fill[u]++] = w;
    targets_[fill[w]++] = u;
  }
  for (std::size_t v = 0; v < N; ++v) {
    std::sort(targets_.begin() + offsets_[v], targets_.begin() + offsets_[v + 1]);
  }
}

bool Adjacency::is_open(VertexId u, VertexId w) const {
  const auto nb = neighbours(u);
  return std::binary_search(nb.begin(), nb.end(), w);
}

std::vector<VertexId> cluster_vertices(const Adjacency& adj, VertexId v) {
  std::vector<char> seen(adj.vertex_count(), 0);
  std::vector<VertexId> out{v};
  seen[v] = 1;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (auto w : adj.neighbours(out[i])) {
      if (!seen[w]) {
        seen[w] = 1;
        out.push_back(w);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> class_probabilities(const EdgeClassTable& table, double beta) {
  std::vector<double> p(table.size());
  for (std::size_t c = 0; c < p.size(); ++c) {
    p[c] = edge_probability_from_weight(beta, table.weight(c));
  }
  return p;
}

double fluctuation(const EdgeClassTable& table, const Adjacency& adj,
                   const std::vector<VertexId>& cluster, const std::vector<double>& p,
                   const GoodWeight& w) {
  const auto N = static_cast<VertexId>(table.box().vertex_count());
  std::vector<char> in(N, 0), open(N, 0);
  for (auto v : cluster) in[v] = 1;
  double h = 0;
  for (auto x : cluster) {
    for (auto y : adj.neighbours(x)) open[y] = 1;
    for (VertexId y = 0; y < N; ++y) {
      if (y == x || (in[y] && y < x)) continue;
      const auto c = table.class_of(x, y);
      check_open_interval(p[c]);
      const double sw = std::sqrt(w[c]);
      h += open[y] ? -sw * std::sqrt((1 - p[c]) / p[c]) : sw * std::sqrt(p[c] / (1 - p[c]));
    }
    for (auto y : adj.neighbours(x)) open[y] = 0;
  }
  return h;
}

double touching_weight(const EdgeClassTable& table, const std::vector<VertexId>& cluster,
                       const std::vector<double>& w) {
  const auto N = static_cast<VertexId>(table.box().vertex_count());
  std::vector<char> in(N, 0);
  for (auto v : cluster) in[v] = 1;
  double total = 0;
  for (auto x : cluster) {
    for (VertexId y = 0; y < N; ++y) {
      if (y == x || (in[y] && y < x)) continue;
      total += w[table.class_of(x, y)];
    }
  }
  return total;
}

ExplorationTrace explore_cluster(const EdgeClassTable& table, const Adjacency& adj, VertexId v,
                                 const std::vector<double>& p, const GoodWeight& w) {
  const auto N = static_cast<VertexId>(table.box().vertex_count());
  if (v >= N) throw DomainError("start vertex outside the box");
  std::vector<char> discovered(N, 0), processed(N, 0), open(N, 0);
  ExplorationTrace t;
  t.Z.push_back(0);
  t.Q.push_back(0);
  std::vector<VertexId> queue{v};
  discovered[v] = 1;
  double z = 0, q = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const VertexId u = queue[head];
    processed[u] = 1;
    for (auto y : adj.neighbours(u)) open[y] = 1;
    for (VertexId y = 0; y < N; ++y) {
      if (processed[y]) continue;
      const auto c = table.class_of(u, y);
      check_open_interval(p[c]);
      const double sw = std::sqrt(w[c]);
      const bool is_open = open[y];
      z += is_open ? -sw * std::sqrt((1 - p[c]) / p[c]) : sw * std::sqrt(p[c] / (1 - p[c]));
      q += w[c];
      t.steps.push_back({u, y, is_open});
      t.Z.push_back(z);
      t.Q.push_back(q);
      if (is_open && !discovered[y]) {
        discovered[y] = 1;
        queue.push_back(y);
      }
    }
    for (auto y : adj.neighbours(u)) open[y] = 0;
  }
  std::sort(queue.begin(), queue.end());
  t.cluster = std::move(queue);
  return t;
}

// ---------------------------------------------------------------------------
// Two-arm accumulation

namespace {
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

// Circular autocorrelation on the torus, A(o) = sum_x b(x) b(x + o).
struct TwoGhostAccumulator::Fft {
  explicit Fft(const TorusBox& box)
      : n(box.vertex_count()), spectrum(n / box.side() * (box.side() / 2 + 1)) {
    real = fftw_alloc_real(n);
    freq = fftw_alloc_complex(spectrum);
    std::vector<int> dims(box.dimension(), static_cast<int>(box.side()));
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c(box.dimension(), dims.data(), real, freq, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r(box.dimension(), dims.data(), freq, real, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(freq);
  }

  // Input: indicator in `real`; output: autocorrelation in `real`.
  void autocorrelate() {
    fftw_execute(forward);
    for (std::size_t i = 0; i < spectrum; ++i) {
      freq[i][0] = freq[i][0] * freq[i][0] + freq[i][1] * freq[i][1];
      freq[i][1] = 0;
    }
    fftw_execute(backward);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) real[i] = std::round(real[i] * scale);
  }

  std::size_t n;
  std::size_t spectrum;
  double* real;
  fftw_complex* freq;
  fftw_plan forward;
  fftw_plan backward;
};

TwoGhostAccumulator::TwoGhostAccumulator(const EdgeClassTable& table, double beta,
                                         std::vector<std::uint64_t> n_grid,
                                         std::vector<double> lambda_grid)
    : table_(table), beta_(beta), n_grid_(std::move(n_grid)), lambda_grid_(std::move(lambda_grid)) {
  require_torus(table);
  if (!(beta >= 0)) throw DomainError("beta must be nonnegative");
  for (auto n : n_grid_) {
    if (n < 1) throw DomainError("two-arm thresholds must be >= 1");
  }
  for (auto l : lambda_grid_) {
    if (!(l > 0)) throw DomainError("weight thresholds must be positive");
  }
  const std::size_t N = table.box().vertex_count();
  vertex_counts_.assign(n_grid_.size(), std::vector<double>(table.size(), 0));
  weight_counts_.assign(lambda_grid_.size(), std::vector<double>(table.size(), 0));
  size_vertices_.assign(N + 1, 0);
  offset_class_.assign(N, 0);
  for (std::size_t o = 1; o < N; ++o) offset_class_[o] = table.class_of(0, static_cast<VertexId>(o));
  fft_ = std::make_unique<Fft>(table.box());
}

TwoGhostAccumulator::~TwoGhostAccumulator() = default;

void TwoGhostAccumulator::add(const Configuration& config) {
  if (!(config.box == table_.box())) throw DomainError("configuration box mismatch");
  const std::size_t N = table_.box().vertex_count();
  ClusterForest forest = build_clusters(config);
  const std::vector<VertexId> roots = forest.roots();
  ++replicas_;

  std::unordered_map<VertexId, std::vector<VertexId>> members;
  const double S = table_.oriented_weight_sum();
  std::uint64_t size_floor = std::numeric_limits<std::uint64_t>::max();
  for (auto n : n_grid_) size_floor = std::min(size_floor, n);
  for (auto l : lambda_grid_) {
    size_floor = std::min<std::uint64_t>(size_floor, static_cast<std::uint64_t>(std::ceil(l / S)));
  }
  size_floor = std::max<std::uint64_t>(size_floor, 1);
  for (std::size_t v = 0; v < N; ++v) {
    if (roots[v] == v) size_vertices_[forest.cluster_size(static_cast<VertexId>(v))] +=
        forest.cluster_size(static_cast<VertexId>(v));
    if (forest.cluster_size(static_cast<VertexId>(v)) >= size_floor) {
      members[roots[v]].push_back(static_cast<VertexId>(v));
    }
  }
  if (members.empty()) return;
  // Deterministic cluster order (the map iteration order is not).
  std::vector<VertexId> cluster_roots;
  for (const auto& kv : members) cluster_roots.push_back(kv.first);
  std::sort(cluster_roots.begin(), cluster_roots.end());

  const std::size_t T_n = n_grid_.size(), T_l = lambda_grid_.size();
  std::vector<std::vector<double>> same_n(T_n, std::vector<double>(table_.size(), 0));
  std::vector<std::vector<double>> same_l(T_l, std::vector<double>(table_.size(), 0));
  std::vector<std::vector<char>> big_n(T_n, std::vector<char>(N, 0));
  std::vector<std::vector<char>> big_l(T_l, std::vector<char>(N, 0));
  const double fft_cost = 8.0 * static_cast<double>(N) * std::log2(static_cast<double>(N));

  std::vector<std::size_t> qual_n, qual_l;
  for (VertexId r : cluster_roots) {
    const auto& K = members[r];
    const double k = static_cast<double>(K.size());
    // Pair counts per class inside K, either directly or by FFT.
    std::vector<std::pair<std::uint32_t, double>> pairs;
    if (k * k > fft_cost) {
      std::fill(fft_->real, fft_->real + N, 0.0);
      for (auto x : K) fft_->real[x] = 1;
      fft_->autocorrelate();
      for (std::size_t o = 1; o < N; ++o) {
        if (fft_->real[o] == 0) continue;
        pairs.emplace_back(offset_class_[o], fft_->real[o]);
      }
      // Each unordered pair appears at o and -o; self-paired classes hit
      // one offset twice, others two offsets once each.
      for (auto& pr : pairs) pr.second *= 0.5;
    } else {
      pairs.reserve(K.size() * (K.size() - 1) / 2);
      for (std::size_t i = 0; i < K.size(); ++i) {
        for (std::size_t j = i + 1; j < K.size(); ++j) {
          pairs.emplace_back(table_.class_of(K[i], K[j]), 1.0);
        }
      }
    }
    double internal = 0;
    for (const auto& [c, m] : pairs) internal += m * table_.weight(c);
    const double touching = k * S - internal;

    qual_n.clear();
    qual_l.clear();
    for (std::size_t i = 0; i < T_n; ++i) {
      if (K.size() >= n_grid_[i]) qual_n.push_back(i);
    }
    for (std::size_t i = 0; i < T_l; ++i) {
      if (touching >= lambda_grid_[i]) qual_l.push_back(i);
    }
    for (const auto& [c, m] : pairs) {
      for (auto i : qual_n) same_n[i][c] += m;
      for (auto i : qual_l) same_l[i][c] += m;
    }
    for (auto x : K) {
      for (auto i : qual_n) big_n[i][x] = 1;
      for (auto i : qual_l) big_l[i][x] = 1;
    }
  }

  auto accumulate = [&](const std::vector<char>& big, const std::vector<double>& same,
                        std::vector<double>& counts) {
    if (std::find(big.begin(), big.end(), 1) == big.end()) return;
    for (std::size_t x = 0; x < N; ++x) fft_->real[x] = big[x];
    fft_->autocorrelate();
    for (std::size_t c = 0; c < table_.size(); ++c) {
      const auto o = table_.box().vertex(table_.classes()[c].displacement);
      double pairs = fft_->real[o];
      if (table_.classes()[c].self_paired) pairs *= 0.5;
      counts[c] += pairs - same[c];
    }
  };
  for (std::size_t i = 0; i < T_n; ++i) accumulate(big_n[i], same_n[i], vertex_counts_[i]);
  for (std::size_t i = 0; i < T_l; ++i) accumulate(big_l[i], same_l[i], weight_counts_[i]);
}

void TwoGhostAccumulator::merge(const TwoGhostAccumulator& other) {
  if (other.n_grid_ != n_grid_ || other.lambda_grid_ != lambda_grid_ || other.beta_ != beta_ ||
      !(other.table_.box() == table_.box())) {
    throw DomainError("cannot merge accumulators with different parameters");
  }
  replicas_ += other.replicas_;
  for (std::size_t i = 0; i < vertex_counts_.size(); ++i) {
    for (std::size_t c = 0; c < table_.size(); ++c) vertex_counts_[i][c] += other.vertex_counts_[i][c];
  }
  for (std::size_t i = 0; i < weight_counts_.size(); ++i) {
    for (std::size_t c = 0; c < table_.size(); ++c) weight_counts_[i][c] += other.weight_counts_[i][c];
  }
  for (std::size_t s = 0; s < size_vertices_.size(); ++s) size_vertices_[s] += other.size_vertices_[s];
}

namespace {
std::vector<double> per_class_probability(const EdgeClassTable& table,
                                          const std::vector<double>& counts,
                                          std::uint64_t replicas) {
  std::vector<double> out(table.size(), 0);
  if (replicas == 0) return out;
  for (std::size_t c = 0; c < table.size(); ++c) {
    out[c] = counts[c] / (static_cast<double>(replicas) *
                          static_cast<double>(table.classes()[c].multiplicity));
  }
  return out;
}
}  // namespace

std::vector<double> TwoGhostAccumulator::two_arm_probabilities(std::size_t i) const {
  return per_class_probability(table_, vertex_counts_.at(i), replicas_);
}

std::vector<double> TwoGhostAccumulator::weight_arm_probabilities(std::size_t i) const {
  return per_class_probability(table_, weight_counts_.at(i), replicas_);
}

std::vector<double> TwoGhostAccumulator::tail() const {
  const std::size_t N = table_.box().vertex_count();
  std::vector<double> out(N + 1, 0);
  if (replicas_ == 0) return out;
  const double denom = static_cast<double>(replicas_) * static_cast<double>(N);
  std::uint64_t acc = 0;
  for (std::size_t s = N; s >= 1; --s) {
    acc += size_vertices_[s];
    out[s] = static_cast<double>(acc) / denom;
  }
  out[0] = 1;
  return out;
}

double tail_prefactor(const std::vector<double>& tail, double theta) {
  double A = 0;
  for (std::size_t n = 1; n < tail.size(); ++n) {
    A = std::max(A, tail[n] * std::pow(static_cast<double>(n), theta));
  }
  return A;
}

TwoGhostResult two_ghost_audit(const TwoGhostAccumulator& acc, std::size_t index,
                               TwoGhostVariant variant, double theta) {
  if (acc.replicas() < 100) {
    throw InsufficientDataError("two-ghost audit needs at least 100 replicas, got " +
                                std::to_string(acc.replicas()));
  }
  if (!(theta >= 0 && theta < 0.5)) throw DomainError("theta must lie in [0, 1/2)");
  const EdgeClassTable& table = acc.table();
  const double beta = acc.beta();
  TwoGhostResult r;
  r.theta = theta;
  r.replicas = acc.replicas();
  r.A = tail_prefactor(acc.tail(), theta);
  if (variant == TwoGhostVariant::Vertex) {
    const double n = static_cast<double>(acc.n_grid().at(index));
    const auto P = acc.two_arm_probabilities(index);
    for (std::size_t c = 0; c < table.size(); ++c) {
      const double term = P[c] * std::sqrt(std::expm1(beta * table.weight(c)));
      r.lhs += oriented_multiplicity(table, c) * term * term;
    }
    r.threshold = n;
    r.rhs = 10000 * r.A * r.A / ((1 - 2 * theta) * (1 - 2 * theta) * std::pow(n, 1 + 2 * theta));
  } else {
    const double lambda = acc.lambda_grid().at(index);
    const auto P = acc.weight_arm_probabilities(index);
    for (std::size_t c = 0; c < table.size(); ++c) {
      const double J = table.weight(c);
      r.lhs += oriented_multiplicity(table, c) * std::sqrt(J * std::expm1(beta * J)) * P[c];
    }
    r.threshold = lambda;
    r.rhs = 42 / std::sqrt(lambda);
  }
  r.margin = r.lhs > 0 ? r.rhs / r.lhs : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace lrperc
