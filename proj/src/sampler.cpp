#include "lrperc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "lrperc/errors.hpp"
#include "lrperc/rng.hpp"

namespace lrperc {

namespace {

constexpr std::uint64_t kTagSkip = 1;
constexpr std::uint64_t kTagThin = 2;
constexpr std::uint64_t kTagDense = 3;

void sort_parallel(std::vector<Edge>& edges, std::vector<double>& thresholds) {
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });
  std::vector<Edge> e(edges.size());
  std::vector<double> t(edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    e[i] = edges[order[i]];
    t[i] = thresholds[order[i]];
  }
  edges.swap(e);
  thresholds.swap(t);
}

}  // namespace

Configuration CoupledSample::at(double beta) const {
  if (!(beta >= 0)) throw DomainError("beta must be nonnegative");
  if (beta > ceiling) throw DomainError("beta above the coupling ceiling");
  Configuration c;
  c.box = box;
  c.kernel_id = kernel_id;
  c.beta = beta;
  c.seed = seed;
  c.replica_index = replica_index;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (thresholds[i] <= beta) c.open_edges.push_back(edges[i]);
  }
  return c;
}

CoupledSample sample_coupled(const EdgeClassTable& table, const Kernel& kernel, double ceiling,
                             std::uint64_t seed, std::uint64_t replica,
                             const SamplerOptions& options) {
  if (!(ceiling >= 0)) throw DomainError("beta must be nonnegative");
  CoupledSample out;
  out.box = table.box();
  out.kernel_id = kernel.id();
  out.ceiling = ceiling;
  out.seed = seed;
  out.replica_index = replica;
  if (ceiling == 0) return out;

  const TorusBox& box = table.box();
  const std::uint64_t thin_stream = derive_stream(replica, kTagThin);
  const std::uint64_t dense_stream = derive_stream(replica, kTagDense);
  const std::uint64_t skip_parent = derive_stream(replica, kTagSkip);

  auto push = [&](Edge e, double beta_e) {
    if (out.edges.size() >= options.edge_cap) {
      throw ResourceError("open-edge count exceeds edge cap of " +
                          std::to_string(options.edge_cap));
    }
    out.edges.push_back(e);
    out.thresholds.push_back(std::min(beta_e, ceiling));
  };

  for (std::size_t c = 0; c < table.size(); ++c) {
    const double J = table.weight(c);
    const double p_max = edge_probability_from_weight(ceiling, J);
    if (p_max <= 0) continue;
    const std::uint64_t m = table.classes()[c].multiplicity;
    if (p_max > options.skip_threshold) {
      for (std::uint64_t i = 0; i < m; ++i) {
        const Edge e = table.edge_at(c, i);
        const double u = counter_uniform(seed, dense_stream, edge_id(box, e.first, e.second));
        if (u < p_max) push(e, -std::log1p(-u) / J);
      }
      continue;
    }
    // Candidates at p_max by geometric gaps, then each thinned by its own
    // keyed uniform so that the open set at beta is nested in beta.
    RngStream rng(seed, derive_stream(skip_parent, c));
    const double log_q = std::log1p(-p_max);
    double pos = -1;
    for (;;) {
      const double gap = std::floor(std::log(rng.next_open_uniform()) / log_q);
      pos += 1 + gap;
      if (pos >= static_cast<double>(m)) break;
      const Edge e = table.edge_at(c, static_cast<std::uint64_t>(pos));
      const double u = counter_uniform(seed, thin_stream, edge_id(box, e.first, e.second));
      push(e, -std::log1p(-u * p_max) / J);
    }
  }
  sort_parallel(out.edges, out.thresholds);
  return out;
}

Configuration sample_configuration(const EdgeClassTable& table, const Kernel& kernel,
                                   double beta, std::uint64_t seed, std::uint64_t replica,
                                   const SamplerOptions& options) {
  if (!(beta >= 0)) throw DomainError("beta must be nonnegative");
  CoupledSample s = sample_coupled(table, kernel, beta, seed, replica, options);
  Configuration c;
  c.box = s.box;
  c.kernel_id = std::move(s.kernel_id);
  c.beta = beta;
  c.seed = seed;
  c.replica_index = replica;
  c.open_edges = std::move(s.edges);
  return c;
}

Configuration sample_naive(const EdgeClassTable& table, const Kernel& kernel, double beta,
                           std::uint64_t seed, std::uint64_t replica) {
  if (!(beta >= 0)) throw DomainError("beta must be nonnegative");
  const TorusBox& box = table.box();
  if (box.vertex_count() > 4096) throw GuardError("naive sampler limited to N <= 4096");
  Configuration c;
  c.box = box;
  c.kernel_id = kernel.id();
  c.beta = beta;
  c.seed = seed;
  c.replica_index = replica;
  const std::uint64_t stream = derive_stream(replica, kTagDense);
  const auto N = static_cast<VertexId>(box.vertex_count());
  for (VertexId u = 0; u < N; ++u) {
    for (VertexId w = u + 1; w < N; ++w) {
      const double p = edge_probability_from_weight(beta, table.weight(table.class_of(u, w)));
      if (counter_uniform(seed, stream, edge_id(box, u, w)) < p) c.open_edges.emplace_back(u, w);
    }
  }
  return c;
}

double expected_open_edges(const EdgeClassTable& table, double beta) {
  double acc = 0;
  for (std::size_t c = 0; c < table.size(); ++c) {
    acc += static_cast<double>(table.classes()[c].multiplicity) *
           edge_probability_from_weight(beta, table.weight(c));
  }
  return acc;
}

std::vector<std::uint64_t> class_counts(const EdgeClassTable& table, const Configuration& c) {
  std::vector<std::uint64_t> counts(table.size(), 0);
  for (const auto& [u, w] : c.open_edges) ++counts[table.class_of(u, w)];
  return counts;
}

void write_edge_dump(const Configuration& c, const std::string& stem) {
  nlohmann::json header = {
      {"format", "lrperc-edges"},
      {"version", 1},
      {"dimension", c.box.dimension()},
      {"side", c.box.side()},
      {"boundary", to_string(c.box.boundary())},
      {"kernel", c.kernel_id},
      {"beta", c.beta},
      {"seed", c.seed},
      {"replica", c.replica_index},
      {"edges", c.open_edges.size()},
  };
  std::ofstream(stem + ".json") << header.dump(2) << '\n';
  std::ofstream bin(stem + ".bin", std::ios::binary);
  auto put = [&](std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    bin.write(reinterpret_cast<const char*>(bytes), 8);
  };
  for (const auto& [u, w] : c.open_edges) {
    put(u);
    put(w);
  }
}

Configuration read_edge_dump(const std::string& stem) {
  std::ifstream hs(stem + ".json");
  if (!hs) throw std::runtime_error("cannot open " + stem + ".json");
  const auto header = nlohmann::json::parse(hs);
  Configuration c;
  c.box = TorusBox(header.at("dimension").get<int>(), header.at("side").get<std::int64_t>(),
                   parse_boundary(header.at("boundary").get<std::string>()));
  c.kernel_id = header.at("kernel").get<std::string>();
  c.beta = header.at("beta").get<double>();
  c.seed = header.at("seed").get<std::uint64_t>();
  c.replica_index = header.at("replica").get<std::uint64_t>();
  const auto count = header.at("edges").get<std::uint64_t>();
  std::ifstream bin(stem + ".bin", std::ios::binary);
  auto get = [&]() {
    unsigned char bytes[8];
    if (!bin.read(reinterpret_cast<char*>(bytes), 8)) {
      throw std::runtime_error("truncated edge dump " + stem + ".bin");
    }
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
    return v;
  };
  c.open_edges.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto u = get();
    const auto w = get();
    c.open_edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(w));
  }
  return c;
}

}  // namespace lrperc
