#include <gtest/gtest.h>

#include <cmath>

#include "lrperc/errors.hpp"
#include "lrperc/estimators.hpp"
#include "lrperc/exact_oracle.hpp"
#include "lrperc/rng.hpp"

using namespace lrperc;

namespace {

Ensemble ensemble(int d, std::int64_t L, double alpha, double beta, std::uint64_t replicas,
                  std::vector<std::int64_t> r_grid = {}) {
  const TorusBox box(d, L);
  const Kernel k = normalize_kernel(Kernel::pure_power(d, alpha), box);
  const EdgeClassTable t(box, k);
  EnsembleOptions o;
  o.replicas = replicas;
  o.r_grid = std::move(r_grid);
  return run_ensemble(t, k, beta, 7, o);
}

}  // namespace

TEST(Tail, TrivialValues) {
  const auto e = ensemble(1, 64, 0.5, 0.0, 60);
  const auto recs = tail_estimate(e, {1, 2, 5});
  EXPECT_EQ(recs[0].estimate, 1.0);
  EXPECT_EQ(recs[1].estimate, 0.0);
  EXPECT_EQ(recs[2].estimate, 0.0);
  EXPECT_EQ(recs[1].params["n"], 2);
  EXPECT_THROW(tail_estimate(e, {}), DomainError);
  EXPECT_THROW(tail_estimate(ensemble(1, 64, 0.5, 0.0, 49), {1}), InsufficientDataError);
}

// P(|K_0| >= 2) = 1 - prod_y (1 - p_0y) = 1 - exp(-beta sum_y J).
TEST(Tail, SmallBetaMatchesExactNonIsolation) {
  const double beta = 0.3;
  const auto e = ensemble(1, 64, 0.5, beta, 2000);
  const TorusBox box(1, 64);
  const EdgeClassTable t(box, normalize_kernel(Kernel::pure_power(1, 0.5), box));
  const double exact = 1 - std::exp(-beta * t.oriented_weight_sum());
  const auto rec = tail_estimate(e, {2})[0];
  EXPECT_NEAR(rec.estimate, exact, 3 * rec.stderr_);
  EXPECT_LE(rec.ci_lo, rec.estimate);
  EXPECT_GE(rec.ci_hi, rec.estimate);
}

TEST(TwoPoint, TrivialValues) {
  const auto empty = ensemble(1, 64, 0.5, 0.0, 10, {1, 4});
  EXPECT_DOUBLE_EQ(two_point_avg_estimate(empty, 1).estimate, 1.0 / 3);
  EXPECT_DOUBLE_EQ(two_point_avg_estimate(empty, 4).estimate, 1.0 / 9);
  const auto full = ensemble(1, 16, 0.5, 200.0, 10, {2, 7});
  EXPECT_DOUBLE_EQ(two_point_avg_estimate(full, 2).estimate, 1.0);
  EXPECT_DOUBLE_EQ(two_point_avg_estimate(full, 7).estimate, 1.0);
  EXPECT_THROW(two_point_avg_estimate(full, 3), DomainError);
}

TEST(TypicalMax, TrivialValues) {
  EXPECT_EQ(m_typical_estimate(ensemble(1, 64, 0.5, 0.0, 100)), 2u);
  EXPECT_EQ(m_typical_estimate(ensemble(1, 16, 0.5, 200.0, 100)), 17u);
  EXPECT_THROW(m_typical_estimate(ensemble(1, 16, 0.5, 0.0, 99)), InsufficientDataError);
}

// The whole 4-torus as a tiny graph: exact M against the naive sampler.
TEST(TypicalMax, MatchesExactOracle) {
  const TorusBox box(1, 4);
  const Kernel k = normalize_kernel(Kernel::pure_power(1, 0.5), box);
  const EdgeClassTable t(box, k);
  const double beta = 0.6;
  TinyGraph g;
  g.vertex_count = 4;
  for (std::uint32_t u = 0; u < 4; ++u) {
    for (std::uint32_t w = u + 1; w < 4; ++w) {
      g.edges.push_back({u, w});
      g.p.push_back(1 - std::exp(-beta * t.weight(t.class_of(u, w))));
    }
  }
  g.window = 0xf;
  const ExactModel m(g);
  const auto M = m.typical_max();
  // The e^-1 threshold is not within sampling noise of the exact tail.
  ASSERT_GT(std::abs(m.maxcluster_tail(M) - std::exp(-1.0)), 0.01);
  ASSERT_GT(std::abs(m.maxcluster_tail(M - 1) - std::exp(-1.0)), 0.01);
  Ensemble e;
  e.box = box;
  e.beta = beta;
  for (std::uint64_t r = 0; r < 100000; ++r) e.replicas.push_back(summarize_replica(sample_naive(t, k, beta, 3, r), {}));
  EXPECT_EQ(m_typical_estimate(e), M);
}

TEST(ExponentFit, ExactPowerLaw) {
  std::vector<FitPoint> pts;
  for (double n = 1; n <= 1024; n *= 2) pts.push_back({n, 2.0 * std::pow(n, -0.3)});
  const auto f = exponent_fit(pts, 1, 1024, 1);
  EXPECT_NEAR(f.exponent, 0.3, 1e-6);
  EXPECT_NEAR(f.ci_lo, 0.3, 1e-6);
  EXPECT_NEAR(f.ci_hi, 0.3, 1e-6);
  EXPECT_EQ(f.points, 11u);
}

TEST(ExponentFit, NoisyPowerLaw) {
  RngStream rng(4, 4);
  std::vector<FitPoint> pts;
  for (double n = 1; n <= 1e4; n *= 1.5) {
    const double z = std::sqrt(-2 * std::log(rng.next_open_uniform())) * std::cos(2 * M_PI * rng.next_uniform());
    pts.push_back({n, std::pow(n, -0.3) * (1 + 0.01 * z)});
  }
  const auto f = exponent_fit(pts, 1, 1e4, 2);
  EXPECT_LE(f.ci_lo, 0.3);
  EXPECT_GE(f.ci_hi, 0.3);
  EXPECT_LT(f.ci_hi - f.ci_lo, 0.05);
}

TEST(ExponentFit, ConstantAndErrors) {
  std::vector<FitPoint> flat{{1, 0.5}, {2, 0.5}, {4, 0.5}, {8, 0.5}};
  EXPECT_NEAR(exponent_fit(flat, 1, 8, 1).exponent, 0.0, 1e-12);
  std::vector<FitPoint> zero{{1, 0.5}, {2, 0.5}, {4, 0.0}, {8, 0.5}};
  EXPECT_THROW(exponent_fit(zero, 1, 8, 1), DomainError);
  EXPECT_THROW(exponent_fit(flat, 1, 4, 1), InsufficientDataError);
  const auto w = default_tail_window(std::uint64_t{1} << 20);
  EXPECT_DOUBLE_EQ(w.first, 10.0);
  EXPECT_NEAR(w.second, 6553.6, 1e-9);
}

TEST(BoundAudit, OneDimensionalHalf) {
  ExponentFit tail, tp;
  tail.exponent = 0.3;
  tp.exponent = 0.4;
  const auto a = bound_audit(1, 0.5, tail, tp);
  ASSERT_EQ(a.lines.size(), 2u);
  EXPECT_NEAR(a.lines[0].bound, 0.2, 1e-15);
  EXPECT_NEAR(a.lines[0].predicted, 1.0 / 3, 1e-12);
  EXPECT_NEAR(a.lines[1].bound, 1.0 / 3, 1e-12);
  EXPECT_TRUE(a.pass());
  tail.exponent = 0.1;
  EXPECT_FALSE(bound_audit(1, 0.5, tail, tp).pass());
  EXPECT_THROW(bound_audit(1, 0.5, std::nullopt, tp), DomainError);
}

TEST(BetaC, SmallSearch) {
  BetaCOptions o;
  o.replicas = 100;
  o.bootstrap.resamples = 100;
  const auto r = beta_c_search(Kernel::pure_power(1, 0.5), {64, 128, 256}, o);
  ASSERT_EQ(r.levels.size(), 3u);
  EXPECT_GT(r.beta_hat, 0.5);
  EXPECT_LE(r.levels.back().ci_lo, r.beta_hat);
  EXPECT_GE(r.levels.back().ci_hi, r.beta_hat);
  for (const auto& l : r.levels) {
    double prev = 0;
    for (double b : l.beta_grid) {
      const double f = crossing_fraction(l.replica_crossings, b);
      EXPECT_GE(f, prev);
      prev = f;
    }
    EXPECT_EQ(l.susceptibility.size(), l.beta_grid.size());
    EXPECT_GE(crossing_fraction(l.replica_crossings, l.crossing), 0.5);
  }
  const auto again = beta_c_search(Kernel::pure_power(1, 0.5), {64, 128, 256}, o);
  EXPECT_EQ(again.beta_hat, r.beta_hat);
}

TEST(BetaC, Errors) {
  BetaCOptions o;
  o.replicas = 20;
  EXPECT_THROW(beta_c_search(Kernel::pure_power(1, 0.5), {64}, o), DomainError);
  o.initial_ceiling = 1e-3;
  o.max_ceiling = 1e-3;
  EXPECT_THROW(beta_c_search(Kernel::pure_power(1, 0.5), {64, 128}, o), SearchError);
}

TEST(Records, JsonRoundTrip) {
  const auto e = ensemble(1, 64, 0.5, 1.0, 60, {1, 2});
  const auto rec = tail_estimate(e, {3})[0];
  const auto back = estimate_from_json(to_json(rec));
  EXPECT_EQ(back.estimate, rec.estimate);
  EXPECT_EQ(back.params, rec.params);
  EXPECT_EQ(back.ci_hi, rec.ci_hi);
  const auto rep = replica_from_json(to_json(e.replicas[5]));
  EXPECT_EQ(rep.size_counts, e.replicas[5].size_counts);
  EXPECT_EQ(rep.two_point_sums, e.replicas[5].two_point_sums);
  EXPECT_EQ(rep.max_cluster, e.replicas[5].max_cluster);
}
