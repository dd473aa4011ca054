#include "lrperc/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "lrperc/errors.hpp"
#include "lrperc/rng.hpp"

namespace lrperc {

double mean(const std::vector<double>& x) {
  if (x.empty()) throw InsufficientDataError("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double standard_error(const std::vector<double>& x) {
  if (x.size() < 2) return 0;
  const double m = mean(x);
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw InsufficientDataError("quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= x.size()) return x.back();
  return x[i] * (1 - frac) + x[i + 1] * frac;
}

Interval bootstrap_percentile(std::size_t n,
                              const std::function<double(const std::vector<std::size_t>&)>& statistic,
                              int resamples, double level, std::uint64_t seed,
                              std::uint64_t stream) {
  if (n == 0) throw InsufficientDataError("bootstrap of an empty sample");
  RngStream rng(seed, stream);
  std::vector<double> stats;
  stats.reserve(resamples);
  std::vector<std::size_t> idx(n);
  for (int b = 0; b < resamples; ++b) {
    for (auto& i : idx) i = rng.next_below(n);
    stats.push_back(statistic(idx));
  }
  const double tail = (1 - level) / 2;
  return {quantile(stats, tail), quantile(stats, 1 - tail)};
}

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0) return 1;
  if (statistic <= 0) return 1;
  return boost::math::gamma_q(dof / 2, statistic / 2);
}

ChiSquare chi_square_two_sample(const std::vector<std::uint64_t>& a,
                                const std::vector<std::uint64_t>& b) {
  const std::size_t bins = std::max(a.size(), b.size());
  auto at = [](const std::vector<std::uint64_t>& v, std::size_t i) {
    return i < v.size() ? static_cast<double>(v[i]) : 0.0;
  };
  double na = 0, nb = 0;
  for (std::size_t i = 0; i < bins; ++i) {
    na += at(a, i);
    nb += at(b, i);
  }
  if (na == 0 || nb == 0) throw InsufficientDataError("chi-square needs two nonempty samples");
  // Pool adjacent bins left to right until the smaller expected count is >= 5.
  const double frac = std::min(na, nb) / (na + nb);
  std::vector<std::pair<double, double>> pooled;
  double ca = 0, cb = 0;
  for (std::size_t i = 0; i < bins; ++i) {
    ca += at(a, i);
    cb += at(b, i);
    if ((ca + cb) * frac >= 5) {
      pooled.emplace_back(ca, cb);
      ca = cb = 0;
    }
  }
  if (ca + cb > 0) {
    if (pooled.empty()) {
      pooled.emplace_back(ca, cb);
    } else {
      pooled.back().first += ca;
      pooled.back().second += cb;
    }
  }
  ChiSquare r;
  const double n = na + nb;
  for (const auto& [x, y] : pooled) {
    const double col = x + y;
    const double ea = col * na / n, eb = col * nb / n;
    r.statistic += (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb;
  }
  r.dof = static_cast<double>(pooled.size()) - 1;
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

ChiSquare combine(const std::vector<ChiSquare>& tests) {
  ChiSquare r;
  for (const auto& t : tests) {
    r.statistic += t.statistic;
    r.dof += t.dof;
  }
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InsufficientDataError("fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw DomainError("fit abscissae are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.residuals.push_back(r);
    sse += r * r;
  }
  f.r2 = syy > 0 ? 1 - sse / syy : 1;
  return f;
}

}  // namespace lrperc
