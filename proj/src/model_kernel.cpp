#include "lrperc/model_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lrperc/errors.hpp"

namespace lrperc {

const char* to_string(Norm norm) {
  switch (norm) {
    case Norm::L1: return "L1";
    case Norm::L2: return "L2";
    case Norm::Linf: return "Linf";
  }
  return "?";
}

const char* to_string(KernelForm form) {
  return form == KernelForm::PurePower ? "pure_power" : "radial_table";
}

const char* to_string(Boundary boundary) {
  return boundary == Boundary::Torus ? "torus" : "free";
}

Norm parse_norm(const std::string& s) {
  if (s == "L1") return Norm::L1;
  if (s == "L2") return Norm::L2;
  if (s == "Linf") return Norm::Linf;
  throw DomainError("unknown norm '" + s + "'");
}

Boundary parse_boundary(const std::string& s) {
  if (s == "torus") return Boundary::Torus;
  if (s == "free") return Boundary::FreeBox;
  throw DomainError("unknown boundary '" + s + "'");
}

double norm_of(std::span<const std::int64_t> x, Norm norm) {
  double acc = 0;
  for (auto c : x) {
    const double a = std::abs(static_cast<double>(c));
    switch (norm) {
      case Norm::L1: acc += a; break;
      case Norm::L2: acc += a * a; break;
      case Norm::Linf: acc = std::max(acc, a); break;
    }
  }
  return norm == Norm::L2 ? std::sqrt(acc) : acc;
}

Kernel Kernel::pure_power(int dimension, double alpha, double amplitude, Norm norm) {
  if (dimension < 1) throw DomainError("kernel dimension must be >= 1");
  if (!(alpha > 0)) throw DomainError("kernel alpha must be positive");
  if (!(amplitude > 0)) throw DomainError("kernel amplitude must be positive");
  Kernel k;
  k.dimension_ = dimension;
  k.alpha_ = alpha;
  k.amplitude_ = amplitude;
  k.norm_ = norm;
  k.form_ = KernelForm::PurePower;
  return k;
}

Kernel Kernel::radial_table(int dimension, double alpha, std::vector<RadialEntry> table,
                            Norm norm) {
  if (dimension < 1) throw DomainError("kernel dimension must be >= 1");
  if (!(alpha > 0)) throw DomainError("kernel alpha must be positive");
  if (table.empty()) throw DomainError("radial table is empty");
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!(table[i].radius > 0)) throw DomainError("radial table radii must be positive");
    if (!(table[i].weight > 0)) throw DomainError("radial table weights must be positive");
    if (i > 0 && !(table[i].radius > table[i - 1].radius)) {
      throw DomainError("radial table radii must be strictly increasing");
    }
    if (i > 0 && table[i].weight > table[i - 1].weight) {
      throw DomainError("radial table weights must be nonincreasing");
    }
  }
  Kernel k;
  k.dimension_ = dimension;
  k.alpha_ = alpha;
  k.norm_ = norm;
  k.form_ = KernelForm::RadialTable;
  k.table_ = std::move(table);
  return k;
}

Kernel Kernel::scaled(double factor) const {
  if (!(factor > 0)) throw DomainError("kernel scale factor must be positive");
  Kernel k = *this;
  k.amplitude_ *= factor;
  for (auto& e : k.table_) e.weight *= factor;
  return k;
}

std::string Kernel::id() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(form_) << ":d=" << dimension_ << ":alpha=" << alpha_
     << ":norm=" << to_string(norm_);
  if (form_ == KernelForm::PurePower) {
    os << ":A=" << amplitude_;
  } else {
    os << ":shells=" << table_.size() << ":w0=" << table_.front().weight;
  }
  return os.str();
}

double kernel_eval(const Kernel& kernel, std::span<const std::int64_t> x) {
  if (static_cast<int>(x.size()) != kernel.dimension()) {
    throw DomainError("displacement dimension does not match kernel");
  }
  if (std::all_of(x.begin(), x.end(), [](std::int64_t c) { return c == 0; })) {
    throw DomainError("kernel evaluated at zero displacement");
  }
  const double r = norm_of(x, kernel.norm());
  if (kernel.form() == KernelForm::PurePower) {
    return kernel.amplitude() * std::pow(r, -(kernel.dimension() + kernel.alpha()));
  }
  const auto& table = kernel.table();
  const auto it = std::find_if(table.begin(), table.end(), [r](const RadialEntry& e) {
    return r <= e.radius * (1 + 1e-12);
  });
  if (it == table.end()) throw DomainError("radius beyond radial table");
  return it->weight;
}

double edge_probability_from_weight(double beta, double weight) {
  if (!(beta >= 0)) throw DomainError("beta must be nonnegative");
  return -std::expm1(-beta * weight);
}

double edge_probability(const Kernel& kernel, double beta, std::span<const std::int64_t> x) {
  if (!(beta >= 0)) throw DomainError("beta must be nonnegative");
  return edge_probability_from_weight(beta, kernel_eval(kernel, x));
}

// ---------------------------------------------------------------------------
// TorusBox

TorusBox::TorusBox(int dimension, std::int64_t side, Boundary boundary)
    : dimension_(dimension), side_(side), boundary_(boundary), vertex_count_(1) {
  if (dimension < 1) throw DomainError("box dimension must be >= 1");
  if (side < 2 || side % 2 != 0) throw DomainError("box side must be a positive even integer");
  for (int j = 0; j < dimension; ++j) {
    vertex_count_ *= static_cast<std::uint64_t>(side);
    if (vertex_count_ > std::numeric_limits<VertexId>::max()) {
      throw ResourceError("box has more than 2^32 - 1 vertices");
    }
  }
}

Displacement TorusBox::coords(VertexId v) const {
  Displacement x(dimension_);
  std::uint64_t rest = v;
  for (int j = 0; j < dimension_; ++j) {
    x[j] = static_cast<std::int64_t>(rest % side_);
    rest /= side_;
  }
  return x;
}

VertexId TorusBox::vertex(std::span<const std::int64_t> coords) const {
  std::uint64_t id = 0;
  for (int j = dimension_ - 1; j >= 0; --j) {
    const std::int64_t c = ((coords[j] % side_) + side_) % side_;
    id = id * side_ + static_cast<std::uint64_t>(c);
  }
  return static_cast<VertexId>(id);
}

Displacement TorusBox::minimal_image(std::span<const std::int64_t> x) const {
  Displacement out(x.begin(), x.end());
  for (auto& c : out) {
    c = ((c % side_) + side_) % side_;
    if (c > side_ / 2) c -= side_;
  }
  return out;
}

Displacement TorusBox::displacement(VertexId u, VertexId w) const {
  Displacement a = coords(u), b = coords(w);
  for (int j = 0; j < dimension_; ++j) b[j] -= a[j];
  return boundary_ == Boundary::Torus ? minimal_image(b) : b;
}

// ---------------------------------------------------------------------------
// Displacement classes

namespace {

Displacement negate(const Displacement& v) {
  Displacement out(v);
  for (auto& c : out) c = -c;
  return out;
}

// Enumerate all vectors with components in [lo, hi] in little-endian order.
template <typename F>
void for_each_vector(int dim, std::int64_t lo, std::int64_t hi, F&& f) {
  Displacement v(dim, lo);
  for (;;) {
    f(v);
    int j = 0;
    while (j < dim && v[j] == hi) v[j++] = lo;
    if (j == dim) return;
    ++v[j];
  }
}

}  // namespace

std::vector<DisplacementClass> displacement_classes(const TorusBox& box) {
  const int d = box.dimension();
  const std::int64_t L = box.side();
  const std::uint64_t N = box.vertex_count();
  std::vector<DisplacementClass> out;
  if (box.boundary() == Boundary::Torus) {
    for_each_vector(d, -L / 2 + 1, L / 2, [&](const Displacement& v) {
      if (std::all_of(v.begin(), v.end(), [](auto c) { return c == 0; })) return;
      const Displacement w = box.minimal_image(negate(v));
      if (v == w) {
        out.push_back({v, N / 2, true});
      } else if (std::lexicographical_compare(w.rbegin(), w.rend(), v.rbegin(), v.rend())) {
        out.push_back({v, N, false});
      }
    });
  } else {
    for_each_vector(d, -L + 1, L - 1, [&](const Displacement& v) {
      // Keep v when its most significant nonzero component is positive.
      for (int j = d - 1; j >= 0; --j) {
        if (v[j] == 0) continue;
        if (v[j] < 0) return;
        std::uint64_t mult = 1;
        for (auto c : v) mult *= static_cast<std::uint64_t>(L - std::abs(c));
        out.push_back({v, mult, false});
        return;
      }
    });
  }
  return out;
}

EdgeClassTable::EdgeClassTable(const TorusBox& box, const Kernel& kernel, ImageConvention images)
    : box_(box), classes_(displacement_classes(box)) {
  if (kernel.dimension() != box.dimension()) {
    throw DomainError("kernel and box dimensions differ");
  }
  const int d = box.dimension();
  const std::int64_t L = box.side();
  weights_.reserve(classes_.size());
  half_component_.assign(classes_.size(), -1);
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const Displacement& v = classes_[c].displacement;
    double w = 0;
    if (box.boundary() == Boundary::Torus && images == ImageConvention::Periodized) {
      for_each_vector(d, -2, 2, [&](const Displacement& z) {
        Displacement x(v);
        for (int j = 0; j < d; ++j) x[j] += L * z[j];
        w += kernel_eval(kernel, x);
      });
    } else {
      w = kernel_eval(kernel, v);
    }
    weights_.push_back(w);
    if (classes_[c].self_paired) {
      for (int j = d - 1; j >= 0; --j) {
        if (v[j] == L / 2) {
          half_component_[c] = j;
          break;
        }
      }
    }
  }

  std::uint64_t lookup_size = 1;
  for (int j = 0; j < d; ++j) {
    lookup_size *= static_cast<std::uint64_t>(box.boundary() == Boundary::Torus ? L : 2 * L - 1);
  }
  lookup_.assign(lookup_size, std::numeric_limits<std::uint32_t>::max());
  auto encode = [&](const Displacement& v) -> std::uint64_t {
    std::uint64_t key = 0;
    for (int j = d - 1; j >= 0; --j) {
      if (box.boundary() == Boundary::Torus) {
        key = key * L + static_cast<std::uint64_t>(((v[j] % L) + L) % L);
      } else {
        key = key * (2 * L - 1) + static_cast<std::uint64_t>(v[j] + L - 1);
      }
    }
    return key;
  };
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const auto& v = classes_[c].displacement;
    lookup_[encode(v)] = static_cast<std::uint32_t>(c);
    lookup_[encode(negate(v))] = static_cast<std::uint32_t>(c);
  }
}

std::uint64_t EdgeClassTable::lookup_key(VertexId u, VertexId w) const {
  const int d = box_.dimension();
  const std::uint64_t L = static_cast<std::uint64_t>(box_.side());
  std::uint64_t key = 0, scale = 1;
  std::uint64_t a = u, b = w;
  for (int j = 0; j < d; ++j) {
    const std::uint64_t ca = a % L, cb = b % L;
    a /= L;
    b /= L;
    if (box_.boundary() == Boundary::Torus) {
      key += ((cb + L - ca) % L) * scale;
      scale *= L;
    } else {
      key += (cb + L - 1 - ca) * scale;
      scale *= 2 * L - 1;
    }
  }
  return key;
}

std::uint32_t EdgeClassTable::class_of(VertexId u, VertexId w) const {
  if (u == w) throw DomainError("no displacement class for a self-pair");
  return lookup_[lookup_key(u, w)];
}

std::pair<VertexId, VertexId> EdgeClassTable::edge_at(std::size_t c, std::uint64_t i) const {
  const auto& cls = classes_[c];
  const int d = box_.dimension();
  const std::int64_t L = box_.side();
  Displacement x(d), y(d);
  std::uint64_t rest = i;
  for (int j = 0; j < d; ++j) {
    const std::int64_t v = cls.displacement[j];
    if (box_.boundary() == Boundary::Torus) {
      const std::int64_t radix = (j == half_component_[c]) ? L / 2 : L;
      x[j] = static_cast<std::int64_t>(rest % radix);
      rest /= radix;
      y[j] = (x[j] + v + L) % L;
    } else {
      const std::int64_t radix = L - std::abs(v);
      x[j] = std::max<std::int64_t>(0, -v) + static_cast<std::int64_t>(rest % radix);
      rest /= radix;
      y[j] = x[j] + v;
    }
  }
  VertexId a = box_.vertex(x), b = box_.vertex(y);
  if (a > b) std::swap(a, b);
  return {a, b};
}

double EdgeClassTable::oriented_weight_sum() const {
  double acc = 0;
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    acc += weights_[c] * 2.0 * static_cast<double>(classes_[c].multiplicity);
  }
  return acc / static_cast<double>(box_.vertex_count());
}

Kernel normalize_kernel(const Kernel& kernel, const TorusBox& box) {
  const TorusBox torus(box.dimension(), box.side(), Boundary::Torus);
  const EdgeClassTable table(torus, kernel);
  return kernel.scaled(1.0 / table.oriented_weight_sum());
}

// ---------------------------------------------------------------------------
// Exponents

std::optional<ReferenceExponents> reference_table(int dimension) {
  if (dimension == 2) return ReferenceExponents{43.0 / 24.0, 91.0 / 5.0, 5.0 / 24.0};
  if (dimension == 3) return ReferenceExponents{2.0457, 5.2886, 2.0 - 2.0457};
  return std::nullopt;
}

ExponentBounds exponent_bounds(int dimension, double alpha,
                               std::optional<double> growth_exponent) {
  if (dimension < 1) throw DomainError("dimension must be >= 1");
  if (!(alpha > 0)) throw DomainError("alpha must be positive");
  const double d = dimension;
  ExponentBounds b;
  b.theta = (d - alpha) / (2 * d + alpha);
  b.delta_upper = alpha < d ? (2 * d + alpha) / (d - alpha)
                            : std::numeric_limits<double>::infinity();
  b.two_minus_eta_upper = d / 3 + 2 * alpha / 3;
  b.two_point_decay = 2 * (d - alpha) / (3 * d);
  if (!(alpha < d)) {
    b.in_regime = false;
    b.flags.push_back("alpha >= d: tail exponent bound is nonpositive");
  }

  double alpha_star = std::numeric_limits<double>::infinity();
  double delta_sr = std::numeric_limits<double>::quiet_NaN();
  if (auto ref = reference_table(dimension)) {
    alpha_star = ref->alpha_star;
    delta_sr = ref->delta_sr;
  } else {
    b.crossover_known = false;
    b.flags.push_back("no nearest-neighbour reference data for d=" +
                      std::to_string(dimension) + "; crossover ignored");
  }
  if (alpha <= d / 3) {
    b.delta_predicted = 2;
  } else if (alpha <= alpha_star) {
    b.delta_predicted = alpha < d ? (d + alpha) / (d - alpha)
                                  : std::numeric_limits<double>::infinity();
  } else {
    b.delta_predicted = delta_sr;
  }
  b.two_minus_eta_predicted = alpha <= alpha_star ? alpha : alpha_star;

  if (growth_exponent) {
    const double a = *growth_exponent;
    b.theta_general = (2 * a - 1) / (a + 1);
    if (!(a > 0.5 && a < 1)) {
      b.in_regime = false;
      b.flags.push_back("growth exponent a outside (1/2, 1)");
    }
  }
  return b;
}

double hyperscaling_gap(int dimension, double delta, double two_minus_eta) {
  return dimension * (delta - 1) - two_minus_eta * (delta + 1);
}

}  // namespace lrperc
