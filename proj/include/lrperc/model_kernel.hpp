#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lrperc {

using Displacement = std::vector<std::int64_t>;
using VertexId = std::uint32_t;

enum class Norm { L1, L2, Linf };
enum class KernelForm { PurePower, RadialTable };
enum class Boundary { Torus, FreeBox };
// How the torus sees a displacement: nearest image only, or the sum over
// images x + L z with |z|_inf <= 2.
enum class ImageConvention { MinimalImage, Periodized };

const char* to_string(Norm norm);
const char* to_string(KernelForm form);
const char* to_string(Boundary boundary);
Norm parse_norm(const std::string& s);
Boundary parse_boundary(const std::string& s);

double norm_of(std::span<const std::int64_t> x, Norm norm);

// Shell of a radial table: weight applies to radii in (previous radius, radius].
struct RadialEntry {
  double radius;
  double weight;
};

// Long-range edge intensity J(x).
class Kernel {
 public:
  static Kernel pure_power(int dimension, double alpha, double amplitude = 1.0,
                           Norm norm = Norm::L2);
  // `alpha` is kept for exponent bookkeeping; the table defines J.
  static Kernel radial_table(int dimension, double alpha,
                             std::vector<RadialEntry> table, Norm norm = Norm::L2);

  int dimension() const { return dimension_; }
  double alpha() const { return alpha_; }
  double amplitude() const { return amplitude_; }
  Norm norm() const { return norm_; }
  KernelForm form() const { return form_; }
  const std::vector<RadialEntry>& table() const { return table_; }

  // Same shape, every weight multiplied by `factor`.
  Kernel scaled(double factor) const;
  std::string id() const;

 private:
  Kernel() = default;

  int dimension_ = 1;
  double alpha_ = 1.0;
  double amplitude_ = 1.0;
  Norm norm_ = Norm::L2;
  KernelForm form_ = KernelForm::PurePower;
  std::vector<RadialEntry> table_;
};

double kernel_eval(const Kernel& kernel, std::span<const std::int64_t> x);

// 1 - exp(-beta J).
double edge_probability_from_weight(double beta, double weight);
double edge_probability(const Kernel& kernel, double beta,
                        std::span<const std::int64_t> x);

class TorusBox {
 public:
  TorusBox(int dimension, std::int64_t side, Boundary boundary = Boundary::Torus);

  int dimension() const { return dimension_; }
  std::int64_t side() const { return side_; }
  Boundary boundary() const { return boundary_; }
  std::uint64_t vertex_count() const { return vertex_count_; }

  Displacement coords(VertexId v) const;
  VertexId vertex(std::span<const std::int64_t> coords) const;
  // Representative with every component in (-L/2, L/2].
  Displacement minimal_image(std::span<const std::int64_t> x) const;
  // Displacement from u to w: minimal image on the torus, plain difference
  // in a free box.
  Displacement displacement(VertexId u, VertexId w) const;

  bool operator==(const TorusBox&) const = default;

 private:
  int dimension_;
  std::int64_t side_;
  Boundary boundary_;
  std::uint64_t vertex_count_;
};

struct DisplacementClass {
  Displacement displacement;
  std::uint64_t multiplicity = 0;
  bool self_paired = false;
};

// Partition of all unordered vertex pairs by displacement (v and -v
// identified). Multiplicities sum to N(N-1)/2.
std::vector<DisplacementClass> displacement_classes(const TorusBox& box);

// Displacement classes together with their weights and an O(1) lookup from
// a vertex pair to its class.
class EdgeClassTable {
 public:
  EdgeClassTable(const TorusBox& box, const Kernel& kernel,
                 ImageConvention images = ImageConvention::MinimalImage);

  const TorusBox& box() const { return box_; }
  const std::vector<DisplacementClass>& classes() const { return classes_; }
  std::size_t size() const { return classes_.size(); }
  double weight(std::size_t c) const { return weights_[c]; }
  const std::vector<double>& weights() const { return weights_; }

  std::uint32_t class_of(VertexId u, VertexId w) const;
  // Canonical (u < w) endpoints of the i-th pair in class c.
  std::pair<VertexId, VertexId> edge_at(std::size_t c, std::uint64_t i) const;

  // Sum of J over the oriented edges leaving one vertex of the torus.
  double oriented_weight_sum() const;

 private:
  std::uint64_t lookup_key(VertexId u, VertexId w) const;

  TorusBox box_;
  std::vector<DisplacementClass> classes_;
  std::vector<double> weights_;
  std::vector<std::uint32_t> lookup_;
  // Per class: index of the component restricted to [0, L/2) when
  // enumerating a self-paired torus class, -1 otherwise.
  std::vector<int> half_component_;
};

// Rescale the kernel so that sum_{x != 0} J(x) = 1 over the torus of side
// `box.side()` (minimal image), regardless of the box boundary.
Kernel normalize_kernel(const Kernel& kernel, const TorusBox& box);

struct ReferenceExponents {
  double alpha_star;  // crossover 2 - eta_SR(d)
  double delta_sr;
  double eta_sr;
};

// Nearest-neighbour exponents quoted for d = 2, 3; nullopt otherwise.
std::optional<ReferenceExponents> reference_table(int dimension);

struct ExponentBounds {
  double theta = 0;                // (d - alpha)/(2d + alpha)
  double delta_upper = 0;          // (2d + alpha)/(d - alpha)
  double two_minus_eta_upper = 0;  // d/3 + 2 alpha/3
  double two_point_decay = 0;      // 2(d - alpha)/(3d)
  std::optional<double> theta_general;  // (2a - 1)/(a + 1)
  double delta_predicted = 0;
  double two_minus_eta_predicted = 0;
  bool in_regime = true;        // 0 < alpha < d (and 1/2 < a < 1 when given)
  bool crossover_known = true;  // alpha* available from reference data
  std::vector<std::string> flags;
};

ExponentBounds exponent_bounds(int dimension, double alpha,
                               std::optional<double> growth_exponent = std::nullopt);

// d(delta - 1) - (2 - eta)(delta + 1); nonnegative when the hyperscaling
// inequality holds.
double hyperscaling_gap(int dimension, double delta, double two_minus_eta);

}  // namespace lrperc
