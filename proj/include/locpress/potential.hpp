#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "locpress/shift.hpp"

namespace locpress {

using Vector = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;

/// Thrown when a word is too short to pin down a potential value.
class word_too_short : public std::domain_error {
 public:
  word_too_short(int required, int given);
  int required() const { return required_; }

 private:
  int required_;
};

/// Vector potential depending on the first `depth` symbols.
///
/// Values live in a dense d^q x m table indexed by the base-d word; rows of
/// inadmissible words hold NaN.
class LocallyConstantPotential {
 public:
  using Rule = std::function<Vector(const Word&)>;

  LocallyConstantPotential() = default;
  LocallyConstantPotential(const TransitionSystem& ts, int depth, int dimension, const Rule& rule);

  static LocallyConstantPotential constant(const TransitionSystem& ts, const Vector& value);
  /// 1 on the cylinder [pattern], 0 elsewhere (depth = pattern length).
  static LocallyConstantPotential cylinder_indicator(const TransitionSystem& ts, const Word& pattern);
  /// Value per symbol (depth 1, dimension 1).
  static LocallyConstantPotential by_symbol(const TransitionSystem& ts, const std::vector<double>& values);
  /// Stacks scalar phi on top of Phi; the deeper of the two sets the depth.
  static LocallyConstantPotential stack(const TransitionSystem& ts, const LocallyConstantPotential& phi,
                                        const LocallyConstantPotential& Phi);

  int depth() const { return q_; }
  int dimension() const { return m_; }
  int alphabet_size() const { return d_; }

  std::size_t row_index(const Symbol* first) const;
  const double* row(std::size_t index) const { return values_.data() + index * static_cast<std::size_t>(m_); }
  const double* row(const Symbol* first) const { return row(row_index(first)); }
  Vector value(const Word& prefix) const;

  /// Same potential re-expressed at a larger depth.
  LocallyConstantPotential deepen(const TransitionSystem& ts, int depth) const;
  /// Single coordinate as a scalar potential.
  LocallyConstantPotential coordinate(int c) const;
  /// Linear combination sum_c t_c Phi_c as a scalar potential.
  LocallyConstantPotential contract(const Vector& t) const;
  LocallyConstantPotential plus_constant(double c) const;

 private:
  int d_ = 0;
  int q_ = 0;
  int m_ = 0;
  std::vector<double> values_;
};

/// Upper arc y = l(x) of the ellipse ((x-a)/a)^2 + (y/b)^2 = 1; l(0) = 0, increasing on [0, a].
struct EllipseArc {
  double a = 1.0;
  double b = 2.0;
  double operator()(double x) const;
  double diameter() const { return 2.0 * std::max(a, b); }
  /// Signed level of a point relative to the ellipse: < 0 inside, 0 on, > 0 outside.
  double level(const Vec2& p) const;
};

struct FishHypotheses {
  bool separation = true;   // l(x_1) > (alpha+1) l(x_2)
  bool tail_decay = true;   // |v_i(k) - w_inf| < 2^-k for k > 1 (checked on stored range)
  bool x_decreasing = true;
  bool x_small = true;      // x_k <= 2^-k
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Geometry of the fish: the ellipse C, the sequence x_k, the points
/// v_i(k) = w_inf + (x_k, (-1)^i l(x_k)) and the apex w_0.
struct FishGeometry {
  int alpha = 3;
  Vec2 w0{37.0 / 72.0, 0.0};
  Vec2 w_inf{0.0, 0.0};
  EllipseArc curve;
  std::vector<double> x_stored{1.0};  // x_1, ..., x_s
  double tail_base = 6.0;              // x_k = tail_base^-k for k > s

  double x(int k) const;
  Vec2 v(int cls, int k) const;
  double gamma() const { return curve.diameter(); }
  Vec2 boundary_point(int cls, double x) const;
  FishHypotheses check(int k_max = 40) const;

  /// Ellipse (x-1)^2 + y^2/4 = 1, x_1 = 1, x_k = 6^-k, alpha = 3, w_0 = ((x_1+x_2)/2, 0).
  static FishGeometry figure1();
  /// Circle of radius 0.1 through w_inf with x_1 = 0.1, x_k = 32^-k: meets every
  /// hypothesis of the construction, unlike the reference preset.
  static FishGeometry conforming();
};

/// Symbol class on the 4-letter alphabet: {0,1} -> 1, {2,3} -> 2.
int fish_class(Symbol s);

/// Fish potential on the full 4-shift; value depends on the class and length of the initial run.
struct FishPotential {
  FishGeometry geometry;
  int truncation_depth = 24;
  /// Perturbation: class-2 tail limit moved to w_eps, v_2(k) translated for k > perturb_after.
  std::optional<Vec2> class2_limit;
  int perturb_after = 0;

  Vec2 v(int cls, int k) const;
  Vec2 limit(int cls) const;
  /// Value on a point whose initial run has class cls and length run (finite).
  Vec2 value_for_run(int cls, int run) const;
  /// sup over j >= from of |v_cls(j) - limit(cls)|.
  double tail_radius(int cls, int from) const;
};

using Potential = std::variant<LocallyConstantPotential, FishPotential>;

struct Evaluation {
  Vector value;
  double variation = 0.0;  // bound on the oscillation over the cylinder
};

Evaluation evaluate(const Potential& pot, const Word& word);

/// Exact Birkhoff average along the periodic point generator^infinity.
Vector birkhoff_average(const Potential& pot, const PeriodicOrbit& orbit);
/// Birkhoff sum of a finite word under the cyclic-extension convention.
Vector cyclic_birkhoff_sum(const LocallyConstantPotential& pot, const Word& word);

Vec2 fish_block_contribution(const FishGeometry& g, int cls, int block_length);
Vec2 fish_block_contribution(const FishPotential& f, int cls, int block_length);

/// Maximal cyclic blocks (class, length) of a mixed cyclic word; empty for pure words.
std::vector<std::pair<int, int>> fish_cyclic_blocks(const Word& generator);

/// max(gamma 2^alpha, 4) as stated for the d_{1/2} metric.
double fish_lipschitz_constant(const FishPotential& f);

struct LipschitzWitness {
  double ratio = 0.0;
  Word x, y;  // shortest prefixes realizing the ratio (y may stand for an infinite run)
};
/// Exact sup of ||Phi(x) - Phi(y)|| / d_{1/2}(x, y) over all pairs, using the run structure.
LipschitzWitness fish_lipschitz_sup(const FishPotential& f, int run_cap = 200);
/// Largest ratio over random pairs of full-4-shift words.
double fish_lipschitz_sampled(const FishPotential& f, int pairs, int length, std::uint64_t seed);

FishPotential perturb_fish(const FishPotential& f, double epsilon, const Vec2& w_eps);

struct Truncation {
  LocallyConstantPotential table;
  double error_bound = 0.0;
};
Truncation truncate_to_locally_constant(const FishPotential& f, int K);

}  // namespace locpress
