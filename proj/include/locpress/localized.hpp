#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "locpress/potential.hpp"
#include "locpress/rotation.hpp"
#include "locpress/shift.hpp"
#include "locpress/transfer.hpp"

namespace locpress {

/// Tuple (phi, Phi, w, r, k, horizons) for constrained counting.
///
/// Cylinders are the admissible words of length n + k - 1; Birkhoff sums over
/// n steps use the cyclic extension of the word when a window runs past its end.
struct LocalizedQuery {
  TransitionSystem system;
  std::optional<LocallyConstantPotential> phi;  // absent means phi = 0
  double phi_constant = 0.0;                    // added to phi (the only phi the fish counter accepts)
  Potential Phi;
  Vector w;
  double r = 0.05;
  int depth = 1;
  std::vector<int> horizons;
  double bins_per_radius = 32.0;
  std::size_t bin_budget = 4'000'000;
};

struct DirectCount {
  int n = 0;
  double lower = 0.0;
  double upper = 0.0;
  double bin_width = 0.0;
  bool coarsened = false;
  double pure_term = 0.0;  // fish only: weight of the pure-class words (average exactly the class limit)
};

DirectCount direct_count(const LocalizedQuery& query, int n);

/// Exhaustive enumeration of the same count (exact real arithmetic on the ball test, small n only).
double direct_count_bruteforce(const LocalizedQuery& query, int n);

struct RateSequence {
  std::vector<int> n;
  std::vector<double> lower, upper;  // (1/n) log of the bracket; -inf for an empty ball
  std::vector<DirectCount> counts;
  double extrapolated = 0.0;  // L in rate(n) = L + c/n over the top half of horizons
  double fit_residual = 0.0;
};

RateSequence localized_pressure_direct(const LocalizedQuery& query);

struct NewtonOptions {
  double gradient_tol = 1e-12;
  int max_iterations = 200;
  double max_condition = 1e8;
  double hessian_step = 1e-4;
};

struct DualSolveResult {
  Vector t_star;
  double value = 0.0;  // P(t*) - t*.target
  std::optional<MarkovEquilibrium> measure;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // ||grad P(t*) - target||
  int gradient_steps = 0; // iterations that fell back to steepest descent
};

/// Minimizes t -> P(t.Phi) - t.target by damped Newton.
DualSolveResult minimize_dual(const PressureFunction& P, const Vector& target, const Vector& start,
                              const NewtonOptions& opts = {});

struct EntropyDualOptions {
  int cloud_period = 8;         // periodic orbits used for the interior test
  double interior_tol = 1e-6;
  std::optional<Vector> start;  // Newton start (zero by default)
  NewtonOptions newton;
};

/// H(w) and the measure of maximal entropy in the rotation class of an interior w.
DualSolveResult localized_entropy_dual(const TransitionSystem& ts, const LocallyConstantPotential& Phi,
                                       const Vector& w, const EntropyDualOptions& opts = {});

struct AlphaPoint {
  double alpha = 0.0;
  double s = 0.0;
  Vector t;
  double entropy = 0.0;
  double objective = 0.0;  // entropy + alpha
  bool converged = false;
  double residual = 0.0;
};

struct AlphaScan {
  double a_w = 0.0, b_w = 0.0;
  std::vector<AlphaPoint> grid;
  std::vector<AlphaPoint> maximizers;  // refined strict local maxima
  double value = 0.0;                  // sup of the objective
  bool degenerate = false;             // a_w == b_w: reduced to the entropy dual
  double legendre_value = 0.0;         // min_t P(phi + t.Phi) - t.w, computed independently
  Vector legendre_t;
  std::optional<MarkovEquilibrium> maximizer_measure;
  double gibbs_defect = 0.0;           // |h + int(s phi + t Phi) - P(s phi + t Phi)| at the maximizer
};

struct AlphaScanOptions {
  int cloud_period = 12;
  double tol = 1e-9;
  NewtonOptions newton;
};

AlphaScan localized_pressure_dual(const TransitionSystem& ts, const LocallyConstantPotential& phi,
                                  const LocallyConstantPotential& Phi, const Vector& w, int grid_size,
                                  const AlphaScanOptions& opts = {});

struct GapRow {
  double r = 0.0;
  int k = 1;
  int n = 0;
  double lower_rate = 0.0, upper_rate = 0.0;
  double dual = 0.0;
  double slack = 0.0;
  bool violates = false;  // lower_rate > dual + slack
};

struct GapReport {
  double dual = 0.0;
  Vector t_star;
  std::vector<GapRow> rows;
  bool any_violation = false;
};

GapReport variational_check(const TransitionSystem& ts, const std::optional<LocallyConstantPotential>& phi,
                            const LocallyConstantPotential& Phi, const Vector& w, const std::vector<double>& r_list,
                            const std::vector<int>& k_list, const std::vector<int>& horizons);

struct CountingBound {
  double printed = 0.0;   // log 2 + log rho - (1 - rho) log(1 - rho)
  double rederived = 0.0; // log 2 - rho log rho - (1 - rho) log(1 - rho)
};

CountingBound fish_counting_bound(double rho);

/// 2^n sum_{k=1}^{floor(n rho)} C(n, k-1), exactly.
BigInt fish_counting_exact(int n, double rho);
double log_bigint(const BigInt& x);

/// Upper concave envelope at w of the points (x_i, y_i) in the plane.
double concave_envelope(const std::vector<std::array<double, 2>>& points, double w);

}  // namespace locpress
