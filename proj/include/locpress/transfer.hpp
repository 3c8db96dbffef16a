#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "locpress/potential.hpp"
#include "locpress/shift.hpp"

namespace locpress {

/// Higher-block presentation of an SFT: states are admissible words of length
/// max(q-1, 1), edges are admissible words one symbol longer.
class TransferModel {
 public:
  TransferModel(const TransitionSystem& ts, int depth);

  const TransitionSystem& system() const { return ts_; }
  int state_length() const { return s_; }
  int state_count() const { return static_cast<int>(states_.size()); }
  int edge_count() const { return static_cast<int>(from_.size()); }
  const Word& state(int i) const { return states_[static_cast<std::size_t>(i)]; }
  int edge_from(int e) const { return from_[static_cast<std::size_t>(e)]; }
  int edge_to(int e) const { return to_[static_cast<std::size_t>(e)]; }
  /// First symbol of the edge word; edge words have length state_length() + 1.
  const Symbol* edge_word(int e) const { return edge_words_.data() + static_cast<std::size_t>(e) * static_cast<std::size_t>(s_ + 1); }
  /// Edges leaving state a occupy [out_begin(a), out_begin(a+1)).
  int out_begin(int a) const { return out_offset_[static_cast<std::size_t>(a)]; }

  /// Potential value on every edge (depth must not exceed state_length() + 1).
  std::vector<double> edge_values(const LocallyConstantPotential& scalar) const;
  Eigen::MatrixXd edge_vectors(const LocallyConstantPotential& Phi) const;  // E x m

  /// Strongly connected state sets that carry a cycle.
  std::vector<std::vector<int>> cyclic_components() const;

 private:
  TransitionSystem ts_;
  int s_;
  std::vector<Word> states_;
  std::vector<int> from_, to_, out_offset_;
  std::vector<Symbol> edge_words_;
};

struct PerronData {
  double log_eigenvalue = 0.0;  // log of the spectral radius of the e^phi-weighted matrix
  std::vector<double> right, left;  // strictly positive on the solved states, left . right = 1
  double residual = 0.0;            // ||M r - lambda r||_inf relative to lambda ||r||_inf
  int iterations = 0;
  bool converged = false;
};

/// Perron data of the e^phi-weighted matrix restricted to `states` (all states when empty).
PerronData perron(const TransferModel& model, const std::vector<double>& edge_phi,
                  const std::vector<int>& states = {});

struct MarkovEquilibrium {
  std::shared_ptr<const TransferModel> model;
  std::vector<double> stationary;  // per state
  std::vector<double> edge_prob;   // kernel entry along each edge
  double entropy = 0.0;
  double pressure = 0.0;
  double mean_phi = 0.0;
  PerronData perron;

  Eigen::MatrixXd kernel() const;  // dense state x state kernel
};

struct PressureReport {
  double value = 0.0;
  bool reducible = false;  // true when the system is not mixing and a component maximum was taken
  int components = 1;
};

PressureReport pressure_report(const TransitionSystem& ts, const LocallyConstantPotential& phi);
double pressure(const TransitionSystem& ts, const LocallyConstantPotential& phi);
double pressure(const TransferModel& model, const LocallyConstantPotential& phi);

/// Unique equilibrium state; refuses non-mixing systems.
MarkovEquilibrium equilibrium_state(const TransitionSystem& ts, const LocallyConstantPotential& phi);
MarkovEquilibrium equilibrium_state(std::shared_ptr<const TransferModel> model, const LocallyConstantPotential& phi);

/// Integral of Phi against the Markov measure.
Eigen::VectorXd rotation_vector(const MarkovEquilibrium& mu, const LocallyConstantPotential& Phi);

Eigen::VectorXd pressure_gradient(const TransitionSystem& ts, const LocallyConstantPotential& Phi,
                                  const Eigen::VectorXd& t);
/// Central differences of the gradient, step 1e-4 with one Richardson step, symmetrized.
Eigen::MatrixXd pressure_hessian(const TransitionSystem& ts, const LocallyConstantPotential& Phi,
                                 const Eigen::VectorXd& t);

/// Pressure of base + t.Phi with a shared model, for callers that evaluate many t.
class PressureFunction {
 public:
  PressureFunction(const TransitionSystem& ts, const LocallyConstantPotential& Phi,
                   const std::optional<LocallyConstantPotential>& base = std::nullopt);

  int dimension() const { return Phi_.dimension(); }
  const LocallyConstantPotential& potential() const { return Phi_; }
  std::shared_ptr<const TransferModel> model() const { return model_; }

  double value(const Eigen::VectorXd& t) const;
  MarkovEquilibrium equilibrium(const Eigen::VectorXd& t) const;
  /// Pressure and rotation vector from one Perron solve.
  std::pair<double, Eigen::VectorXd> value_gradient(const Eigen::VectorXd& t) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& t) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& t, double step = 1e-4) const;

 private:
  LocallyConstantPotential Phi_;
  std::shared_ptr<const TransferModel> model_;
  Eigen::MatrixXd edge_Phi_;
  Eigen::VectorXd edge_base_;
  std::vector<double> contract(const Eigen::VectorXd& t) const;
};

}  // namespace locpress
