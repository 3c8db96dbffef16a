#include "locpress/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace locpress {

namespace {

constexpr int kMaxIterations = 100000;
constexpr double kEigenTolerance = 1e-13;
constexpr int kShiftEvery = 16;

std::size_t word_code(const Symbol* w, int len, int d) {
  std::size_t code = 0;
  for (int i = 0; i < len; ++i) code = code * static_cast<std::size_t>(d) + static_cast<std::size_t>(w[i]);
  return code;
}

}  // namespace

TransferModel::TransferModel(const TransitionSystem& ts, int depth) : ts_(ts), s_(std::max(depth - 1, 1)) {
  if (depth < 1) throw std::domain_error("potential depth must be >= 1");
  const int d = ts.alphabet_size();
  states_ = admissible_words(ts, s_);
  std::size_t space = 1;
  for (int i = 0; i < s_; ++i) space *= static_cast<std::size_t>(d);
  std::vector<int> index(space, -1);
  for (std::size_t i = 0; i < states_.size(); ++i) index[word_code(states_[i].data(), s_, d)] = static_cast<int>(i);

  out_offset_.push_back(0);
  Word next(static_cast<std::size_t>(s_));
  for (std::size_t a = 0; a < states_.size(); ++a) {
    const Word& w = states_[a];
    for (Symbol c = 0; c < d; ++c) {
      if (!ts.allowed(w.back(), c)) continue;
      std::copy(w.begin() + 1, w.end(), next.begin());
      next.back() = c;
      from_.push_back(static_cast<int>(a));
      to_.push_back(index[word_code(next.data(), s_, d)]);
      edge_words_.insert(edge_words_.end(), w.begin(), w.end());
      edge_words_.push_back(c);
    }
    out_offset_.push_back(static_cast<int>(from_.size()));
  }
}

std::vector<double> TransferModel::edge_values(const LocallyConstantPotential& scalar) const {
  if (scalar.dimension() != 1) throw std::domain_error("expected a scalar potential");
  if (scalar.depth() > s_ + 1)
    throw std::domain_error(fmt::format("potential depth {} exceeds edge length {}", scalar.depth(), s_ + 1));
  std::vector<double> out(static_cast<std::size_t>(edge_count()));
  for (int e = 0; e < edge_count(); ++e) out[static_cast<std::size_t>(e)] = scalar.row(edge_word(e))[0];
  return out;
}

Eigen::MatrixXd TransferModel::edge_vectors(const LocallyConstantPotential& Phi) const {
  if (Phi.depth() > s_ + 1)
    throw std::domain_error(fmt::format("potential depth {} exceeds edge length {}", Phi.depth(), s_ + 1));
  Eigen::MatrixXd out(edge_count(), Phi.dimension());
  for (int e = 0; e < edge_count(); ++e) {
    const double* r = Phi.row(edge_word(e));
    for (int c = 0; c < Phi.dimension(); ++c) out(e, c) = r[c];
  }
  return out;
}

// Iterative Tarjan; the state graph can be large enough to overflow a recursive walk.
std::vector<std::vector<int>> TransferModel::cyclic_components() const {
  const int n = state_count();
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  std::vector<std::pair<int, int>> call;  // (vertex, next edge)
  std::vector<std::vector<int>> comps;
  int counter = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    call.emplace_back(root, out_begin(root));
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, e] = call.back();
      if (e < out_begin(v + 1)) {
        const int w = to_[static_cast<std::size_t>(e)];
        ++e;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, out_begin(w));
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const int done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] != index[done]) continue;
      std::vector<int> comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        comp.push_back(w);
      } while (w != done);
      bool cyclic = comp.size() > 1;
      if (!cyclic)
        for (int f = out_begin(done); f < out_begin(done + 1); ++f) cyclic = cyclic || to_[static_cast<std::size_t>(f)] == done;
      if (cyclic) {
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
    }
  }
  std::sort(comps.begin(), comps.end());
  return comps;
}

namespace {

struct LocalGraph {
  std::vector<int> states;                   // global ids
  std::vector<int> from, to, edge;           // local endpoints, global edge id
  std::vector<double> weight;
  double shift = 0.0;
};

LocalGraph restrict(const TransferModel& model, const std::vector<double>& edge_phi, const std::vector<int>& states) {
  LocalGraph g;
  std::vector<int> local(static_cast<std::size_t>(model.state_count()), -1);
  if (states.empty()) {
    g.states.resize(static_cast<std::size_t>(model.state_count()));
    std::iota(g.states.begin(), g.states.end(), 0);
  } else {
    g.states = states;
  }
  for (std::size_t i = 0; i < g.states.size(); ++i) local[static_cast<std::size_t>(g.states[i])] = static_cast<int>(i);
  g.shift = -std::numeric_limits<double>::infinity();
  for (int e = 0; e < model.edge_count(); ++e) {
    const int a = local[static_cast<std::size_t>(model.edge_from(e))];
    const int b = local[static_cast<std::size_t>(model.edge_to(e))];
    if (a < 0 || b < 0) continue;
    g.from.push_back(a);
    g.to.push_back(b);
    g.edge.push_back(e);
    g.shift = std::max(g.shift, edge_phi[static_cast<std::size_t>(e)]);
  }
  if (g.from.empty()) throw std::domain_error("state set carries no edges");
  for (int e : g.edge) g.weight.push_back(std::exp(edge_phi[static_cast<std::size_t>(e)] - g.shift));
  return g;
}

struct PowerResult {
  std::vector<double> vec;
  double eigenvalue = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Power iteration on M + cI with the Collatz-Wielandt bracket
// min_i (Mr)_i/r_i <= lambda <= max_i (Mr)_i/r_i. The shift c is raised to the
// current lower bound on lambda every few sweeps: that keeps convergence fast
// when the second eigenvalue sits near -lambda (periodic or nearly periodic graphs).
PowerResult power_iterate(const LocalGraph& g, bool transpose) {
  const std::size_t n = g.states.size();
  std::vector<double> r(n, 1.0), y(n);
  PowerResult out;
  double shift = 0.0;
  for (int it = 1; it <= kMaxIterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) y[i] = shift * r[i];
    if (!transpose) {
      for (std::size_t e = 0; e < g.from.size(); ++e)
        y[static_cast<std::size_t>(g.from[e])] += g.weight[e] * r[static_cast<std::size_t>(g.to[e])];
    } else {
      for (std::size_t e = 0; e < g.from.size(); ++e)
        y[static_cast<std::size_t>(g.to[e])] += g.weight[e] * r[static_cast<std::size_t>(g.from[e])];
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, top = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ratio = y[i] / r[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      top = std::max(top, y[i]);
    }
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] / top;
    out.iterations = it;
    out.eigenvalue = 0.5 * (lo + hi) - shift;
    if (hi - lo <= kEigenTolerance * hi) {
      out.converged = true;
      break;
    }
    if (it % kShiftEvery == 0) shift = std::max(shift, lo - shift);
  }
  out.vec = std::move(r);
  return out;
}

}  // namespace

PerronData perron(const TransferModel& model, const std::vector<double>& edge_phi, const std::vector<int>& states) {
  if (static_cast<int>(edge_phi.size()) != model.edge_count()) throw std::domain_error("edge value count mismatch");
  const LocalGraph g = restrict(model, edge_phi, states);
  PowerResult right = power_iterate(g, false);
  PowerResult left = power_iterate(g, true);

  PerronData out;
  const double lambda = right.eigenvalue;
  out.log_eigenvalue = std::log(lambda) + g.shift;
  out.iterations = right.iterations + left.iterations;
  out.converged = right.converged && left.converged;

  double dot = 0.0;
  for (std::size_t i = 0; i < g.states.size(); ++i) dot += left.vec[i] * right.vec[i];
  out.right.assign(static_cast<std::size_t>(model.state_count()), 0.0);
  out.left.assign(static_cast<std::size_t>(model.state_count()), 0.0);
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    out.right[static_cast<std::size_t>(g.states[i])] = right.vec[i];
    out.left[static_cast<std::size_t>(g.states[i])] = left.vec[i] / dot;
  }

  std::vector<double> mr(g.states.size(), 0.0);
  for (std::size_t e = 0; e < g.from.size(); ++e)
    mr[static_cast<std::size_t>(g.from[e])] += g.weight[e] * right.vec[static_cast<std::size_t>(g.to[e])];
  double res = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    res = std::max(res, std::abs(mr[i] - lambda * right.vec[i]));
    scale = std::max(scale, right.vec[i]);
  }
  out.residual = res / (lambda * scale);
  return out;
}

namespace {

MarkovEquilibrium build_equilibrium(std::shared_ptr<const TransferModel> model, const std::vector<double>& edge_phi) {
  if (!is_mixing(model->system()))
    throw std::domain_error("equilibrium state is not unique on a non-mixing system");
  MarkovEquilibrium mu;
  mu.perron = perron(*model, edge_phi);
  const auto& r = mu.perron.right;
  const auto& l = mu.perron.left;
  const double logl = mu.perron.log_eigenvalue;
  const int n = model->state_count();
  mu.stationary.resize(static_cast<std::size_t>(n));
  double total = 0.0;
  for (int a = 0; a < n; ++a) total += mu.stationary[static_cast<std::size_t>(a)] = l[static_cast<std::size_t>(a)] * r[static_cast<std::size_t>(a)];
  for (double& p : mu.stationary) p /= total;
  mu.edge_prob.resize(static_cast<std::size_t>(model->edge_count()));
  double h = 0.0, mean = 0.0;
  for (int e = 0; e < model->edge_count(); ++e) {
    const std::size_t a = static_cast<std::size_t>(model->edge_from(e)), b = static_cast<std::size_t>(model->edge_to(e));
    const double logp = edge_phi[static_cast<std::size_t>(e)] - logl + std::log(r[b]) - std::log(r[a]);
    const double p = std::exp(logp);
    mu.edge_prob[static_cast<std::size_t>(e)] = p;
    h -= mu.stationary[a] * p * logp;
    mean += mu.stationary[a] * p * edge_phi[static_cast<std::size_t>(e)];
  }
  mu.entropy = h;
  mu.mean_phi = mean;
  mu.pressure = logl;
  mu.model = std::move(model);
  return mu;
}

}  // namespace

Eigen::MatrixXd MarkovEquilibrium::kernel() const {
  const int n = model->state_count();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int e = 0; e < model->edge_count(); ++e) P(model->edge_from(e), model->edge_to(e)) += edge_prob[static_cast<std::size_t>(e)];
  return P;
}

PressureReport pressure_report(const TransitionSystem& ts, const LocallyConstantPotential& phi) {
  TransferModel model(ts, phi.depth());
  const auto values = model.edge_values(phi);
  PressureReport out;
  if (is_mixing(ts)) {
    out.value = perron(model, values).log_eigenvalue;
    return out;
  }
  const auto comps = model.cyclic_components();
  out.reducible = true;
  out.components = static_cast<int>(comps.size());
  out.value = -std::numeric_limits<double>::infinity();
  for (const auto& c : comps) out.value = std::max(out.value, perron(model, values, c).log_eigenvalue);
  return out;
}

double pressure(const TransitionSystem& ts, const LocallyConstantPotential& phi) {
  return pressure_report(ts, phi).value;
}

double pressure(const TransferModel& model, const LocallyConstantPotential& phi) {
  return perron(model, model.edge_values(phi)).log_eigenvalue;
}

MarkovEquilibrium equilibrium_state(const TransitionSystem& ts, const LocallyConstantPotential& phi) {
  return equilibrium_state(std::make_shared<const TransferModel>(ts, phi.depth()), phi);
}

MarkovEquilibrium equilibrium_state(std::shared_ptr<const TransferModel> model, const LocallyConstantPotential& phi) {
  auto values = model->edge_values(phi);
  return build_equilibrium(std::move(model), values);
}

Eigen::VectorXd rotation_vector(const MarkovEquilibrium& mu, const LocallyConstantPotential& Phi) {
  const TransferModel& model = *mu.model;
  const int m = Phi.dimension();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  const int s = model.state_length();
  if (Phi.depth() <= s + 1) {
    for (int e = 0; e < model.edge_count(); ++e) {
      const double w = mu.stationary[static_cast<std::size_t>(model.edge_from(e))] * mu.edge_prob[static_cast<std::size_t>(e)];
      out += w * Eigen::Map<const Eigen::VectorXd>(Phi.row(model.edge_word(e)), m);
    }
    return out;
  }
  // Deeper potential: integrate over cylinders of length depth by walking the chain.
  const int steps = Phi.depth() - s;
  Word word;
  auto walk = [&](auto&& self, int state, int left, double prob) -> void {
    if (left == 0) {
      out += prob * Eigen::Map<const Eigen::VectorXd>(Phi.row(word.data()), m);
      return;
    }
    for (int e = model.out_begin(state); e < model.out_begin(state + 1); ++e) {
      word.push_back(model.edge_word(e)[s]);
      self(self, model.edge_to(e), left - 1, prob * mu.edge_prob[static_cast<std::size_t>(e)]);
      word.pop_back();
    }
  };
  for (int a = 0; a < model.state_count(); ++a) {
    word = model.state(a);
    walk(walk, a, steps, mu.stationary[static_cast<std::size_t>(a)]);
  }
  return out;
}

PressureFunction::PressureFunction(const TransitionSystem& ts, const LocallyConstantPotential& Phi,
                                   const std::optional<LocallyConstantPotential>& base)
    : Phi_(Phi),
      model_(std::make_shared<const TransferModel>(ts, std::max(Phi.depth(), base ? base->depth() : 1))),
      edge_Phi_(model_->edge_vectors(Phi)),
      edge_base_(base ? Eigen::VectorXd(model_->edge_vectors(*base).col(0)) : Eigen::VectorXd::Zero(model_->edge_count())) {
  if (base && base->dimension() != 1) throw std::domain_error("base potential must be scalar");
}

std::vector<double> PressureFunction::contract(const Eigen::VectorXd& t) const {
  if (t.size() != edge_Phi_.cols()) throw std::domain_error("parameter dimension mismatch");
  Eigen::VectorXd v = edge_base_ + edge_Phi_ * t;
  return std::vector<double>(v.data(), v.data() + v.size());
}

double PressureFunction::value(const Eigen::VectorXd& t) const {
  return perron(*model_, contract(t)).log_eigenvalue;
}

MarkovEquilibrium PressureFunction::equilibrium(const Eigen::VectorXd& t) const {
  return build_equilibrium(model_, contract(t));
}

std::pair<double, Eigen::VectorXd> PressureFunction::value_gradient(const Eigen::VectorXd& t) const {
  const MarkovEquilibrium mu = equilibrium(t);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dimension());
  for (int e = 0; e < model_->edge_count(); ++e)
    g += mu.stationary[static_cast<std::size_t>(model_->edge_from(e))] * mu.edge_prob[static_cast<std::size_t>(e)] *
         edge_Phi_.row(e).transpose();
  return {mu.pressure, g};
}

Eigen::VectorXd PressureFunction::gradient(const Eigen::VectorXd& t) const { return value_gradient(t).second; }

Eigen::MatrixXd PressureFunction::hessian(const Eigen::VectorXd& t, double step) const {
  const int m = dimension();
  Eigen::MatrixXd H(m, m);
  for (int i = 0; i < m; ++i) {
    auto central = [&](double h) {
      Eigen::VectorXd tp = t, tm = t;
      tp[i] += h;
      tm[i] -= h;
      return Eigen::VectorXd((gradient(tp) - gradient(tm)) / (2.0 * h));
    };
    H.col(i) = (4.0 * central(step / 2.0) - central(step)) / 3.0;
  }
  return 0.5 * (H + H.transpose());
}

Eigen::VectorXd pressure_gradient(const TransitionSystem& ts, const LocallyConstantPotential& Phi,
                                  const Eigen::VectorXd& t) {
  return PressureFunction(ts, Phi).gradient(t);
}

Eigen::MatrixXd pressure_hessian(const TransitionSystem& ts, const LocallyConstantPotential& Phi,
                                 const Eigen::VectorXd& t) {
  return PressureFunction(ts, Phi).hessian(t);
}

}  // namespace locpress
