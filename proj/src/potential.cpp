#include "locpress/potential.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

namespace locpress {

word_too_short::word_too_short(int required, int given)
    : std::domain_error(fmt::format("word of length {} is too short; need at least {}", given, required)),
      required_(required) {}

namespace {

constexpr std::size_t kMaxTableEntries = std::size_t{1} << 27;

std::size_t ipow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

}  // namespace

LocallyConstantPotential::LocallyConstantPotential(const TransitionSystem& ts, int depth, int dimension,
                                                   const Rule& rule)
    : d_(ts.alphabet_size()), q_(depth), m_(dimension) {
  if (depth < 1) throw std::domain_error("potential depth must be >= 1");
  if (dimension < 1) throw std::domain_error("potential dimension must be >= 1");
  const std::size_t rows = ipow(d_, q_);
  if (rows * static_cast<std::size_t>(m_) > kMaxTableEntries)
    throw std::domain_error(fmt::format("depth-{} table over {} symbols is too large", q_, d_));
  values_.assign(rows * static_cast<std::size_t>(m_), std::numeric_limits<double>::quiet_NaN());
  Word w(static_cast<std::size_t>(q_), 0);
  for (std::size_t idx = 0; idx < rows; ++idx) {
    std::size_t rem = idx;
    for (int i = q_ - 1; i >= 0; --i) {
      w[i] = static_cast<Symbol>(rem % static_cast<std::size_t>(d_));
      rem /= static_cast<std::size_t>(d_);
    }
    if (!is_admissible(w, ts)) continue;
    Vector v = rule(w);
    if (v.size() != m_)
      throw std::domain_error(fmt::format("potential rule returned dimension {}, expected {}", v.size(), m_));
    for (int c = 0; c < m_; ++c) values_[idx * static_cast<std::size_t>(m_) + static_cast<std::size_t>(c)] = v[c];
  }
}

LocallyConstantPotential LocallyConstantPotential::constant(const TransitionSystem& ts, const Vector& value) {
  return LocallyConstantPotential(ts, 1, static_cast<int>(value.size()), [&](const Word&) { return value; });
}

LocallyConstantPotential LocallyConstantPotential::cylinder_indicator(const TransitionSystem& ts,
                                                                      const Word& pattern) {
  if (pattern.empty()) throw std::domain_error("indicator pattern must be nonempty");
  return LocallyConstantPotential(ts, static_cast<int>(pattern.size()), 1, [&](const Word& w) {
    return Vector::Constant(1, w == pattern ? 1.0 : 0.0);
  });
}

LocallyConstantPotential LocallyConstantPotential::by_symbol(const TransitionSystem& ts,
                                                             const std::vector<double>& values) {
  if (static_cast<int>(values.size()) != ts.alphabet_size())
    throw std::domain_error("one value per symbol required");
  return LocallyConstantPotential(ts, 1, 1, [&](const Word& w) { return Vector::Constant(1, values[w[0]]); });
}

LocallyConstantPotential LocallyConstantPotential::stack(const TransitionSystem& ts,
                                                         const LocallyConstantPotential& phi,
                                                         const LocallyConstantPotential& Phi) {
  if (phi.dimension() != 1) throw std::domain_error("stacked phi must be scalar");
  const int q = std::max(phi.depth(), Phi.depth());
  return LocallyConstantPotential(ts, q, 1 + Phi.dimension(), [&](const Word& w) {
    Vector out(1 + Phi.dimension());
    out[0] = phi.row(w.data())[0];
    const double* r = Phi.row(w.data());
    for (int c = 0; c < Phi.dimension(); ++c) out[1 + c] = r[c];
    return out;
  });
}

std::size_t LocallyConstantPotential::row_index(const Symbol* first) const {
  std::size_t idx = 0;
  for (int i = 0; i < q_; ++i) idx = idx * static_cast<std::size_t>(d_) + static_cast<std::size_t>(first[i]);
  return idx;
}

Vector LocallyConstantPotential::value(const Word& prefix) const {
  if (static_cast<int>(prefix.size()) < q_) throw word_too_short(q_, static_cast<int>(prefix.size()));
  for (Symbol s : prefix)
    if (s < 0 || s >= d_) throw std::domain_error(fmt::format("symbol {} outside alphabet", s));
  const double* r = row(prefix.data());
  return Eigen::Map<const Vector>(r, m_);
}

LocallyConstantPotential LocallyConstantPotential::deepen(const TransitionSystem& ts, int depth) const {
  if (depth < q_) throw std::domain_error("cannot reduce potential depth");
  if (depth == q_) return *this;
  return LocallyConstantPotential(ts, depth, m_, [&](const Word& w) { return value(w); });
}

LocallyConstantPotential LocallyConstantPotential::coordinate(int c) const {
  if (c < 0 || c >= m_) throw std::domain_error("coordinate out of range");
  LocallyConstantPotential out;
  out.d_ = d_;
  out.q_ = q_;
  out.m_ = 1;
  const std::size_t rows = values_.size() / static_cast<std::size_t>(m_);
  out.values_.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) out.values_[i] = values_[i * static_cast<std::size_t>(m_) + static_cast<std::size_t>(c)];
  return out;
}

LocallyConstantPotential LocallyConstantPotential::contract(const Vector& t) const {
  if (t.size() != m_) throw std::domain_error("contraction vector has wrong dimension");
  LocallyConstantPotential out;
  out.d_ = d_;
  out.q_ = q_;
  out.m_ = 1;
  const std::size_t rows = values_.size() / static_cast<std::size_t>(m_);
  out.values_.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (int c = 0; c < m_; ++c) s += t[c] * values_[i * static_cast<std::size_t>(m_) + static_cast<std::size_t>(c)];
    out.values_[i] = s;
  }
  return out;
}

LocallyConstantPotential LocallyConstantPotential::plus_constant(double c) const {
  LocallyConstantPotential out = *this;
  for (double& v : out.values_) v += c;
  return out;
}

double EllipseArc::operator()(double x) const {
  const double t = (x - a) / a;
  return b * std::sqrt(std::max(0.0, 1.0 - t * t));
}

double EllipseArc::level(const Vec2& p) const {
  const double tx = (p.x() - a) / a;
  const double ty = p.y() / b;
  return tx * tx + ty * ty - 1.0;
}

double FishGeometry::x(int k) const {
  if (k < 1) throw std::domain_error("x_k is defined for k >= 1");
  if (k <= static_cast<int>(x_stored.size())) return x_stored[static_cast<std::size_t>(k - 1)];
  return std::pow(tail_base, -k);
}

Vec2 FishGeometry::v(int cls, int k) const { return boundary_point(cls, x(k)); }

Vec2 FishGeometry::boundary_point(int cls, double xv) const {
  if (cls != 1 && cls != 2) throw std::domain_error("fish class must be 1 or 2");
  const double sign = cls == 1 ? -1.0 : 1.0;
  return w_inf + Vec2(xv, sign * curve(xv));
}

FishHypotheses FishGeometry::check(int k_max) const {
  FishHypotheses h;
  if (!(curve(x(1)) > (alpha + 1) * curve(x(2)))) {
    h.separation = false;
    h.violations.push_back(fmt::format("l(x_1) = {:.6g} is not above (alpha+1) l(x_2) = {:.6g}", curve(x(1)),
                                       (alpha + 1) * curve(x(2))));
  }
  for (int k = 1; k <= k_max; ++k) {
    if (k > 1 && !(x(k) < x(k - 1)) && h.x_decreasing) {
      h.x_decreasing = false;
      h.violations.push_back(fmt::format("x_{} is not below x_{}", k, k - 1));
    }
    if (x(k) > std::ldexp(1.0, -k) && h.x_small) {
      h.x_small = false;
      h.violations.push_back(fmt::format("x_{} = {:.6g} exceeds 2^-{}", k, x(k), k));
    }
    if (k > 1 && !((v(1, k) - w_inf).norm() < std::ldexp(1.0, -k)) && h.tail_decay) {
      h.tail_decay = false;
      h.violations.push_back(fmt::format("|v(k) - w_inf| = {:.6g} is not below 2^-{} at k = {}",
                                         (v(1, k) - w_inf).norm(), k, k));
    }
  }
  return h;
}

FishGeometry FishGeometry::figure1() {
  FishGeometry g;
  g.alpha = 3;
  g.curve = EllipseArc{1.0, 2.0};
  g.x_stored = {1.0};
  g.tail_base = 6.0;
  g.w_inf = Vec2(0.0, 0.0);
  g.w0 = Vec2((g.x(1) + g.x(2)) / 2.0, 0.0);
  return g;
}

FishGeometry FishGeometry::conforming() {
  FishGeometry g;
  g.alpha = 3;
  g.curve = EllipseArc{0.1, 0.1};
  g.x_stored = {0.1};
  g.tail_base = 32.0;
  g.w_inf = Vec2(0.0, 0.0);
  g.w0 = Vec2((g.x(1) + g.x(2)) / 2.0, 0.0);
  return g;
}

int fish_class(Symbol s) {
  if (s < 0 || s > 3) throw std::domain_error(fmt::format("fish symbol {} outside {{0,1,2,3}}", s));
  return s < 2 ? 1 : 2;
}

Vec2 FishPotential::v(int cls, int k) const {
  if (cls == 2 && class2_limit && k > perturb_after) return geometry.v(2, k) - geometry.w_inf + *class2_limit;
  return geometry.v(cls, k);
}

Vec2 FishPotential::limit(int cls) const {
  if (cls == 2 && class2_limit) return *class2_limit;
  return geometry.w_inf;
}

Vec2 FishPotential::value_for_run(int cls, int run) const {
  if (run < geometry.alpha) return geometry.w0;
  return v(cls, run - geometry.alpha + 1);
}

double FishPotential::tail_radius(int cls, int from) const {
  from = std::max(from, 1);
  // Beyond the perturbation seam the offsets from the limit shrink with x_k.
  const int last = std::max(from, (cls == 2 && class2_limit) ? perturb_after + 1 : from);
  double r = 0.0;
  for (int j = from; j <= last; ++j) r = std::max(r, (v(cls, j) - limit(cls)).norm());
  return r;
}

namespace {

int leading_run(const Word& w) {
  const int c = fish_class(w[0]);
  int r = 1;
  while (r < static_cast<int>(w.size()) && fish_class(w[static_cast<std::size_t>(r)]) == c) ++r;
  return r;
}

Evaluation evaluate_fish(const FishPotential& f, const Word& word) {
  if (word.empty()) throw word_too_short(1, 0);
  const int len = static_cast<int>(word.size());
  const int cls = fish_class(word[0]);
  const int run = leading_run(word);
  if (run < len) return {f.value_for_run(cls, run), 0.0};
  if (len < f.truncation_depth) throw word_too_short(f.truncation_depth, len);
  // Pure prefix: the run may continue arbitrarily far.
  const double radius = f.tail_radius(cls, len - f.geometry.alpha + 1);
  return {f.limit(cls), 2.0 * radius};
}

}  // namespace

Evaluation evaluate(const Potential& pot, const Word& word) {
  if (const auto* lc = std::get_if<LocallyConstantPotential>(&pot)) return {lc->value(word), 0.0};
  return evaluate_fish(std::get<FishPotential>(pot), word);
}

Vector cyclic_birkhoff_sum(const LocallyConstantPotential& pot, const Word& word) {
  const int L = static_cast<int>(word.size());
  const int q = pot.depth();
  Vector sum = Vector::Zero(pot.dimension());
  Word window(static_cast<std::size_t>(q));
  for (int j = 0; j < L; ++j) {
    for (int i = 0; i < q; ++i) window[i] = word[static_cast<std::size_t>((j + i) % L)];
    sum += Eigen::Map<const Vector>(pot.row(window.data()), pot.dimension());
  }
  return sum;
}

Vector birkhoff_average(const Potential& pot, const PeriodicOrbit& orbit) {
  const Word& g = orbit.generator;
  const int p = orbit.period();
  if (p < 1) throw std::domain_error("empty orbit");
  if (const auto* lc = std::get_if<LocallyConstantPotential>(&pot)) return cyclic_birkhoff_sum(*lc, g) / p;
  const auto& f = std::get<FishPotential>(pot);
  const int c0 = fish_class(g[0]);
  bool pure = true;
  for (Symbol s : g) pure = pure && fish_class(s) == c0;
  if (pure) return f.limit(c0);
  Vec2 sum = Vec2::Zero();
  for (int j = 0; j < p; ++j) {
    const int c = fish_class(g[static_cast<std::size_t>(j)]);
    int run = 1;
    while (fish_class(g[static_cast<std::size_t>((j + run) % p)]) == c) ++run;
    sum += f.value_for_run(c, run);
  }
  return sum / p;
}

Vec2 fish_block_contribution(const FishGeometry& g, int cls, int block_length) {
  FishPotential f;
  f.geometry = g;
  return fish_block_contribution(f, cls, block_length);
}

Vec2 fish_block_contribution(const FishPotential& f, int cls, int block_length) {
  if (block_length < 1) throw std::domain_error("block length must be >= 1");
  if (cls != 1 && cls != 2) throw std::domain_error("fish class must be 1 or 2");
  const int alpha = f.geometry.alpha;
  if (block_length <= alpha - 1) return block_length * f.geometry.w0;
  Vec2 sum = (alpha - 1) * f.geometry.w0;
  for (int j = 1; j <= block_length - alpha + 1; ++j) sum += f.v(cls, j);
  return sum;
}

std::vector<std::pair<int, int>> fish_cyclic_blocks(const Word& generator) {
  const int p = static_cast<int>(generator.size());
  std::vector<std::pair<int, int>> blocks;
  int start = -1;
  for (int j = 0; j < p; ++j) {
    if (fish_class(generator[static_cast<std::size_t>(j)]) != fish_class(generator[static_cast<std::size_t>((j + p - 1) % p)])) {
      start = j;
      break;
    }
  }
  if (start < 0) return blocks;
  for (int j = 0; j < p; ++j) {
    const int c = fish_class(generator[static_cast<std::size_t>((start + j) % p)]);
    if (blocks.empty() || blocks.back().first != c)
      blocks.emplace_back(c, 1);
    else
      ++blocks.back().second;
  }
  return blocks;
}

double fish_lipschitz_constant(const FishPotential& f) {
  return std::max(f.geometry.gamma() * std::ldexp(1.0, f.geometry.alpha), 4.0);
}

LipschitzWitness fish_lipschitz_sup(const FishPotential& f, int run_cap) {
  const int alpha = f.geometry.alpha;
  // Offset of the value from the class limit; run = 0 encodes an infinite run.
  auto offset = [&](int cls, int run) -> Vec2 {
    if (run == 0) return Vec2::Zero();
    if (run < alpha) return f.geometry.w0 - f.limit(cls);
    const int k = run - alpha + 1;
    if (cls == 2 && f.class2_limit && k <= f.perturb_after) return f.v(2, k) - f.limit(2);
    return f.geometry.v(cls, k) - f.geometry.w_inf;
  };
  auto run_word = [](int cls, int run, int total) {
    Word w;
    const Symbol same = cls == 1 ? 0 : 2;
    const Symbol other = cls == 1 ? 2 : 0;
    for (int i = 0; i < total; ++i) w.push_back(i < run || run == 0 ? same : other);
    return w;
  };
  LipschitzWitness best;
  for (int cls = 1; cls <= 2; ++cls) {
    for (int rx = 1; rx <= run_cap; ++rx) {
      for (int ry = rx + 1; ry <= run_cap + 1; ++ry) {
        const int ry_code = ry == run_cap + 1 ? 0 : ry;
        const double diff = (offset(cls, rx) - offset(cls, ry_code)).norm();
        const double ratio = std::ldexp(diff, rx + 1);
        if (ratio > best.ratio) {
          best.ratio = ratio;
          best.x = run_word(cls, rx, rx + 1);
          best.y = run_word(cls, ry_code, ry_code == 0 ? rx + 1 : ry_code + 1);
        }
      }
    }
  }
  // Initial runs of different classes disagree at the first symbol.
  for (int r1 = 0; r1 <= run_cap; ++r1) {
    for (int r2 = 0; r2 <= run_cap; ++r2) {
      const Vec2 a = r1 == 0 ? f.limit(1) : f.value_for_run(1, r1);
      const Vec2 b = r2 == 0 ? f.limit(2) : f.value_for_run(2, r2);
      const double ratio = 2.0 * (a - b).norm();
      if (ratio > best.ratio) {
        best.ratio = ratio;
        best.x = run_word(1, r1, r1 == 0 ? 1 : r1 + 1);
        best.y = run_word(2, r2, r2 == 0 ? 1 : r2 + 1);
      }
    }
  }
  return best;
}

double fish_lipschitz_sampled(const FishPotential& f, int pairs, int length, std::uint64_t seed) {
  FishPotential g = f;
  g.truncation_depth = std::min(g.truncation_depth, length);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> sym(0, 3);
  double worst = 0.0;
  Word x(static_cast<std::size_t>(length)), y(static_cast<std::size_t>(length));
  for (int n = 0; n < pairs; ++n) {
    for (int i = 0; i < length; ++i) {
      x[i] = sym(rng);
      y[i] = sym(rng);
    }
    // Uniform pairs rarely share long prefixes; copy a random-length prefix to probe small distances.
    const int shared = std::uniform_int_distribution<int>(0, length - 1)(rng);
    for (int i = 0; i < shared; ++i) y[i] = x[i];
    auto e = bowen_exponent(x, y, 1);
    if (!e) continue;
    const double diff = (evaluate(g, x).value - evaluate(g, y).value).norm();
    worst = std::max(worst, std::ldexp(diff, *e));
  }
  return worst;
}

FishPotential perturb_fish(const FishPotential& f, double epsilon, const Vec2& w_eps) {
  if (!(epsilon > 0.0)) throw std::domain_error("perturbation size must be positive");
  const Vec2 rel = w_eps - f.geometry.w_inf;
  if (!(rel.norm() < epsilon))
    throw std::domain_error(fmt::format("|w_eps - w_inf| = {:.6g} is not below epsilon = {:.6g}", rel.norm(), epsilon));
  if (rel.norm() == 0.0) return f;
  const double on_arc = std::abs(rel.y() - f.geometry.curve(rel.x()));
  if (rel.x() < 0.0 || rel.x() > 2.0 * f.geometry.curve.a || on_arc > 1e-9 * std::max(1.0, f.geometry.curve.b))
    throw std::domain_error("w_eps must lie on the class-2 arc of C");
  FishPotential out = f;
  out.class2_limit = w_eps;
  out.perturb_after = f.truncation_depth - f.geometry.alpha;
  return out;
}

Truncation truncate_to_locally_constant(const FishPotential& f, int K) {
  if (K < f.geometry.alpha) throw std::domain_error("truncation depth must be >= alpha");
  const auto ts = TransitionSystem::full_shift(4);
  FishPotential g = f;
  g.truncation_depth = K;
  LocallyConstantPotential table(ts, K, 2, [&](const Word& w) -> Vector { return evaluate(g, w).value; });
  const double err = std::max(g.tail_radius(1, K - f.geometry.alpha + 1), g.tail_radius(2, K - f.geometry.alpha + 1));
  return {std::move(table), err};
}

}  // namespace locpress
