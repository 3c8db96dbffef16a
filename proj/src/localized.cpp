#include "locpress/localized.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

namespace locpress {

namespace {

constexpr double kBallSlack = 1e-12;
constexpr std::int64_t kCellOffset = std::int64_t{1} << 19;
constexpr int kCellBits = 20;
constexpr std::size_t kBruteForceLimit = std::size_t{1} << 24;

using Cell = std::array<std::int64_t, 2>;

// Closed ball |S - n w| <= n r tested against boxes of possible exact sums.
struct Ball {
  std::array<double, 2> center{};
  double radius2 = 0.0;
  int m = 1;

  Ball(const Vector& w, double r, int n) : m(static_cast<int>(w.size())) {
    for (int c = 0; c < m; ++c) center[c] = n * w[c];
    const double R = n * r * (1.0 + kBallSlack);
    radius2 = R * R;
  }
  bool contains(const Vector& S) const {
    double d2 = 0.0;
    for (int c = 0; c < m; ++c) d2 += (S[c] - center[c]) * (S[c] - center[c]);
    return d2 <= radius2;
  }
  bool box_inside(const std::array<double, 2>& lo, const std::array<double, 2>& hi) const {
    double d2 = 0.0;
    for (int c = 0; c < m; ++c) {
      const double far = std::max(std::abs(lo[c] - center[c]), std::abs(hi[c] - center[c]));
      d2 += far * far;
    }
    return d2 <= radius2;
  }
  bool box_touches(const std::array<double, 2>& lo, const std::array<double, 2>& hi) const {
    double d2 = 0.0;
    for (int c = 0; c < m; ++c) {
      const double gap = std::max({0.0, lo[c] - center[c], center[c] - hi[c]});
      d2 += gap * gap;
    }
    return d2 <= radius2;
  }
};

// Rounds window values to integer multiples of the bin width and tracks the worst rounding error.
struct Quantizer {
  double delta = 0.0;
  int m = 1;
  std::array<double, 2> error{};
  Cell lo{}, hi{};
  bool seen = false;

  Cell operator()(const double* v) {
    Cell k{};
    for (int c = 0; c < m; ++c) {
      const double x = std::nearbyint(v[c] / delta);
      k[c] = static_cast<std::int64_t>(x);
      error[c] = std::max(error[c], std::abs(v[c] - x * delta));
      if (!seen || k[c] < lo[c]) lo[c] = k[c];
      if (!seen || k[c] > hi[c]) hi[c] = k[c];
    }
    if (!seen) {
      for (int c = m; c < 2; ++c) lo[c] = hi[c] = 0;
    }
    seen = true;
    return k;
  }
};

// Exact sums lie within n*error of delta*cell.
struct Classifier {
  const Ball& ball;
  const Quantizer& quant;
  int n;

  std::pair<bool, bool> classify(const Cell& k) const {
    std::array<double, 2> lo{}, hi{};
    for (int c = 0; c < quant.m; ++c) {
      lo[c] = quant.delta * static_cast<double>(k[c]) - n * quant.error[c];
      hi[c] = quant.delta * static_cast<double>(k[c]) + n * quant.error[c];
    }
    return {ball.box_inside(lo, hi), ball.box_touches(lo, hi)};
  }
  // Could any completion with `pending` further windows reach the ball?
  bool reachable(const Cell& k, int pending) const {
    std::array<double, 2> lo{}, hi{};
    for (int c = 0; c < quant.m; ++c) {
      lo[c] = quant.delta * static_cast<double>(k[c] + pending * quant.lo[c]) - n * quant.error[c];
      hi[c] = quant.delta * static_cast<double>(k[c] + pending * quant.hi[c]) + n * quant.error[c];
    }
    return ball.box_touches(lo, hi);
  }
};

struct budget_exceeded {};

std::uint64_t pack(std::uint64_t state, const Cell& k) {
  for (int c = 0; c < 2; ++c)
    if (k[c] <= -kCellOffset || k[c] >= kCellOffset) throw budget_exceeded{};
  return state | (static_cast<std::uint64_t>(k[0] + kCellOffset) << 24) |
         (static_cast<std::uint64_t>(k[1] + kCellOffset) << (24 + kCellBits));
}

std::uint64_t unpack_state(std::uint64_t key) { return key & ((std::uint64_t{1} << 24) - 1); }

Cell unpack_cell(std::uint64_t key) {
  const std::uint64_t mask = (std::uint64_t{1} << kCellBits) - 1;
  return {static_cast<std::int64_t>((key >> 24) & mask) - kCellOffset,
          static_cast<std::int64_t>((key >> (24 + kCellBits)) & mask) - kCellOffset};
}

Cell add(const Cell& a, const Cell& b) { return {a[0] + b[0], a[1] + b[1]}; }

using Layer = std::unordered_map<std::uint64_t, double>;

void deposit(Layer& layer, std::uint64_t key, double weight, std::size_t budget) {
  layer[key] += weight;
  if (layer.size() > budget) throw budget_exceeded{};
}

struct Prepared {
  LocallyConstantPotential Phi;
  std::optional<LocallyConstantPotential> phi;
  int q = 1;
};

Prepared prepare(const LocalizedQuery& query, const LocallyConstantPotential& Phi) {
  Prepared p;
  p.q = std::max(Phi.depth(), query.phi ? query.phi->depth() : 1);
  p.Phi = Phi.depth() < p.q ? Phi.deepen(query.system, p.q) : Phi;
  if (query.phi) {
    if (query.phi->dimension() != 1) throw std::domain_error("phi must be scalar");
    p.phi = query.phi->depth() < p.q ? query.phi->deepen(query.system, p.q) : *query.phi;
  }
  return p;
}

void validate(const LocalizedQuery& query, int m, int n) {
  if (n < 1) throw std::domain_error("horizon must be >= 1");
  if (query.depth < 1) throw std::domain_error("depth must be >= 1");
  if (!(query.r > 0.0)) throw std::domain_error("radius must be positive");
  if (query.w.size() != m) throw std::domain_error(fmt::format("w has dimension {}, potential has {}", query.w.size(), m));
  if (m > 2) throw std::domain_error("direct counting supports potentials of dimension <= 2");
}

// --- locally constant potentials --------------------------------------------------------------

// Birkhoff data of one word under the cyclic convention, evaluated from the definition.
bool word_sums(const Prepared& p, const Word& word, int n, Vector& S, double& phi_sum) {
  const int L = static_cast<int>(word.size());
  const int q = p.q;
  S = Vector::Zero(p.Phi.dimension());
  phi_sum = 0.0;
  Word window(static_cast<std::size_t>(q));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < q; ++i) window[static_cast<std::size_t>(i)] = word[static_cast<std::size_t>((j + i) % L)];
    const double* row = p.Phi.row(window.data());
    if (std::isnan(row[0])) return false;
    S += Eigen::Map<const Vector>(row, p.Phi.dimension());
    if (p.phi) phi_sum += p.phi->row(window.data())[0];
  }
  return true;
}

double bruteforce_lcp(const LocalizedQuery& query, const LocallyConstantPotential& Phi, int n) {
  const Prepared p = prepare(query, Phi);
  const int L = n + query.depth - 1;
  if (count_admissible_words(query.system, L) > kBruteForceLimit) throw std::domain_error("too many words to enumerate");
  const bool wraps = p.q > query.depth;
  const Ball ball(query.w, query.r, n);
  double total = 0.0;
  Vector S;
  double phi_sum = 0.0;
  for (const Word& word : admissible_words(query.system, L)) {
    if (wraps && !query.system.allowed(word.back(), word.front())) continue;
    if (!word_sums(p, word, n, S, phi_sum)) continue;
    if (ball.contains(S)) total += std::exp(phi_sum + n * query.phi_constant);
  }
  return total;
}

DirectCount count_lcp_once(const LocalizedQuery& query, const Prepared& p, int n, double delta) {
  const TransitionSystem& ts = query.system;
  const int k = query.depth;
  const int q = p.q;
  const int m = p.Phi.dimension();
  const int L = n + k - 1;
  const TransferModel model(ts, q);
  const int s = model.state_length();
  const int S_count = model.state_count();
  if (S_count >= (1 << 24)) throw std::domain_error("too many states for direct counting");

  Quantizer quant{delta, m};
  // Value of the window completed by each edge (q >= 2), or of the appended symbol (q == 1).
  auto edge_row = [&](const LocallyConstantPotential& pot, int e) {
    return q == 1 ? pot.row(model.edge_word(e) + 1) : pot.row(model.edge_word(e));
  };
  std::vector<Cell> edge_cell(static_cast<std::size_t>(model.edge_count()));
  std::vector<double> edge_phi(static_cast<std::size_t>(model.edge_count()), 0.0);
  for (int e = 0; e < model.edge_count(); ++e) {
    edge_cell[static_cast<std::size_t>(e)] = quant(edge_row(p.Phi, e));
    if (p.phi) edge_phi[static_cast<std::size_t>(e)] = edge_row(*p.phi, e)[0];
  }
  std::vector<Cell> state_cell(static_cast<std::size_t>(S_count));
  std::vector<double> state_phi(static_cast<std::size_t>(S_count), 0.0);
  if (q == 1)
    for (int a = 0; a < S_count; ++a) {
      state_cell[static_cast<std::size_t>(a)] = quant(p.Phi.row(model.state(a).data()));
      if (p.phi) state_phi[static_cast<std::size_t>(a)] = p.phi->row(model.state(a).data())[0];
    }

  const Ball ball(query.w, query.r, n);
  const Classifier cls{ball, quant, n};
  const bool wraps = q > k;
  const int wrap_count = wraps ? n - (L - s) : 0;

  DirectCount out;
  out.n = n;
  out.bin_width = delta;
  std::vector<int> starts;
  if (wraps) {
    starts.resize(static_cast<std::size_t>(S_count));
    std::iota(starts.begin(), starts.end(), 0);
  } else {
    starts.push_back(-1);
  }
  Word window(static_cast<std::size_t>(q));
  for (int prefix : starts) {
    Layer layer;
    const int counted0 = q == 1 ? 1 : 0;
    for (int a = 0; a < S_count; ++a) {
      if (prefix >= 0 && a != prefix) continue;
      const Cell k0 = q == 1 ? state_cell[static_cast<std::size_t>(a)] : Cell{};
      if (!cls.reachable(k0, n - counted0)) continue;
      deposit(layer, pack(static_cast<std::uint64_t>(a), k0), std::exp(state_phi[static_cast<std::size_t>(a)]),
              query.bin_budget);
    }
    for (int t = s; t < L; ++t) {
      const bool counted = q == 1 ? t < n : t - s < n;
      const int done = q == 1 ? std::min(n, t + 1) : std::min(n, t - s + 1);
      Layer next;
      next.reserve(layer.size() * 2);
      for (const auto& [key, weight] : layer) {
        const int a = static_cast<int>(unpack_state(key));
        const Cell kc = unpack_cell(key);
        for (int e = model.out_begin(a); e < model.out_begin(a + 1); ++e) {
          const Cell nk = counted ? add(kc, edge_cell[static_cast<std::size_t>(e)]) : kc;
          if (!cls.reachable(nk, n - done)) continue;
          const double nw = counted ? weight * std::exp(edge_phi[static_cast<std::size_t>(e)]) : weight;
          deposit(next, pack(static_cast<std::uint64_t>(model.edge_to(e)), nk), nw, query.bin_budget);
        }
      }
      layer.swap(next);
    }
    // Wrap-around windows join the last s symbols to the prefix.
    std::vector<Cell> wrap_cell(static_cast<std::size_t>(S_count));
    std::vector<double> wrap_phi(static_cast<std::size_t>(S_count), 0.0);
    std::vector<char> wrap_ok(static_cast<std::size_t>(S_count), 1);
    if (wraps) {
      const Word& pre = model.state(prefix);
      for (int b = 0; b < S_count; ++b) {
        const Word& fin = model.state(b);
        if (!ts.allowed(fin.back(), pre.front())) {
          wrap_ok[static_cast<std::size_t>(b)] = 0;
          continue;
        }
        Cell acc{};
        for (int u = 0; u < wrap_count; ++u) {
          int i = 0;
          for (int x = u; x < s; ++x) window[static_cast<std::size_t>(i++)] = fin[static_cast<std::size_t>(x)];
          for (int x = 0; i < q; ++x) window[static_cast<std::size_t>(i++)] = pre[static_cast<std::size_t>(x)];
          acc = add(acc, quant(p.Phi.row(window.data())));
          if (p.phi) wrap_phi[static_cast<std::size_t>(b)] += p.phi->row(window.data())[0];
        }
        wrap_cell[static_cast<std::size_t>(b)] = acc;
      }
    }
    for (const auto& [key, weight] : layer) {
      const int b = static_cast<int>(unpack_state(key));
      if (!wrap_ok[static_cast<std::size_t>(b)]) continue;
      const Cell kc = add(unpack_cell(key), wrap_cell[static_cast<std::size_t>(b)]);
      const double wt = weight * std::exp(wrap_phi[static_cast<std::size_t>(b)]);
      const auto [inside, touches] = cls.classify(kc);
      if (inside) out.lower += wt;
      if (touches) out.upper += wt;
    }
  }
  const double scale = std::exp(n * query.phi_constant);
  out.lower *= scale;
  out.upper *= scale;
  return out;
}

DirectCount count_lcp(const LocalizedQuery& query, const LocallyConstantPotential& Phi, int n) {
  validate(query, Phi.dimension(), n);
  const Prepared p = prepare(query, Phi);
  const int L = n + query.depth - 1;
  if (L < p.q) {
    const double v = bruteforce_lcp(query, Phi, n);
    DirectCount out;
    out.n = n;
    out.lower = out.upper = v;
    return out;
  }
  double delta = query.r / query.bins_per_radius;
  bool coarsened = false;
  for (;;) {
    try {
      DirectCount out = count_lcp_once(query, p, n, delta);
      out.coarsened = coarsened;
      return out;
    } catch (const budget_exceeded&) {
      delta *= 2.0;
      coarsened = true;
    }
  }
}

// --- fish potential ---------------------------------------------------------------------------

// Birkhoff sum of the fish over n windows of the periodic extension, straight from evaluate().
Vec2 fish_word_sum(const FishPotential& f, const Word& word, int n) {
  const int L = static_cast<int>(word.size());
  const int c0 = fish_class(word[0]);
  bool pure = true;
  for (Symbol x : word) pure = pure && fish_class(x) == c0;
  if (pure) return n * f.limit(c0);
  Vec2 sum = Vec2::Zero();
  Word shifted(static_cast<std::size_t>(2 * L));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < 2 * L; ++i) shifted[static_cast<std::size_t>(i)] = word[static_cast<std::size_t>((j + i) % L)];
    sum += evaluate(f, shifted).value.head<2>();
  }
  return sum;
}

void check_fish_query(const LocalizedQuery& query) {
  if (!(query.system == TransitionSystem::full_shift(4)))
    throw std::domain_error("the fish counter runs on the full 4-shift");
  if (query.phi) throw std::domain_error("the fish counter accepts only a constant phi");
}

double bruteforce_fish(const LocalizedQuery& query, const FishPotential& f, int n) {
  check_fish_query(query);
  const int L = n + query.depth - 1;
  if (std::pow(4.0, L) > static_cast<double>(kBruteForceLimit)) throw std::domain_error("too many words to enumerate");
  const Ball ball(query.w, query.r, n);
  double total = 0.0;
  Word word(static_cast<std::size_t>(L), 0);
  for (;;) {
    Vector S = fish_word_sum(f, word, n);
    if (ball.contains(S)) total += 1.0;
    int i = L - 1;
    while (i >= 0 && word[static_cast<std::size_t>(i)] == 3) word[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) break;
    ++word[static_cast<std::size_t>(i)];
  }
  return total * std::exp(n * query.phi_constant);
}

// Key layout below the cells: c0 (1 bit) | closed (1) | l0 (8) | c (1) | r (8).
std::uint64_t fish_state(int c0, bool closed, int l0, int c, int r) {
  return static_cast<std::uint64_t>(c0 - 1) | (static_cast<std::uint64_t>(closed) << 1) |
         (static_cast<std::uint64_t>(l0) << 2) | (static_cast<std::uint64_t>(c - 1) << 10) |
         (static_cast<std::uint64_t>(r) << 11);
}

DirectCount count_fish_once(const LocalizedQuery& query, const FishPotential& f, int n, double delta) {
  const int L = n + query.depth - 1;
  Quantizer quant{delta, 2};
  // prefix[c][x] = sum of the binned values of runs 1..x of class c.
  std::array<std::vector<Cell>, 3> prefix;
  for (int c = 1; c <= 2; ++c) {
    prefix[c].assign(static_cast<std::size_t>(L + 1), Cell{});
    for (int x = 1; x <= L; ++x) {
      const Vec2 v = f.value_for_run(c, x);
      prefix[c][static_cast<std::size_t>(x)] = add(prefix[c][static_cast<std::size_t>(x - 1)], quant(v.data()));
    }
  }
  // Sum over runs (top - cnt, top].
  auto runs = [&](int c, int top, int cnt) {
    const Cell& a = prefix[c][static_cast<std::size_t>(top)];
    const Cell& b = prefix[c][static_cast<std::size_t>(top - cnt)];
    return Cell{a[0] - b[0], a[1] - b[1]};
  };

  const Ball ball(query.w, query.r, n);
  const Classifier cls{ball, quant, n};
  DirectCount out;
  out.n = n;
  out.bin_width = delta;

  Layer layer;
  for (int c0 = 1; c0 <= 2; ++c0) deposit(layer, pack(fish_state(c0, false, 0, c0, 1), Cell{}), 2.0, query.bin_budget);
  for (int t = 1; t < L; ++t) {
    Layer next;
    next.reserve(layer.size() * 2);
    for (const auto& [key, weight] : layer) {
      const std::uint64_t st = unpack_state(key);
      const int c0 = static_cast<int>(st & 1) + 1;
      const bool closed = (st >> 1) & 1;
      const int l0 = static_cast<int>((st >> 2) & 0xff);
      const int c = static_cast<int>((st >> 10) & 1) + 1;
      const int r = static_cast<int>((st >> 11) & 0xff);
      const Cell kc = unpack_cell(key);
      for (int nc = 1; nc <= 2; ++nc) {
        bool nclosed = closed;
        int nl0 = l0, nr = 1;
        Cell nk = kc;
        if (nc == c) {
          nr = r + 1;
        } else if (!closed) {
          nclosed = true;
          nl0 = r;
        } else {
          const int cnt = std::max(0, std::min(t, n) - (t - r));
          nk = add(kc, runs(c, r, cnt));
        }
        // Emitted positions are [l0, start of the current run) intersected with [0, n).
        const int run_start = nc == c ? t - nr + 1 : t;
        const int emitted = nclosed ? std::max(0, std::min(run_start, n) - nl0) : 0;
        if (!cls.reachable(nk, n - emitted)) continue;
        deposit(next, pack(fish_state(c0, nclosed, nl0, nc, nr), nk), 2.0 * weight, query.bin_budget);
      }
    }
    layer.swap(next);
  }
  for (const auto& [key, weight] : layer) {
    const std::uint64_t st = unpack_state(key);
    if (!((st >> 1) & 1)) continue;  // pure words are counted in closed form
    const int c0 = static_cast<int>(st & 1) + 1;
    const int l0 = static_cast<int>((st >> 2) & 0xff);
    const int c = static_cast<int>((st >> 10) & 1) + 1;
    const int r = static_cast<int>((st >> 11) & 0xff);
    const int cnt_final = std::max(0, std::min(L, n) - (L - r));
    const int cnt_initial = std::min(l0, n);
    Cell kc = add(unpack_cell(key), runs(c0, l0, cnt_initial));
    kc = add(kc, c == c0 ? runs(c, r + l0, cnt_final) : runs(c, r, cnt_final));
    const auto [inside, touches] = cls.classify(kc);
    if (inside) out.lower += weight;
    if (touches) out.upper += weight;
  }
  for (int c = 1; c <= 2; ++c) {
    Vector S = n * f.limit(c);
    if (ball.contains(S)) out.pure_term += std::ldexp(1.0, L);
  }
  const double scale = std::exp(n * query.phi_constant);
  out.pure_term *= scale;
  out.lower = out.lower * scale + out.pure_term;
  out.upper = out.upper * scale + out.pure_term;
  return out;
}

DirectCount count_fish(const LocalizedQuery& query, const FishPotential& f, int n) {
  validate(query, 2, n);
  check_fish_query(query);
  if (n + query.depth - 1 > 255) throw std::domain_error("fish counter supports word lengths up to 255");
  double delta = query.r / query.bins_per_radius;
  bool coarsened = false;
  for (;;) {
    try {
      DirectCount out = count_fish_once(query, f, n, delta);
      out.coarsened = coarsened;
      return out;
    } catch (const budget_exceeded&) {
      delta *= 2.0;
      coarsened = true;
    }
  }
}

}  // namespace

DirectCount direct_count(const LocalizedQuery& query, int n) {
  if (const auto* lc = std::get_if<LocallyConstantPotential>(&query.Phi)) return count_lcp(query, *lc, n);
  return count_fish(query, std::get<FishPotential>(query.Phi), n);
}

double direct_count_bruteforce(const LocalizedQuery& query, int n) {
  if (const auto* lc = std::get_if<LocallyConstantPotential>(&query.Phi)) {
    validate(query, lc->dimension(), n);
    return bruteforce_lcp(query, *lc, n);
  }
  validate(query, 2, n);
  return bruteforce_fish(query, std::get<FishPotential>(query.Phi), n);
}

RateSequence localized_pressure_direct(const LocalizedQuery& query) {
  if (query.horizons.empty()) throw std::domain_error("no horizons given");
  if (!std::is_sorted(query.horizons.begin(), query.horizons.end()))
    throw std::domain_error("horizons must be increasing");
  RateSequence seq;
  auto rate = [](double count, int n) {
    return count > 0.0 ? std::log(count) / n : -std::numeric_limits<double>::infinity();
  };
  for (int n : query.horizons) {
    DirectCount c = direct_count(query, n);
    seq.n.push_back(n);
    seq.lower.push_back(rate(c.lower, n));
    seq.upper.push_back(rate(c.upper, n));
    seq.counts.push_back(c);
  }
  // Least squares rate = L + c/n over the top half, on bracket midpoints.
  std::vector<double> xs, ys;
  for (std::size_t i = seq.n.size() / 2; i < seq.n.size(); ++i) {
    if (!std::isfinite(seq.lower[i]) || !std::isfinite(seq.upper[i])) continue;
    xs.push_back(1.0 / seq.n[i]);
    ys.push_back(0.5 * (seq.lower[i] + seq.upper[i]));
  }
  if (xs.empty()) {
    seq.extrapolated = seq.upper.back();
  } else if (xs.size() == 1) {
    seq.extrapolated = ys[0];
  } else {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(xs.size()), 2);
    Vector b(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      A(static_cast<Eigen::Index>(i), 0) = 1.0;
      A(static_cast<Eigen::Index>(i), 1) = xs[i];
      b[static_cast<Eigen::Index>(i)] = ys[i];
    }
    const Vector coef = A.colPivHouseholderQr().solve(b);
    seq.extrapolated = coef[0];
    seq.fit_residual = (A * coef - b).norm();
  }
  return seq;
}

constexpr double kMaxNewtonStep = 10.0;

DualSolveResult minimize_dual(const PressureFunction& P, const Vector& target, const Vector& start,
                              const NewtonOptions& opts) {
  if (target.size() != P.dimension() || start.size() != P.dimension())
    throw std::domain_error("dual target and start must match the potential dimension");
  DualSolveResult out;
  Vector t = start;
  auto [p, g] = P.value_gradient(t);
  double F = p - t.dot(target);
  Vector grad = g - target;
  for (out.iterations = 0; out.iterations < opts.max_iterations; ++out.iterations) {
    if (grad.norm() < opts.gradient_tol) break;
    const Eigen::MatrixXd H = P.hessian(t, opts.hessian_step);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    const double lmin = eig.eigenvalues().minCoeff(), lmax = eig.eigenvalues().maxCoeff();
    Vector dir;
    if (lmin <= 0.0 || lmax / lmin > opts.max_condition) {
      dir = -grad;
      ++out.gradient_steps;
    } else {
      dir = -(eig.eigenvectors() * (eig.eigenvectors().transpose() * grad).cwiseQuotient(eig.eigenvalues()));
    }
    // Nearly flat directions can ask for huge steps where the pressure overflows; cap the length.
    if (dir.norm() > kMaxNewtonStep) dir *= kMaxNewtonStep / dir.norm();
    const double slope = grad.dot(dir);
    bool accepted = false;
    for (double step = 1.0; step > 1e-20; step *= 0.5) {
      const Vector tn = t + step * dir;
      auto [pn, gn] = P.value_gradient(tn);
      const double Fn = pn - tn.dot(target);
      const Vector gradn = gn - target;
      if (!std::isfinite(Fn) || !gradn.allFinite()) continue;
      // Near the optimum F is flat to rounding; accept a smaller gradient at equal value.
      if (Fn <= F + 1e-4 * step * slope || (gradn.norm() < grad.norm() && Fn <= F + 1e-13 * (1.0 + std::abs(F)))) {
        t = tn;
        F = Fn;
        grad = gradn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  out.t_star = t;
  out.value = F;
  out.residual = grad.norm();
  out.converged = out.residual < opts.gradient_tol;
  out.measure = P.equilibrium(t);
  return out;
}

DualSolveResult localized_entropy_dual(const TransitionSystem& ts, const LocallyConstantPotential& Phi,
                                       const Vector& w, const EntropyDualOptions& opts) {
  if (w.size() != Phi.dimension()) throw std::domain_error("w dimension does not match the potential");
  const ConvexPolytope hull = convex_hull(rotation_cloud(ts, Phi, opts.cloud_period));
  if (hull.affine_dimension < Phi.dimension())
    throw std::domain_error("rotation set is lower-dimensional: the pressure Hessian is singular");
  if (hull_membership(w, hull, opts.interior_tol) != Location::interior)
    throw std::domain_error("w is not interior to the rotation set; the dual route does not apply");
  const PressureFunction P(ts, Phi);
  const Vector start = opts.start ? *opts.start : Vector::Zero(Phi.dimension());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P.hessian(start, opts.newton.hessian_step));
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff()))
    throw std::domain_error("pressure Hessian is singular at the start point");
  return minimize_dual(P, w, start, opts.newton);
}

namespace {

AlphaPoint solve_alpha(const PressureFunction& J, const Vector& w, double alpha, const Vector& start,
                       const NewtonOptions& opts) {
  Vector target(w.size() + 1);
  target << alpha, w;
  const DualSolveResult r = minimize_dual(J, target, start, opts);
  AlphaPoint pt;
  pt.alpha = alpha;
  pt.s = r.t_star[0];
  pt.t = r.t_star.tail(w.size());
  pt.entropy = r.value;
  pt.objective = r.value + alpha;
  pt.converged = r.converged;
  pt.residual = r.residual;
  return pt;
}

Vector joint_parameter(const AlphaPoint& p) {
  Vector x(p.t.size() + 1);
  x << p.s, p.t;
  return x;
}

}  // namespace

AlphaScan localized_pressure_dual(const TransitionSystem& ts, const LocallyConstantPotential& phi,
                                  const LocallyConstantPotential& Phi, const Vector& w, int grid_size,
                                  const AlphaScanOptions& opts) {
  if (grid_size < 1) throw std::domain_error("grid size must be >= 1");
  if (phi.dimension() != 1) throw std::domain_error("phi must be scalar");
  const int m = Phi.dimension();
  const LocallyConstantPotential joint = LocallyConstantPotential::stack(ts, phi, Phi);
  const auto [a, b] = slice_interval(rotation_cloud(ts, joint, opts.cloud_period), w, opts.tol);
  AlphaScan scan;
  scan.a_w = a;
  scan.b_w = b;

  const PressureFunction legendre(ts, Phi, phi);
  const DualSolveResult leg = minimize_dual(legendre, w, Vector::Zero(m), opts.newton);
  scan.legendre_value = leg.value;
  scan.legendre_t = leg.t_star;

  if (b - a <= opts.tol * std::max(1.0, std::abs(a))) {
    // phi is constant on the fiber: the objective is H(w) + a everywhere.
    scan.degenerate = true;
    EntropyDualOptions eo;
    eo.newton = opts.newton;
    const DualSolveResult h = localized_entropy_dual(ts, Phi, w, eo);
    for (int i = 0; i < grid_size; ++i) {
      AlphaPoint pt;
      pt.alpha = a;
      pt.s = 0.0;
      pt.t = h.t_star;
      pt.entropy = h.value;
      pt.objective = h.value + a;
      pt.converged = h.converged;
      pt.residual = h.residual;
      scan.grid.push_back(pt);
    }
    scan.maximizers = scan.grid;
    scan.value = h.value + a;
    scan.maximizer_measure = h.measure;
    const MarkovEquilibrium& mu = *h.measure;
    scan.gibbs_defect = std::abs(mu.entropy + mu.mean_phi - mu.pressure);
    return scan;
  }

  const PressureFunction J(ts, joint);
  scan.grid.resize(static_cast<std::size_t>(grid_size));
  const int mid = grid_size / 2;
  auto alpha_at = [&](int i) { return a + (b - a) * (i + 1) / (grid_size + 1); };
  scan.grid[static_cast<std::size_t>(mid)] = solve_alpha(J, w, alpha_at(mid), Vector::Zero(m + 1), opts.newton);
  for (int i = mid + 1; i < grid_size; ++i)
    scan.grid[static_cast<std::size_t>(i)] =
        solve_alpha(J, w, alpha_at(i), joint_parameter(scan.grid[static_cast<std::size_t>(i - 1)]), opts.newton);
  for (int i = mid - 1; i >= 0; --i)
    scan.grid[static_cast<std::size_t>(i)] =
        solve_alpha(J, w, alpha_at(i), joint_parameter(scan.grid[static_cast<std::size_t>(i + 1)]), opts.newton);

  // The objective has slope 1 - s(alpha); interior maxima sit where s crosses 1 upward.
  for (int i = 0; i + 1 < grid_size; ++i) {
    const AlphaPoint& lo = scan.grid[static_cast<std::size_t>(i)];
    const AlphaPoint& hi = scan.grid[static_cast<std::size_t>(i + 1)];
    if (!lo.converged || !hi.converged) continue;
    if (!(lo.s - 1.0 <= 0.0 && hi.s - 1.0 > 0.0)) continue;
    Vector warm = joint_parameter(lo);
    auto f = [&](double alpha) {
      const AlphaPoint p = solve_alpha(J, w, alpha, warm, opts.newton);
      warm = joint_parameter(p);
      return p.s - 1.0;
    };
    std::uintmax_t iters = 100;
    const auto root = boost::math::tools::toms748_solve(f, lo.alpha, hi.alpha, lo.s - 1.0, hi.s - 1.0,
                                                        boost::math::tools::eps_tolerance<double>(50), iters);
    const double alpha = 0.5 * (root.first + root.second);
    scan.maximizers.push_back(solve_alpha(J, w, alpha, warm, opts.newton));
  }
  if (scan.maximizers.empty()) {
    // Monotone objective on the grid: the best grid point stands in for the boundary maximum.
    const AlphaPoint* best = nullptr;
    for (const auto& p : scan.grid)
      if (p.converged && (!best || p.objective > best->objective)) best = &p;
    if (!best) throw std::runtime_error("no alpha solve converged");
    scan.maximizers.push_back(*best);
  }
  scan.value = -std::numeric_limits<double>::infinity();
  const AlphaPoint* top = nullptr;
  for (const auto& p : scan.maximizers)
    if (!top || p.objective > top->objective) top = &p;
  scan.value = top->objective;
  for (const auto& p : scan.grid)
    if (p.converged) scan.value = std::max(scan.value, p.objective);
  MarkovEquilibrium mu = J.equilibrium(joint_parameter(*top));
  scan.gibbs_defect = std::abs(mu.entropy + mu.mean_phi - mu.pressure);
  scan.maximizer_measure = std::move(mu);
  return scan;
}

GapReport variational_check(const TransitionSystem& ts, const std::optional<LocallyConstantPotential>& phi,
                            const LocallyConstantPotential& Phi, const Vector& w, const std::vector<double>& r_list,
                            const std::vector<int>& k_list, const std::vector<int>& horizons) {
  const PressureFunction P(ts, Phi, phi);
  const DualSolveResult dual = minimize_dual(P, w, Vector::Zero(Phi.dimension()));
  if (!dual.converged) throw std::domain_error("dual side did not converge; w may be on the boundary");
  GapReport report;
  report.dual = dual.value;
  report.t_star = dual.t_star;

  // Word sums of e^{S_n psi} are at most states * (max r / min r) * lambda^n for psi = phi + t.Phi.
  const MarkovEquilibrium& mu = *dual.measure;
  const auto& right = mu.perron.right;
  const double rmax = *std::max_element(right.begin(), right.end());
  const double rmin = *std::min_element(right.begin(), right.end());
  const double perron_const = std::log(static_cast<double>(P.model()->state_count())) + std::log(rmax / rmin);
  double psi_max = 0.0;
  {
    const Eigen::MatrixXd edge_Phi = P.model()->edge_vectors(Phi);
    const Vector base = phi ? Vector(P.model()->edge_vectors(*phi).col(0)) : Vector::Zero(edge_Phi.rows());
    psi_max = (base + edge_Phi * dual.t_star).cwiseAbs().maxCoeff();
  }
  const int q = std::max(Phi.depth(), phi ? phi->depth() : 1);
  const double tnorm = dual.t_star.norm();
  const double logd = std::log(static_cast<double>(ts.alphabet_size()));

  for (double r : r_list)
    for (int k : k_list)
      for (int n : horizons) {
        LocalizedQuery query{ts, phi, 0.0, Phi, w, r, k, {n}};
        const DirectCount c = direct_count(query, n);
        GapRow row;
        row.r = r;
        row.k = k;
        row.n = n;
        row.lower_rate = c.lower > 0.0 ? std::log(c.lower) / n : -std::numeric_limits<double>::infinity();
        row.upper_rate = c.upper > 0.0 ? std::log(c.upper) / n : -std::numeric_limits<double>::infinity();
        row.dual = dual.value;
        const double wrap = q > k ? 2.0 * (q - k) * psi_max : 0.0;
        row.slack = tnorm * r + (perron_const + (k - 1) * logd + wrap) / n;
        row.violates = row.lower_rate > row.dual + row.slack;
        report.any_violation = report.any_violation || row.violates;
        report.rows.push_back(row);
      }
  return report;
}

CountingBound fish_counting_bound(double rho) {
  if (!(rho > 0.0 && rho < 0.5)) throw std::domain_error("rho must lie in (0, 1/2)");
  const double ent = -(1.0 - rho) * std::log(1.0 - rho);
  return {std::log(2.0) + std::log(rho) + ent, std::log(2.0) - rho * std::log(rho) + ent};
}

BigInt fish_counting_exact(int n, double rho) {
  if (n < 1) throw std::domain_error("n must be >= 1");
  if (!(rho > 0.0 && rho < 0.5)) throw std::domain_error("rho must lie in (0, 1/2)");
  const int m = static_cast<int>(std::floor(n * rho + 1e-9));
  BigInt binom = 1, sum = 0;
  for (int i = 0; i < m; ++i) {
    sum += binom;
    binom = binom * (n - i) / (i + 1);
  }
  return sum << n;
}

double log_bigint(const BigInt& x) {
  if (x <= 0) throw std::domain_error("logarithm of a non-positive integer");
  const long bits = static_cast<long>(boost::multiprecision::msb(x));
  if (bits <= 52) return std::log(x.convert_to<double>());
  const long shift = bits - 52;
  const BigInt top = x >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

double concave_envelope(const std::vector<std::array<double, 2>>& points, double w) {
  if (points.empty()) throw std::domain_error("no points for the envelope");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : points)
    for (const auto& q : points) {
      if (p[0] == w) best = std::max(best, p[1]);
      if (!(p[0] < w && w < q[0])) continue;
      const double theta = (w - p[0]) / (q[0] - p[0]);
      best = std::max(best, (1.0 - theta) * p[1] + theta * q[1]);
    }
  if (!std::isfinite(best)) throw std::domain_error("w lies outside the range of the points");
  return best;
}

}  // namespace locpress
