#include "locpress/shift.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace locpress {

TransitionSystem::TransitionSystem(std::vector<std::vector<int>> table) {
  d_ = static_cast<int>(table.size());
  if (d_ < 1) throw std::invalid_argument("transition table must have at least one symbol");
  table_.assign(static_cast<std::size_t>(d_ * d_), 0);
  for (int a = 0; a < d_; ++a) {
    if (static_cast<int>(table[a].size()) != d_)
      throw std::invalid_argument(fmt::format("transition row {} has {} entries, expected {}", a,
                                              table[a].size(), d_));
    for (int b = 0; b < d_; ++b) {
      int v = table[a][b];
      if (v != 0 && v != 1)
        throw std::invalid_argument(fmt::format("transition entry ({},{}) is {}, expected 0 or 1", a, b, v));
      table_[static_cast<std::size_t>(a * d_ + b)] = static_cast<std::uint8_t>(v);
    }
  }
  for (int a = 0; a < d_; ++a) {
    bool row = false, col = false;
    for (int b = 0; b < d_; ++b) {
      row = row || allowed(a, b);
      col = col || allowed(b, a);
    }
    if (!row || !col)
      throw std::invalid_argument(fmt::format("symbol {} is stranded (empty row or column)", a));
  }
}

TransitionSystem TransitionSystem::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  int d = 0;
  if (!(in >> d) || d < 1) throw std::invalid_argument("transition block: expected alphabet size on first line");
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(d), std::vector<int>(static_cast<std::size_t>(d)));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (!(in >> rows[a][b]))
        throw std::invalid_argument(fmt::format("transition block: row {} is incomplete", a + 1));
  std::string extra;
  if (in >> extra) throw std::invalid_argument("transition block: trailing content after matrix");
  return TransitionSystem(std::move(rows));
}

TransitionSystem TransitionSystem::full_shift(int d) {
  return TransitionSystem(std::vector<std::vector<int>>(static_cast<std::size_t>(d),
                                                         std::vector<int>(static_cast<std::size_t>(d), 1)));
}

TransitionSystem TransitionSystem::preset(std::string_view name) {
  if (name == "full2") return full_shift(2);
  if (name == "full4") return full_shift(4);
  if (name == "golden") return TransitionSystem({{1, 1}, {1, 0}});
  if (name == "fishA") return TransitionSystem({{1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}, {0, 0, 1, 1}});
  throw std::invalid_argument(fmt::format("unknown system preset '{}'", name));
}

TransitionSystem TransitionSystem::disjoint_union(const std::vector<TransitionSystem>& parts) {
  int total = 0;
  for (const auto& p : parts) total += p.alphabet_size();
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(total), std::vector<int>(static_cast<std::size_t>(total), 0));
  int offset = 0;
  for (const auto& p : parts) {
    for (int a = 0; a < p.alphabet_size(); ++a)
      for (int b = 0; b < p.alphabet_size(); ++b) rows[offset + a][offset + b] = p.allowed(a, b) ? 1 : 0;
    offset += p.alphabet_size();
  }
  return TransitionSystem(std::move(rows));
}

double BowenParams::epsilon() const { return std::pow(metric_base, depth); }

void BowenParams::validate() const {
  if (!(metric_base > 0.0 && metric_base < 1.0)) throw std::domain_error("metric base must lie in (0,1)");
  if (horizon < 1) throw std::domain_error("Bowen horizon must be >= 1");
  if (depth < 1) throw std::domain_error("Bowen depth must be >= 1");
}

namespace {

void check_symbols(const Word& word, const TransitionSystem& ts) {
  for (Symbol s : word)
    if (s < 0 || s >= ts.alphabet_size())
      throw std::domain_error(fmt::format("symbol {} outside alphabet of size {}", s, ts.alphabet_size()));
}

}  // namespace

bool is_admissible(const Word& word, const TransitionSystem& ts) {
  check_symbols(word, ts);
  for (std::size_t i = 1; i < word.size(); ++i)
    if (!ts.allowed(word[i - 1], word[i])) return false;
  return true;
}

bool is_cyclically_admissible(const Word& word, const TransitionSystem& ts) {
  return !word.empty() && is_admissible(word, ts) && ts.allowed(word.back(), word.front());
}

BigInt count_admissible_words(const TransitionSystem& ts, int n) {
  if (n < 1) throw std::domain_error("word length must be >= 1");
  const int d = ts.alphabet_size();
  std::vector<BigInt> ending(static_cast<std::size_t>(d), BigInt(1));
  for (int step = 1; step < n; ++step) {
    std::vector<BigInt> next(static_cast<std::size_t>(d), BigInt(0));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (ts.allowed(a, b)) next[b] += ending[a];
    ending = std::move(next);
  }
  BigInt total = 0;
  for (const auto& c : ending) total += c;
  return total;
}

std::vector<Word> admissible_words(const TransitionSystem& ts, int length) {
  if (length < 1) throw std::domain_error("word length must be >= 1");
  std::vector<Word> out;
  Word w(static_cast<std::size_t>(length));
  std::function<void(int)> extend = [&](int pos) {
    if (pos == length) {
      out.push_back(w);
      return;
    }
    for (Symbol s = 0; s < ts.alphabet_size(); ++s) {
      if (pos > 0 && !ts.allowed(w[pos - 1], s)) continue;
      w[pos] = s;
      extend(pos + 1);
    }
  };
  extend(0);
  return out;
}

namespace {

using BoolMatrix = std::vector<std::uint8_t>;

BoolMatrix bool_multiply(const BoolMatrix& x, const BoolMatrix& y, int d) {
  BoolMatrix z(static_cast<std::size_t>(d * d), 0);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      if (x[i * d + k])
        for (int j = 0; j < d; ++j) z[i * d + j] |= y[k * d + j];
  return z;
}

// Tarjan's strongly connected components on the symbol graph.
std::vector<std::vector<Symbol>> strong_components(const TransitionSystem& ts) {
  const int d = ts.alphabet_size();
  std::vector<int> index(static_cast<std::size_t>(d), -1), low(static_cast<std::size_t>(d), 0);
  std::vector<bool> on_stack(static_cast<std::size_t>(d), false);
  std::vector<Symbol> stack;
  std::vector<std::vector<Symbol>> comps;
  int counter = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w = 0; w < d; ++w) {
      if (!ts.allowed(v, w)) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<Symbol> comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < d; ++v)
    if (index[v] < 0) visit(v);
  std::sort(comps.begin(), comps.end());
  return comps;
}

}  // namespace

bool is_mixing(const TransitionSystem& ts) {
  const int d = ts.alphabet_size();
  const int bound = (d - 1) * (d - 1) + 1;
  BoolMatrix base = ts.table();
  BoolMatrix power = base;
  for (int k = 1; k <= bound; ++k) {
    if (std::all_of(power.begin(), power.end(), [](std::uint8_t v) { return v != 0; })) return true;
    power = bool_multiply(power, base, d);
  }
  return false;
}

bool is_irreducible(const TransitionSystem& ts) { return strong_components(ts).size() == 1; }

std::vector<Component> irreducible_components(const TransitionSystem& ts) {
  std::vector<Component> out;
  for (auto& symbols : strong_components(ts)) {
    const int k = static_cast<int>(symbols.size());
    bool has_cycle = k > 1 || ts.allowed(symbols[0], symbols[0]);
    if (!has_cycle) continue;
    std::vector<std::vector<int>> rows(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(k)));
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) rows[a][b] = ts.allowed(symbols[a], symbols[b]) ? 1 : 0;
    out.push_back(Component{symbols, TransitionSystem(std::move(rows))});
  }
  return out;
}

PeriodicOrbitStream::PeriodicOrbitStream(const TransitionSystem& ts, int max_period, int min_period)
    : ts_(&ts), max_period_(max_period) {
  if (max_period < 1) throw std::domain_error("max_period must be >= 1");
  n_ = std::max(min_period, 1) - 1;
  done_ = !start_length(n_ + 1);
}

bool PeriodicOrbitStream::start_length(int n) {
  if (n > max_period_) return false;
  n_ = n;
  a_.assign(static_cast<std::size_t>(n + 1), 0);
  period_at_.assign(static_cast<std::size_t>(n + 2), 1);
  t_ = 1;
  fresh_ = true;
  return true;
}

// a_[1..n] holds the word, a_[0] = 0 is the FKM sentinel. period_at_[t] is the
// prenecklace period of a_[1..t-1] on entry to level t.
std::optional<PeriodicOrbit> PeriodicOrbitStream::next() {
  const int d = ts_->alphabet_size();
  while (!done_) {
    if (t_ == 0) {
      if (!start_length(n_ + 1)) {
        done_ = true;
        break;
      }
      continue;
    }
    const int p = period_at_[t_];
    Symbol& cur = a_[t_];
    if (fresh_) {
      cur = a_[t_ - p];
      fresh_ = false;
    } else {
      ++cur;
    }
    while (cur < d && t_ > 1 && !ts_->allowed(a_[t_ - 1], cur)) ++cur;
    if (cur >= d) {
      --t_;
      continue;
    }
    const int child_period = (cur == a_[t_ - p]) ? p : t_;
    if (t_ == n_) {
      if (child_period == n_ && ts_->allowed(a_[n_], a_[1]))
        return PeriodicOrbit{Word(a_.begin() + 1, a_.end())};
      continue;
    }
    ++t_;
    period_at_[t_] = child_period;
    fresh_ = true;
  }
  return std::nullopt;
}

std::vector<PeriodicOrbit> enumerate_periodic_orbits(const TransitionSystem& ts, int max_period) {
  std::vector<PeriodicOrbit> out;
  PeriodicOrbitStream stream(ts, max_period);
  while (auto orbit = stream.next()) out.push_back(std::move(*orbit));
  return out;
}

std::optional<int> bowen_exponent(const Word& x, const Word& y, int horizon) {
  if (horizon < 1) throw std::domain_error("Bowen horizon must be >= 1");
  if (static_cast<int>(x.size()) < horizon || static_cast<int>(y.size()) < horizon)
    throw std::domain_error(fmt::format("words of length {} and {} are too short for horizon {}", x.size(),
                                        y.size(), horizon));
  const std::size_t len = std::min(x.size(), y.size());
  std::optional<int> best;
  for (int j = 0; j < horizon; ++j) {
    for (std::size_t i = static_cast<std::size_t>(j); i < len; ++i) {
      if (x[i] != y[i]) {
        int rel = static_cast<int>(i) - j + 1;
        if (!best || rel < *best) best = rel;
        break;
      }
    }
  }
  return best;
}

double bowen_distance(const Word& x, const Word& y, const BowenParams& params) {
  params.validate();
  auto e = bowen_exponent(x, y, params.horizon);
  return e ? std::pow(params.metric_base, *e) : 0.0;
}

std::vector<Word> separated_cylinder_family(const TransitionSystem& ts, int n, int k) {
  if (n < 1 || k < 1) throw std::domain_error("horizon and depth must be >= 1");
  return admissible_words(ts, n + k - 1);
}

std::string to_string(const Word& w) {
  bool compact = std::all_of(w.begin(), w.end(), [](Symbol s) { return s >= 0 && s < 10; });
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!compact && i > 0) out += '.';
    out += std::to_string(w[i]);
  }
  return out;
}

Word word_from_string(std::string_view digits) {
  Word w;
  if (digits.find('.') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= digits.size()) {
      auto end = digits.find('.', start);
      if (end == std::string_view::npos) end = digits.size();
      w.push_back(std::stoi(std::string(digits.substr(start, end - start))));
      start = end + 1;
    }
    return w;
  }
  for (char c : digits) {
    if (c < '0' || c > '9') throw std::invalid_argument(fmt::format("bad symbol '{}' in word '{}'", c, digits));
    w.push_back(c - '0');
  }
  return w;
}

}  // namespace locpress
