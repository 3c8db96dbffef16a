#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace locpress {

using Symbol = int;
using Word = std::vector<Symbol>;
using BigInt = boost::multiprecision::cpp_int;

/// One-sided subshift of finite type given by a 0/1 transition table.
///
/// Every symbol must have at least one successor and one predecessor.
class TransitionSystem {
 public:
  TransitionSystem() = default;
  explicit TransitionSystem(std::vector<std::vector<int>> table);

  /// Parses "d" followed by d rows of d space-separated 0/1 digits.
  static TransitionSystem parse(std::string_view text);
  /// Named presets: full2, full4, golden, fishA.
  static TransitionSystem preset(std::string_view name);
  static TransitionSystem full_shift(int d);
  /// Block-diagonal union of systems; symbols are renumbered consecutively.
  static TransitionSystem disjoint_union(const std::vector<TransitionSystem>& parts);

  int alphabet_size() const { return d_; }
  bool allowed(Symbol a, Symbol b) const { return table_[static_cast<std::size_t>(a * d_ + b)] != 0; }
  const std::vector<std::uint8_t>& table() const { return table_; }

  bool operator==(const TransitionSystem&) const = default;

 private:
  int d_ = 0;
  std::vector<std::uint8_t> table_;
};

/// Strongly connected piece of the symbol graph, with the symbols it uses.
struct Component {
  std::vector<Symbol> symbols;
  TransitionSystem system;  // restricted system, symbols renumbered 0..k-1
};

/// Primitive cyclic word; the generator is the lexicographically least rotation.
struct PeriodicOrbit {
  Word generator;
  int period() const { return static_cast<int>(generator.size()); }
};

struct BowenParams {
  double metric_base = 0.5;
  int horizon = 1;
  int depth = 1;

  double epsilon() const;
  void validate() const;
};

bool is_admissible(const Word& word, const TransitionSystem& ts);
bool is_cyclically_admissible(const Word& word, const TransitionSystem& ts);

BigInt count_admissible_words(const TransitionSystem& ts, int n);

/// Every admissible word of the given length, in lexicographic order.
std::vector<Word> admissible_words(const TransitionSystem& ts, int length);

bool is_mixing(const TransitionSystem& ts);
bool is_irreducible(const TransitionSystem& ts);

/// Irreducible components that carry at least one cycle.
std::vector<Component> irreducible_components(const TransitionSystem& ts);

/// Streams primitive periodic orbits of period 1..max_period.
///
/// Uses the recursive prenecklace generator (FKM) unrolled into an explicit
/// stack, pruning prefixes that are not admissible. Orbits come out grouped by
/// period and in lexicographic order inside a period.
class PeriodicOrbitStream {
 public:
  PeriodicOrbitStream(const TransitionSystem& ts, int max_period, int min_period = 1);

  std::optional<PeriodicOrbit> next();

 private:
  bool start_length(int n);

  const TransitionSystem* ts_;
  int max_period_;
  int n_ = 0;
  int t_ = 0;
  bool fresh_ = true;
  std::vector<Symbol> a_;
  std::vector<int> period_at_;
  bool done_ = false;
};

std::vector<PeriodicOrbit> enumerate_periodic_orbits(const TransitionSystem& ts, int max_period);

/// Smallest relative disagreement index (1-indexed) over shifts j < n, or
/// nullopt when the words agree on the whole compared range.
std::optional<int> bowen_exponent(const Word& x, const Word& y, int horizon);
double bowen_distance(const Word& x, const Word& y, const BowenParams& params);

/// Maximal (n, base^k)-separated family of cylinders: all admissible words of length n+k-1.
std::vector<Word> separated_cylinder_family(const TransitionSystem& ts, int n, int k);

std::string to_string(const Word& w);
Word word_from_string(std::string_view digits);

}  // namespace locpress
