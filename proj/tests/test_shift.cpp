#include <doctest.h>

#include <cmath>
#include <functional>
#include <set>

#include "locpress/shift.hpp"

using namespace locpress;

namespace {

const TransitionSystem kGolden = TransitionSystem::parse("2\n1 1\n1 0\n");

// Exhaustive recursion over every d^n word; independent of the library's counting.
long brute_count(const TransitionSystem& ts, int n) {
  long count = 0;
  Word w(static_cast<std::size_t>(n));
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      ++count;
      return;
    }
    for (int s = 0; s < ts.alphabet_size(); ++s) {
      if (i > 0 && !ts.allowed(w[static_cast<std::size_t>(i - 1)], s)) continue;
      w[static_cast<std::size_t>(i)] = s;
      rec(i + 1);
    }
  };
  rec(0);
  return count;
}

long trace_power(const TransitionSystem& ts, int p) {
  const int d = ts.alphabet_size();
  std::vector<long> m(static_cast<std::size_t>(d * d), 0), a(m.size());
  for (int i = 0; i < d; ++i) m[static_cast<std::size_t>(i * d + i)] = 1;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a[static_cast<std::size_t>(i * d + j)] = ts.allowed(i, j);
  for (int step = 0; step < p; ++step) {
    std::vector<long> next(m.size(), 0);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k)
        for (int j = 0; j < d; ++j)
          next[static_cast<std::size_t>(i * d + j)] += m[static_cast<std::size_t>(i * d + k)] * a[static_cast<std::size_t>(k * d + j)];
    m = next;
  }
  long tr = 0;
  for (int i = 0; i < d; ++i) tr += m[static_cast<std::size_t>(i * d + i)];
  return tr;
}

int mobius(int n) {
  int result = 1;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    n /= p;
    if (n % p == 0) return 0;
    result = -result;
  }
  return n > 1 ? -result : result;
}

long primitive_orbits(const TransitionSystem& ts, int p) {
  long sum = 0;
  for (int q = 1; q <= p; ++q)
    if (p % q == 0) sum += mobius(p / q) * trace_power(ts, q);
  return sum / p;
}

}  // namespace

TEST_SUITE("shift") {

TEST_CASE("admissibility") {
  const auto full2 = TransitionSystem::preset("full2");
  CHECK(is_admissible(word_from_string("0110"), full2));
  CHECK_FALSE(is_admissible(word_from_string("11"), kGolden));
  CHECK(is_admissible(word_from_string("0101"), kGolden));
  CHECK_THROWS_AS(is_admissible(Word{0, 2}, full2), std::domain_error);
  CHECK(is_cyclically_admissible(word_from_string("01"), kGolden));
  CHECK_FALSE(is_cyclically_admissible(word_from_string("101"), kGolden));
}

TEST_CASE("transition tables are validated") {
  CHECK_THROWS_AS(TransitionSystem::parse("2\n1 0\n1 0\n"), std::invalid_argument);  // column 1 empty
  CHECK_THROWS_AS(TransitionSystem::parse("2\n1 2\n1 0\n"), std::invalid_argument);
  CHECK_THROWS_AS(TransitionSystem::parse("2\n1 1\n1\n"), std::invalid_argument);
  CHECK_THROWS_AS(TransitionSystem::preset("nope"), std::invalid_argument);
  CHECK(TransitionSystem::preset("golden") == kGolden);
}

TEST_CASE("word counts match exhaustive enumeration") {
  CHECK(count_admissible_words(TransitionSystem::preset("full2"), 4) == 16);
  CHECK(count_admissible_words(kGolden, 4) == 8);
  CHECK(count_admissible_words(TransitionSystem::preset("full4"), 3) == 64);
  for (const char* name : {"full2", "golden", "fishA"}) {
    const auto ts = TransitionSystem::preset(name);
    for (int n = 1; n <= 12; ++n) {
      CAPTURE(name);
      CAPTURE(n);
      CHECK(count_admissible_words(ts, n) == brute_count(ts, n));
      if (n <= 8) CHECK(static_cast<long>(admissible_words(ts, n).size()) == brute_count(ts, n));
    }
  }
  // Far beyond 64 bits.
  CHECK(count_admissible_words(TransitionSystem::preset("full2"), 200) == (BigInt(1) << 200));
}

TEST_CASE("periodic orbits") {
  const auto full2 = TransitionSystem::preset("full2");
  const auto small = enumerate_periodic_orbits(full2, 2);
  REQUIRE(small.size() == 3);
  CHECK(to_string(small[0].generator) == "0");
  CHECK(to_string(small[1].generator) == "1");
  CHECK(to_string(small[2].generator) == "01");

  std::vector<std::string> four;
  for (const auto& o : enumerate_periodic_orbits(full2, 4))
    if (o.period() == 4) four.push_back(to_string(o.generator));
  CHECK(four == std::vector<std::string>{"0001", "0011", "0111"});

  int golden2 = 0;
  for (const auto& o : enumerate_periodic_orbits(kGolden, 2)) golden2 += o.period() == 2;
  CHECK(golden2 == 1);

  for (const char* name : {"full2", "golden", "fishA", "full4"}) {
    const auto ts = TransitionSystem::preset(name);
    const int P = ts.alphabet_size() == 4 ? 8 : 12;
    std::vector<long> per(static_cast<std::size_t>(P + 1), 0);
    std::set<Word> seen;
    PeriodicOrbitStream stream(ts, P);
    while (auto o = stream.next()) {
      const Word& g = o->generator;
      ++per[static_cast<std::size_t>(o->period())];
      CHECK(seen.insert(g).second);
      CHECK(is_cyclically_admissible(g, ts));
      for (std::size_t s = 1; s < g.size(); ++s) {
        Word rot(g.begin() + static_cast<long>(s), g.end());
        rot.insert(rot.end(), g.begin(), g.begin() + static_cast<long>(s));
        CHECK(g < rot);  // least rotation and primitive
      }
    }
    for (int p = 1; p <= P; ++p) {
      CAPTURE(name);
      CAPTURE(p);
      CHECK(per[static_cast<std::size_t>(p)] == primitive_orbits(ts, p));
    }
  }
}

TEST_CASE("mixing and components") {
  CHECK(is_mixing(TransitionSystem::preset("full2")));
  CHECK(is_mixing(kGolden));
  CHECK_FALSE(is_mixing(TransitionSystem::preset("fishA")));
  CHECK_FALSE(is_irreducible(TransitionSystem::preset("fishA")));
  CHECK_FALSE(is_mixing(TransitionSystem::parse("2\n0 1\n1 0\n")));
  CHECK(is_irreducible(TransitionSystem::parse("2\n0 1\n1 0\n")));
  const auto comps = irreducible_components(TransitionSystem::preset("fishA"));
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].symbols == std::vector<Symbol>{0, 1});
  CHECK(comps[1].symbols == std::vector<Symbol>{2, 3});
  const auto u = TransitionSystem::disjoint_union({TransitionSystem::preset("full2"), kGolden});
  CHECK(u.alphabet_size() == 4);
  CHECK_FALSE(u.allowed(1, 2));
  CHECK(irreducible_components(u).size() == 2);
}

TEST_CASE("Bowen distance") {
  BowenParams p;
  p.horizon = 1;
  CHECK(bowen_distance(word_from_string("010"), word_from_string("010"), p) == 0.0);
  CHECK(bowen_distance(word_from_string("000"), word_from_string("100"), p) == 0.5);
  p.horizon = 2;
  // Shift j = 1 sees the disagreement at relative index 2.
  CHECK(bowen_distance(word_from_string("0010"), word_from_string("0000"), p) == 0.25);
  CHECK_THROWS_AS(bowen_distance(word_from_string("0"), word_from_string("0"), p), std::domain_error);
  BowenParams bad;
  bad.metric_base = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("cylinder family is maximal separated") {
  struct Case {
    TransitionSystem ts;
    int n, k;
    std::size_t size;
  };
  for (const auto& c : {Case{TransitionSystem::preset("full2"), 2, 1, 4}, Case{TransitionSystem::preset("full2"), 1, 2, 4},
                        Case{kGolden, 3, 1, 5}, Case{kGolden, 3, 2, 8}, Case{TransitionSystem::preset("fishA"), 2, 2, 16}}) {
    BowenParams p{0.5, c.n, c.k};
    const double eps = p.epsilon();
    const auto family = separated_cylinder_family(c.ts, c.n, c.k);
    CHECK(family.size() == c.size);
    for (std::size_t i = 0; i < family.size(); ++i)
      for (std::size_t j = i + 1; j < family.size(); ++j) CHECK(bowen_distance(family[i], family[j], p) >= eps);
    // Every longer cylinder is within eps of some member, so nothing can be added.
    for (const auto& x : admissible_words(c.ts, c.n + c.k)) {
      bool covered = false;
      for (const auto& y : family) covered = covered || bowen_distance(x, y, p) < eps;
      CHECK(covered);
    }
  }
}

}  // TEST_SUITE
