#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "locpress/transfer.hpp"

using namespace locpress;

namespace {

const double kLog2 = std::log(2.0);

LocallyConstantPotential random_potential(const TransitionSystem& ts, int depth, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  return LocallyConstantPotential(ts, depth, 1, [&](const Word&) { return Vector::Constant(1, u(rng)); });
}

// Brute-force pressure: (1/n) log of the sum of exp(S_n phi) over admissible words,
// extrapolated in n by a ratio of consecutive partition sums.
double partition_ratio_pressure(const TransitionSystem& ts, const LocallyConstantPotential& phi, int n) {
  auto Z = [&](int len) {
    double z = 0.0;
    for (const auto& w : admissible_words(ts, len + phi.depth() - 1)) {
      double s = 0.0;
      for (int j = 0; j < len; ++j) s += phi.row(w.data() + j)[0];
      z += std::exp(s);
    }
    return z;
  };
  return std::log(Z(n + 1) / Z(n));
}

}  // namespace

TEST_SUITE("transfer") {

TEST_CASE("closed-form pressures") {
  const auto full2 = TransitionSystem::preset("full2");
  const auto golden = TransitionSystem::preset("golden");
  CHECK(pressure(full2, LocallyConstantPotential::constant(full2, Vector::Zero(1))) == doctest::Approx(kLog2).epsilon(1e-14));
  CHECK(pressure(golden, LocallyConstantPotential::constant(golden, Vector::Zero(1))) ==
        doctest::Approx(std::log((1 + std::sqrt(5.0)) / 2)).epsilon(1e-12));
  const auto ind = LocallyConstantPotential::cylinder_indicator(full2, word_from_string("1"));
  CHECK(pressure(full2, ind) == doctest::Approx(std::log(1 + std::exp(1.0))).epsilon(1e-13));
  CHECK(pressure(full2, LocallyConstantPotential::by_symbol(full2, {0.3, -0.7})) ==
        doctest::Approx(std::log(std::exp(0.3) + std::exp(-0.7))).epsilon(1e-13));
  // Depth-3 table on the full 4-shift against the partition-sum ratio.
  std::mt19937_64 rng(3);
  const auto full4 = TransitionSystem::full_shift(4);
  const auto phi = random_potential(full4, 2, rng);
  CHECK(pressure(full4, phi) == doctest::Approx(partition_ratio_pressure(full4, phi, 9)).epsilon(1e-6));
}

TEST_CASE("equilibrium states") {
  const auto full2 = TransitionSystem::preset("full2");
  const auto ind = LocallyConstantPotential::cylinder_indicator(full2, word_from_string("1"));
  const auto mu = equilibrium_state(full2, ind);
  const double e = std::exp(1.0);
  CHECK(rotation_vector(mu, ind)[0] == doctest::Approx(e / (1 + e)).epsilon(1e-12));
  CHECK(mu.perron.residual < 1e-12);
  for (double r : mu.perron.right) CHECK(r > 0.0);
  for (double l : mu.perron.left) CHECK(l > 0.0);

  const auto golden = TransitionSystem::preset("golden");
  const auto parry = equilibrium_state(golden, LocallyConstantPotential::constant(golden, Vector::Zero(1)));
  CHECK(parry.entropy == doctest::Approx(std::log((1 + std::sqrt(5.0)) / 2)).epsilon(1e-12));
  CHECK(rotation_vector(parry, LocallyConstantPotential::cylinder_indicator(golden, word_from_string("1")))[0] ==
        doctest::Approx((5 - std::sqrt(5.0)) / 10).epsilon(1e-12));
  const Eigen::MatrixXd K = parry.kernel();
  for (int i = 0; i < K.rows(); ++i) CHECK(K.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS(equilibrium_state(TransitionSystem::preset("fishA"),
                                 LocallyConstantPotential::constant(TransitionSystem::preset("fishA"), Vector::Zero(1))));
}

TEST_CASE("variational identity") {
  std::mt19937_64 rng(5);
  for (const char* name : {"full2", "golden"})
    for (int i = 0; i < 20; ++i) {
      const auto ts = TransitionSystem::preset(name);
      const auto phi = random_potential(ts, 1 + i % 3, rng);
      const auto mu = equilibrium_state(ts, phi);
      CHECK(std::abs(mu.pressure - mu.entropy - mu.mean_phi) < 1e-9);
      CHECK(std::abs(pressure(ts, phi.plus_constant(0.75)) - pressure(ts, phi) - 0.75) < 1e-12);
    }
}

TEST_CASE("non-mixing systems take the component maximum") {
  const auto u = TransitionSystem::disjoint_union({TransitionSystem::preset("full2"), TransitionSystem::preset("golden")});
  const auto rep = pressure_report(u, LocallyConstantPotential::by_symbol(u, {0, 0, 1, 1}));
  CHECK(rep.reducible);
  CHECK(rep.components == 2);
  CHECK(rep.value == doctest::Approx(1.0 + std::log((1 + std::sqrt(5.0)) / 2)).epsilon(1e-12));
  const auto cycle = TransitionSystem::parse("2\n0 1\n1 0\n");
  CHECK(pressure(cycle, LocallyConstantPotential::constant(cycle, Vector::Zero(1))) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gradient, Hessian and convexity") {
  const auto full2 = TransitionSystem::preset("full2");
  const auto ind = LocallyConstantPotential::cylinder_indicator(full2, word_from_string("1"));
  auto sigmoid = [](double t) { return std::exp(t) / (1 + std::exp(t)); };
  for (double t : {-10.0, 0.0, 1.0}) {
    const Vector g = pressure_gradient(full2, ind, Vector::Constant(1, t));
    CHECK(g[0] == doctest::Approx(sigmoid(t)).epsilon(1e-10));
  }
  CHECK(pressure_gradient(full2, ind, Vector::Constant(1, -10.0))[0] < 5e-5);
  CHECK(pressure_hessian(full2, ind, Vector::Zero(1))(0, 0) == doctest::Approx(0.25).epsilon(1e-6));
  const auto cst = LocallyConstantPotential::constant(full2, Vector::Constant(1, 2.0));
  CHECK(std::abs(pressure_hessian(full2, cst, Vector::Zero(1))(0, 0)) < 1e-6);

  // Two-dimensional potential: gradient against central differences of the pressure.
  const auto golden = TransitionSystem::preset("golden");
  // Frequencies of 1 and of 000 vary independently, so the Hessian is definite.
  const LocallyConstantPotential Phi(golden, 3, 2, [](const Word& w) {
    return Eigen::Vector2d(w[0] == 1 ? 1.0 : 0.0, w[0] == 0 && w[1] == 0 && w[2] == 0 ? 1.0 : -0.5);
  });
  const PressureFunction P(golden, Phi);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2, 2), th(0, 1);
  for (int i = 0; i < 25; ++i) {
    const Eigen::Vector2d t(-2 + (i % 5), -2 + (i / 5));
    const Vector g = P.gradient(t);
    for (int c = 0; c < 2; ++c) {
      Eigen::Vector2d h = Eigen::Vector2d::Zero();
      h[c] = 1e-5;
      const double fd = (P.value(t + h) - P.value(t - h)) / 2e-5;
      CHECK(std::abs(fd - g[c]) <= 1e-6 * std::max(1.0, std::abs(g[c])));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P.hessian(t));
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    const Eigen::Vector2d a(u(rng), u(rng)), b(u(rng), u(rng));
    const double s = th(rng);
    CHECK(P.value(s * a + (1 - s) * b) <= s * P.value(a) + (1 - s) * P.value(b) + 1e-10);
  }
}

}  // TEST_SUITE
