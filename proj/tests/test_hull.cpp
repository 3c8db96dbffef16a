#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>

#include "locpress/hull.hpp"
#include "locpress/predicates.hpp"

using namespace locpress;
using Rational = boost::multiprecision::cpp_rational;

namespace {

int exact_orient(const double* a, const double* b, const double* c) {
  const Rational det = (Rational(b[0]) - Rational(a[0])) * (Rational(c[1]) - Rational(a[1])) -
                       (Rational(b[1]) - Rational(a[1])) * (Rational(c[0]) - Rational(a[0]));
  return det > 0 ? 1 : det < 0 ? -1 : 0;
}

Eigen::VectorXd v(std::initializer_list<double> xs) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

}  // namespace

TEST_SUITE("hull") {

TEST_CASE("orientation is exact near degeneracy") {
  const double a[2] = {0.5, 0.5}, b[2] = {12.0, 12.0}, c[2] = {24.0, 24.0};
  CHECK(orient2d(a, b, c) == 0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int disagreements_with_naive = 0;
  for (int i = 0; i < 20000; ++i) {
    // Points on a line through two random points, nudged by a few ulps.
    const double p[2] = {u(rng), u(rng)}, q[2] = {u(rng) + 16, u(rng) + 16};
    const double s = u(rng);
    double r[2] = {p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])};
    for (int k = 0; k < static_cast<int>(rng() % 3); ++k) {
      const std::size_t c = rng() % 2;
      r[c] = std::nextafter(r[c], 100.0);
    }
    CHECK(orient2d(p, q, r) == exact_orient(p, q, r));
    const double naive = orient2d_approx(p, q, r);
    disagreements_with_naive += (naive > 0 ? 1 : naive < 0 ? -1 : 0) != exact_orient(p, q, r);
  }
  MESSAGE("plain determinant got the sign wrong " << disagreements_with_naive << " times");
}

TEST_CASE("planar hull against the edge oracle") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> u(-20, 20);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::array<double, 2>> pts(static_cast<std::size_t>(5 + trial));
    for (auto& p : pts) p = {double(u(rng)), double(u(rng))};
    // (i, j) is a hull edge when no point lies to its right or beyond its ends on its line.
    std::set<std::array<double, 2>> unique(pts.begin(), pts.end());
    std::vector<std::array<double, 2>> up(unique.begin(), unique.end());
    std::set<std::array<double, 2>> extreme;
    for (std::size_t i = 0; i < up.size(); ++i)
      for (std::size_t j = 0; j < up.size(); ++j) {
        if (i == j) continue;
        bool edge = true;
        for (std::size_t k = 0; k < up.size() && edge; ++k) {
          const double cross = (up[j][0] - up[i][0]) * (up[k][1] - up[i][1]) - (up[j][1] - up[i][1]) * (up[k][0] - up[i][0]);
          if (cross < 0) edge = false;
          if (cross == 0 && k != i && k != j) {
            // Collinear points must lie between i and j.
            const double t = (up[k][0] - up[i][0]) * (up[j][0] - up[i][0]) + (up[k][1] - up[i][1]) * (up[j][1] - up[i][1]);
            const double len = (up[j][0] - up[i][0]) * (up[j][0] - up[i][0]) + (up[j][1] - up[i][1]) * (up[j][1] - up[i][1]);
            if (t < 0 || t > len) edge = false;
          }
        }
        if (edge) {
          extreme.insert(up[i]);
          extreme.insert(up[j]);
        }
      }
    const auto hull = hull_2d(pts);
    std::set<std::array<double, 2>> got(hull.begin(), hull.end());
    CHECK(got == extreme);
    if (hull.size() >= 3) CHECK(polygon_area(hull) > 0.0);
  }
}

TEST_CASE("polytopes in one to three dimensions") {
  const auto tri = convex_hull({v({0, 0}), v({1, 0}), v({0, 1}), v({0.2, 0.2})});
  CHECK(tri.vertices.size() == 3);
  CHECK(tri.measure() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(hull_membership(v({1.0 / 3, 1.0 / 3}), tri, 1e-12) == Location::interior);
  CHECK(hull_membership(v({1, 0}), tri, 1e-12) == Location::boundary);
  CHECK(hull_membership(v({1, 1}), tri, 1e-12) == Location::exterior);

  const auto seg = convex_hull({v({0.5}), v({0}), v({1})});
  CHECK(seg.vertices.size() == 2);
  CHECK(seg.measure() == 1.0);
  CHECK(hull_membership(v({0.25}), seg, 1e-12) == Location::interior);

  const auto line = convex_hull({v({0, 0}), v({1, 1}), v({2, 2})});
  CHECK(line.affine_dimension == 1);
  // A segment in the plane has empty interior, so its points are boundary points.
  CHECK(hull_membership(v({0.5, 0.5}), line, 1e-12) == Location::boundary);
  CHECK(hull_membership(v({0.5, 0.6}), line, 1e-12) == Location::exterior);

  std::vector<Eigen::VectorXd> cube;
  for (int i = 0; i < 8; ++i) cube.push_back(v({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)}));
  cube.push_back(v({0.5, 0.5, 0.5}));
  cube.push_back(v({0.5, 0.5, 1.0}));
  const auto c = convex_hull(cube);
  CHECK(c.affine_dimension == 3);
  CHECK(c.vertices.size() == 8);
  CHECK(c.measure() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hull_membership(v({0.5, 0.5, 0.5}), c, 1e-12) == Location::interior);
  CHECK(hull_membership(v({0.5, 0.5, 1.0}), c, 1e-12) == Location::boundary);
  CHECK(hull_membership(v({0.5, 0.5, 1.1}), c, 1e-12) == Location::exterior);

  CHECK_THROWS_AS(convex_hull(std::vector<Eigen::VectorXd>{}), std::domain_error);
}

TEST_CASE("polygon index agrees with a scan over all edges") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::array<double, 2>> pts(3000);
  for (auto& p : pts) p = {g(rng), 0.3 * g(rng)};
  const auto poly = hull_2d(pts);
  const ConvexPolygonIndex index(poly);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int i = 0; i < 5000; ++i) {
    const std::array<double, 2> q{u(rng), 0.4 * u(rng)};
    // Outside iff some edge line has q on its right; the distance is then
    // bracketed by the sampled closest point on the edges.
    double line = -INFINITY;
    for (std::size_t e = 0; e < poly.size(); ++e) {
      const auto& a = poly[e];
      const auto& b = poly[(e + 1) % poly.size()];
      line = std::max(line, ((q[0] - a[0]) * (b[1] - a[1]) - (q[1] - a[1]) * (b[0] - a[0])) / std::hypot(b[0] - a[0], b[1] - a[1]));
    }
    const double d = index.signed_distance(q);
    if (line > 0) {
      double near = INFINITY, step = 0.0;
      for (std::size_t e = 0; e < poly.size(); ++e) {
        const auto& a = poly[e];
        const auto& b = poly[(e + 1) % poly.size()];
        const double dx = b[0] - a[0], dy = b[1] - a[1];
        step = std::max(step, std::hypot(dx, dy) / 1000);
        for (int k = 0; k <= 1000; ++k) near = std::min(near, std::hypot(q[0] - a[0] - k * dx / 1000, q[1] - a[1] - k * dy / 1000));
      }
      CHECK(d <= near + 1e-12);
      CHECK(d >= near - step / 2 - 1e-12);
      CHECK(d >= line - 1e-12);
    } else {
      CHECK(d <= 0.0);
    }
    CHECK((index.locate(q, 1e-12) == Location::exterior) == (line > 1e-12));
  }
}

}  // TEST_SUITE
