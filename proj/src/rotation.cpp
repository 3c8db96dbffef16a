#include "locpress/rotation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

#include "locpress/io.hpp"

namespace locpress {

void for_each_rotation_point(const TransitionSystem& ts, const Potential& pot, int max_period,
                             const std::function<void(const PeriodicOrbit&, const Vector&)>& visit) {
  if (std::holds_alternative<FishPotential>(pot) && ts.alphabet_size() != 4)
    throw std::domain_error("the fish potential lives on a 4-symbol alphabet");
  PeriodicOrbitStream stream(ts, max_period);
  while (auto orbit = stream.next()) visit(*orbit, birkhoff_average(pot, *orbit));
}

RotationCloud rotation_cloud(const TransitionSystem& ts, const Potential& pot, int max_period) {
  RotationCloud cloud;
  cloud.max_period = max_period;
  cloud.potential_id = std::holds_alternative<FishPotential>(pot) ? "fish" : "locally-constant";
  for_each_rotation_point(ts, pot, max_period, [&](const PeriodicOrbit& o, const Vector& v) {
    cloud.points.push_back({v, o.generator});
  });
  cloud.dimension = cloud.points.empty() ? 0 : static_cast<int>(cloud.points.front().value.size());
  return cloud;
}

namespace {

struct CellHash {
  std::size_t operator()(const std::pair<long long, long long>& c) const {
    return std::hash<long long>()(c.first) * 1000003u ^ std::hash<long long>()(c.second);
  }
};

}  // namespace

PlanarCloud planar_rotation_cloud(const TransitionSystem& ts, const Potential& pot, int max_period, double grid) {
  PlanarCloud out;
  std::unordered_map<std::pair<long long, long long>, std::size_t, CellHash> seen;
  for_each_rotation_point(ts, pot, max_period, [&](const PeriodicOrbit& o, const Vector& v) {
    if (v.size() != 2) throw std::domain_error("planar cloud needs a 2-dimensional potential");
    ++out.orbits;
    const std::pair<long long, long long> cell{std::llround(v[0] / grid), std::llround(v[1] / grid)};
    if (seen.emplace(cell, out.points.size()).second) {
      out.points.push_back({v[0], v[1]});
      out.generators.push_back(o.generator);
    }
  });
  return out;
}

ConvexPolytope convex_hull(const RotationCloud& cloud) {
  std::vector<Vector> pts;
  pts.reserve(cloud.points.size());
  for (const auto& p : cloud.points) pts.push_back(p.value);
  return convex_hull(pts);
}

const Vec2& FishVertexFan::at(int cls, int j) const {
  const int idx = j - geometry.alpha;
  if (idx < 0 || j > j_max) throw std::domain_error(fmt::format("vertex index {} outside [{}, {}]", j, geometry.alpha, j_max));
  return (cls == 1 ? w1 : w2)[static_cast<std::size_t>(idx)];
}

namespace {

// Partial sums of v_i(k); beyond `saturate` the terms no longer change a double.
class ArcSums {
 public:
  ArcSums(const FishGeometry& g, int cls) : g_(g), cls_(cls) { sums_.push_back(Vec2::Zero()); }
  Vec2 operator()(int k) {
    constexpr int saturate = 400;
    k = std::min(k, saturate);
    while (static_cast<int>(sums_.size()) <= k) {
      const int next = static_cast<int>(sums_.size());
      sums_.push_back(sums_.back() + (g_.v(cls_, next) - g_.w_inf));
    }
    return sums_[static_cast<std::size_t>(k)];
  }

 private:
  const FishGeometry& g_;
  int cls_;
  std::vector<Vec2> sums_;
};

}  // namespace

FishVertexFan fish_vertices(const FishGeometry& g, int j_max) {
  if (j_max < g.alpha) throw std::domain_error("j_max must be >= alpha");
  FishVertexFan fan;
  fan.geometry = g;
  fan.j_max = j_max;
  fan.hypotheses = g.check();
  const int a = g.alpha;
  const Vec2 w0 = g.w0 - g.w_inf;
  for (int cls = 1; cls <= 2; ++cls) {
    ArcSums sums(g, cls);
    auto& out = cls == 1 ? fan.w1 : fan.w2;
    out.reserve(static_cast<std::size_t>(j_max - a + 1));
    const double sign = cls == 1 ? -1.0 : 1.0;
    out.push_back(g.w_inf + Vec2(((a - 1) * w0.x() + g.x(1)) / a, sign * g.curve(g.x(1)) / (3.0 * a)));
    for (int j = a + 1; j <= j_max; ++j) out.push_back(g.w_inf + (sums(j - a) + a * w0) / j);
  }
  return fan;
}

std::vector<Vec2> fish_star_points(const FishGeometry& g, int cls, int j_max) {
  if (j_max < g.alpha) throw std::domain_error("j_max must be >= alpha");
  ArcSums sums(g, cls);
  const int a = g.alpha;
  const Vec2 w0 = g.w0 - g.w_inf;
  std::vector<Vec2> out;
  for (int j = a; j <= j_max; ++j) out.push_back(g.w_inf + ((a - 1) * w0 + sums(j - a + 1)) / j);
  return out;
}

int fish_tail_cap_index(const FishGeometry& g, double diameter) {
  const int a = g.alpha;
  const Vec2 w0 = g.w0 - g.w_inf;
  ArcSums s1(g, 1), s2(g, 2);
  auto radius = [&](long j) {
    return std::max(((s1(static_cast<int>(std::min<long>(j - a, 400))) + a * w0) / static_cast<double>(j)).norm(),
                    ((s2(static_cast<int>(std::min<long>(j - a, 400))) + a * w0) / static_cast<double>(j)).norm());
  };
  // Radii shrink like 1/j once the partial sums settle; find the first j past which they stay small.
  long hi = a + 1;
  while (radius(hi) >= diameter) hi *= 2;
  long lo = a + 1;
  while (lo < hi) {
    const long mid = (lo + hi) / 2;
    if (radius(mid) < diameter)
      hi = mid;
    else
      lo = mid + 1;
  }
  return static_cast<int>(lo);
}

std::vector<std::array<double, 2>> fish_polygon(const FishVertexFan& fan) {
  std::vector<std::array<double, 2>> pts;
  pts.reserve(fan.w1.size() + fan.w2.size() + 1);
  for (const auto* side : {&fan.w1, &fan.w2})
    for (const auto& v : *side) pts.push_back({v.x(), v.y()});
  pts.push_back({fan.geometry.w_inf.x(), fan.geometry.w_inf.y()});
  return hull_2d(std::move(pts));
}

Word fish_vertex_orbit(int cls, int j) {
  if (j < 2) throw std::domain_error("vertex orbit needs j >= 2");
  Word w(static_cast<std::size_t>(j), cls == 1 ? 0 : 2);
  w.back() = cls == 1 ? 2 : 0;
  return w;
}

std::pair<double, double> slice_interval(const RotationCloud& joint_cloud, const Vector& w, double tol) {
  const int m = static_cast<int>(w.size());
  if (joint_cloud.dimension != m + 1) throw std::domain_error("joint cloud must have dimension m + 1");
  std::vector<Vector> proj, full;
  for (const auto& p : joint_cloud.points) {
    full.push_back(p.value);
    proj.push_back(p.value.tail(m));
  }
  if (hull_membership(w, convex_hull(proj), tol) != Location::interior)
    throw std::domain_error("w is not interior to the projected rotation hull");
  const ConvexPolytope hull = convex_hull(full);
  const int k = hull.affine_dimension;
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  if (k == m + 1) {
    for (const auto& h : hull.facets) {
      const double n0 = h.normal[0];
      const double rhs = h.offset - h.normal.tail(m).dot(w);
      if (std::abs(n0) < 1e-14) {
        if (rhs < -tol) throw std::domain_error("slice is empty");
        continue;
      }
      if (n0 > 0)
        hi = std::min(hi, rhs / n0);
      else
        lo = std::max(lo, rhs / n0);
    }
    return {lo, hi};
  }
  // Lower-dimensional joint hull: x = o + B y with y in the flat polytope.
  const Vector& o = hull.flat_origin;
  const Eigen::MatrixXd& B = hull.flat_basis;
  const Eigen::MatrixXd Br = B.bottomRows(m);
  const Vector target = w - o.tail(m);
  if (k == 0) return {o[0], o[0]};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Br, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  if (svd.rank() == k) {
    const Vector y = svd.solve(target);
    if ((Br * y - target).norm() > tol) throw std::domain_error("slice is empty");
    const double a = o[0] + B.row(0).dot(y);
    return {a, a};
  }
  if (k == 1 && svd.rank() == 0) {
    if (target.norm() > tol) throw std::domain_error("slice is empty");
    const double a0 = o[0] + B(0, 0) * -hull.facets[1].offset;
    const double a1 = o[0] + B(0, 0) * hull.facets[0].offset;
    return {std::min(a0, a1), std::max(a0, a1)};
  }
  throw std::domain_error("degenerate joint hull geometry is not supported for slicing");
}

std::string cloud_csv(const RotationCloud& cloud) {
  std::string out = "# locpress rotation-cloud v1\nperiod,generator";
  for (int c = 1; c <= cloud.dimension; ++c) out += fmt::format(",coord{}", c);
  out += '\n';
  for (const auto& p : cloud.points) {
    out += fmt::format("{},{}", p.generator.size(), to_string(p.generator));
    for (int c = 0; c < p.value.size(); ++c) out += "," + fmt15(p.value[c]);
    out += '\n';
  }
  return out;
}

}  // namespace locpress
