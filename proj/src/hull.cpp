#include "locpress/hull.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "locpress/predicates.hpp"

namespace locpress {

const char* to_string(Location loc) {
  switch (loc) {
    case Location::interior: return "interior";
    case Location::boundary: return "boundary";
    case Location::exterior: return "exterior";
  }
  return "?";
}

std::vector<std::array<double, 2>> hull_2d(std::vector<std::array<double, 2>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;
  std::vector<std::array<double, 2>> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && orient2d(h[k - 2].data(), h[k - 1].data(), p.data()) <= 0) --k;
    h[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower && orient2d(h[k - 2].data(), h[k - 1].data(), pts[i].data()) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

double polygon_area(const std::vector<std::array<double, 2>>& ccw) {
  double a = 0.0;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const auto& p = ccw[i];
    const auto& q = ccw[(i + 1) % ccw.size()];
    a += p[0] * q[1] - p[1] * q[0];
  }
  return 0.5 * a;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void interval_facets(ConvexPolytope& out, double lo, double hi) {
  out.facets.push_back({VectorXd::Constant(1, 1.0), hi});
  out.facets.push_back({VectorXd::Constant(1, -1.0), -lo});
}

void polygon_facets(ConvexPolytope& out, const std::vector<std::array<double, 2>>& ccw) {
  if (ccw.size() < 3) return;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const auto& a = ccw[i];
    const auto& b = ccw[(i + 1) % ccw.size()];
    VectorXd n(2);
    n << b[1] - a[1], a[0] - b[0];
    n /= n.norm();
    out.facets.push_back({n, n[0] * a[0] + n[1] * a[1]});
  }
}

// Hull of points already expressed in flat coordinates of dimension k <= 2.
void low_dimensional(ConvexPolytope& out, const std::vector<VectorXd>& flat, const std::vector<VectorXd>& points,
                     const std::function<VectorXd(const VectorXd&)>& lift) {
  const int k = out.affine_dimension;
  if (k == 0) {
    out.vertices = {points.front()};
    return;
  }
  if (k == 1) {
    auto [lo, hi] = std::minmax_element(flat.begin(), flat.end(), [](const VectorXd& a, const VectorXd& b) { return a[0] < b[0]; });
    out.vertices = {lift(*lo), lift(*hi)};
    interval_facets(out, (*lo)[0], (*hi)[0]);
    return;
  }
  std::vector<std::array<double, 2>> p2;
  p2.reserve(flat.size());
  for (const auto& f : flat) p2.push_back({f[0], f[1]});
  auto ring = hull_2d(std::move(p2));
  for (const auto& r : ring) out.vertices.push_back(lift(Eigen::Vector2d(r[0], r[1])));
  polygon_facets(out, ring);
}

struct Face {
  std::array<int, 3> v;
  Eigen::Vector3d n;
  double off;
};

Face make_face(const std::vector<Eigen::Vector3d>& p, int a, int b, int c, const Eigen::Vector3d& inside) {
  Face f{{a, b, c}, (p[b] - p[a]).cross(p[c] - p[a]), 0.0};
  if (f.n.dot(p[a] - inside) < 0) {
    std::swap(f.v[1], f.v[2]);
    f.n = -f.n;
  }
  f.n.normalize();
  f.off = f.n.dot(p[a]);
  return f;
}

void hull_3d(ConvexPolytope& out, const std::vector<VectorXd>& points, double scale) {
  std::vector<Eigen::Vector3d> p;
  p.reserve(points.size());
  for (const auto& q : points) p.emplace_back(q[0], q[1], q[2]);
  const double eps = 1e-12 * scale;
  // Initial simplex from extreme directions.
  int i0 = 0, i1 = 0, i2 = 0, i3 = 0;
  double best = -1;
  for (std::size_t i = 0; i < p.size(); ++i)
    if ((p[i] - p[0]).norm() > best) best = (p[i] - p[0]).norm(), i1 = static_cast<int>(i);
  best = -1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = (p[i] - p[i0]).cross(p[i1] - p[i0]).norm();
    if (d > best) best = d, i2 = static_cast<int>(i);
  }
  best = -1;
  const Eigen::Vector3d n012 = (p[i1] - p[i0]).cross(p[i2] - p[i0]);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::abs(n012.dot(p[i] - p[i0]));
    if (d > best) best = d, i3 = static_cast<int>(i);
  }
  const Eigen::Vector3d inside = (p[i0] + p[i1] + p[i2] + p[i3]) / 4.0;
  std::vector<Face> faces = {make_face(p, i0, i1, i2, inside), make_face(p, i0, i1, i3, inside),
                             make_face(p, i0, i2, i3, inside), make_face(p, i1, i2, i3, inside)};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int pi = static_cast<int>(i);
    std::vector<char> visible(faces.size(), 0);
    bool any = false;
    for (std::size_t f = 0; f < faces.size(); ++f)
      if (faces[f].n.dot(p[i]) - faces[f].off > eps) visible[f] = 1, any = true;
    if (!any) continue;
    std::map<std::pair<int, int>, int> edges;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!visible[f]) continue;
      for (int e = 0; e < 3; ++e) ++edges[{faces[f].v[e], faces[f].v[(e + 1) % 3]}];
    }
    std::vector<Face> next;
    for (std::size_t f = 0; f < faces.size(); ++f)
      if (!visible[f]) next.push_back(faces[f]);
    for (const auto& [e, count] : edges) {
      if (edges.count({e.second, e.first})) continue;
      next.push_back(make_face(p, e.first, e.second, pi, inside));
    }
    faces.swap(next);
  }
  std::map<int, int> used;
  for (const auto& f : faces)
    for (int v : f.v) used.emplace(v, 0);
  int k = 0;
  for (auto& [idx, slot] : used) {
    slot = k++;
    out.vertices.push_back(points[static_cast<std::size_t>(idx)]);
  }
  for (const auto& f : faces) {
    out.faces.push_back({used[f.v[0]], used[f.v[1]], used[f.v[2]]});
    VectorXd n(3);
    n << f.n[0], f.n[1], f.n[2];
    out.facets.push_back({n, f.off});
  }
}

}  // namespace

ConvexPolytope convex_hull(const std::vector<VectorXd>& points) {
  if (points.empty()) throw std::domain_error("convex hull of an empty point set");
  const int m = static_cast<int>(points.front().size());
  if (m < 1 || m > 3) throw std::domain_error("convex hull supports dimensions 1 to 3");
  for (const auto& p : points)
    if (p.size() != m) throw std::domain_error("points of mixed dimension");

  ConvexPolytope out;
  out.dimension = m;
  if (m == 1) {
    double lo = points[0][0], hi = lo;
    for (const auto& p : points) lo = std::min(lo, p[0]), hi = std::max(hi, p[0]);
    out.affine_dimension = lo < hi ? 1 : 0;
    out.flat_origin = VectorXd::Zero(1);
    out.flat_basis = MatrixXd::Identity(1, 1);
    out.vertices.push_back(VectorXd::Constant(1, lo));
    if (hi > lo) {
      out.vertices.push_back(VectorXd::Constant(1, hi));
      interval_facets(out, lo, hi);
    } else {
      out.flat_basis = MatrixXd::Zero(1, 0);
      out.flat_origin = VectorXd::Constant(1, lo);
    }
    return out;
  }
  if (m == 2) {
    std::vector<std::array<double, 2>> p2;
    p2.reserve(points.size());
    for (const auto& p : points) p2.push_back({p[0], p[1]});
    auto ring = hull_2d(std::move(p2));
    if (ring.size() >= 3) {
      out.affine_dimension = 2;
      out.flat_origin = VectorXd::Zero(2);
      out.flat_basis = MatrixXd::Identity(2, 2);
      for (const auto& r : ring) out.vertices.push_back(Eigen::Vector2d(r[0], r[1]));
      polygon_facets(out, ring);
      return out;
    }
  }
  // General path: find the affine flat through the points.
  VectorXd mean = VectorXd::Zero(m);
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  MatrixXd cov = MatrixXd::Zero(m, m);
  double scale = 0.0;
  for (const auto& p : points) {
    cov += (p - mean) * (p - mean).transpose();
    scale = std::max(scale, (p - mean).cwiseAbs().maxCoeff());
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
  // Spread below 1e-12 of the point scale counts as flat.
  const double flat_floor = std::pow(1e-12 * scale, 2) * static_cast<double>(points.size());
  int rank = 0;
  for (int i = 0; i < m; ++i)
    if (scale > 0.0 && es.eigenvalues()[i] > flat_floor) ++rank;
  out.affine_dimension = rank;
  if (rank == m) {
    out.flat_origin = VectorXd::Zero(m);
    out.flat_basis = MatrixXd::Identity(m, m);
    hull_3d(out, points, scale);
    return out;
  }
  out.flat_origin = mean;
  out.flat_basis = es.eigenvectors().rightCols(rank);
  std::vector<VectorXd> flat;
  flat.reserve(points.size());
  for (const auto& p : points) flat.push_back(out.flat_basis.transpose() * (p - mean));
  low_dimensional(out, flat, points, [&](const VectorXd& y) { return VectorXd(mean + out.flat_basis * y); });
  return out;
}

double ConvexPolytope::measure() const {
  if (affine_dimension < dimension) return 0.0;
  if (dimension == 1) return vertices[1][0] - vertices[0][0];
  if (dimension == 2) {
    std::vector<std::array<double, 2>> ring;
    for (const auto& v : vertices) ring.push_back({v[0], v[1]});
    return polygon_area(ring);
  }
  double vol = 0.0;
  for (const auto& f : faces) {
    const Eigen::Vector3d a = vertices[static_cast<std::size_t>(f[0])].head<3>();
    const Eigen::Vector3d b = vertices[static_cast<std::size_t>(f[1])].head<3>();
    const Eigen::Vector3d c = vertices[static_cast<std::size_t>(f[2])].head<3>();
    vol += a.dot(b.cross(c));
  }
  return vol / 6.0;
}

Location hull_membership(const VectorXd& point, const ConvexPolytope& poly, double tol) {
  if (point.size() != poly.dimension) throw std::domain_error("point and polytope dimensions differ");
  const VectorXd rel = point - poly.flat_origin;
  const VectorXd y = poly.flat_basis.transpose() * rel;
  const double off_flat = (rel - poly.flat_basis * y).norm();
  if (off_flat > tol) return Location::exterior;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& h : poly.facets) worst = std::max(worst, h.normal.dot(y) - h.offset);
  if (worst > tol) return Location::exterior;
  if (poly.affine_dimension < poly.dimension || worst >= -tol) return Location::boundary;
  return Location::interior;
}

ConvexPolygonIndex::ConvexPolygonIndex(std::vector<std::array<double, 2>> ccw) : v_(std::move(ccw)) {
  if (v_.size() < 3) throw std::domain_error("polygon index needs at least three vertices");
  const std::size_t n = v_.size();
  const auto& a = v_[0];
  const auto& b = v_[n / 3];
  const auto& c = v_[(2 * n) / 3];
  center_ = {(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0};
  base_ = std::atan2(a[1] - center_[1], a[0] - center_[0]);
  for (const auto& v : v_) angle_.push_back(turn(v));
  angle_[0] = 0.0;
}

double ConvexPolygonIndex::turn(const std::array<double, 2>& p) const {
  const double t = std::atan2(p[1] - center_[1], p[0] - center_[0]) - base_;
  return t < 0.0 ? t + 2.0 * std::numbers::pi : t;
}

double ConvexPolygonIndex::edge_distance(std::size_t i, const std::array<double, 2>& p) const {
  const auto& a = v_[i % v_.size()];
  const auto& b = v_[(i + 1) % v_.size()];
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  return (dy * (p[0] - a[0]) - dx * (p[1] - a[1])) / std::hypot(dx, dy);
}

double ConvexPolygonIndex::signed_distance(const std::array<double, 2>& p) const {
  const std::size_t n = v_.size();
  // Wedge (center, v_i, v_{i+1}) by angle; the neighbouring edges absorb rounding at wedge borders.
  const auto it = std::upper_bound(angle_.begin(), angle_.end(), turn(p));
  const std::size_t i = static_cast<std::size_t>(it - angle_.begin()) - 1;
  double d = -std::numeric_limits<double>::infinity();
  for (std::size_t k = i + n - 1; k <= i + n + 1; ++k) d = std::max(d, edge_distance(k % n, p));
  if (d <= 0.0) return d;
  // Outside: exact distance to the boundary. Rare in practice, so a scan is fine.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = v_[k];
    const auto& b = v_[(k + 1) % n];
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double s = std::clamp(((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
    best = std::min(best, std::hypot(p[0] - a[0] - s * dx, p[1] - a[1] - s * dy));
  }
  return best;
}

Location ConvexPolygonIndex::locate(const std::array<double, 2>& p, double tol) const {
  const double d = signed_distance(p);
  if (d > tol) return Location::exterior;
  if (d >= -tol) return Location::boundary;
  return Location::interior;
}

}  // namespace locpress
