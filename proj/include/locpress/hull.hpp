#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace locpress {

enum class Location { interior, boundary, exterior };

const char* to_string(Location loc);

/// Supporting halfspace normal . x <= offset with unit normal.
struct Halfspace {
  Eigen::VectorXd normal;
  double offset = 0.0;
};

/// Convex hull of a finite point set in R^m, m <= 3.
///
/// For m = 2 the vertices run counterclockwise without collinear repeats. When
/// the points span a lower-dimensional flat, `flat_basis` holds an orthonormal
/// basis of that flat through `flat_origin` and the facets live inside it.
struct ConvexPolytope {
  int dimension = 0;
  int affine_dimension = 0;
  std::vector<Eigen::VectorXd> vertices;
  std::vector<std::array<int, 3>> faces;  // m = 3 only, outward oriented
  std::vector<Halfspace> facets;          // inside the affine flat
  Eigen::VectorXd flat_origin;
  Eigen::MatrixXd flat_basis;             // m x affine_dimension

  /// Area for m = 2 (0 when degenerate); length for m = 1; volume for m = 3.
  double measure() const;
};

ConvexPolytope convex_hull(const std::vector<Eigen::VectorXd>& points);

/// Exact-orientation monotone chain; counterclockwise, collinear points dropped.
std::vector<std::array<double, 2>> hull_2d(std::vector<std::array<double, 2>> points);

Location hull_membership(const Eigen::VectorXd& point, const ConvexPolytope& polytope, double tol);

/// Signed area of a simple polygon given counterclockwise.
double polygon_area(const std::vector<std::array<double, 2>>& ccw);

/// Logarithmic-time location of points against a large convex polygon.
class ConvexPolygonIndex {
 public:
  explicit ConvexPolygonIndex(std::vector<std::array<double, 2>> ccw);

  /// Euclidean distance to the polygon for outside points; inside, minus the
  /// distance to the nearest edge line of the point's wedge.
  double signed_distance(const std::array<double, 2>& p) const;
  Location locate(const std::array<double, 2>& p, double tol) const;
  const std::vector<std::array<double, 2>>& vertices() const { return v_; }

 private:
  double edge_distance(std::size_t i, const std::array<double, 2>& p) const;
  double turn(const std::array<double, 2>& p) const;
  std::vector<std::array<double, 2>> v_;
  std::vector<double> angle_;
  std::array<double, 2> center_{};
  double base_ = 0.0;
};

}  // namespace locpress
