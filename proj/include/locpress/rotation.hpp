#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "locpress/hull.hpp"
#include "locpress/potential.hpp"
#include "locpress/shift.hpp"

namespace locpress {

struct CloudPoint {
  Vector value;
  Word generator;
};

/// Birkhoff averages of periodic orbits, one point per primitive orbit.
struct RotationCloud {
  std::vector<CloudPoint> points;
  int max_period = 0;
  int dimension = 0;
  std::string potential_id;
};

RotationCloud rotation_cloud(const TransitionSystem& ts, const Potential& pot, int max_period);

/// Streams (orbit, average) pairs without storing them.
void for_each_rotation_point(const TransitionSystem& ts, const Potential& pot, int max_period,
                             const std::function<void(const PeriodicOrbit&, const Vector&)>& visit);

/// Planar cloud with values merged on a 1e-12 grid; keeps one generator per value.
struct PlanarCloud {
  std::vector<std::array<double, 2>> points;
  std::vector<Word> generators;
  std::uint64_t orbits = 0;
};
PlanarCloud planar_rotation_cloud(const TransitionSystem& ts, const Potential& pot, int max_period,
                                  double grid = 1e-12);

ConvexPolytope convex_hull(const RotationCloud& cloud);

/// Vertices w_i(j), alpha <= j <= j_max, of the polygon bounding the fish rotation set.
struct FishVertexFan {
  FishGeometry geometry;
  int j_max = 0;
  std::vector<Vec2> w1, w2;  // entry j - alpha
  FishHypotheses hypotheses;

  const Vec2& at(int cls, int j) const;
};

FishVertexFan fish_vertices(const FishGeometry& g, int j_max);

/// w_s^*(j) = ((alpha-1) w_0 + sum_{i <= j-alpha+1} v_s(i)) / j for alpha <= j <= j_max.
std::vector<Vec2> fish_star_points(const FishGeometry& g, int cls, int j_max);

/// Smallest j_max with every vertex beyond it within `diameter` of w_inf.
int fish_tail_cap_index(const FishGeometry& g, double diameter);

/// Hull of the fan together with w_inf (the tail cap segments close the polygon).
std::vector<std::array<double, 2>> fish_polygon(const FishVertexFan& fan);

/// Periodic orbit whose average is w_i(j) for j > alpha: j-1 symbols of class i, then one of the other class.
Word fish_vertex_orbit(int cls, int j);

/// Interval of phi-values over the joint hull above w: the first coordinate of
/// the joint cloud is phi, the rest is Phi.
std::pair<double, double> slice_interval(const RotationCloud& joint_cloud, const Vector& w, double tol);

std::string cloud_csv(const RotationCloud& cloud);

}  // namespace locpress
