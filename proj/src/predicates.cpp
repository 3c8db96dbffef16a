#include "locpress/predicates.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace locpress {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;
// Error bound of the filtered determinant (Shewchuk's ccwerrboundA).
constexpr double kFilter = (3.0 + 16.0 * kEps) * kEps;

inline void two_diff(double a, double b, double& x, double& y) {
  x = a - b;
  const double bv = a - x;
  const double av = x + bv;
  y = (a - av) + (bv - b);
}

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  const double av = x - bv;
  y = (a - av) + (b - bv);
}

inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

// Adds b to a nonoverlapping expansion, dropping zero components.
void grow(std::vector<double>& e, double b) {
  std::vector<double> h;
  h.reserve(e.size() + 1);
  double q = b;
  for (double ei : e) {
    double sum, err;
    two_sum(q, ei, sum, err);
    if (err != 0.0) h.push_back(err);
    q = sum;
  }
  if (q != 0.0) h.push_back(q);
  e.swap(h);
}

int exact_orient(const double* a, const double* b, const double* c) {
  double acx, acx_t, bcy, bcy_t, acy, acy_t, bcx, bcx_t;
  two_diff(a[0], c[0], acx, acx_t);
  two_diff(b[1], c[1], bcy, bcy_t);
  two_diff(a[1], c[1], acy, acy_t);
  two_diff(b[0], c[0], bcx, bcx_t);
  const double left[2] = {acx, acx_t}, left2[2] = {bcy, bcy_t};
  const double right[2] = {acy, acy_t}, right2[2] = {bcx, bcx_t};
  std::vector<double> e;
  for (double u : left)
    for (double v : left2) {
      double p, t;
      two_product(u, v, p, t);
      grow(e, t);
      grow(e, p);
    }
  for (double u : right)
    for (double v : right2) {
      double p, t;
      two_product(u, v, p, t);
      grow(e, -t);
      grow(e, -p);
    }
  if (e.empty()) return 0;
  return e.back() > 0.0 ? 1 : (e.back() < 0.0 ? -1 : 0);
}

}  // namespace

double orient2d_approx(const double* a, const double* b, const double* c) {
  return (a[0] - c[0]) * (b[1] - c[1]) - (a[1] - c[1]) * (b[0] - c[0]);
}

int orient2d(const double* a, const double* b, const double* c) {
  const double detleft = (a[0] - c[0]) * (b[1] - c[1]);
  const double detright = (a[1] - c[1]) * (b[0] - c[0]);
  const double det = detleft - detright;
  const double bound = kFilter * (std::abs(detleft) + std::abs(detright));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return exact_orient(a, b, c);
}

}  // namespace locpress
