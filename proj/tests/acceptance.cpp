// Acceptance suite: `acceptance <c>` runs criterion c, no argument runs all of them.
// Each criterion prints one line and the exit code is nonzero when any of them fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "locpress/gallery.hpp"
#include "locpress/hull.hpp"
#include "locpress/io.hpp"
#include "locpress/localized.hpp"
#include "locpress/rotation.hpp"
#include "locpress/transfer.hpp"

using namespace locpress;

namespace {

const double kLog2 = std::log(2.0);
const double kLogGolden = std::log((1.0 + std::sqrt(5.0)) / 2.0);

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

double rate(double count, int n) { return count > 0 ? std::log(count) / n : -INFINITY; }

Vector scalar(double x) { return Vector::Constant(1, x); }

LocallyConstantPotential zero(const TransitionSystem& ts) { return LocallyConstantPotential::constant(ts, scalar(0.0)); }

// 1. Classical entropies, under a second.
Outcome classical_entropy() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto full2 = TransitionSystem::preset("full2");
  const auto golden = TransitionSystem::preset("golden");
  const double a = pressure(full2, zero(full2));
  const double b = pressure(golden, zero(golden));
  const double dt = seconds_since(t0);
  const bool ok = std::abs(a - kLog2) < 1e-10 && std::abs(b - kLogGolden) < 1e-8 && dt < 1.0;
  return {ok, fmt::format("full2 err {:.2e}, golden err {:.2e}, {:.3f} s budget 1 s", std::abs(a - kLog2),
                          std::abs(b - kLogGolden), dt)};
}

// 2. Variational identity P = h + int phi on random potentials.
Outcome variational_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::uniform_int_distribution<int> depth(1, 3);
  double worst = 0.0;
  int tried = 0;
  for (const char* name : {"full2", "golden"}) {
    const auto ts = TransitionSystem::preset(name);
    for (int i = 0; i < 20; ++i) {
      const LocallyConstantPotential phi(ts, depth(rng), 1, [&](const Word&) { return scalar(val(rng)); });
      const MarkovEquilibrium mu = equilibrium_state(ts, phi);
      const double integral = rotation_vector(mu, phi)[0];
      worst = std::max(worst, std::abs(mu.pressure - mu.entropy - integral));
      // The pressure must also agree with the stand-alone evaluation.
      worst = std::max(worst, std::abs(pressure(ts, phi) - mu.pressure));
      ++tried;
    }
  }
  const double dt = seconds_since(t0);
  return {worst < 1e-9 && dt < 5.0, fmt::format("{} potentials, worst |P - h - int phi| {:.2e}, {:.3f} s budget 5 s",
                                                tried, worst, dt)};
}

// 3. Gradient against central differences and convexity of the pressure.
Outcome gradient_and_convexity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto golden = TransitionSystem::preset("golden");
  // Frequencies of 1 and of 000 vary independently, so the Hessian is definite.
  const LocallyConstantPotential Phi(golden, 3, 2, [](const Word& w) {
    return Eigen::Vector2d(w[0] == 1 ? 1.0 : 0.0, w[0] == 0 && w[1] == 0 && w[2] == 0 ? 1.0 : -0.5);
  });
  double worst_rel = 0.0, min_eig = INFINITY;
  const double h = 1e-5;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const Eigen::Vector2d t(-2.0 + i, -2.0 + j);
      const Eigen::VectorXd g = pressure_gradient(golden, Phi, t);
      for (int c = 0; c < 2; ++c) {
        Eigen::Vector2d e = Eigen::Vector2d::Zero();
        e[c] = h;
        const double fd = (pressure(golden, Phi.contract(t + e)) - pressure(golden, Phi.contract(t - e))) / (2 * h);
        worst_rel = std::max(worst_rel, std::abs(g[c] - fd) / std::max(1.0, std::abs(g[c])));
      }
      const Eigen::MatrixXd H = pressure_hessian(golden, Phi, t);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (H + H.transpose()));
      min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    }
  const double dt = seconds_since(t0);
  return {worst_rel < 1e-6 && min_eig >= -1e-9 && dt < 30.0,
          fmt::format("worst relative gradient error {:.2e}, smallest Hessian eigenvalue {:.3e}, {:.2f} s budget 30 s",
                      worst_rel, min_eig, dt)};
}

// 4. Binary entropy from the dual and from direct counting.
Outcome binary_entropy_check() {
  const auto full2 = TransitionSystem::preset("full2");
  const auto ind = LocallyConstantPotential::cylinder_indicator(full2, word_from_string("1"));
  double worst_dual = 0.0, worst_bracket = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double w = 0.1 * i;
    const DualSolveResult d = localized_entropy_dual(full2, ind, scalar(w));
    worst_dual = std::max(worst_dual, d.converged ? std::abs(d.value - binary_entropy(w)) : INFINITY);
    LocalizedQuery q{full2, std::nullopt, 0.0, ind, scalar(w), 0.05, 1, {20}};
    const DirectCount c = direct_count(q, 20);
    worst_bracket = std::max({worst_bracket, std::abs(rate(c.lower, 20) - binary_entropy(w)),
                              std::abs(rate(c.upper, 20) - binary_entropy(w))});
  }
  return {worst_dual < 1e-6 && worst_bracket < 0.07,
          fmt::format("worst dual error {:.2e}, worst bracket distance at n=20 {:.4f} (limit 0.07)", worst_dual,
                      worst_bracket)};
}

BigInt fibonacci(int n) {
  BigInt a = 0, b = 1;
  for (int i = 0; i < n; ++i) {
    BigInt c = a + b;
    a = b;
    b = c;
  }
  return a;
}

// 5. Three blocks: the direct rate at the middle value stays at the golden entropy.
Outcome three_blocks() {
  const GalleryModel g = build_example1();
  const auto& Phi = std::get<LocallyConstantPotential>(g.Phi);
  std::vector<std::array<double, 2>> pts;
  const double vals[3] = {0.5, 2.5, 4.5};
  const auto comps = irreducible_components(g.system);
  for (std::size_t i = 0; i < comps.size(); ++i) pts.push_back({vals[i], pressure(comps[i].system, zero(comps[i].system))});
  const double affine = concave_envelope(pts, 2.5);
  bool ok = comps.size() == 3 && std::abs(affine - kLog2) < 1e-10;
  std::string detail = fmt::format("affine value {:.12f}", affine);
  for (int n : {20, 40}) {
    LocalizedQuery q{g.system, std::nullopt, 0.0, Phi, scalar(2.5), 0.05, 1, {n}};
    const DirectCount c = direct_count(q, n);
    // Only golden-mean words average 2.5; there are F(n+2) of them.
    const double golden_words = static_cast<double>(fibonacci(n + 2));
    const double up = rate(c.upper, n);
    ok = ok && c.lower == golden_words && up <= 0.4912 && affine - up >= 0.20;
    detail += fmt::format("; n={} upper rate {:.4f} gap {:.4f} lower count {} vs F(n+2) {}", n, up, affine - up, c.lower,
                          golden_words);
  }
  return {ok, detail};
}

// 6. Isolated fixed point beside N = 3 full shifts.
Outcome fixed_point_jump() {
  const GalleryModel g = build_example2(3);
  double point_entropy = NAN;
  for (const auto& c : irreducible_components(g.system))
    if (c.symbols == std::vector<Symbol>{0}) point_entropy = pressure(c.system, zero(c.system));
  bool ok = point_entropy == 0.0;
  std::string detail = fmt::format("point-mass entropy {}", point_entropy);
  for (int n : {20, 40}) {
    LocalizedQuery q{g.system, std::nullopt, 0.0, g.Phi, scalar(0.0), 0.05, 1, {n}};
    const double low = rate(direct_count(q, n).lower, n);
    ok = ok && low >= kLog2 - 0.01;
    detail += fmt::format("; n={} lower rate {:.4f}", n, low);
  }
  return {ok, detail};
}

// 7. Two full shifts with Phi = 0 and 1.
Outcome non_ergodic_maximizer() {
  const GalleryModel g = build_example3();
  std::size_t off = 0, total = 0;
  for_each_rotation_point(g.system, g.Phi, 14, [&](const PeriodicOrbit&, const Vector& v) {
    ++total;
    if (v[0] != 0.0 && v[0] != 1.0) ++off;
  });
  // Ergodic measures sit on one component; each component's rotation set is one point.
  const auto& Phi = std::get<LocallyConstantPotential>(g.Phi);
  bool ergodic_hits = false;
  double mix_h = 0.0, mix_rv = 0.0;
  const double weight[2] = {0.7, 0.3};
  const auto comps = irreducible_components(g.system);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& c = comps[i];
    const auto local = LocallyConstantPotential(c.system, 1, 1, [&](const Word& w) {
      return Phi.value(Word{c.symbols[static_cast<std::size_t>(w[0])]});
    });
    const ConvexPolytope hull = convex_hull(rotation_cloud(c.system, local, 12));
    ergodic_hits = ergodic_hits || hull_membership(scalar(0.3), hull, 1e-12) != Location::exterior;
    const auto mu = equilibrium_state(c.system, zero(c.system));
    mix_h += weight[i] * mu.entropy;
    mix_rv += weight[i] * rotation_vector(mu, local)[0];
  }
  const bool ok = off == 0 && comps.size() == 2 && !ergodic_hits && std::abs(mix_rv - 0.3) < 1e-12 &&
                  std::abs(mix_h - kLog2) < 1e-10;
  return {ok, fmt::format("{} orbits with values off {{0,1}} among {}; ergodic rv 0.3 {}; mixture rv {:.12f} entropy {:.12f}",
                          off, total, ergodic_hits ? "found" : "absent", mix_rv, mix_h)};
}

// 8. Fish rotation set against the vertex polygon.
Outcome fish_rotation_set(const std::string& svg_dir) {
  FishPotential f;
  f.geometry = FishGeometry::figure1();
  const FishGeometry& geo = f.geometry;
  const PlanarCloud cloud = planar_rotation_cloud(TransitionSystem::full_shift(4), f, 14);
  const int J = fish_tail_cap_index(geo, 1e-6);
  const FishVertexFan fan = fish_vertices(geo, J);
  const auto polygon = fish_polygon(fan);
  const ConvexPolygonIndex index(polygon);
  double worst = -INFINITY;
  int outside_C = 0;
  for (const auto& p : cloud.points) {
    worst = std::max(worst, index.signed_distance(p));
    const Vec2 rel(p[0] - geo.w_inf.x(), p[1] - geo.w_inf.y());
    if (rel.norm() != 0.0 && !(geo.curve.level(rel) < 0.0)) ++outside_C;
  }
  int breaks = 0;
  for (int j = geo.alpha + 2; j <= std::min(J, 400); ++j)
    for (int c = 1; c <= 2; ++c) {
      const Vec2 a = fan.at(c, j - 1) - geo.w_inf, b = fan.at(c, j) - geo.w_inf;
      if (!(b.x() < a.x()) || !(std::abs(b.y()) < std::abs(a.y()))) ++breaks;
    }
  const double ratio = polygon_area(hull_2d(cloud.points)) / polygon_area(polygon);

  SvgLayer dots, outline;
  dots.points = hull_2d(cloud.points);
  outline.polyline = true;
  outline.points = polygon;
  const std::string svg = render_svg({outline, dots}, "fish rotation set, period <= 14");
  const std::filesystem::path file = std::filesystem::path(svg_dir) / "acceptance_fish.svg";
  std::ofstream(file) << svg;
  const bool svg_ok = std::filesystem::file_size(file) > 0 && svg.rfind("<svg", 0) == 0;

  const bool ok = cloud.orbits >= 1000 && worst <= 1e-9 && breaks == 0 && outside_C == 0 && svg_ok &&
                  std::abs(ratio - 1.0) <= 0.02;
  return {ok, fmt::format("{} orbits, {} distinct averages, max signed distance {:.2e}, {} monotonicity breaks, "
                          "{} points outside C, svg {}, hull/polygon area ratio {:.4f} (needs 1 +- 0.02)",
                          cloud.orbits, cloud.points.size(), worst, breaks, outside_C, svg_ok ? "written" : "missing",
                          ratio)};
}

// 9. Counting at w_inf and the two candidate counting bounds.
Outcome fish_counting() {
  FishPotential f;
  f.geometry = FishGeometry::figure1();
  const auto full4 = TransitionSystem::full_shift(4);
  const int n = 18;
  LocalizedQuery q{full4, std::nullopt, 0.0, f, Vector(f.geometry.w_inf), 0.05, 1, {n}};
  const DirectCount dc = direct_count(q, n);
  bool ok = rate(dc.lower, n) >= kLog2 - 0.01 && dc.pure_term == std::ldexp(1.0, n + 1);
  std::string detail = fmt::format("n={} lower rate {:.4f}, pure term {} (2*2^n = {})", n, rate(dc.lower, n),
                                   dc.pure_term, std::ldexp(1.0, n + 1));
  const double spread = (f.geometry.w0 - f.geometry.w_inf).norm();
  const int N = 4000;
  for (double rho : {0.05, 0.1, 0.25}) {
    const CountingBound b = fish_counting_bound(rho);
    const double exact = log_bigint(fish_counting_exact(N, rho)) / N;
    const bool printed_rejected = exact > b.printed;
    const bool rederived_holds = exact <= b.rederived;
    q.r = rho * spread;
    const double empirical = rate(direct_count(q, n).upper, n);
    ok = ok && printed_rejected && rederived_holds && empirical <= b.rederived;
    detail += fmt::format("; rho={} exact rate(n={}) {:.4f} printed {:.4f} ({}) rederived {:.4f} ({}) empirical {:.4f}",
                          rho, N, exact, b.printed, printed_rejected ? "rejected" : "not rejected", b.rederived,
                          rederived_holds ? "holds" : "fails", empirical);
  }
  return {ok, detail};
}

// Ergodic measures of entropy log 2 whose rotation vector is w_inf, among the
// maximal-entropy measures of the pure-class subsystems.
int maximizers_at_w_inf(const FishPotential& f, std::string& note) {
  const Truncation tr = truncate_to_locally_constant(f, 6);
  int count = 0;
  for (const auto& c : irreducible_components(TransitionSystem::preset("fishA"))) {
    const LocallyConstantPotential local(c.system, 6, 2, [&](const Word& w) {
      Word mapped;
      for (Symbol s : w) mapped.push_back(c.symbols[static_cast<std::size_t>(s)]);
      return tr.table.value(mapped);
    });
    const auto mu = equilibrium_state(c.system, zero(c.system));
    const Vector rv = rotation_vector(mu, local);
    const double dist = (rv - Vector(f.geometry.w_inf)).norm();
    note += fmt::format(" [symbols {}{}: h {:.12f}, |rv - w_inf| {:.2e}]", c.symbols[0], c.symbols[1], mu.entropy, dist);
    if (std::abs(mu.entropy - kLog2) <= 1e-10 && dist <= 1e-12) ++count;
  }
  return count;
}

// 10. Two maximizers at w_inf, one after moving the class-2 limit.
Outcome fish_maximizers() {
  FishPotential f;
  f.geometry = FishGeometry::figure1();
  std::string before, after;
  const int n0 = maximizers_at_w_inf(f, before);
  // Class-2 limit moved onto the arc, 0.05 away from w_inf.
  double lo = 0.0, hi = 2.0 * f.geometry.curve.a;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((f.geometry.boundary_point(2, mid) - f.geometry.w_inf).norm() < 0.05 ? lo : hi) = mid;
  }
  const FishPotential g = perturb_fish(f, 0.1, f.geometry.boundary_point(2, lo));
  const int n1 = maximizers_at_w_inf(g, after);
  return {n0 == 2 && n1 == 1, fmt::format("{} maximizers{}; after perturbation {}{}", n0, before, n1, after)};
}

// 11. Newton on the depth-6 truncation from several starts.
Outcome truncated_newton() {
  FishPotential f;
  f.geometry = FishGeometry::figure1();
  const auto full4 = TransitionSystem::full_shift(4);
  const Truncation tr = truncate_to_locally_constant(f, 6);
  const PlanarCloud cloud = planar_rotation_cloud(full4, tr.table, 8);
  const auto hull = hull_2d(cloud.points);
  const ConvexPolygonIndex index(hull);
  Eigen::Vector2d centre = Eigen::Vector2d::Zero();
  for (const auto& v : hull) centre += Eigen::Vector2d(v[0], v[1]);
  centre /= static_cast<double>(hull.size());

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> start(-2.0, 2.0);
  const PressureFunction P(full4, tr.table);
  double worst_t = 0.0, worst_rv = 0.0, closest_edge = INFINITY;
  int failures = 0;
  for (int i = 0; i < 10; ++i) {
    const auto& v = hull[static_cast<std::size_t>(unit(rng) * hull.size()) % hull.size()];
    const double lam = 0.1 + 0.6 * unit(rng);
    const Eigen::Vector2d w = centre + lam * (Eigen::Vector2d(v[0], v[1]) - centre);
    closest_edge = std::min(closest_edge, -index.signed_distance({w.x(), w.y()}));
    std::vector<Vector> ts;
    for (int s = 0; s < 5; ++s) {
      const DualSolveResult d = minimize_dual(P, w, Eigen::Vector2d(start(rng), start(rng)));
      if (!d.converged) {
        ++failures;
        continue;
      }
      worst_rv = std::max(worst_rv, (P.gradient(d.t_star) - w).norm());
      ts.push_back(d.t_star);
    }
    for (const auto& t : ts) worst_t = std::max(worst_t, (t - ts.front()).norm());
  }
  const bool ok = closest_edge > 0.0 && failures == 0 && worst_t <= 1e-8 && worst_rv <= 1e-8;
  return {ok, fmt::format("10 interior targets (min distance to hull boundary {:.3e}), 5 starts each: {} failed, "
                          "t* spread {:.2e}, |rv - w| {:.2e}",
                          closest_edge, failures, worst_t, worst_rv)};
}

// 12. phi = 1_[11], Phi = 1_[1], w = 1/2 on the full 2-shift.
Outcome alpha_scan_benchmark() {
  const auto full2 = TransitionSystem::preset("full2");
  const auto phi = LocallyConstantPotential::cylinder_indicator(full2, word_from_string("11"));
  const auto Phi = LocallyConstantPotential::cylinder_indicator(full2, word_from_string("1"));
  const AlphaScan scan = localized_pressure_dual(full2, phi, Phi, scalar(0.5), 41);

  // Markov kernels with rotation vector 1/2 are symmetric: stay with probability p.
  // Entropy is H(p) and int phi = p/2; maximize over p by golden-section search.
  auto objective = [](double p) { return binary_entropy(p) + 0.5 * p; };
  double a = 1e-12, b = 1.0 - 1e-12;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    (objective(c) > objective(d) ? b : a) = objective(c) > objective(d) ? d : c;
  }
  const double oracle = objective(0.5 * (a + b));

  double gibbs = INFINITY;
  if (scan.maximizers.size() == 1 && scan.maximizer_measure) {
    const AlphaPoint& m = scan.maximizers.front();
    Vector coeff(2);
    coeff << m.s, m.t[0];
    const auto joint = LocallyConstantPotential::stack(full2, phi, Phi);
    const double integral = rotation_vector(*scan.maximizer_measure, joint).dot(coeff);
    gibbs = std::abs(scan.maximizer_measure->entropy + integral - pressure(full2, joint.contract(coeff)));
  }
  const bool ok = scan.maximizers.size() == 1 && std::abs(scan.value - oracle) < 1e-6 &&
                  std::abs(oracle - std::log(1.0 + std::exp(0.5))) < 1e-9 && scan.gibbs_defect < 1e-9 && gibbs < 1e-9;
  return {ok, fmt::format("{} maximizer(s), value {:.12f}, kernel oracle {:.12f}, Legendre {:.12f}, "
                          "Gibbs defect {:.2e} (recomputed {:.2e})",
                          scan.maximizers.size(), scan.value, oracle, scan.legendre_value, scan.gibbs_defect, gibbs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_dir = std::filesystem::current_path().string();
  const std::vector<std::function<Outcome()>> criteria{
      classical_entropy,     variational_identity, gradient_and_convexity, binary_entropy_check,
      three_blocks,          fixed_point_jump,     non_ergodic_maximizer,  [&] { return fish_rotation_set(out_dir); },
      fish_counting,         fish_maximizers,      truncated_newton,       alpha_scan_benchmark};
  std::vector<int> which;
  if (argc > 1) {
    const int c = std::atoi(argv[1]);
    if (c < 1 || c > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: acceptance [1-%zu]\n", criteria.size());
      return 2;
    }
    which.push_back(c);
  } else {
    for (int c = 1; c <= static_cast<int>(criteria.size()); ++c) which.push_back(c);
  }
  bool all = true;
  for (int c : which) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(c - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s %s (%.2f s)\n", c, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
