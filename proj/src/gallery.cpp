#include "locpress/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <stdexcept>

#include <fmt/format.h>

#include "locpress/io.hpp"
#include "locpress/localized.hpp"
#include "locpress/rotation.hpp"
#include "locpress/transfer.hpp"

namespace locpress {

namespace {

const double kLog2 = std::log(2.0);
const double kLogGolden = std::log((1.0 + std::sqrt(5.0)) / 2.0);

Claim claim(std::string id, std::string relation, double expected, double measured, double tol, std::string note = {}) {
  Claim c{std::move(id), std::move(relation), expected, measured, tol, false, std::move(note)};
  if (c.relation == "==")
    c.pass = std::abs(measured - expected) <= tol;
  else if (c.relation == "<=")
    c.pass = measured <= expected + tol;
  else if (c.relation == ">=")
    c.pass = measured >= expected - tol;
  else
    throw std::logic_error("unknown claim relation " + c.relation);
  return c;
}

double rate(double count, int n) {
  return count > 0.0 ? std::log(count) / n : -std::numeric_limits<double>::infinity();
}

double direct_lower_rate(const TransitionSystem& ts, const Potential& Phi, const Vector& w, double r, int n) {
  LocalizedQuery q{ts, std::nullopt, 0.0, Phi, w, r, 1, {n}};
  return rate(direct_count(q, n).lower, n);
}

double direct_upper_rate(const TransitionSystem& ts, const Potential& Phi, const Vector& w, double r, int n) {
  LocalizedQuery q{ts, std::nullopt, 0.0, Phi, w, r, 1, {n}};
  return rate(direct_count(q, n).upper, n);
}

double entropy_of(const TransitionSystem& component) {
  return pressure(component, LocallyConstantPotential::constant(component, Vector::Zero(1)));
}

Vector scalar(double x) { return Vector::Constant(1, x); }

}  // namespace

bool GalleryModel::ok() const {
  return std::all_of(claims.begin(), claims.end(), [](const Claim& c) { return c.pass; });
}

GalleryModel build_example1(const GalleryOptions& opts) {
  GalleryModel g;
  g.example = "example1";
  g.summary = "full 2-shift, golden mean and full 2-shift side by side, Phi constant on each block";
  const auto& v = opts.example1_values;
  g.system = TransitionSystem::disjoint_union(
      {TransitionSystem::preset("full2"), TransitionSystem::preset("golden"), TransitionSystem::preset("full2")});
  const auto Phi = LocallyConstantPotential::by_symbol(g.system, {v[0], v[0], v[1], v[1], v[2], v[2]});
  g.Phi = Phi;

  const auto comps = irreducible_components(g.system);
  const double expected_h[3] = {kLog2, kLogGolden, kLog2};
  std::vector<std::array<double, 2>> points;
  for (std::size_t i = 0; i < comps.size() && i < 3; ++i) {
    const double h = entropy_of(comps[i].system);
    g.claims.push_back(claim(fmt::format("block{}-entropy", i + 1), "==", expected_h[i], h, 1e-10));
    points.push_back({v[i], h});
  }
  // Ergodic measures live on one block, so the measure-theoretic side is the concave envelope.
  const double w = v[1];
  const double affine = concave_envelope(points, w);
  g.claims.push_back(claim("mixture-pressure-at-middle", "==", kLog2, affine, 1e-10,
                           "best mixture of the outer blocks' maximal-entropy measures"));
  for (int n : {opts.n, 2 * opts.n}) {
    const double direct = direct_upper_rate(g.system, Phi, scalar(w), opts.r, n);
    g.claims.push_back(claim(fmt::format("direct-rate-at-middle-n{}", n), "<=", kLogGolden + 0.01, direct, 0.0,
                             "only golden-mean words average near the middle value"));
    g.claims.push_back(claim(fmt::format("gap-at-middle-n{}", n), ">=", 0.20, affine - direct, 0.0));
  }
  return g;
}

GalleryModel build_example2(int N, const GalleryOptions& opts) {
  if (N < 2) throw std::domain_error("example 2 needs N >= 2");
  GalleryModel g;
  g.example = "example2";
  g.summary = fmt::format(
      "isolated fixed point plus {} full 2-shifts with Phi = 4^-n on block n; "
      "the statement for every r > 0 is the N -> infinity reading of r > 4^-N",
      N);
  std::vector<TransitionSystem> parts{TransitionSystem(std::vector<std::vector<int>>{{1}})};
  std::vector<double> values{0.0};
  for (int n = 1; n <= N; ++n) {
    parts.push_back(TransitionSystem::preset("full2"));
    values.push_back(std::ldexp(1.0, -2 * n));
    values.push_back(std::ldexp(1.0, -2 * n));
  }
  g.system = TransitionSystem::disjoint_union(parts);
  const auto Phi = LocallyConstantPotential::by_symbol(g.system, values);
  g.Phi = Phi;

  // Every symbol except the fixed point carries Phi >= 4^-N, so rv = 0 forces the point mass.
  const double smallest = *std::min_element(values.begin() + 1, values.end());
  g.claims.push_back(claim("positive-Phi-off-fixed-point", ">=", std::ldexp(1.0, -2 * N), smallest, 0.0));
  const auto comps = irreducible_components(g.system);
  double fixed_entropy = std::numeric_limits<double>::quiet_NaN();
  for (const auto& c : comps)
    if (c.symbols == std::vector<Symbol>{0}) fixed_entropy = entropy_of(c.system);
  g.claims.push_back(claim("measure-pressure-at-0", "==", 0.0, fixed_entropy, 0.0, "entropy of the point mass"));

  for (const auto& c : comps) {
    if (c.symbols.front() == 0) continue;
    const int n = (c.symbols.front() + 1) / 2;
    const auto mu = equilibrium_state(c.system, LocallyConstantPotential::constant(c.system, Vector::Zero(1)));
    const auto local = LocallyConstantPotential::by_symbol(c.system, {values[c.symbols[0]], values[c.symbols[1]]});
    g.claims.push_back(claim(fmt::format("rv-block{}", n), "==", std::ldexp(1.0, -2 * n),
                             rotation_vector(mu, local)[0], 1e-15));
    g.claims.push_back(claim(fmt::format("measure-pressure-at-rv-block{}", n), "==", kLog2, mu.entropy, 1e-10,
                             "jump against the value 0 at w = 0"));
  }
  const double threshold = std::ldexp(1.0, -2 * N);
  for (double r : {opts.r, 1.25 * threshold})
    for (int n : {opts.n, 2 * opts.n}) {
      const double direct = direct_lower_rate(g.system, Phi, scalar(0.0), r, n);
      g.claims.push_back(claim(fmt::format("direct-rate-at-0-r{}-n{}", fmt15(r), n), ">=", kLog2 - 0.01, direct, 0.0,
                               "the last block falls inside the ball"));
    }
  return g;
}

GalleryModel build_example3(const GalleryOptions&) {
  GalleryModel g;
  g.example = "example3";
  g.summary = "two full 2-shifts with Phi = 0 and Phi = 1";
  g.system = TransitionSystem::disjoint_union({TransitionSystem::preset("full2"), TransitionSystem::preset("full2")});
  const auto Phi = LocallyConstantPotential::by_symbol(g.system, {0.0, 0.0, 1.0, 1.0});
  g.Phi = Phi;

  std::size_t off = 0, total = 0;
  for_each_rotation_point(g.system, Phi, 14, [&](const PeriodicOrbit&, const Vector& v) {
    ++total;
    if (v[0] != 0.0 && v[0] != 1.0) ++off;
  });
  g.claims.push_back(claim("periodic-values-in-{0,1}", "==", 0.0, static_cast<double>(off), 0.0,
                           fmt::format("{} orbits up to period 14", total)));

  const auto comps = irreducible_components(g.system);
  std::vector<double> h, rv;
  for (const auto& c : comps) {
    const auto mu = equilibrium_state(c.system, LocallyConstantPotential::constant(c.system, Vector::Zero(1)));
    h.push_back(mu.entropy);
    const auto local = LocallyConstantPotential::by_symbol(c.system, {c.symbols.front() < 2 ? 0.0 : 1.0,
                                                                      c.symbols.front() < 2 ? 0.0 : 1.0});
    rv.push_back(rotation_vector(mu, local)[0]);
  }
  const double w = 0.3;
  double gap = std::numeric_limits<double>::infinity();
  for (double x : rv) gap = std::min(gap, std::abs(x - w));
  g.claims.push_back(claim("ergodic-rv-distance-from-0.3", ">=", 0.3, gap, 1e-15,
                           "ergodic measures sit on one block, so their rv is 0 or 1"));
  const double mix_rv = (1.0 - w) * rv[0] + w * rv[1];
  const double mix_h = (1.0 - w) * h[0] + w * h[1];
  g.claims.push_back(claim("mixture-rv-at-0.3", "==", w, mix_rv, 1e-15));
  g.claims.push_back(claim("mixture-entropy-at-0.3", "==", kLog2, mix_h, 1e-10, "non-ergodic maximizer"));
  g.claims.push_back(claim("ergodic-maximizer-at-0", "==", kLog2, h[0], 1e-10));
  return g;
}

namespace {

// Point on the class-2 arc at distance d from w_inf.
Vec2 arc_point_at_distance(const FishGeometry& g, double d) {
  double lo = 0.0, hi = 2.0 * g.curve.a;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((g.boundary_point(2, mid) - g.w_inf).norm() < d)
      lo = mid;
    else
      hi = mid;
  }
  return g.boundary_point(2, lo);
}

int boundary_maximizers(const FishPotential& f) {
  // Ergodic measures of maximal entropy with rv = w_inf: the pure-class blocks of fishA.
  const auto fishA = TransitionSystem::preset("fishA");
  int count = 0;
  for (const auto& c : irreducible_components(fishA)) {
    const auto mu = equilibrium_state(c.system, LocallyConstantPotential::constant(c.system, Vector::Zero(1)));
    const Vec2 rv = f.limit(fish_class(c.symbols.front()));
    if ((rv - f.geometry.w_inf).norm() <= 1e-12 && std::abs(mu.entropy - kLog2) <= 1e-10) ++count;
  }
  return count;
}

}  // namespace

GalleryModel build_fish(bool figure_preset, const GalleryOptions& opts) {
  GalleryModel g;
  g.example = "fish";
  FishPotential f;
  f.geometry = figure_preset ? FishGeometry::figure1() : FishGeometry::conforming();
  const FishGeometry& geo = f.geometry;
  g.system = TransitionSystem::full_shift(4);
  g.Phi = f;
  const FishHypotheses hyp = geo.check();
  g.summary = fmt::format("{} geometry on the full 4-shift", figure_preset ? "reference" : "conforming");
  for (const auto& v : hyp.violations) g.summary += "; hypothesis violated: " + v;

  const auto fishA = TransitionSystem::preset("fishA");
  g.claims.push_back(claim("entropy-of-two-block-system", "==", kLog2,
                           pressure(fishA, LocallyConstantPotential::constant(fishA, Vector::Zero(1))), 1e-10));

  const PlanarCloud cloud = planar_rotation_cloud(g.system, f, opts.fish_cloud_period);
  // Averages depend only on the multiset of class blocks, so many orbits share a point.
  g.claims.push_back(claim("cloud-orbits", ">=", 1000.0, static_cast<double>(cloud.orbits), 0.0,
                           fmt::format("{} distinct averages up to period {}", cloud.points.size(), opts.fish_cloud_period)));

  const int J = fish_tail_cap_index(geo, 1e-6);
  const FishVertexFan fan = fish_vertices(geo, J);
  const auto polygon = fish_polygon(fan);
  const ConvexPolygonIndex index(polygon);
  double worst = -std::numeric_limits<double>::infinity();
  int outside_C = 0;
  for (const auto& p : cloud.points) {
    worst = std::max(worst, index.signed_distance(p));
    const Vec2 rel(p[0] - geo.w_inf.x(), p[1] - geo.w_inf.y());
    if (rel.norm() != 0.0 && !(geo.curve.level(rel) < 0.0)) ++outside_C;
  }
  g.claims.push_back(claim("cloud-inside-vertex-polygon", "<=", 0.0, worst, 1e-9,
                           fmt::format("fan truncated at j = {} with tail cap to w_inf", J)));
  g.claims.push_back(claim("cloud-strictly-inside-C", "==", 0.0, outside_C, 0.0, "w_inf excepted"));
  const double area_ratio = polygon_area(hull_2d(cloud.points)) / polygon_area(polygon);
  g.claims.push_back(claim("cloud-hull-area-ratio", "==", 1.0, area_ratio, 0.02));

  int breaks = 0;
  const int j_check = std::min(J, 400);
  for (int j = geo.alpha + 2; j <= j_check; ++j) {
    const Vec2& a = fan.at(1, j - 1);
    const Vec2& b = fan.at(1, j);
    if (!(b.x() - geo.w_inf.x() < a.x() - geo.w_inf.x()) || !(std::abs(b.y() - geo.w_inf.y()) < std::abs(a.y() - geo.w_inf.y())))
      ++breaks;
  }
  g.claims.push_back(claim("vertex-monotone-beyond-alpha", "==", 0.0, breaks, 0.0,
                           fmt::format("alpha < j <= {}", j_check)));

  const double L = fish_lipschitz_constant(f);
  const LipschitzWitness sup = fish_lipschitz_sup(f);
  g.claims.push_back(claim("lipschitz-sup", "<=", L, sup.ratio, 1e-12,
                           fmt::format("worst pair x = {}..., y = {}...", to_string(sup.x), to_string(sup.y))));
  g.claims.push_back(claim("lipschitz-sampled", "<=", L, fish_lipschitz_sampled(f, opts.lipschitz_pairs, 30, opts.seed),
                           1e-12, fmt::format("{} pairs of length 30, seed {}", opts.lipschitz_pairs, opts.seed)));

  LocalizedQuery q{g.system, std::nullopt, 0.0, f, Vector(geo.w_inf), opts.r, 1, {opts.fish_n}};
  const DirectCount dc = direct_count(q, opts.fish_n);
  g.claims.push_back(claim(fmt::format("direct-rate-at-w_inf-n{}", opts.fish_n), ">=", kLog2 - 0.01,
                           rate(dc.lower, opts.fish_n), 0.0));
  g.claims.push_back(claim("pure-word-term", "==", std::ldexp(1.0, opts.fish_n + 1), dc.pure_term, 0.0));

  g.claims.push_back(claim("maximizers-at-w_inf", "==", 2.0, boundary_maximizers(f), 0.0));
  const Vec2 w_eps = arc_point_at_distance(geo, 0.05);
  const FishPotential f_eps = perturb_fish(f, 0.1, w_eps);
  g.claims.push_back(claim("maximizers-at-w_inf-after-perturbation", "==", 1.0, boundary_maximizers(f_eps), 0.0,
                           fmt::format("epsilon 0.1, w_eps = ({}, {})", fmt15(w_eps.x()), fmt15(w_eps.y()))));

  // Figure: at most ~4000 cloud points plus every hull vertex, the vertex polygon and the fan.
  SvgLayer dots;
  dots.color = "#1f77b4";
  const std::size_t stride = std::max<std::size_t>(1, cloud.points.size() / 4000);
  for (std::size_t i = 0; i < cloud.points.size(); i += stride) dots.points.push_back(cloud.points[i]);
  for (const auto& p : hull_2d(cloud.points)) dots.points.push_back(p);
  SvgLayer outline;
  outline.polyline = true;
  outline.color = "#d62728";
  outline.points = polygon;
  SvgLayer marks;
  marks.color = "#2ca02c";
  marks.radius = 2.5;
  for (int j = geo.alpha; j <= std::min(J, 40); ++j)
    for (int c = 1; c <= 2; ++c) marks.points.push_back({fan.at(c, j).x(), fan.at(c, j).y()});
  g.artifacts.push_back({figure_preset ? "fish_figure1.svg" : "fish_conforming.svg",
                         render_svg({outline, dots, marks},
                                    fmt::format("fish rotation set: {} periodic-orbit averages, period <= {}",
                                                dots.points.size(), opts.fish_cloud_period))});
  return g;
}

bool GalleryReport::ok() const {
  return std::all_of(sections.begin(), sections.end(), [](const GalleryModel& m) { return m.ok(); });
}

std::string GalleryReport::csv() const {
  std::string out = fmt::format("# locpress gallery-report v1 seed={}\nexample,claim,expected,measured,tol,pass\n", seed);
  for (const auto& s : sections)
    for (const auto& c : s.claims)
      out += fmt::format("{},{},{}{},{},{},{}\n", s.example, c.id, c.relation, fmt15(c.expected), fmt15(c.measured),
                         fmt15(c.tol), c.pass ? "pass" : "fail");
  return out;
}

GalleryReport run_gallery(const GalleryOptions& opts, const std::vector<std::string>& only) {
  static const std::vector<std::string> names{"example1", "example2", "example3", "fish"};
  for (const auto& o : only)
    if (std::find(names.begin(), names.end(), o) == names.end())
      throw std::domain_error(fmt::format("unknown gallery section '{}'", o));
  auto wanted = [&](const std::string& name) {
    return only.empty() || std::find(only.begin(), only.end(), name) != only.end();
  };
  std::vector<std::function<GalleryModel()>> jobs;
  if (wanted("example1")) jobs.emplace_back([&] { return build_example1(opts); });
  if (wanted("example2")) jobs.emplace_back([&] { return build_example2(opts.example2_components, opts); });
  if (wanted("example3")) jobs.emplace_back([&] { return build_example3(opts); });
  if (wanted("fish")) jobs.emplace_back([&] { return build_fish(opts.figure_preset, opts); });
  GalleryReport report;
  report.seed = opts.seed;
  if (opts.threads > 1) {
    std::vector<std::future<GalleryModel>> running;
    for (auto& job : jobs) running.push_back(std::async(std::launch::async, job));
    for (auto& r : running) report.sections.push_back(r.get());
  } else {
    for (auto& job : jobs) report.sections.push_back(job());
  }
  return report;
}

}  // namespace locpress
