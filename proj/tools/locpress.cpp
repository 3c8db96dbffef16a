#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "locpress/config.hpp"
#include "locpress/gallery.hpp"
#include "locpress/hull.hpp"
#include "locpress/io.hpp"
#include "locpress/localized.hpp"
#include "locpress/rotation.hpp"
#include "locpress/transfer.hpp"

using namespace locpress;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kClaimFailure = 1;
constexpr int kUsage = 2;

// Fish potentials are truncated to this depth wherever a table is needed.
constexpr int kFishTableDepth = 6;
constexpr int kMaxGrownPeriod = 16;

struct Globals {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct Flags {
  std::string system;
  std::string potential;
  std::string w;
  std::string r;
  std::string depth;
  std::string t;
  int nmax = 0;
  double bins = 0.0;
  int grid = 0;
  int max_period = 0;
  int points = -1;
  bool fan = false;
  bool check = false;
  bool direct_only = false;
  bool dual_only = false;
  bool conforming = false;
  std::vector<std::string> only;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<int> parse_integers(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_numbers(text)) {
    if (v != std::floor(v)) throw UsageError(fmt::format("'{}' is not a list of integers", text));
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string join(const Vector& v, const char* sep = ",") {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += (i ? sep : "") + fmt15(v[i]);
  return s;
}

RunConfig resolve(const Globals& g, const Flags& f) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : load_config(g.config);
  const bool fish_spec = f.potential.rfind("fish", 0) == 0;
  if (!f.system.empty()) {
    if (cfg.Phi && f.potential.empty())
      throw UsageError("--system replaces the config's system; give --potential as well");
    std::string key = "preset";
    std::string value = f.system;
    if (value.find(';') != std::string::npos) {
      key = "matrix";
    } else if (value.find('+') != std::string::npos) {
      key = "union";
      std::replace(value.begin(), value.end(), '+', ' ');
    }
    RunConfig sys = parse_config(fmt::format("[system]\n{} = {}\n", key, value));
    cfg.system = sys.system;
    cfg.system_label = sys.system_label;
    cfg.phi.reset();
  } else if (fish_spec) {
    cfg.system = TransitionSystem::full_shift(4);
    cfg.system_label = "full4";
    cfg.phi.reset();
  }
  if (!f.potential.empty()) cfg.Phi = potential_from_spec(cfg.system, f.potential);
  if (f.conforming && cfg.Phi && std::holds_alternative<FishPotential>(*cfg.Phi))
    std::get<FishPotential>(*cfg.Phi).geometry = FishGeometry::conforming();
  if (!f.w.empty()) cfg.w = to_vector(parse_numbers(f.w));
  if (!f.r.empty()) {
    cfg.r = parse_numbers(f.r);
    for (double r : cfg.r)
      if (!(r > 0.0)) throw UsageError("--r values must be positive");
  }
  if (!f.depth.empty()) {
    cfg.depth = parse_integers(f.depth);
    for (int k : cfg.depth)
      if (k < 1) throw UsageError("--depth values must be >= 1");
  }
  if (f.nmax > 0) {
    std::vector<int> h{f.nmax / 2, (3 * f.nmax) / 4, f.nmax};
    h.erase(std::remove_if(h.begin(), h.end(), [](int n) { return n < 1; }), h.end());
    h.erase(std::unique(h.begin(), h.end()), h.end());
    cfg.horizons = h;
  }
  if (f.bins > 0.0) cfg.bins = f.bins;
  if (f.grid > 0) cfg.grid = f.grid;
  if (f.max_period > 0) cfg.max_period = f.max_period;
  if (f.points >= 0) cfg.points = f.points;
  if (f.fan) cfg.fan = true;
  if (!f.t.empty()) {
    cfg.t.clear();
    std::string_view rest = f.t;
    while (!rest.empty()) {
      const auto cut = rest.find(';');
      cfg.t.push_back(to_vector(parse_numbers(rest.substr(0, cut))));
      rest = cut == std::string_view::npos ? std::string_view{} : rest.substr(cut + 1);
    }
  }
  return cfg;
}

/// Table form of Phi; the fish is truncated, with the sup-norm error reported on the side.
LocallyConstantPotential table_of(const Potential& Phi, std::string& note) {
  if (const auto* lc = std::get_if<LocallyConstantPotential>(&Phi)) return *lc;
  const Truncation tr = truncate_to_locally_constant(std::get<FishPotential>(Phi), kFishTableDepth);
  note = fmt::format("# fish potential truncated at depth {}, sup error <= {}\n", kFishTableDepth, fmt15(tr.error_bound));
  return tr.table;
}

/// phi together with its additive constant; nullopt when both are absent.
std::optional<LocallyConstantPotential> full_phi(const RunConfig& cfg) {
  if (cfg.phi) return cfg.phi_constant == 0.0 ? *cfg.phi : cfg.phi->plus_constant(cfg.phi_constant);
  if (cfg.phi_constant != 0.0) return LocallyConstantPotential::constant(cfg.system, Vector::Constant(1, cfg.phi_constant));
  return std::nullopt;
}

void emit(const Globals& g, const std::string& filename, const std::string& content) {
  std::cout << content;
  if (!g.out.empty()) {
    fs::create_directories(g.out);
    write_file_atomic(fs::path(g.out) / filename, content);
  }
}

int cmd_pressure(const Globals& g, const RunConfig& cfg) {
  const auto phi = full_phi(cfg);
  const LocallyConstantPotential base = phi ? *phi : LocallyConstantPotential::constant(cfg.system, Vector::Zero(1));
  const bool mixing = is_mixing(cfg.system);
  std::string out = fmt::format("# locpress pressure v1 seed={}\n", g.seed);
  if (!cfg.Phi) {
    out += "pressure,entropy,mixing\n";
    if (mixing) {
      const MarkovEquilibrium mu = equilibrium_state(cfg.system, base);
      out += fmt::format("{},{},1\n", fmt15(mu.pressure), fmt15(mu.entropy));
    } else {
      out += fmt::format("{},nan,0\n", fmt15(pressure_report(cfg.system, base).value));
    }
    emit(g, "pressure.csv", out);
    return kOk;
  }
  std::string note;
  const LocallyConstantPotential Phi = table_of(*cfg.Phi, note);
  const int m = Phi.dimension();
  out += note;
  for (int c = 1; c <= m; ++c) out += fmt::format("t{},", c);
  out += "pressure,entropy";
  for (int c = 1; c <= m; ++c) out += fmt::format(",rv{}", c);
  out += ",mixing\n";
  std::vector<Vector> ts = cfg.t;
  if (ts.empty()) ts.push_back(Vector::Zero(m));
  const LocallyConstantPotential joint = LocallyConstantPotential::stack(cfg.system, base, Phi);
  std::optional<PressureFunction> P;
  if (mixing) P.emplace(cfg.system, Phi, base);
  for (const Vector& t : ts) {
    if (t.size() != m) throw UsageError(fmt::format("t has {} entries, the potential has dimension {}", t.size(), m));
    out += join(t) + ",";
    if (mixing) {
      const MarkovEquilibrium mu = P->equilibrium(t);
      out += fmt::format("{},{},{},1\n", fmt15(mu.pressure), fmt15(mu.entropy), join(rotation_vector(mu, Phi)));
    } else {
      Vector coeff(m + 1);
      coeff << 1.0, t;
      out += fmt15(pressure_report(cfg.system, joint.contract(coeff)).value) + ",nan";
      for (int c = 0; c < m; ++c) out += ",nan";
      out += ",0\n";
    }
  }
  emit(g, "pressure.csv", out);
  return kOk;
}

int cmd_rotset(const Globals& g, const RunConfig& cfg) {
  if (!cfg.Phi) throw UsageError("rotset needs a potential (--potential or [potential])");
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  fs::create_directories(dir);
  std::string csv = fmt::format("# locpress rotset v1 seed={}\n", g.seed);

  if (const auto* fish = std::get_if<FishPotential>(&*cfg.Phi)) {
    const FishGeometry& geo = fish->geometry;
    int period = cfg.max_period;
    PlanarCloud cloud = planar_rotation_cloud(cfg.system, *fish, period);
    while (cfg.points > 0 && cloud.orbits < static_cast<std::uint64_t>(cfg.points) && period < kMaxGrownPeriod)
      cloud = planar_rotation_cloud(cfg.system, *fish, ++period);
    csv += "x,y,generator\n";
    for (std::size_t i = 0; i < cloud.points.size(); ++i)
      csv += fmt::format("{},{},{}\n", fmt15(cloud.points[i][0]), fmt15(cloud.points[i][1]), to_string(cloud.generators[i]));
    write_file_atomic(dir / "rotset.csv", csv);

    const int J = fish_tail_cap_index(geo, 1e-6);
    const FishVertexFan fan = fish_vertices(geo, J);
    const auto polygon = fish_polygon(fan);
    const ConvexPolygonIndex index(polygon);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& p : cloud.points) worst = std::max(worst, index.signed_distance(p));
    const auto hull = hull_2d(cloud.points);
    const double hull_area = polygon_area(hull);
    const double poly_area = polygon_area(polygon);

    SvgLayer dots;
    const std::size_t stride = std::max<std::size_t>(1, cloud.points.size() / 4000);
    for (std::size_t i = 0; i < cloud.points.size(); i += stride) dots.points.push_back(cloud.points[i]);
    for (const auto& p : hull) dots.points.push_back(p);
    SvgLayer outline;
    outline.polyline = true;
    outline.color = "#d62728";
    outline.points = polygon;
    std::vector<SvgLayer> layers{outline, dots};
    if (cfg.fan) {
      SvgLayer marks;
      marks.color = "#2ca02c";
      marks.radius = 2.5;
      for (int j = geo.alpha; j <= std::min(J, 40); ++j)
        for (int c = 1; c <= 2; ++c) marks.points.push_back({fan.at(c, j).x(), fan.at(c, j).y()});
      layers.push_back(marks);
    }
    write_file_atomic(dir / "rotset.svg",
                      render_svg(layers, fmt::format("fish rotation set: {} orbits up to period {}", cloud.orbits, period)));

    fmt::print("# orbits={} distinct={} period={}\n", cloud.orbits, cloud.points.size(), period);
    fmt::print("# hull_vertices={} hull_area={} vertex_polygon_area={} area_ratio={}\n", hull.size(), fmt15(hull_area),
               fmt15(poly_area), fmt15(hull_area / poly_area));
    fmt::print("# fan_cap_index={} max_signed_distance_to_polygon={}\n", J, fmt15(worst));
    for (const auto& v : geo.check().violations) fmt::print("# hypothesis violated: {}\n", v);
    fmt::print("# wrote {} and {}\n", (dir / "rotset.csv").string(), (dir / "rotset.svg").string());
    return kOk;
  }

  const auto& Phi = std::get<LocallyConstantPotential>(*cfg.Phi);
  int period = cfg.max_period;
  RotationCloud cloud = rotation_cloud(cfg.system, Phi, period);
  while (cfg.points > 0 && cloud.points.size() < static_cast<std::size_t>(cfg.points) && period < kMaxGrownPeriod)
    cloud = rotation_cloud(cfg.system, Phi, ++period);
  csv += cloud_csv(cloud);
  write_file_atomic(dir / "rotset.csv", csv);
  const ConvexPolytope hull = convex_hull(cloud);
  fmt::print("# orbits={} period={} dimension={} hull_affine_dimension={} hull_vertices={}\n", cloud.points.size(), period,
             cloud.dimension, hull.affine_dimension, hull.vertices.size());
  for (const auto& v : hull.vertices) fmt::print("# vertex {}\n", join(v, " "));
  if (cloud.dimension == 1 && !cloud.points.empty()) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : cloud.points) lo = std::min(lo, p.value[0]), hi = std::max(hi, p.value[0]);
    fmt::print("# segment [{}, {}]\n", fmt15(lo), fmt15(hi));
  }
  if (cloud.dimension == 2) {
    SvgLayer dots;
    for (const auto& p : cloud.points) dots.points.push_back({p.value[0], p.value[1]});
    SvgLayer outline;
    outline.polyline = true;
    outline.color = "#d62728";
    outline.points = hull_2d(dots.points);
    write_file_atomic(dir / "rotset.svg", render_svg({outline, dots}, fmt::format("rotation set: {} orbits up to period {}",
                                                                                  cloud.points.size(), period)));
    fmt::print("# wrote {} and {}\n", (dir / "rotset.csv").string(), (dir / "rotset.svg").string());
  } else {
    std::cerr << fmt::format("warning: no SVG for a potential of dimension {}; wrote CSV only\n", cloud.dimension);
    fmt::print("# wrote {}\n", (dir / "rotset.csv").string());
  }
  return kOk;
}

int cmd_localized(const Globals& g, const RunConfig& cfg, const Flags& f) {
  if (!cfg.Phi) throw UsageError("localized needs a potential (--potential or [potential])");
  if (!cfg.w) throw UsageError("localized needs a target w (--w or [run] w)");
  if (f.direct_only && f.dual_only) throw UsageError("--direct-only and --dual-only exclude each other");
  const std::vector<int> horizons = cfg.horizons.empty() ? std::vector<int>{10, 15, 20} : cfg.horizons;
  int rc = kOk;
  std::string out;

  if (!f.dual_only) {
    out += fmt::format("# locpress localized-direct v1 seed={}\nr,k,n,lower_rate,upper_rate,bin_width,coarsened\n", g.seed);
    std::string tail;
    for (double r : cfg.r)
      for (int k : cfg.depth) {
        LocalizedQuery q{cfg.system, cfg.phi, cfg.phi_constant, *cfg.Phi, *cfg.w, r, k, horizons, cfg.bins};
        const RateSequence rs = localized_pressure_direct(q);
        for (std::size_t i = 0; i < rs.n.size(); ++i)
          out += fmt::format("{},{},{},{},{},{},{}\n", fmt15(r), k, rs.n[i], fmt15(rs.lower[i]), fmt15(rs.upper[i]),
                             fmt15(rs.counts[i].bin_width), rs.counts[i].coarsened ? 1 : 0);
        tail += fmt::format("# extrapolated r={} k={} rate={} fit_residual={}\n", fmt15(r), k, fmt15(rs.extrapolated),
                            fmt15(rs.fit_residual));
      }
    out += tail;
  }

  if (!f.direct_only || f.check) {
    std::string note;
    const LocallyConstantPotential Phi = table_of(*cfg.Phi, note);
    const auto phi = full_phi(cfg);
    const int m = Phi.dimension();
    if (cfg.w->size() != m) throw UsageError(fmt::format("w has {} entries, the potential has dimension {}", cfg.w->size(), m));

    if (!f.direct_only) {
      std::string head = fmt::format("# locpress localized-dual v1 seed={}\n", g.seed) + note;
      for (int c = 1; c <= m; ++c) head += fmt::format("w{},", c);
      for (int c = 1; c <= m; ++c) head += fmt::format("t{},", c);
      try {
        if (!cfg.phi) {
          const DualSolveResult res = localized_entropy_dual(cfg.system, Phi, *cfg.w);
          out += head + "value,converged,iters\n";
          out += fmt::format("{},{},{},{},{}\n", join(*cfg.w), join(res.t_star), fmt15(res.value + cfg.phi_constant),
                             res.converged ? 1 : 0, res.iterations);
        } else {
          const AlphaScan scan = localized_pressure_dual(cfg.system, *phi, Phi, *cfg.w, cfg.grid);
          out += head + "s,value,converged,iters\n";
          if (scan.maximizers.empty())
            out += fmt::format("{},{},nan,{},1,0\n", join(*cfg.w), join(scan.legendre_t), fmt15(scan.value));
          for (const auto& a : scan.maximizers)
            out += fmt::format("{},{},{},{},{},0\n", join(*cfg.w), join(a.t), fmt15(a.s), fmt15(a.objective),
                               a.converged ? 1 : 0);
          out += fmt::format("# phi_interval=[{}, {}] legendre_value={} gibbs_defect={}{}\n", fmt15(scan.a_w),
                             fmt15(scan.b_w), fmt15(scan.legendre_value), fmt15(scan.gibbs_defect),
                             scan.degenerate ? " degenerate" : "");
        }
      } catch (const std::domain_error& ex) {
        std::cerr << fmt::format("locpress: refusing the dual solve at w = ({}): {}\n", join(*cfg.w, " "), ex.what());
        rc = kClaimFailure;
      }
    }

    if (f.check) {
      const GapReport gap = variational_check(cfg.system, phi, Phi, *cfg.w, cfg.r, cfg.depth, horizons);
      out += fmt::format("# check dual={} t={}\n", fmt15(gap.dual), join(gap.t_star, " "));
      for (const auto& row : gap.rows)
        out += fmt::format("# check r={} k={} n={} lower_rate={} upper_rate={} slack={} verdict={}\n", fmt15(row.r), row.k,
                           row.n, fmt15(row.lower_rate), fmt15(row.upper_rate), fmt15(row.slack),
                           row.violates ? "VIOLATION" : "consistent");
      if (gap.any_violation) rc = kClaimFailure;
    }
  }
  emit(g, "localized.csv", out);
  return rc;
}

int cmd_gallery(const Globals& g, const RunConfig& cfg, const Flags& f) {
  GalleryOptions opts;
  opts.seed = g.seed;
  opts.threads = g.threads;
  opts.figure_preset = !f.conforming;
  if (f.max_period > 0) opts.fish_cloud_period = cfg.max_period;
  const GalleryReport report = run_gallery(opts, f.only);
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  fs::create_directories(dir);
  write_file_atomic(dir / "gallery_report.csv", report.csv());
  for (const auto& s : report.sections) {
    fmt::print("[{}] {}\n", s.example, s.summary);
    for (const auto& c : s.claims)
      fmt::print("  {} {}: measured {} {} {} (tol {}){}\n", c.pass ? "pass" : "FAIL", c.id, fmt15(c.measured), c.relation,
                 fmt15(c.expected), fmt15(c.tol), c.note.empty() ? "" : "  " + c.note);
    for (const auto& a : s.artifacts) {
      write_file_atomic(dir / a.filename, a.content);
      fmt::print("  wrote {}\n", (dir / a.filename).string());
    }
  }
  fmt::print("{}\n", report.ok() ? "all claims hold" : "some claims failed");
  return report.ok() ? kOk : kClaimFailure;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--system", f.system, "preset name, 'a+b' union, or matrix '1 1; 1 0'");
  sub->add_option("--potential", f.potential, "fish-figure1 | fish-conforming | indicator:WORD | symbols:v0,v1,...");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localized pressure, rotation sets and the fish example on subshifts of finite type"};
  Globals g;
  Flags f;
  app.add_option("--config", g.config, "key = value file with [system] [potential] [phi] [run] sections");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "seed for sampled checks");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.require_subcommand(1);

  auto* pressure_cmd = app.add_subcommand("pressure", "pressure, entropy and rotation vector over a t grid");
  add_common(pressure_cmd, f);
  pressure_cmd->add_option("--t", f.t, "t points, 'a b; c d'");

  auto* rotset_cmd = app.add_subcommand("rotset", "periodic-orbit rotation cloud, hull and SVG");
  add_common(rotset_cmd, f);
  rotset_cmd->add_option("--max-period", f.max_period, "largest orbit period");
  rotset_cmd->add_option("--points", f.points, "minimum number of orbits; the period grows until reached");
  rotset_cmd->add_flag("--fan", f.fan, "overlay the fish vertices");
  rotset_cmd->add_flag("--conforming", f.conforming, "use the conforming fish geometry");

  auto* localized_cmd = app.add_subcommand("localized", "direct counting and dual solve at a target w");
  add_common(localized_cmd, f);
  localized_cmd->add_option("--w", f.w, "target rotation vector");
  localized_cmd->add_option("--r", f.r, "radius list");
  localized_cmd->add_option("--depth", f.depth, "cylinder depth list k");
  localized_cmd->add_option("--nmax", f.nmax, "largest horizon; horizons are nmax/2, 3nmax/4, nmax");
  localized_cmd->add_option("--bins", f.bins, "bins per radius for the direct counter");
  localized_cmd->add_option("--grid", f.grid, "alpha grid size when phi is given");
  localized_cmd->add_flag("--direct-only", f.direct_only, "skip the dual solve");
  localized_cmd->add_flag("--dual-only", f.dual_only, "skip direct counting");
  localized_cmd->add_flag("--check", f.check, "compare direct rates with the dual value");
  localized_cmd->add_flag("--conforming", f.conforming, "use the conforming fish geometry");

  auto* gallery_cmd = app.add_subcommand("gallery", "rebuild every example and check its claims");
  gallery_cmd->add_option("--only", f.only, "example1 | example2 | example3 | fish (repeatable)");
  gallery_cmd->add_option("--max-period", f.max_period, "period of the fish cloud");
  gallery_cmd->add_flag("--conforming", f.conforming, "fish with the conforming geometry");

  for (auto* sub : {pressure_cmd, rotset_cmd, localized_cmd, gallery_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    const RunConfig cfg = resolve(g, f);
    if (pressure_cmd->parsed()) return cmd_pressure(g, cfg);
    if (rotset_cmd->parsed()) return cmd_rotset(g, cfg);
    if (localized_cmd->parsed()) return cmd_localized(g, cfg, f);
    return cmd_gallery(g, cfg, f);
  } catch (const ConfigError& ex) {
    std::cerr << "locpress: config error: " << ex.what() << '\n';
  } catch (const UsageError& ex) {
    std::cerr << "locpress: " << ex.what() << '\n';
  } catch (const std::invalid_argument& ex) {
    std::cerr << "locpress: " << ex.what() << '\n';
  } catch (const std::domain_error& ex) {
    std::cerr << "locpress: " << ex.what() << '\n';
  }
  return kUsage;
}
