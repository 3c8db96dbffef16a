#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "locpress/potential.hpp"
#include "locpress/shift.hpp"

namespace locpress {

/// One quantitative assertion: `measured` compared against `expected` as `relation` says.
struct Claim {
  std::string id;
  std::string relation;  // "==", "<=", ">="
  double expected = 0.0;
  double measured = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string note;
};

struct Artifact {
  std::string filename;
  std::string content;
};

/// Symbolic model of one example together with the outcome of its claims.
struct GalleryModel {
  std::string example;
  std::string summary;
  TransitionSystem system;
  std::optional<LocallyConstantPotential> phi;
  Potential Phi;
  std::vector<Claim> claims;
  std::vector<Artifact> artifacts;

  bool ok() const;
};

struct GalleryOptions {
  int n = 20;
  double r = 0.05;
  int example2_components = 3;
  /// Component values of the three-block example; coinciding values collapse its gap.
  std::array<double, 3> example1_values{0.5, 2.5, 4.5};
  bool figure_preset = true;  // fish uses the reference (fish-figure1) geometry, else the conforming one
  int fish_cloud_period = 10;
  int fish_n = 18;
  int lipschitz_pairs = 10000;
  std::uint64_t seed = 1;
  int threads = 1;  // builders run concurrently when > 1
};

/// Three components (full 2-shift, golden mean, full 2-shift) with constant Phi per component.
GalleryModel build_example1(const GalleryOptions& opts = {});
/// Isolated fixed point plus N full 2-shifts with Phi = 4^-n on component n.
GalleryModel build_example2(int N, const GalleryOptions& opts = {});
/// Two full 2-shifts with Phi = 0 and Phi = 1.
GalleryModel build_example3(const GalleryOptions& opts = {});
GalleryModel build_fish(bool figure_preset, const GalleryOptions& opts = {});

struct GalleryReport {
  std::vector<GalleryModel> sections;
  std::uint64_t seed = 1;
  bool ok() const;
  /// "example,claim,expected,measured,tol,pass" rows under a versioned header carrying the seed.
  std::string csv() const;
};

/// Runs the builders named in `only` (all when empty): example1, example2, example3, fish.
GalleryReport run_gallery(const GalleryOptions& opts = {}, const std::vector<std::string>& only = {});

}  // namespace locpress
