#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "locpress/potential.hpp"
#include "locpress/shift.hpp"

namespace locpress {

/// Parse failure; line() is 1-based, 0 when the problem is not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// Everything a command needs, validated before any computation.
///
/// File format: `[section]` headers and `key = value` lines, `#` comments.
///   [system]     preset | matrix ("1 1; 1 0") | union (preset names)
///   [potential]  kind = locally-constant | fish | fish-figure1 | fish-conforming, plus its keys
///   [phi]        scalar locally constant table and/or constant
///   [run]        w, r, depth, horizons, grid, t, t_range, max_period, points, fan, bins
struct RunConfig {
  TransitionSystem system = TransitionSystem::preset("full2");
  std::string system_label = "full2";
  std::optional<Potential> Phi;
  std::optional<LocallyConstantPotential> phi;
  double phi_constant = 0.0;

  std::optional<Vector> w;
  std::vector<double> r{0.05};
  std::vector<int> depth{1};
  std::vector<int> horizons;
  int grid = 21;
  std::vector<Vector> t;  // pressure sweep points
  int max_period = 10;
  int points = 0;
  bool fan = false;
  double bins = 32.0;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Short potential specs for the command line: fish-figure1, fish-conforming,
/// indicator:WORD, symbols:v0,v1,...
Potential potential_from_spec(const TransitionSystem& ts, std::string_view spec);

/// Numbers separated by spaces or commas.
std::vector<double> parse_numbers(std::string_view text);

}  // namespace locpress
