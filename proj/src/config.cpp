#include "locpress/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace locpress {

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, message) : message), line_(line) {}

namespace {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  int line = 0;
  std::vector<Entry> entries;

  const Entry* find(std::string_view key) const {
    for (const auto& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }
  std::vector<const Entry*> all(std::string_view key) const {
    std::vector<const Entry*> out;
    for (const auto& e : entries)
      if (e.key == key) out.push_back(&e);
    return out;
  }
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::set<std::string> potential_keys{
      "kind", "depth", "dimension", "row", "default", "by_symbol", "indicator", "alpha", "w0", "w_inf",
      "ellipse", "x", "tail_base", "truncation", "truncate", "perturb", "constant"};
  static const std::map<std::string, std::set<std::string>> keys{
      {"system", {"preset", "matrix", "union"}},
      {"potential", potential_keys},
      {"phi", potential_keys},
      {"run", {"w", "r", "depth", "horizons", "grid", "t", "t_range", "max_period", "points", "fan", "bins"}},
  };
  return keys;
}

const std::set<std::string> kRepeatable{"row"};

double number(std::string_view s, int line) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError(line, fmt::format("'{}' is not a number", s));
  return v;
}

int integer(std::string_view s, int line) {
  s = trim(s);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError(line, fmt::format("'{}' is not an integer", s));
  return v;
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == ',' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != ',' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<double> numbers(std::string_view s, int line) {
  std::vector<double> out;
  for (auto t : tokens(s)) out.push_back(number(t, line));
  if (out.empty()) throw ConfigError(line, "expected at least one number");
  return out;
}

std::vector<int> integers(std::string_view s, int line) {
  std::vector<int> out;
  for (auto t : tokens(s)) out.push_back(integer(t, line));
  if (out.empty()) throw ConfigError(line, "expected at least one integer");
  return out;
}

Vector vec(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

Vec2 point(const Entry& e) {
  const auto v = numbers(e.value, e.line);
  if (v.size() != 2) throw ConfigError(e.line, fmt::format("{} needs two coordinates", e.key));
  return {v[0], v[1]};
}

bool boolean(const Entry& e) {
  const auto v = trim(e.value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(e.line, fmt::format("'{}' is not a boolean", v));
}

TransitionSystem build_system(const Section& s, std::string& label) {
  const Entry* preset = s.find("preset");
  const Entry* matrix = s.find("matrix");
  const Entry* uni = s.find("union");
  if ((preset != nullptr) + (matrix != nullptr) + (uni != nullptr) != 1)
    throw ConfigError(s.line, "[system] needs exactly one of preset, matrix, union");
  try {
    if (preset) {
      label = std::string(trim(preset->value));
      return TransitionSystem::preset(label);
    }
    if (matrix) {
      std::vector<std::string> rows;
      std::string_view rest = matrix->value;
      while (!rest.empty()) {
        const auto cut = rest.find(';');
        rows.emplace_back(trim(rest.substr(0, cut)));
        rest = cut == std::string_view::npos ? std::string_view{} : rest.substr(cut + 1);
      }
      std::string text = std::to_string(rows.size()) + "\n";
      for (const auto& r : rows) text += r + "\n";
      label = "matrix";
      return TransitionSystem::parse(text);
    }
    std::vector<TransitionSystem> parts;
    label.clear();
    for (auto name : tokens(uni->value)) {
      parts.push_back(TransitionSystem::preset(name));
      label += (label.empty() ? "" : "+") + std::string(name);
    }
    return TransitionSystem::disjoint_union(parts);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError((preset ? preset : matrix ? matrix : uni)->line, ex.what());
  }
}

LocallyConstantPotential build_table(const TransitionSystem& ts, const Section& s, bool scalar) {
  if (const Entry* e = s.find("by_symbol")) {
    const auto v = numbers(e->value, e->line);
    try {
      return LocallyConstantPotential::by_symbol(ts, v);
    } catch (const std::exception& ex) {
      throw ConfigError(e->line, ex.what());
    }
  }
  if (const Entry* e = s.find("indicator")) {
    try {
      return LocallyConstantPotential::cylinder_indicator(ts, word_from_string(trim(e->value)));
    } catch (const std::exception& ex) {
      throw ConfigError(e->line, ex.what());
    }
  }
  const Entry* de = s.find("depth");
  if (!de) throw ConfigError(s.line, "table potential needs depth (or by_symbol / indicator)");
  const int depth = integer(de->value, de->line);
  const Entry* me = s.find("dimension");
  const int dim = me ? integer(me->value, me->line) : 1;
  if (scalar && dim != 1) throw ConfigError(me->line, "phi must be scalar");
  if (dim < 1) throw ConfigError(me->line, "dimension must be >= 1");
  std::map<Word, std::pair<Vector, int>> rows;
  for (const Entry* e : s.all("row")) {
    const auto colon = e->value.find(':');
    if (colon == std::string::npos) throw ConfigError(e->line, "row needs 'WORD : values'");
    Word w;
    try {
      w = word_from_string(trim(std::string_view(e->value).substr(0, colon)));
    } catch (const std::exception& ex) {
      throw ConfigError(e->line, ex.what());
    }
    const auto v = numbers(std::string_view(e->value).substr(colon + 1), e->line);
    if (static_cast<int>(w.size()) != depth) throw ConfigError(e->line, fmt::format("row word must have length {}", depth));
    if (static_cast<int>(v.size()) != dim) throw ConfigError(e->line, fmt::format("row needs {} values", dim));
    if (!is_admissible(w, ts)) throw ConfigError(e->line, "row word is not admissible");
    if (!rows.emplace(w, std::make_pair(vec(v), e->line)).second) throw ConfigError(e->line, "duplicate row");
  }
  std::optional<Vector> fallback;
  if (const Entry* e = s.find("default")) {
    const auto v = numbers(e->value, e->line);
    if (static_cast<int>(v.size()) != dim) throw ConfigError(e->line, fmt::format("default needs {} values", dim));
    fallback = vec(v);
  }
  try {
    return LocallyConstantPotential(ts, depth, dim, [&](const Word& w) -> Vector {
      auto it = rows.find(w);
      if (it != rows.end()) return it->second.first;
      if (fallback) return *fallback;
      throw ConfigError(s.line, fmt::format("no row for admissible word {} and no default", to_string(w)));
    });
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(de->line, ex.what());
  }
}

Potential build_fish(const Section& s, const std::string& kind) {
  FishPotential f;
  if (kind == "fish-figure1")
    f.geometry = FishGeometry::figure1();
  else if (kind == "fish-conforming")
    f.geometry = FishGeometry::conforming();
  if (const Entry* e = s.find("alpha")) {
    f.geometry.alpha = integer(e->value, e->line);
    if (f.geometry.alpha < 3) throw ConfigError(e->line, "alpha must be >= 3");
  }
  if (const Entry* e = s.find("w0")) f.geometry.w0 = point(*e);
  if (const Entry* e = s.find("w_inf")) f.geometry.w_inf = point(*e);
  if (const Entry* e = s.find("ellipse")) {
    const Vec2 ab = point(*e);
    if (!(ab.x() > 0 && ab.y() > 0)) throw ConfigError(e->line, "ellipse semi-axes must be positive");
    f.geometry.curve = EllipseArc{ab.x(), ab.y()};
  }
  if (const Entry* e = s.find("x")) f.geometry.x_stored = numbers(e->value, e->line);
  if (const Entry* e = s.find("tail_base")) {
    f.geometry.tail_base = number(e->value, e->line);
    if (!(f.geometry.tail_base > 1.0)) throw ConfigError(e->line, "tail_base must exceed 1");
  }
  if (const Entry* e = s.find("truncation")) f.truncation_depth = integer(e->value, e->line);
  if (const Entry* e = s.find("perturb")) {
    const auto v = numbers(e->value, e->line);
    if (v.size() != 3) throw ConfigError(e->line, "perturb needs 'epsilon wx wy'");
    try {
      f = perturb_fish(f, v[0], Vec2(v[1], v[2]));
    } catch (const std::exception& ex) {
      throw ConfigError(e->line, ex.what());
    }
  }
  if (const Entry* e = s.find("truncate")) {
    try {
      return truncate_to_locally_constant(f, integer(e->value, e->line)).table;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ConfigError(e->line, ex.what());
    }
  }
  return f;
}

Potential build_potential(const TransitionSystem& ts, const Section& s) {
  const Entry* k = s.find("kind");
  const std::string kind = k ? std::string(trim(k->value)) : "locally-constant";
  if (kind == "locally-constant") return build_table(ts, s, false);
  if (kind == "fish" || kind == "fish-figure1" || kind == "fish-conforming") {
    if (!(ts == TransitionSystem::full_shift(4))) throw ConfigError(k->line, "the fish potential needs the full4 system");
    return build_fish(s, kind);
  }
  throw ConfigError(k->line, fmt::format("unknown potential kind '{}'", kind));
}

}  // namespace

std::vector<double> parse_numbers(std::string_view text) { return numbers(text, 0); }

Potential potential_from_spec(const TransitionSystem& ts, std::string_view spec) {
  if (spec == "fish-figure1" || spec == "fish-conforming") {
    if (!(ts == TransitionSystem::full_shift(4))) throw ConfigError(0, "the fish potential needs the full4 system");
    FishPotential f;
    f.geometry = spec == "fish-figure1" ? FishGeometry::figure1() : FishGeometry::conforming();
    return f;
  }
  if (spec.rfind("indicator:", 0) == 0) return LocallyConstantPotential::cylinder_indicator(ts, word_from_string(spec.substr(10)));
  if (spec.rfind("symbols:", 0) == 0) return LocallyConstantPotential::by_symbol(ts, numbers(spec.substr(8), 0));
  throw ConfigError(0, fmt::format("unknown potential spec '{}'", spec));
}

RunConfig parse_config(std::string_view text) {
  std::map<std::string, Section> sections;
  std::string current;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "unterminated section header");
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (!allowed_keys().count(current)) throw ConfigError(lineno, fmt::format("unknown section [{}]", current));
      if (sections.count(current)) throw ConfigError(lineno, fmt::format("section [{}] repeated", current));
      sections[current].line = lineno;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(lineno, "expected 'key = value'");
    if (current.empty()) throw ConfigError(lineno, "key outside of a section");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!allowed_keys().at(current).count(key))
      throw ConfigError(lineno, fmt::format("unknown key '{}' in [{}]", key, current));
    Section& sec = sections[current];
    if (!kRepeatable.count(key) && sec.find(key)) throw ConfigError(lineno, fmt::format("duplicate key '{}'", key));
    if (value.empty()) throw ConfigError(lineno, fmt::format("empty value for '{}'", key));
    sec.entries.push_back({key, value, lineno});
  }

  RunConfig cfg;
  if (auto it = sections.find("system"); it != sections.end()) cfg.system = build_system(it->second, cfg.system_label);
  if (auto it = sections.find("potential"); it != sections.end()) {
    if (it->second.find("constant")) throw ConfigError(it->second.find("constant")->line, "constant belongs in [phi]");
    cfg.Phi = build_potential(cfg.system, it->second);
  }
  if (auto it = sections.find("phi"); it != sections.end()) {
    const Section& s = it->second;
    if (const Entry* c = s.find("constant")) cfg.phi_constant = number(c->value, c->line);
    for (const char* key : {"kind", "alpha", "w0", "w_inf", "ellipse", "x", "tail_base", "truncation", "truncate", "perturb"})
      if (const Entry* e = s.find(key)) throw ConfigError(e->line, fmt::format("'{}' is not valid for a scalar phi", key));
    if (s.find("depth") || s.find("by_symbol") || s.find("indicator")) cfg.phi = build_table(cfg.system, s, true);
    if (cfg.phi && cfg.phi->dimension() != 1) throw ConfigError(s.line, "phi must be scalar");
  }
  if (auto it = sections.find("run"); it != sections.end()) {
    const Section& s = it->second;
    if (const Entry* e = s.find("w")) cfg.w = vec(numbers(e->value, e->line));
    if (const Entry* e = s.find("r")) {
      cfg.r = numbers(e->value, e->line);
      for (double r : cfg.r)
        if (!(r > 0.0)) throw ConfigError(e->line, "radii must be positive");
    }
    if (const Entry* e = s.find("depth")) {
      cfg.depth = integers(e->value, e->line);
      for (int k : cfg.depth)
        if (k < 1) throw ConfigError(e->line, "depth must be >= 1");
    }
    if (const Entry* e = s.find("horizons")) {
      cfg.horizons = integers(e->value, e->line);
      if (!std::is_sorted(cfg.horizons.begin(), cfg.horizons.end()) || cfg.horizons.front() < 1)
        throw ConfigError(e->line, "horizons must be positive and increasing");
    }
    if (const Entry* e = s.find("grid")) {
      cfg.grid = integer(e->value, e->line);
      if (cfg.grid < 1) throw ConfigError(e->line, "grid must be >= 1");
    }
    if (const Entry* e = s.find("t")) {
      std::string_view rest = e->value;
      while (!rest.empty()) {
        const auto cut = rest.find(';');
        cfg.t.push_back(vec(numbers(rest.substr(0, cut), e->line)));
        rest = cut == std::string_view::npos ? std::string_view{} : rest.substr(cut + 1);
      }
    }
    if (const Entry* e = s.find("t_range")) {
      if (s.find("t")) throw ConfigError(e->line, "give either t or t_range");
      const auto v = numbers(e->value, e->line);
      if (v.size() != 3 || v[2] < 1 || v[2] != std::floor(v[2])) throw ConfigError(e->line, "t_range needs 'lo hi count'");
      const int count = static_cast<int>(v[2]);
      const int m = cfg.Phi && std::holds_alternative<LocallyConstantPotential>(*cfg.Phi)
                        ? std::get<LocallyConstantPotential>(*cfg.Phi).dimension()
                        : 1;
      if (m > 3) throw ConfigError(e->line, "t_range supports at most 3 dimensions");
      std::vector<double> axis;
      for (int i = 0; i < count; ++i) axis.push_back(count == 1 ? v[0] : v[0] + (v[1] - v[0]) * i / (count - 1));
      std::vector<int> idx(static_cast<std::size_t>(m), 0);
      for (;;) {
        Vector t(m);
        for (int c = 0; c < m; ++c) t[c] = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])];
        cfg.t.push_back(t);
        int c = m - 1;
        while (c >= 0 && ++idx[static_cast<std::size_t>(c)] == count) idx[static_cast<std::size_t>(c--)] = 0;
        if (c < 0) break;
      }
    }
    if (const Entry* e = s.find("max_period")) {
      cfg.max_period = integer(e->value, e->line);
      if (cfg.max_period < 1) throw ConfigError(e->line, "max_period must be >= 1");
    }
    if (const Entry* e = s.find("points")) cfg.points = integer(e->value, e->line);
    if (const Entry* e = s.find("fan")) cfg.fan = boolean(*e);
    if (const Entry* e = s.find("bins")) {
      cfg.bins = number(e->value, e->line);
      if (!(cfg.bins > 0.0)) throw ConfigError(e->line, "bins must be positive");
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, fmt::format("cannot read config file {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace locpress
