#include "cutloc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "cutloc/error.hpp"

namespace cutloc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      auto piece = trim(s.substr(start, i - start));
      if (!piece.empty()) out.push_back(piece);
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void invalid(std::string_view key, const std::string& why) {
  throw ParameterError("invalid value for '" + std::string(key) + "': " + why);
}

double to_double(std::string_view key, std::string_view tok) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    invalid(key, "expected a number, got '" + std::string(tok) + "'");
  }
  return v;
}

long long to_int(std::string_view key, std::string_view tok) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    invalid(key, "expected an integer, got '" + std::string(tok) + "'");
  }
  return v;
}

struct KeySpec {
  std::string section;
  std::string default_text;
  std::string help;
  std::function<void(RunConfig&, std::string_view key, std::string_view value, const std::filesystem::path& base)> set;
};

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = [] {
    std::map<std::string, KeySpec> t;
    t["surface"] = {"surface", "torus 1 1 64 64",
                    "torus L1 L2 n1 n2 | sphere <subdivisions> | mesh <path.off|path.obj>",
                    [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path& base) {
                      const auto w = words(value);
                      if (w.empty()) invalid(key, "empty surface");
                      SurfaceSpec s;
                      if (w[0] == "torus") {
                        if (w.size() != 5) invalid(key, "torus needs L1 L2 n1 n2");
                        s.kind = SurfaceKind::torus;
                        s.L1 = to_double(key, w[1]);
                        s.L2 = to_double(key, w[2]);
                        s.n1 = static_cast<int>(to_int(key, w[3]));
                        s.n2 = static_cast<int>(to_int(key, w[4]));
                      } else if (w[0] == "sphere") {
                        if (w.size() != 2) invalid(key, "sphere needs a subdivision level");
                        s.kind = SurfaceKind::sphere;
                        s.subdivisions = static_cast<int>(to_int(key, w[1]));
                      } else if (w[0] == "mesh") {
                        if (w.size() != 2) invalid(key, "mesh needs a file path");
                        s.kind = SurfaceKind::file;
                        s.path = std::filesystem::path(std::string(w[1]));
                        if (s.path.is_relative() && !base.empty()) s.path = base / s.path;
                      } else {
                        invalid(key, "unknown surface kind '" + std::string(w[0]) + "'");
                      }
                      c.surface = s;
                    }};
    t["source"] = {"surface", "0", "source vertex index b",
                   [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                     const auto v = to_int(key, value);
                     if (v < 0) invalid(key, "must be >= 0");
                     c.source = static_cast<VertexId>(v);
                   }};
    t["obstacle"] = {"surface", "auto", "auto | analytic | fast_marching",
                     [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                       if (value == "auto") c.obstacle = ObstacleSource::automatic;
                       else if (value == "analytic") c.obstacle = ObstacleSource::analytic;
                       else if (value == "fast_marching") c.obstacle = ObstacleSource::fast_marching;
                       else invalid(key, "expected auto, analytic or fast_marching");
                     }};
    t["m"] = {"problem", "1", "load m > 0",
              [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                c.m = to_double(key, value);
              }};
    t["omega"] = {"solver", "1.5", "SOR relaxation in (0, 2)",
                  [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                    c.solver.omega = to_double(key, value);
                  }};
    t["tol_update"] = {"solver", "1e-11", "max per-sweep update at convergence",
                       [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                         c.solver.tol_update = to_double(key, value);
                       }};
    t["tol_kkt"] = {"solver", "1e-8", "KKT residual relative to m * max(mass)",
                    [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                      c.solver.tol_kkt = to_double(key, value);
                    }};
    t["tol_act"] = {"solver", "1e-10", "active when u >= d - tol_act (1 + |d|)",
                    [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                      c.solver.tol_act_rel = to_double(key, value);
                    }};
    t["max_sweeps"] = {"solver", "200000", "sweep limit",
                       [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                         c.solver.max_sweeps = static_cast<long>(to_int(key, value));
                       }};
    t["theta"] = {"detect", "auto", "non-contact threshold; auto = max(10 tol_kkt, 1e-6)",
                  [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                    if (value == "auto") c.theta.reset();
                    else c.theta = to_double(key, value);
                  }};
    t["A"] = {"barrier", "1 10 100", "barrier targets",
              [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                c.barrier_A.clear();
                for (auto w : words(value)) c.barrier_A.push_back(to_double(key, w));
              }};
    t["points"] = {"barrier", "0.5 0, 0.5 0.25, 0.3 0.5", "comma-separated uv points",
                   [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                     c.barrier_points.clear();
                     for (auto item : split(value, ',')) {
                       const auto w = words(item);
                       if (w.size() != 2) invalid(key, "each point needs two coordinates");
                       c.barrier_points.push_back({to_double(key, w[0]), to_double(key, w[1])});
                     }
                   }};
    t["radius"] = {"barrier", "0.05", "sampling disk radius",
                   [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                     c.barrier_radius = to_double(key, value);
                   }};
    t["samples"] = {"barrier", "10000", "disk samples per certificate",
                    [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                      const auto v = to_int(key, value);
                      if (v <= 0) invalid(key, "must be > 0");
                      c.barrier_samples = static_cast<std::size_t>(v);
                    }};
    t["levels"] = {"blowup", "auto", "torus resolutions (e.g. 64 128) or sphere subdivisions (e.g. 4 5)",
                   [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                     c.blowup_levels.clear();
                     if (value == "auto") return;
                     for (auto w : words(value)) c.blowup_levels.push_back(static_cast<int>(to_int(key, w)));
                   }};
    t["passes"] = {"smooth", "20", "mollification averaging passes",
                   [](RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path&) {
                     c.passes = static_cast<int>(to_int(key, value));
                   }};
    t["out"] = {"output", "cutloc-out", "output directory",
                [](RunConfig& c, std::string_view, std::string_view value, const std::filesystem::path&) {
                  c.out = std::filesystem::path(std::string(value));
                }};
    return t;
  }();
  return table;
}

void set_key(RunConfig& c, std::string_view key, std::string_view value, const std::string& section,
             const std::filesystem::path& base, const std::string& where) {
  const auto& table = key_table();
  const auto it = table.find(std::string(key));
  if (it == table.end()) throw ParseError(where + "unknown key '" + std::string(key) + "'");
  if (!section.empty() && section != it->second.section) {
    throw ParseError(where + "key '" + std::string(key) + "' belongs in [" + it->second.section + "], not [" +
                     section + "]");
  }
  try {
    it->second.set(c, key, value, base);
  } catch (const ParameterError& e) {
    throw ParameterError(where + e.what());
  }
}

}  // namespace

std::string SurfaceSpec::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case SurfaceKind::torus: os << "torus " << L1 << " " << L2 << " " << n1 << " " << n2; break;
    case SurfaceKind::sphere: os << "sphere " << subdivisions; break;
    case SurfaceKind::file: os << "mesh " << path.string(); break;
  }
  return os.str();
}

void RunConfig::validate() const {
  try {
    solver.validate();
  } catch (const ParameterError& e) {
    throw ParameterError(std::string("invalid value for solver setting: ") + e.what());
  }
  if (!(m > 0.0)) throw ParameterError("invalid value for 'm': must be > 0");
  if (theta && !(*theta > 0.0)) throw ParameterError("invalid value for 'theta': must be > 0");
  for (double a : barrier_A) {
    if (!(a > 0.0)) throw ParameterError("invalid value for 'A': targets must be > 0");
  }
  if (!(barrier_radius > 0.0)) throw ParameterError("invalid value for 'radius': must be > 0");
  if (passes < 0) throw ParameterError("invalid value for 'passes': must be >= 0");
  if (surface.kind == SurfaceKind::torus && (surface.n1 < 3 || surface.n2 < 3 || !(surface.L1 > 0.0) || !(surface.L2 > 0.0))) {
    throw ParameterError("invalid value for 'surface': torus needs L1, L2 > 0 and n1, n2 >= 3");
  }
  if (surface.kind == SurfaceKind::sphere && surface.subdivisions < 0) {
    throw ParameterError("invalid value for 'surface': subdivisions must be >= 0");
  }
}

std::string config_reference() {
  std::ostringstream os;
  std::string current;
  for (const char* section : {"surface", "problem", "solver", "detect", "barrier", "blowup", "smooth", "output"}) {
    os << "[" << section << "]\n";
    for (const auto& [key, spec] : key_table()) {
      if (spec.section != section) continue;
      os << "  " << key << " = " << spec.default_text << "    # " << spec.help << "\n";
    }
  }
  return os.str();
}

RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig config;
  std::set<std::string> seen;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where + "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> known{"surface", "problem", "solver", "detect",
                                               "barrier", "blowup",  "smooth", "output"};
      if (!known.contains(section)) throw ParseError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(where + "missing key");
    if (!seen.insert(std::string(key)).second) throw ParseError(where + "duplicate key '" + std::string(key) + "'");
    set_key(config, key, value, section, base_dir, where);
    if (end == text.size()) break;
  }
  config.validate();
  return config;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str(), path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ParameterError& e) {
    throw ParameterError(path.string() + ": " + e.what());
  }
}

void apply_override(RunConfig& config, std::string_view assignment, const std::filesystem::path& base_dir) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ParseError("override '" + std::string(assignment) + "' is not key=value");
  set_key(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "", base_dir,
          "override: ");
  config.validate();
}

Mesh build_surface(const SurfaceSpec& spec) {
  switch (spec.kind) {
    case SurfaceKind::torus: return make_flat_torus(spec.L1, spec.L2, spec.n1, spec.n2);
    case SurfaceKind::sphere: return make_icosphere(spec.subdivisions);
    case SurfaceKind::file: return load_mesh(spec.path);
  }
  throw ParameterError("unknown surface kind");
}

}  // namespace cutloc
