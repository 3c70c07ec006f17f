#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cutloc/mesh.hpp"
#include "cutloc/obstacle.hpp"

namespace cutloc {

enum class SurfaceKind { torus, sphere, file };

struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::torus;
  double L1 = 1.0, L2 = 1.0;
  int n1 = 64, n2 = 64;
  int subdivisions = 4;
  std::filesystem::path path;

  std::string to_string() const;
};

enum class ObstacleSource { automatic, analytic, fast_marching };

struct RunConfig {
  SurfaceSpec surface;
  VertexId source = 0;
  ObstacleSource obstacle = ObstacleSource::automatic;
  double m = 1.0;
  SolverConfig solver;
  std::optional<double> theta;  // default: max(10 tol_kkt, 1e-6)
  std::vector<double> barrier_A{1.0, 10.0, 100.0};
  std::vector<Vec2> barrier_points{{0.5, 0.0}, {0.5, 0.25}, {0.3, 0.5}};
  double barrier_radius = 0.05;
  std::size_t barrier_samples = 10000;
  std::vector<int> blowup_levels;  // default depends on the surface
  int passes = 20;
  std::filesystem::path out = "cutloc-out";

  void validate() const;
};

// Text of the documented keys with their defaults (used by --help).
std::string config_reference();

// Line-oriented `key = value` text with optional `[section]` headers.
// Unknown keys, keys under the wrong section and duplicates are errors.
// Relative mesh paths resolve against `base_dir`.
RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig parse_config(const std::filesystem::path& path);

// Applies `key=value` overrides on top of an existing configuration.
void apply_override(RunConfig& config, std::string_view assignment, const std::filesystem::path& base_dir = {});

Mesh build_surface(const SurfaceSpec& spec);

}  // namespace cutloc
