#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cutloc/vec.hpp"

namespace cutloc {

using VertexId = std::uint32_t;
using Triangle = std::array<VertexId, 3>;
using MeshId = std::uint64_t;

struct GenericSurface {};

// Flat torus R^2 / (L1 Z x L2 Z). Geometry comes from the uv chart.
struct FlatTorus {
  double L1 = 1.0;
  double L2 = 1.0;
};

struct UnitSphere {};

using SurfaceTag = std::variant<GenericSurface, FlatTorus, UnitSphere>;

std::string surface_name(const SurfaceTag& tag);

// Closed, edge-manifold triangle mesh. Immutable once constructed; the
// constructor rejects anything with a boundary or non-manifold edge.
//
// All geometric queries (edge vectors, areas, lengths) are intrinsic: on a
// flat torus they are computed from the periodic uv coordinates, never from
// the 3D embedding.
class Mesh {
 public:
  Mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles, SurfaceTag tag = GenericSurface{},
       std::vector<Vec2> uv = {});

  MeshId id() const { return id_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  long euler_characteristic() const;

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Vec2>& uv() const { return uv_; }
  const SurfaceTag& tag() const { return tag_; }

  bool is_flat_torus() const { return std::holds_alternative<FlatTorus>(tag_); }
  bool is_unit_sphere() const { return std::holds_alternative<UnitSphere>(tag_); }
  const FlatTorus& torus() const;

  // Undirected edges (a < b), sorted lexicographically.
  const std::vector<std::array<VertexId, 2>>& edges() const { return edges_; }

  // Sorted one-ring neighbours of v.
  std::span<const VertexId> neighbors(VertexId v) const;

  // Triangles incident to v.
  std::span<const std::uint32_t> incident_triangles(VertexId v) const;

  // Intrinsic vector from vertex `from` to vertex `to` along their shared
  // edge. For a flat torus this is the shortest periodic representative
  // of the uv difference, embedded as (du, dv, 0).
  Vec3 edge_vector(VertexId from, VertexId to) const;
  double edge_length(VertexId a, VertexId b) const { return norm(edge_vector(a, b)); }

  double triangle_area(std::size_t t) const;
  double total_area() const;
  double max_edge_length() const { return max_edge_length_; }

 private:
  void build_topology();
  void validate_geometry();

  MeshId id_;
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  SurfaceTag tag_;
  std::vector<Vec2> uv_;
  std::vector<std::array<VertexId, 2>> edges_;
  std::vector<std::uint32_t> ring_offsets_;
  std::vector<VertexId> ring_;
  std::vector<std::uint32_t> tri_offsets_;
  std::vector<std::uint32_t> tri_of_vertex_;
  double max_edge_length_ = 0.0;
};

// Regular n1 x n2 grid on [0,L1) x [0,L2), each cell split along the
// (i,j)-(i+1,j+1) diagonal. Vertex (i,j) has index j*n1 + i and
// uv = (i*L1/n1, j*L2/n2); vertex 0 sits at the origin.
Mesh make_flat_torus(double L1, double L2, int n1, int n2);

// Unit icosphere after `subdivisions` rounds of 1-to-4 midpoint refinement.
// Vertex 0 is the north pole (0,0,1) and vertex 11 the south pole.
Mesh make_icosphere(int subdivisions);

enum class MeshFormat { off, obj };

Mesh load_mesh(const std::filesystem::path& path, MeshFormat format);
Mesh load_mesh(const std::filesystem::path& path);  // format from extension
void save_mesh(const Mesh& mesh, const std::filesystem::path& path, MeshFormat format);

Mesh parse_off(std::string_view text);
Mesh parse_obj(std::string_view text);
std::string format_off(const Mesh& mesh);
std::string format_obj(const Mesh& mesh);

// A source point b, stored as a vertex index.
struct SourcePoint {
  VertexId vertex = 0;
};

void check_source(const Mesh& mesh, SourcePoint b);

// One value per vertex of a particular mesh.
struct ScalarField {
  std::vector<double> values;
  MeshId mesh_id = 0;

  ScalarField() = default;
  ScalarField(const Mesh& mesh, double fill) : values(mesh.vertex_count(), fill), mesh_id(mesh.id()) {}
  ScalarField(const Mesh& mesh, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

void check_same_mesh(const ScalarField& field, const Mesh& mesh);

}  // namespace cutloc
