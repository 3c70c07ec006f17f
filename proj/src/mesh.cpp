#include "cutloc/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "cutloc/error.hpp"

namespace cutloc {

namespace {

MeshId next_mesh_id() {
  static std::atomic<MeshId> counter{1};
  return counter.fetch_add(1);
}

double wrap(double d, double period) { return d - period * std::round(d / period); }

std::string edge_name(VertexId a, VertexId b) {
  return "(" + std::to_string(a) + ", " + std::to_string(b) + ")";
}

}  // namespace

std::string surface_name(const SurfaceTag& tag) {
  if (std::holds_alternative<FlatTorus>(tag)) return "flat_torus";
  if (std::holds_alternative<UnitSphere>(tag)) return "unit_sphere";
  return "generic";
}

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles, SurfaceTag tag, std::vector<Vec2> uv)
    : id_(next_mesh_id()),
      vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      tag_(tag),
      uv_(std::move(uv)) {
  if (vertices_.empty() || triangles_.empty()) throw TopologyError("mesh has no vertices or no triangles");
  if (is_flat_torus()) {
    const auto& t = torus();
    if (!(t.L1 > 0.0) || !(t.L2 > 0.0)) throw ParameterError("flat torus periods must be positive");
    if (uv_.size() != vertices_.size()) throw ParameterError("flat torus mesh needs one uv coordinate per vertex");
  } else if (!uv_.empty() && uv_.size() != vertices_.size()) {
    throw ParameterError("uv coordinate count differs from vertex count");
  }
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    for (double c : vertices_[v]) {
      if (!std::isfinite(c)) throw ParseError("vertex " + std::to_string(v) + " has a non-finite coordinate");
    }
  }
  build_topology();
  validate_geometry();
}

const FlatTorus& Mesh::torus() const {
  const auto* t = std::get_if<FlatTorus>(&tag_);
  if (!t) throw UnsupportedSurfaceError("mesh is not a flat torus (tag: " + surface_name(tag_) + ")");
  return *t;
}

long Mesh::euler_characteristic() const {
  return static_cast<long>(vertices_.size()) - static_cast<long>(edges_.size()) +
         static_cast<long>(triangles_.size());
}

void Mesh::build_topology() {
  const auto nv = static_cast<VertexId>(vertices_.size());
  struct HalfEdge {
    VertexId a, b;
    std::uint32_t tri;
  };
  std::vector<HalfEdge> half;
  half.reserve(3 * triangles_.size());
  for (std::uint32_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] >= nv) {
        throw TopologyError("triangle " + std::to_string(t) + " references vertex " + std::to_string(tri[k]) +
                            " out of range");
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw TopologyError("triangle " + std::to_string(t) + " repeats a vertex");
    }
    for (int k = 0; k < 3; ++k) {
      VertexId a = tri[k], b = tri[(k + 1) % 3];
      half.push_back({std::min(a, b), std::max(a, b), t});
    }
  }
  std::sort(half.begin(), half.end(), [](const HalfEdge& x, const HalfEdge& y) {
    return std::tie(x.a, x.b, x.tri) < std::tie(y.a, y.b, y.tri);
  });
  edges_.clear();
  for (std::size_t i = 0; i < half.size();) {
    std::size_t j = i;
    while (j < half.size() && half[j].a == half[i].a && half[j].b == half[i].b) ++j;
    const std::size_t count = j - i;
    if (count == 1) {
      throw TopologyError("boundary edge " + edge_name(half[i].a, half[i].b) + " used only by triangle " +
                          std::to_string(half[i].tri));
    }
    if (count > 2) {
      throw TopologyError("non-manifold edge " + edge_name(half[i].a, half[i].b) + " shared by " +
                          std::to_string(count) + " triangles");
    }
    edges_.push_back({half[i].a, half[i].b});
    i = j;
  }

  std::vector<std::uint32_t> degree(nv, 0);
  for (const auto& e : edges_) {
    ++degree[e[0]];
    ++degree[e[1]];
  }
  ring_offsets_.assign(nv + 1, 0);
  for (VertexId v = 0; v < nv; ++v) ring_offsets_[v + 1] = ring_offsets_[v] + degree[v];
  ring_.assign(ring_offsets_.back(), 0);
  std::vector<std::uint32_t> fill(ring_offsets_.begin(), ring_offsets_.end() - 1);
  for (const auto& e : edges_) {
    ring_[fill[e[0]]++] = e[1];
    ring_[fill[e[1]]++] = e[0];
  }
  for (VertexId v = 0; v < nv; ++v) {
    std::sort(ring_.begin() + ring_offsets_[v], ring_.begin() + ring_offsets_[v + 1]);
    if (degree[v] == 0) throw TopologyError("vertex " + std::to_string(v) + " is not used by any triangle");
  }

  tri_offsets_.assign(nv + 1, 0);
  for (const auto& tri : triangles_) {
    for (VertexId v : tri) ++tri_offsets_[v + 1];
  }
  for (VertexId v = 0; v < nv; ++v) tri_offsets_[v + 1] += tri_offsets_[v];
  tri_of_vertex_.assign(tri_offsets_.back(), 0);
  std::vector<std::uint32_t> tfill(tri_offsets_.begin(), tri_offsets_.end() - 1);
  for (std::uint32_t t = 0; t < triangles_.size(); ++t) {
    for (VertexId v : triangles_[t]) tri_of_vertex_[tfill[v]++] = t;
  }
}

void Mesh::validate_geometry() {
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const double area = triangle_area(t);
    if (!(area > 0.0)) throw TopologyError("triangle " + std::to_string(t) + " has zero area");
  }
  max_edge_length_ = 0.0;
  for (const auto& e : edges_) max_edge_length_ = std::max(max_edge_length_, edge_length(e[0], e[1]));

  long expected = 0;
  if (is_flat_torus()) {
    expected = 0;
  } else if (is_unit_sphere()) {
    expected = 2;
  } else {
    return;
  }
  if (euler_characteristic() != expected) {
    throw TopologyError("Euler characteristic " + std::to_string(euler_characteristic()) + " does not match " +
                        surface_name(tag_) + " (expected " + std::to_string(expected) + ")");
  }
}

std::span<const VertexId> Mesh::neighbors(VertexId v) const {
  return {ring_.data() + ring_offsets_[v], ring_offsets_[v + 1] - ring_offsets_[v]};
}

std::span<const std::uint32_t> Mesh::incident_triangles(VertexId v) const {
  return {tri_of_vertex_.data() + tri_offsets_[v], tri_offsets_[v + 1] - tri_offsets_[v]};
}

Vec3 Mesh::edge_vector(VertexId from, VertexId to) const {
  if (const auto* t = std::get_if<FlatTorus>(&tag_)) {
    return {wrap(uv_[to][0] - uv_[from][0], t->L1), wrap(uv_[to][1] - uv_[from][1], t->L2), 0.0};
  }
  return vertices_[to] - vertices_[from];
}

double Mesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles_[t];
  return 0.5 * norm(cross(edge_vector(tri[0], tri[1]), edge_vector(tri[0], tri[2])));
}

double Mesh::total_area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) a += triangle_area(t);
  return a;
}

// ---------------------------------------------------------------------------
// Generators

Mesh make_flat_torus(double L1, double L2, int n1, int n2) {
  if (!(L1 > 0.0) || !(L2 > 0.0) || !std::isfinite(L1) || !std::isfinite(L2)) {
    throw ParameterError("flat torus periods must be positive and finite");
  }
  if (n1 < 3 || n2 < 3) throw ParameterError("flat torus resolution must be at least 3 x 3");

  const double two_pi = 2.0 * std::numbers::pi;
  const double R = L1 / two_pi;
  const double r = std::min(L2 / two_pi, 0.5 * R);

  std::vector<Vec3> xyz;
  std::vector<Vec2> uv;
  xyz.reserve(static_cast<std::size_t>(n1) * n2);
  uv.reserve(static_cast<std::size_t>(n1) * n2);
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      const double u = L1 * i / n1;
      const double v = L2 * j / n2;
      uv.push_back({u, v});
      const double theta = two_pi * i / n1;
      const double phi = two_pi * j / n2;
      xyz.push_back({(R + r * std::cos(phi)) * std::cos(theta), (R + r * std::cos(phi)) * std::sin(theta),
                     r * std::sin(phi)});
    }
  }
  auto id = [n1, n2](int i, int j) { return static_cast<VertexId>(((j + n2) % n2) * n1 + ((i + n1) % n1)); };
  std::vector<Triangle> tris;
  tris.reserve(2 * static_cast<std::size_t>(n1) * n2);
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Mesh(std::move(xyz), std::move(tris), FlatTorus{L1, L2}, std::move(uv));
}

Mesh make_icosphere(int subdivisions) {
  if (subdivisions < 0) throw ParameterError("icosphere subdivisions must be >= 0");
  if (subdivisions > 9) throw ParameterError("icosphere subdivisions above 9 are not supported");

  std::vector<Vec3> v;
  v.push_back({0.0, 0.0, 1.0});
  const double z = 1.0 / std::sqrt(5.0);
  const double rr = 2.0 / std::sqrt(5.0);
  for (int k = 0; k < 5; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 5.0;
    v.push_back({rr * std::cos(a), rr * std::sin(a), z});
  }
  for (int k = 0; k < 5; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 5.0 + std::numbers::pi / 5.0;
    v.push_back({rr * std::cos(a), rr * std::sin(a), -z});
  }
  v.push_back({0.0, 0.0, -1.0});

  std::vector<Triangle> f;
  for (VertexId k = 0; k < 5; ++k) {
    const VertexId up = 1 + k, up_next = 1 + (k + 1) % 5;
    const VertexId lo = 6 + k, lo_next = 6 + (k + 1) % 5;
    f.push_back({0, up, up_next});
    f.push_back({up, lo, up_next});
    f.push_back({up_next, lo, lo_next});
    f.push_back({11, lo_next, lo});
  }

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<VertexId, VertexId>, VertexId> midpoint;
    auto mid = [&](VertexId a, VertexId b) {
      const auto key = std::minmax(a, b);
      auto [it, inserted] = midpoint.try_emplace({key.first, key.second}, 0);
      if (inserted) {
        Vec3 m = 0.5 * (v[a] + v[b]);
        m = (1.0 / norm(m)) * m;
        it->second = static_cast<VertexId>(v.size());
        v.push_back(m);
      }
      return it->second;
    };
    std::vector<Triangle> next;
    next.reserve(4 * f.size());
    for (const auto& t : f) {
      const VertexId ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }

  for (auto& p : v) p = (1.0 / norm(p)) * p;
  for (auto& t : f) {
    const Vec3 n = cross(v[t[1]] - v[t[0]], v[t[2]] - v[t[0]]);
    if (dot(n, v[t[0]] + v[t[1]] + v[t[2]]) < 0.0) std::swap(t[1], t[2]);
  }
  return Mesh(std::move(v), std::move(f), UnitSphere{});
}

// ---------------------------------------------------------------------------
// File IO

namespace {

struct LineReader {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line_no = 0;

  // Next non-empty, non-comment line split into whitespace tokens.
  bool next(std::vector<std::string_view>& tokens) {
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      tokens.clear();
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
      }
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("line " + std::to_string(line_no) + ": " + what);
  }
};

double parse_double(const LineReader& r, std::string_view tok) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(value)) {
    r.fail("expected a finite number, got '" + std::string(tok) + "'");
  }
  return value;
}

long long parse_int(const LineReader& r, std::string_view tok) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    r.fail("expected an integer, got '" + std::string(tok) + "'");
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open mesh file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Mesh parse_off(std::string_view text) {
  LineReader r{text};
  std::vector<std::string_view> tok;
  if (!r.next(tok) || tok[0] != "OFF") r.fail("missing OFF header");
  tok.erase(tok.begin());
  if (tok.empty() && !r.next(tok)) r.fail("missing counts line");
  if (tok.size() < 2) r.fail("counts line needs vertex and face counts");
  const long long nv = parse_int(r, tok[0]);
  const long long nf = parse_int(r, tok[1]);
  if (nv <= 0 || nf <= 0 || nv > (1LL << 31) || nf > (1LL << 31)) r.fail("invalid vertex/face counts");

  std::vector<Vec3> verts;
  verts.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    if (!r.next(tok)) r.fail("unexpected end of file in vertex list");
    if (tok.size() < 3) r.fail("vertex line needs three coordinates");
    verts.push_back({parse_double(r, tok[0]), parse_double(r, tok[1]), parse_double(r, tok[2])});
  }
  std::vector<Triangle> tris;
  tris.reserve(static_cast<std::size_t>(nf));
  for (long long i = 0; i < nf; ++i) {
    if (!r.next(tok)) r.fail("unexpected end of file in face list");
    if (parse_int(r, tok[0]) != 3) r.fail("only triangular faces are supported");
    if (tok.size() < 4) r.fail("face line needs three vertex indices");
    Triangle t{};
    for (int k = 0; k < 3; ++k) {
      const long long idx = parse_int(r, tok[k + 1]);
      if (idx < 0 || idx >= nv) r.fail("face vertex index " + std::to_string(idx) + " out of range");
      t[k] = static_cast<VertexId>(idx);
    }
    tris.push_back(t);
  }
  if (r.next(tok)) r.fail("trailing content after face list");
  return Mesh(std::move(verts), std::move(tris));
}

Mesh parse_obj(std::string_view text) {
  LineReader r{text};
  std::vector<std::string_view> tok;
  std::vector<Vec3> verts;
  std::vector<Triangle> tris;
  std::vector<std::array<long long, 3>> raw_faces;
  std::vector<std::size_t> face_lines;

  while (r.next(tok)) {
    const auto key = tok[0];
    if (key == "v") {
      if (tok.size() < 4) r.fail("vertex line needs three coordinates");
      verts.push_back({parse_double(r, tok[1]), parse_double(r, tok[2]), parse_double(r, tok[3])});
    } else if (key == "f") {
      if (tok.size() != 4) r.fail("only triangular faces are supported");
      std::array<long long, 3> f{};
      for (int k = 0; k < 3; ++k) {
        auto t = tok[k + 1];
        t = t.substr(0, t.find('/'));
        f[k] = parse_int(r, t);
        if (f[k] == 0) r.fail("OBJ indices are 1-based; got 0");
        if (f[k] < 0) f[k] = static_cast<long long>(verts.size()) + f[k] + 1;
      }
      raw_faces.push_back(f);
      face_lines.push_back(r.line_no);
    } else if (key == "vn" || key == "vt" || key == "g" || key == "o" || key == "s" || key == "usemtl" ||
               key == "mtllib") {
      continue;
    } else {
      r.fail("unknown OBJ directive '" + std::string(key) + "'");
    }
  }
  if (verts.empty() || raw_faces.empty()) throw ParseError("OBJ file has no vertices or no faces");
  for (std::size_t i = 0; i < raw_faces.size(); ++i) {
    Triangle t{};
    for (int k = 0; k < 3; ++k) {
      const long long idx = raw_faces[i][k] - 1;
      if (idx < 0 || idx >= static_cast<long long>(verts.size())) {
        throw ParseError("line " + std::to_string(face_lines[i]) + ": face vertex index out of range");
      }
      t[k] = static_cast<VertexId>(idx);
    }
    tris.push_back(t);
  }
  return Mesh(std::move(verts), std::move(tris));
}

namespace {

void append_number(std::string& out, double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  out.append(buf, ptr);
}

}  // namespace

std::string format_off(const Mesh& mesh) {
  std::string out = "OFF\n";
  out += std::to_string(mesh.vertex_count()) + " " + std::to_string(mesh.triangle_count()) + " " +
         std::to_string(mesh.edge_count()) + "\n";
  for (const auto& p : mesh.vertices()) {
    append_number(out, p[0]);
    out += ' ';
    append_number(out, p[1]);
    out += ' ';
    append_number(out, p[2]);
    out += '\n';
  }
  for (const auto& t : mesh.triangles()) {
    out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  }
  return out;
}

std::string format_obj(const Mesh& mesh) {
  std::string out;
  for (const auto& p : mesh.vertices()) {
    out += "v ";
    append_number(out, p[0]);
    out += ' ';
    append_number(out, p[1]);
    out += ' ';
    append_number(out, p[2]);
    out += '\n';
  }
  for (const auto& t : mesh.triangles()) {
    out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " + std::to_string(t[2] + 1) + "\n";
  }
  return out;
}

Mesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  const std::string text = read_file(path);
  try {
    return format == MeshFormat::off ? parse_off(text) : parse_obj(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const TopologyError& e) {
    throw TopologyError(path.string() + ": " + e.what());
  }
}

Mesh load_mesh(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".off") return load_mesh(path, MeshFormat::off);
  if (ext == ".obj") return load_mesh(path, MeshFormat::obj);
  throw ParameterError("cannot infer mesh format from extension of '" + path.string() + "'");
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path, MeshFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write mesh file '" + path.string() + "'");
  out << (format == MeshFormat::off ? format_off(mesh) : format_obj(mesh));
}

void check_source(const Mesh& mesh, SourcePoint b) {
  if (b.vertex >= mesh.vertex_count()) {
    throw ParameterError("source vertex " + std::to_string(b.vertex) + " out of range");
  }
}

ScalarField::ScalarField(const Mesh& mesh, std::vector<double> v) : values(std::move(v)), mesh_id(mesh.id()) {
  if (values.size() != mesh.vertex_count()) throw MeshMismatchError("field length differs from vertex count");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw ParameterError("field value at vertex " + std::to_string(i) + " is not finite");
  }
}

void check_same_mesh(const ScalarField& field, const Mesh& mesh) {
  if (field.mesh_id != mesh.id() || field.size() != mesh.vertex_count()) throw MeshMismatchError();
}

}  // namespace cutloc
