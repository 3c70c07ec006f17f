#include "cutloc/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "cutloc/error.hpp"

namespace cutloc {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return std::string(buf, end);
}

std::string format_vtk(const Mesh& mesh, const ScalarField& field, std::string_view name) {
  check_same_mesh(field, mesh);
  std::string out;
  out += "# vtk DataFile Version 3.0\n";
  out += "cutloc ";
  out += name;
  out += "\nASCII\nDATASET POLYDATA\n";
  out += "POINTS " + std::to_string(mesh.vertex_count()) + " double\n";
  for (const auto& p : mesh.vertices()) {
    out += format_number(p[0]) + " " + format_number(p[1]) + " " + format_number(p[2]) + "\n";
  }
  out += "POLYGONS " + std::to_string(mesh.triangle_count()) + " " + std::to_string(4 * mesh.triangle_count()) + "\n";
  for (const auto& t : mesh.triangles()) {
    out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  }
  out += "POINT_DATA " + std::to_string(mesh.vertex_count()) + "\n";
  out += "SCALARS ";
  out += name;
  out += " double 1\nLOOKUP_TABLE default\n";
  for (double v : field.values) out += format_number(v) + "\n";
  return out;
}

std::string format_csv(const ScalarField& field) {
  std::string out = "vertex_id,value\n";
  for (std::size_t i = 0; i < field.size(); ++i) out += std::to_string(i) + "," + format_number(field[i]) + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_field(const Mesh& mesh, const ScalarField& field, const std::filesystem::path& dir, std::string_view name) {
  write_text(dir / (std::string(name) + ".vtk"), format_vtk(mesh, field, name));
  write_text(dir / (std::string(name) + ".csv"), format_csv(field));
}

}  // namespace cutloc
