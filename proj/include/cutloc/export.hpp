#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cutloc/mesh.hpp"

namespace cutloc {

// Shortest decimal that reads back to the same double.
std::string format_number(double x);

// Legacy ASCII VTK polydata with one POINT_DATA scalar array. Points are the
// 3D embedding of the mesh.
std::string format_vtk(const Mesh& mesh, const ScalarField& field, std::string_view name);

// "vertex_id,value" header followed by one row per vertex.
std::string format_csv(const ScalarField& field);

// Writes <dir>/<name>.vtk and <dir>/<name>.csv.
void write_field(const Mesh& mesh, const ScalarField& field, const std::filesystem::path& dir, std::string_view name);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace cutloc
