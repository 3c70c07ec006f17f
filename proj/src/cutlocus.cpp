#include "cutloc/cutlocus.hpp"

#include <algorithm>
#include <limits>

#include "cutloc/error.hpp"

namespace cutloc {

double default_theta(const SolverConfig& config) { return std::max(10.0 * config.tol_kkt, 1e-6); }

CutLocusReport detect(const Mesh& mesh, const ScalarField& u, const DistanceField& distance,
                      const CutLocusTruth* truth, double theta, std::optional<double> band) {
  check_same_mesh(u, mesh);
  check_same_mesh(distance.field, mesh);
  if (truth && truth->mesh_id() != mesh.id()) throw MeshMismatchError("cut locus truth belongs to another mesh");
  if (!(theta > 0.0)) throw ParameterError("detection threshold theta must be > 0");

  CutLocusReport r;
  r.theta = theta;
  r.band = band.value_or(mesh.max_edge_length());
  r.noncontact.resize(mesh.vertex_count());
  const auto& d = distance.field.values;
  for (std::size_t i = 0; i < d.size(); ++i) {
    r.noncontact[i] = d[i] - u[i] > theta;
    r.noncontact_count += r.noncontact[i];
  }
  if (!truth) return r;

  r.scored = true;
  std::size_t flagged_on_cut = 0;
  r.min_gap_on_cut = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double s = truth->distance_to_cut(static_cast<VertexId>(i));
    if (r.noncontact[i]) r.excess_radius = std::max(r.excess_radius, s);
    if (s <= r.band) {
      ++r.cut_vertex_count;
      flagged_on_cut += r.noncontact[i];
      r.min_gap_on_cut = std::min(r.min_gap_on_cut, d[i] - u[i]);
    }
  }
  if (r.cut_vertex_count == 0) {
    r.min_gap_on_cut = 0.0;
  } else {
    r.coverage = static_cast<double>(flagged_on_cut) / static_cast<double>(r.cut_vertex_count);
  }
  return r;
}

}  // namespace cutloc
