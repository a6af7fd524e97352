#include "eit/vtk_io.hpp"

#include <cstdio>
#include <fstream>

namespace eit {

void write_vtk(const SimplicialMesh& mesh,
               const std::vector<std::pair<std::string, Vector>>& point_fields,
               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open VTK file for writing: " + path);
  write_vtk(mesh, point_fields, out);
}

void write_vtk(const SimplicialMesh& mesh,
               const std::vector<std::pair<std::string, Vector>>& point_fields,
               std::ostream& out) {
  char buf[48];
  out << "# vtk DataFile Version 3.0\n";
  out << "eitsparse fields\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    for (int a = 0; a < 3; ++a) {
      const double x = a < mesh.dim ? mesh.vertices(v, a) : 0.0;
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out << (a ? " " : "") << buf;
    }
    out << "\n";
  }

  const int per_cell = mesh.dim + 1;
  out << "CELLS " << mesh.num_cells() << " "
      << mesh.num_cells() * (per_cell + 1) << "\n";
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    out << per_cell;
    for (int i = 0; i < per_cell; ++i) out << " " << mesh.cells(c, i);
    out << "\n";
  }

  const int vtk_type = mesh.dim == 2 ? 5 : 10;  // triangle / tetrahedron
  out << "CELL_TYPES " << mesh.num_cells() << "\n";
  for (Index c = 0; c < mesh.num_cells(); ++c) out << vtk_type << "\n";

  if (point_fields.empty()) return;
  out << "POINT_DATA " << mesh.num_vertices() << "\n";
  for (const auto& [name, field] : point_fields) {
    if (field.size() != mesh.num_vertices())
      throw MeshError("VTK field '" + name + "' size does not match vertex count");
    out << "SCALARS " << name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (Index v = 0; v < field.size(); ++v) {
      std::snprintf(buf, sizeof(buf), "%.17g", field[v]);
      out << buf << "\n";
    }
  }
}

}  // namespace eit
