#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "eit/mesh.hpp"

namespace eit {

/// Legacy ASCII VTK unstructured grid with named point-data scalar fields;
/// loads in standard viewers and is bit-stable across runs.
void write_vtk(const SimplicialMesh& mesh,
               const std::vector<std::pair<std::string, Vector>>& point_fields,
               const std::string& path);
void write_vtk(const SimplicialMesh& mesh,
               const std::vector<std::pair<std::string, Vector>>& point_fields,
               std::ostream& out);

}  // namespace eit
