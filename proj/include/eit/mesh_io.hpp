#pragma once

#include <iosfwd>
#include <string>

#include "eit/mesh.hpp"

namespace eit {

/// Reads a Gmsh ASCII v2.2 file. Triangles become cells in 2D and boundary
/// facets in 3D; tetrahedra force 3D. Physical-group tags are kept as facet
/// markers; facets are inferred when the file lists none. Throws ParseError
/// with the offending line number.
SimplicialMesh import_gmsh(const std::string& path);
SimplicialMesh import_gmsh(std::istream& in, const std::string& name);

/// Version-tagged structured-text mesh dump; import_native round-trips it
/// with identical connectivity.
void export_native(const SimplicialMesh& mesh, const std::string& path);
void export_native(const SimplicialMesh& mesh, std::ostream& out);
SimplicialMesh import_native(const std::string& path);
SimplicialMesh import_native(std::istream& in, const std::string& name);

}  // namespace eit
