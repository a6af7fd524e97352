#include "eit/mesh_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace eit {

namespace {

struct LineReader {
  std::istream& in;
  std::string name;
  int line_no = 0;

  bool next(std::string& line) {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(name + ":" + std::to_string(line_no) + ": " + message);
  }
};

struct GmshElement {
  int type = 0;
  int tag = 0;
  std::vector<int> nodes;
};

}  // namespace

SimplicialMesh import_gmsh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file: " + path);
  return import_gmsh(in, path);
}

SimplicialMesh import_gmsh(std::istream& in, const std::string& name) {
  LineReader reader{in, name};
  std::string line;

  std::map<long, int> node_ids;   // gmsh id -> dense index
  std::vector<Eigen::Vector3d> nodes;
  std::vector<GmshElement> elements;
  bool saw_format = false;

  while (reader.next(line)) {
    if (line == "$MeshFormat") {
      if (!reader.next(line)) reader.fail("unexpected end of file in $MeshFormat");
      double version = 0.0;
      int file_type = 0, data_size = 0;
      if (std::sscanf(line.c_str(), "%lf %d %d", &version, &file_type, &data_size) != 3)
        reader.fail("malformed $MeshFormat header");
      if (version < 2.0 || version >= 3.0 || file_type != 0)
        reader.fail("unsupported Gmsh format (need ASCII v2.x)");
      saw_format = true;
    } else if (line == "$Nodes") {
      if (!reader.next(line)) reader.fail("unexpected end of file in $Nodes");
      long count = 0;
      if (std::sscanf(line.c_str(), "%ld", &count) != 1 || count < 0)
        reader.fail("malformed node count");
      for (long i = 0; i < count; ++i) {
        if (!reader.next(line)) reader.fail("unexpected end of file in $Nodes");
        long id;
        double x, y, z;
        if (std::sscanf(line.c_str(), "%ld %lf %lf %lf", &id, &x, &y, &z) != 4)
          reader.fail("malformed node line");
        if (!node_ids.emplace(id, static_cast<int>(nodes.size())).second)
          reader.fail("duplicate node id " + std::to_string(id));
        nodes.emplace_back(x, y, z);
      }
    } else if (line == "$Elements") {
      if (!reader.next(line)) reader.fail("unexpected end of file in $Elements");
      long count = 0;
      if (std::sscanf(line.c_str(), "%ld", &count) != 1 || count < 0)
        reader.fail("malformed element count");
      for (long i = 0; i < count; ++i) {
        if (!reader.next(line)) reader.fail("unexpected end of file in $Elements");
        std::istringstream fields(line);
        long id;
        int type, ntags;
        if (!(fields >> id >> type >> ntags))
          reader.fail("malformed element line");
        GmshElement element;
        element.type = type;
        for (int t = 0; t < ntags; ++t) {
          int tag;
          if (!(fields >> tag)) reader.fail("element " + std::to_string(id) + ": missing tag");
          if (t == 0) element.tag = tag;  // physical group
        }
        static const std::map<int, int> nodes_per_type = {{1, 2}, {2, 3}, {4, 4}, {15, 1}};
        auto it = nodes_per_type.find(type);
        if (it == nodes_per_type.end()) continue;  // unsupported types are skipped
        for (int v = 0; v < it->second; ++v) {
          long node;
          if (!(fields >> node))
            reader.fail("element " + std::to_string(id) + ": missing node");
          auto found = node_ids.find(node);
          if (found == node_ids.end())
            reader.fail("element " + std::to_string(id) + " references unknown node " +
                        std::to_string(node));
          element.nodes.push_back(found->second);
        }
        elements.push_back(std::move(element));
      }
    }
    // other sections ($PhysicalNames, ...) are skipped line by line
  }

  if (!saw_format) throw ParseError(name + ": missing $MeshFormat section");
  if (nodes.empty()) throw ParseError(name + ": no nodes");

  bool has_tet = false, has_tri = false;
  for (const auto& e : elements) {
    has_tet |= e.type == 4;
    has_tri |= e.type == 2;
  }
  int dim = 0;
  if (has_tet)
    dim = 3;
  else if (has_tri)
    dim = 2;
  else
    throw ParseError(name + ": no triangles or tetrahedra found");

  SimplicialMesh mesh;
  mesh.dim = dim;
  mesh.vertices.resize(static_cast<Index>(nodes.size()), dim);
  for (size_t v = 0; v < nodes.size(); ++v)
    for (int a = 0; a < dim; ++a) mesh.vertices(static_cast<Index>(v), a) = nodes[v][a];

  const int cell_type = dim == 2 ? 2 : 4;
  const int facet_type = dim == 2 ? 1 : 2;
  std::vector<const GmshElement*> cell_elems, facet_elems;
  for (const auto& e : elements) {
    if (e.type == cell_type) cell_elems.push_back(&e);
    if (e.type == facet_type) facet_elems.push_back(&e);
  }
  if (cell_elems.empty()) throw ParseError(name + ": empty cell list");

  mesh.cells.resize(static_cast<Index>(cell_elems.size()), dim + 1);
  for (size_t c = 0; c < cell_elems.size(); ++c)
    for (int i = 0; i <= dim; ++i)
      mesh.cells(static_cast<Index>(c), i) = cell_elems[c]->nodes[static_cast<size_t>(i)];

  if (!facet_elems.empty()) {
    mesh.boundary_facets.resize(static_cast<Index>(facet_elems.size()), dim);
    mesh.facet_markers.resize(static_cast<Index>(facet_elems.size()));
    for (size_t f = 0; f < facet_elems.size(); ++f) {
      for (int i = 0; i < dim; ++i)
        mesh.boundary_facets(static_cast<Index>(f), i) =
            facet_elems[f]->nodes[static_cast<size_t>(i)];
      mesh.facet_markers[static_cast<Index>(f)] =
          facet_elems[f]->tag != 0 ? facet_elems[f]->tag : 1;
    }
  }

  finalize_mesh(mesh);
  return mesh;
}

void export_native(const SimplicialMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  export_native(mesh, out);
}

void export_native(const SimplicialMesh& mesh, std::ostream& out) {
  char buf[64];
  out << "eit-mesh v1\n";
  out << "dim " << mesh.dim << "\n";
  out << "vertices " << mesh.num_vertices() << "\n";
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    for (int a = 0; a < mesh.dim; ++a) {
      std::snprintf(buf, sizeof(buf), "%.17g", mesh.vertices(v, a));
      out << (a ? " " : "") << buf;
    }
    out << "\n";
  }
  out << "cells " << mesh.num_cells() << "\n";
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    for (int i = 0; i <= mesh.dim; ++i) out << (i ? " " : "") << mesh.cells(c, i);
    out << "\n";
  }
  out << "facets " << mesh.num_boundary_facets() << "\n";
  for (Index f = 0; f < mesh.num_boundary_facets(); ++f) {
    for (int i = 0; i < mesh.dim; ++i) out << mesh.boundary_facets(f, i) << " ";
    out << mesh.facet_markers[f] << "\n";
  }
}

SimplicialMesh import_native(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file: " + path);
  return import_native(in, path);
}

SimplicialMesh import_native(std::istream& in, const std::string& name) {
  LineReader reader{in, name};
  std::string line;
  if (!reader.next(line) || line != "eit-mesh v1")
    throw ParseError(name + ": not an eit-mesh v1 file");

  SimplicialMesh mesh;
  long nv = 0, nc = 0, nf = 0;
  if (!reader.next(line) || std::sscanf(line.c_str(), "dim %d", &mesh.dim) != 1)
    reader.fail("expected 'dim <d>'");
  if (mesh.dim != 2 && mesh.dim != 3) reader.fail("dimension must be 2 or 3");
  if (!reader.next(line) || std::sscanf(line.c_str(), "vertices %ld", &nv) != 1)
    reader.fail("expected 'vertices <n>'");
  mesh.vertices.resize(nv, mesh.dim);
  for (long v = 0; v < nv; ++v) {
    if (!reader.next(line)) reader.fail("unexpected end of vertex list");
    std::istringstream fields(line);
    for (int a = 0; a < mesh.dim; ++a)
      if (!(fields >> mesh.vertices(v, a))) reader.fail("malformed vertex line");
  }
  if (!reader.next(line) || std::sscanf(line.c_str(), "cells %ld", &nc) != 1)
    reader.fail("expected 'cells <n>'");
  mesh.cells.resize(nc, mesh.dim + 1);
  for (long c = 0; c < nc; ++c) {
    if (!reader.next(line)) reader.fail("unexpected end of cell list");
    std::istringstream fields(line);
    for (int i = 0; i <= mesh.dim; ++i)
      if (!(fields >> mesh.cells(c, i))) reader.fail("malformed cell line");
  }
  if (!reader.next(line) || std::sscanf(line.c_str(), "facets %ld", &nf) != 1)
    reader.fail("expected 'facets <n>'");
  mesh.boundary_facets.resize(nf, mesh.dim);
  mesh.facet_markers.resize(nf);
  for (long f = 0; f < nf; ++f) {
    if (!reader.next(line)) reader.fail("unexpected end of facet list");
    std::istringstream fields(line);
    for (int i = 0; i < mesh.dim; ++i)
      if (!(fields >> mesh.boundary_facets(f, i))) reader.fail("malformed facet line");
    if (!(fields >> mesh.facet_markers[f])) reader.fail("missing facet marker");
  }

  finalize_mesh(mesh, /*reorient=*/false);
  return mesh;
}

}  // namespace eit
