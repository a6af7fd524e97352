#include "eit/dataset_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace eit {

namespace {

void print_value(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& message) {
  throw ParseError(name + ":" + std::to_string(line) + ": " + message);
}

}  // namespace

void save_dataset(const CauchyDataSet& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open dataset file for writing: " + path);
  save_dataset(data, out);
}

void save_dataset(const CauchyDataSet& data, std::ostream& out) {
  char buf[40];
  out << "eit-cauchy-data v1\n";
  out << "dim " << data.dim << "\n";
  out << "vertices " << data.n_vertices << "\n";
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, data.mesh_id);
  out << "mesh_hash " << buf << "\n";
  out << "gamma_d " << data.gamma_d_name << "\n";
  out << "epsilon ";
  print_value(out, data.epsilon);
  out << "\nseed " << data.seed << "\n";
  out << "K " << data.size() << "\n";
  out << "gamma_d_vertices " << data.gamma_d_vertices.size() << "\n";
  for (const Index v : data.gamma_d_vertices) out << v << "\n";

  for (int k = 0; k < data.size(); ++k) {
    const BoundaryPattern& g = data.patterns[static_cast<size_t>(k)];
    out << "pattern " << g.degree << " " << g.order << "\n";
    Index nnz = 0;
    for (Index v = 0; v < g.values.size(); ++v)
      if (g.values[v] != 0.0) ++nnz;
    out << "support " << nnz << "\n";
    for (Index v = 0; v < g.values.size(); ++v)
      if (g.values[v] != 0.0) {
        out << v << " ";
        print_value(out, g.values[v]);
        out << "\n";
      }
    out << "trace\n";
    for (const Index v : data.gamma_d_vertices) {
      print_value(out, data.traces[static_cast<size_t>(k)][v]);
      out << "\n";
    }
  }
}

CauchyDataSet load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);
  return load_dataset(in, path);
}

CauchyDataSet load_dataset(std::istream& in, const std::string& name) {
  int line_no = 0;
  std::string line;
  const auto next = [&](const char* what) -> std::string& {
    if (!std::getline(in, line)) fail(name, line_no, std::string("missing ") + what);
    ++line_no;
    return line;
  };

  if (next("header") != "eit-cauchy-data v1")
    fail(name, line_no, "not an eit-cauchy-data v1 file");

  CauchyDataSet data;
  long n_vertices = 0, n_measured = 0;
  int K = 0;
  if (std::sscanf(next("dim").c_str(), "dim %d", &data.dim) != 1)
    fail(name, line_no, "expected 'dim <d>'");
  if (std::sscanf(next("vertices").c_str(), "vertices %ld", &n_vertices) != 1)
    fail(name, line_no, "expected 'vertices <n>'");
  data.n_vertices = n_vertices;
  {
    char hash[64];
    if (std::sscanf(next("mesh_hash").c_str(), "mesh_hash %63s", hash) != 1)
      fail(name, line_no, "expected 'mesh_hash <hex>'");
    data.mesh_id = std::strtoull(hash, nullptr, 16);
  }
  {
    char label[64];
    if (std::sscanf(next("gamma_d").c_str(), "gamma_d %63s", label) != 1)
      fail(name, line_no, "expected 'gamma_d <name>'");
    data.gamma_d_name = label;
  }
  if (std::sscanf(next("epsilon").c_str(), "epsilon %lf", &data.epsilon) != 1)
    fail(name, line_no, "expected 'epsilon <value>'");
  if (std::sscanf(next("seed").c_str(), "seed %" SCNu64, &data.seed) != 1)
    fail(name, line_no, "expected 'seed <value>'");
  if (std::sscanf(next("K").c_str(), "K %d", &K) != 1 || K < 0)
    fail(name, line_no, "expected 'K <count>'");
  if (std::sscanf(next("gamma_d_vertices").c_str(), "gamma_d_vertices %ld",
                  &n_measured) != 1)
    fail(name, line_no, "expected 'gamma_d_vertices <count>'");
  for (long i = 0; i < n_measured; ++i) {
    long v = 0;
    if (std::sscanf(next("vertex id").c_str(), "%ld", &v) != 1 || v < 0 ||
        v >= n_vertices)
      fail(name, line_no, "bad measured vertex id");
    data.gamma_d_vertices.push_back(v);
  }

  for (int k = 0; k < K; ++k) {
    BoundaryPattern g;
    if (std::sscanf(next("pattern").c_str(), "pattern %d %d", &g.degree, &g.order) != 2)
      fail(name, line_no, "expected 'pattern <degree> <order>'");
    long nnz = 0;
    if (std::sscanf(next("support").c_str(), "support %ld", &nnz) != 1)
      fail(name, line_no, "expected 'support <count>'");
    g.values = Vector::Zero(n_vertices);
    for (long i = 0; i < nnz; ++i) {
      long v = 0;
      double value = 0.0;
      if (std::sscanf(next("support entry").c_str(), "%ld %lf", &v, &value) != 2 ||
          v < 0 || v >= n_vertices)
        fail(name, line_no, "bad pattern support entry");
      g.values[v] = value;
    }
    if (next("trace") != "trace") fail(name, line_no, "expected 'trace'");
    Vector f = Vector::Zero(n_vertices);
    for (const Index v : data.gamma_d_vertices) {
      double value = 0.0;
      if (std::sscanf(next("trace value").c_str(), "%lf", &value) != 1)
        fail(name, line_no, "bad trace value");
      f[v] = value;
    }
    data.patterns.push_back(std::move(g));
    data.traces.push_back(std::move(f));
  }

  return data;
}

}  // namespace eit
