#include "fluxpot/io.hpp"

#include <fstream>
#include <sstream>

#include "fluxpot/error.hpp"

namespace fluxpot {

FieldFormat format_from_path(const std::string& path) {
  if (path.ends_with(".vtk")) return FieldFormat::Vtk;
  if (path.ends_with(".csv")) return FieldFormat::Csv;
  throw ContractViolation("unknown field format for " + path);
}

void write_field(const Mesh& mesh, std::span<const double> u, const std::string& path, FieldFormat format) {
  if (u.size() != mesh.num_nodes()) throw ContractViolation("write_field: size mismatch");
  std::ofstream os(path);
  if (!os) throw Error("write_field: cannot open " + path);
  os.precision(17);
  if (format == FieldFormat::Csv) {
    os << "x,y,u\n";
    for (std::size_t i = 0; i < u.size(); ++i)
      os << mesh.nodes()[i].x << ',' << mesh.nodes()[i].y << ',' << u[i] << '\n';
  } else {
    os << "# vtk DataFile Version 3.0\nfluxpot field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.num_nodes() << " double\n";
    for (const auto& p : mesh.nodes()) os << p.x << ' ' << p.y << " 0\n";
    os << "CELLS " << mesh.num_cells() << ' ' << 5 * mesh.num_cells() << '\n';
    for (const auto& c : mesh.cells()) os << "4 " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
    os << "CELL_TYPES " << mesh.num_cells() << '\n';
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) os << "9\n";
    os << "POINT_DATA " << mesh.num_nodes() << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
    for (double v : u) os << v << '\n';
  }
  if (!os) throw Error("write_field: write failed for " + path);
}

std::vector<FieldSample> read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("read_field_csv: cannot open " + path);
  std::string line;
  std::getline(is, line);
  if (line != "x,y,u") throw Error("read_field_csv: unexpected header in " + path);
  std::vector<FieldSample> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    FieldSample s{};
    char c1 = 0, c2 = 0;
    if (!(ls >> s.x >> c1 >> s.y >> c2 >> s.u) || c1 != ',' || c2 != ',')
      throw Error("read_field_csv: malformed row in " + path);
    out.push_back(s);
  }
  return out;
}

}  // namespace fluxpot
