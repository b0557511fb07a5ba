#pragma once

#include <string>
#include <vector>

#include "fluxpot/mesh.hpp"
#include "fluxpot/sparse.hpp"

namespace fluxpot {

enum class FieldFormat { Vtk, Csv };

/// Format from the file extension: .vtk or .csv.
FieldFormat format_from_path(const std::string& path);

/// Legacy ASCII VTK unstructured grid of quads (cell type 9) with the nodal
/// values as POINT_DATA, or CSV rows x,y,u in node order.
void write_field(const Mesh& mesh, std::span<const double> u, const std::string& path, FieldFormat format);

struct FieldSample {
  double x;
  double y;
  double u;
};

/// Reads a CSV written by write_field.
std::vector<FieldSample> read_field_csv(const std::string& path);

}  // namespace fluxpot
