#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

#include "accspec/lattice_geom.hpp"

namespace accspec {

/// Shortest decimal form that round-trips a double ("%.17g").
std::string format_double(double v);

/// Minimal CSV table: a header row and rows of preformatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row(std::vector<std::string> cells);
  void write(std::ostream& os) const;
  void write_file(const std::string& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

CsvTable points_table(const Lattice2& lat, const std::vector<LatticePoint>& points);
CsvTable field_table(const LatticeField& field);
CsvTable spectrum_table(const Eigen::VectorXd& eigenvalues);

}  // namespace accspec
