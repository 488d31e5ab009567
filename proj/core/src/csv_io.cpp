#include "accspec/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "accspec/error.hpp"

namespace accspec {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "csv row has " + std::to_string(cells.size()) + " cells, expected " +
                                                 std::to_string(header_.size()));
  }
  rows_.push_back(std::move(cells));
  return *this;
}

void CsvTable::write(std::ostream& os) const {
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

void CsvTable::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  write(out);
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

CsvTable points_table(const Lattice2& lat, const std::vector<LatticePoint>& points) {
  CsvTable t({"i", "j", "x", "y"});
  for (const LatticePoint& p : points) {
    const Vec2 z = lat.point(p);
    t.row({std::to_string(p.i), std::to_string(p.j), format_double(z.x), format_double(z.y)});
  }
  return t;
}

CsvTable field_table(const LatticeField& field) {
  CsvTable t({"i", "j", "x", "y", "value"});
  for (std::size_t k = 0; k < field.points.size(); ++k) {
    const Vec2 z = field.lattice.point(field.points[k]);
    t.row({std::to_string(field.points[k].i), std::to_string(field.points[k].j), format_double(z.x),
           format_double(z.y), format_double(field.values[k])});
  }
  return t;
}

CsvTable spectrum_table(const Eigen::VectorXd& eigenvalues) {
  CsvTable t({"k", "lambda"});
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    t.row({std::to_string(k + 1), format_double(eigenvalues(k))});
  }
  return t;
}

}  // namespace accspec
