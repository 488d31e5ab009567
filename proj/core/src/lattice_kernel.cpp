#include "accspec/lattice_kernel.hpp"

#include <cmath>
#include <numbers>

#include "accspec/summation.hpp"

namespace accspec {

LatticeKernel::LatticeKernel(Window w, Lattice2 lat, double table_radius)
    : window_(std::move(w)), lattice_(lat), table_radius_(table_radius) {
  box_ = coefficient_box(lattice_, {-table_radius, -table_radius}, {table_radius, table_radius});
  const auto ni = static_cast<std::size_t>(box_.i_hi - box_.i_lo + 1);
  const auto nj = static_cast<std::size_t>(box_.j_hi - box_.j_lo + 1);
  table_.assign(ni * nj, cdouble(0.0, 0.0));
  parallel_for(table_.size(), [&](std::size_t idx) {
    const LatticePoint d{box_.i_lo + static_cast<std::int64_t>(idx / nj),
                         box_.j_lo + static_cast<std::int64_t>(idx % nj)};
    table_[idx] = window_.ambiguity(lattice_.point(d));
  });
}

cdouble LatticeKernel::ambiguity(LatticePoint d) const {
  if (d.i < box_.i_lo || d.i > box_.i_hi || d.j < box_.j_lo || d.j > box_.j_hi) {
    return window_.ambiguity(lattice_.point(d));
  }
  const auto nj = static_cast<std::size_t>(box_.j_hi - box_.j_lo + 1);
  return table_[static_cast<std::size_t>(d.i - box_.i_lo) * nj + static_cast<std::size_t>(d.j - box_.j_lo)];
}

cdouble LatticeKernel::cross_inner(LatticePoint src, LatticePoint dst) const {
  const Vec2 a = lattice_.point(src);
  const Vec2 b = lattice_.point(dst);
  if (corrupt_phase_) {
    return std::polar(1.0, 2.0 * std::numbers::pi * (a.y - b.y) * b.x) * ambiguity(dst - src);
  }
  return shift_phase(a, b) * ambiguity(dst - src);
}

cdouble LatticeKernel::cross_inner(LatticePoint src, Vec2 dst) const {
  const Vec2 a = lattice_.point(src);
  const auto c = lattice_.coefficients(dst);
  const LatticePoint near{static_cast<std::int64_t>(std::llround(c[0])), static_cast<std::int64_t>(std::llround(c[1]))};
  const Vec2 back = lattice_.point(near);
  if (std::abs(back.x - dst.x) <= 1e-12 * (1.0 + std::abs(dst.x)) &&
      std::abs(back.y - dst.y) <= 1e-12 * (1.0 + std::abs(dst.y))) {
    return cross_inner(src, near);
  }
  return shift_phase(a, dst) * window_.ambiguity(dst - a);
}

}  // namespace accspec
