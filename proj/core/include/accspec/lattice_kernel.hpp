#pragma once

#include <vector>

#include "accspec/lattice_geom.hpp"
#include "accspec/window_kernel.hpp"

namespace accspec {

/// Reproducing kernel of a Gabor system restricted to lattice points.
///
/// V_g g is tabulated once for every integer coefficient difference inside a
/// box of the given radius, so Gram entries and variance sums become table
/// lookups. Differences outside the table fall back to direct evaluation.
class LatticeKernel {
 public:
  LatticeKernel(Window w, Lattice2 lat, double table_radius);

  const Window& window() const { return window_; }
  const Lattice2& lattice() const { return lattice_; }
  double table_radius() const { return table_radius_; }

  /// V_g g at the lattice point with coefficients d.
  cdouble ambiguity(LatticePoint d) const;
  double ambiguity_sq(LatticePoint d) const { return std::norm(ambiguity(d)); }

  /// <pi(src) g, pi(dst) g> for lattice points.
  cdouble cross_inner(LatticePoint src, LatticePoint dst) const;
  /// <pi(src) g, pi(dst) g> for a lattice source and an arbitrary target.
  cdouble cross_inner(LatticePoint src, Vec2 dst) const;

  /// Test hook: evaluate the shift phase at the target instead of the source.
  /// The resulting Gram matrix is no longer Hermitian, which the identity
  /// checks must detect.
  void set_corrupt_phase(bool on) { corrupt_phase_ = on; }
  bool corrupt_phase() const { return corrupt_phase_; }

 private:
  Window window_;
  Lattice2 lattice_;
  double table_radius_;
  CoefficientBox box_{};
  std::vector<cdouble> table_;
  bool corrupt_phase_ = false;
};

}  // namespace accspec
