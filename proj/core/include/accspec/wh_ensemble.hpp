#pragma once

#include <optional>
#include <vector>

#include "accspec/lattice_kernel.hpp"
#include "accspec/window_kernel.hpp"

namespace accspec {

inline constexpr double kTightnessGate = 0.99;

struct VarianceOptions {
  /// A/B of the frame; estimated with frame_bounds_estimate when unset.
  std::optional<double> tightness;
  bool allow_nontight = false;
};

/// Number variance of the lattice Weyl-Heisenberg ensemble in B(0, R):
/// sum_{lambda in B} |g|^2 - sum_{lambda, lambda' in B} |<pi(lambda')g, pi(lambda)g>|^2.
double number_variance(const LatticeKernel& kernel, double radius);

/// Same, after checking the tightness gate (kTightness unless overridden).
double number_variance(const LatticeKernel& kernel, double radius, double tightness, bool allow_nontight);

struct VarianceCurve {
  std::vector<double> radii;
  std::vector<double> variances;
  std::vector<std::size_t> counts;  // lattice points in each ball
  double slope_fit = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;  // log V - (intercept + slope log R)
  double window_tightness = 0.0;
};

/// Ordinary least-squares slope and intercept of y on x.
std::pair<double, double> ols_fit(const std::vector<double>& x, const std::vector<double>& y);

VarianceCurve variance_scan(const Window& w, const Lattice2& lat, const std::vector<double>& radii,
                            const VarianceOptions& opts = {});

}  // namespace accspec
