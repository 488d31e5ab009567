#include "accspec/wh_ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "accspec/error.hpp"
#include "accspec/summation.hpp"

namespace accspec {

double number_variance(const LatticeKernel& kernel, double radius) {
  if (!(radius >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "radius must be >= 0");
  const std::vector<LatticePoint> pts = points_in_mask(Mask::ball({0.0, 0.0}, radius), kernel.lattice());
  if (pts.empty()) return 0.0;
  std::vector<double> rows(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    std::vector<double> terms(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j) terms[j] = kernel.ambiguity_sq(pts[i] - pts[j]);
    rows[i] = pairwise_sum(terms);
  });
  const double diag = static_cast<double>(pts.size()) * kernel.window().l2_norm_sq();
  return diag - pairwise_sum(rows);
}

double number_variance(const LatticeKernel& kernel, double radius, double tightness, bool allow_nontight) {
  if (tightness < kTightnessGate && !allow_nontight) {
    throw Error(ErrorCode::kTightness, "frame tightness " + std::to_string(tightness) +
                                           " is below the 0.99 gate; pass the override to run anyway");
  }
  return number_variance(kernel, radius);
}

std::pair<double, double> ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / n;
  const double my = pairwise_sum(y) / n;
  std::vector<double> sxy(x.size()), sxx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy[i] = (x[i] - mx) * (y[i] - my);
    sxx[i] = (x[i] - mx) * (x[i] - mx);
  }
  const double slope = pairwise_sum(sxy) / pairwise_sum(sxx);
  return {slope, my - slope * mx};
}

VarianceCurve variance_scan(const Window& w, const Lattice2& lat, const std::vector<double>& radii,
                            const VarianceOptions& opts) {
  if (radii.size() < 4) throw Error(ErrorCode::kInvalidArgument, "variance_scan needs at least 4 radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
      throw Error(ErrorCode::kInvalidArgument, "variance_scan radii must be positive and strictly ascending");
    }
  }
  VarianceCurve curve;
  curve.window_tightness = opts.tightness ? *opts.tightness : frame_bounds_estimate(w, lat).tightness();
  if (curve.window_tightness < kTightnessGate && !opts.allow_nontight) {
    throw Error(ErrorCode::kTightness, "frame tightness " + std::to_string(curve.window_tightness) +
                                           " is below the 0.99 gate; pass the override to run anyway");
  }
  const LatticeKernel kernel(w, lat, 2.0 * radii.back());
  std::vector<double> lx, ly;
  for (double r : radii) {
    const double v = number_variance(kernel, r);
    curve.radii.push_back(r);
    curve.variances.push_back(v);
    curve.counts.push_back(points_in_mask(Mask::ball({0.0, 0.0}, r), lat).size());
    if (!(v > 0.0)) throw Error(ErrorCode::kNumerical, "number variance is not positive; cannot fit a log-log slope");
    lx.push_back(std::log(r));
    ly.push_back(std::log(v));
  }
  std::tie(curve.slope_fit, curve.intercept) = ols_fit(lx, ly);
  for (std::size_t i = 0; i < lx.size(); ++i) curve.residuals.push_back(ly[i] - (curve.intercept + curve.slope_fit * lx[i]));
  return curve;
}

}  // namespace accspec
