#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "accspec/lattice_geom.hpp"

namespace accspec {

using cdouble = std::complex<double>;

/// Uniformly sampled window with implicit zero extension outside the grid.
struct SampledGrid {
  double lo = 0.0;
  double step = 0.0;
  std::vector<cdouble> samples;

  double t(std::size_t i) const { return lo + static_cast<double>(i) * step; }
  double hi() const { return t(samples.empty() ? 0 : samples.size() - 1); }
};

/// Window function g with an evaluable ambiguity kernel.
///
/// Time-frequency shifts follow pi(x, w) f(t) = exp(2 pi i w t) f(t - x) and
/// V_g f(z) = <f, pi(z) g>. Gaussian and Hermite windows use closed forms
/// (the Gaussian is the order-0 Hermite function 2^(1/4) exp(-pi t^2)).
/// Sampled windows use the discrete inner product on their grid: shifts that
/// land on the grid are exact index shifts, other shifts use 4-point cubic
/// interpolation, and frequencies above the grid's Nyquist limit give 0.
class Window {
 public:
  enum class Kind { kGaussian, kHermite, kSampled };

  static Window gaussian();
  static Window hermite(int order);
  static Window sampled(double grid_lo, double step, std::vector<cdouble> samples);
  /// "gaussian", "hermite:<n>", or "file:<path.csv>".
  static Window parse(std::string_view spec);

  Kind kind() const { return kind_; }
  bool is_hermite_family() const { return kind_ != Kind::kSampled; }
  int hermite_order() const { return order_; }
  const SampledGrid& grid() const;
  std::string describe() const;

  double l2_norm_sq() const { return l2_norm_sq_; }
  /// Largest frequency resolved by a sampled grid; infinity otherwise.
  double nyquist() const;

  cdouble evaluate(double t) const;
  /// V_g g(z).
  cdouble ambiguity(Vec2 z) const;
  /// V_g f(z) = <f, pi(z) g>, with this window as g.
  cdouble cross_ambiguity(const Window& f, Vec2 z) const;
  /// <pi(src) g, pi(dst) g>.
  cdouble cross_inner(Vec2 src, Vec2 dst) const;

  Window scaled(double factor) const;

 private:
  Window(Kind kind, int order, std::shared_ptr<const SampledGrid> grid);

  Kind kind_;
  int order_ = 0;
  std::shared_ptr<const SampledGrid> grid_;
  double l2_norm_sq_ = 1.0;
};

/// Normalized Hermite function of the given order at t.
double hermite_function(int order, double t);

/// Closed-form V_{h_m} h_n(z) for normalized Hermite functions.
cdouble hermite_cross_ambiguity(int window_order, int probe_order, Vec2 z);

/// Phase factor exp(2 pi i (w_src - w_dst) x_src) relating <pi(src)g, pi(dst)g>
/// to V_g g(dst - src).
cdouble shift_phase(Vec2 src, Vec2 dst);

void write_window_csv(std::ostream& os, const Window& w);
Window read_window_csv(std::istream& is);
Window read_window_csv_file(const std::string& path);
void write_window_csv_file(const std::string& path, const Window& w);

struct MStarNorm {
  double value = 0.0;
  double tail_estimate = 0.0;  // last shell's contribution to the squared sum
  bool tail_negligible = false;  // tail below 1e-8 of the squared sum
  double truncation_radius = 0.0;
};

/// (sum over |lambda| <= truncation_radius of |lambda| |V_g g(lambda)|^2)^(1/2),
/// summed shell by shell with shells of width l_fund.
MStarNorm mstar_norm(const Window& w, const Lattice2& lat, double truncation_radius);

struct DecayFit {
  double c_fit = 0.0;
  bool ok = false;
  double worst_ratio = 0.0;  // max |V_g g| (1+|z|)^s / c_fit on the validation grid
};

/// Fits the smallest C with |V_g g(z)| <= C (1+|z|)^-s on a polar grid and
/// validates it on an offset grid with 1% slack.
DecayFit decay_check(const Window& w, double s, double sample_radius);

/// True when V_g g(lambda) is nonzero for every lattice point in B(0, radius).
bool nonvanishing_on_lattice(const Window& w, const Lattice2& lat, double radius);

struct FrameBounds {
  double lower = 0.0;
  double upper = 0.0;
  int probes = 0;
  /// Rayleigh quotients only bound the true frame bounds from the inside.
  bool inner_estimate = true;

  double tightness() const { return upper > 0.0 ? lower / upper : 0.0; }
};

/// Rayleigh-quotient estimates of the frame bounds of (w, lat) from probes
/// pi(z)g, pi(z)h1, pi(z)h2 with z on a grid over the fundamental domain.
FrameBounds frame_bounds_estimate(const Window& w, const Lattice2& lat, int probe_count = 16);

struct TightWindowOptions {
  double grid_halfwidth = 6.0;
  int grid_points = 1024;
  double lattice_box_radius = 8.0;
};

struct TightWindow {
  Window window;
  FrameBounds bounds;      // of the returned (rescaled) window
  double step = 0.0;
  bool lattice_aligned = false;  // lattice time shifts land on the grid
  double floored_energy = 0.0;   // fraction of |g|^2 in floored eigendirections
  double rescale = 1.0;
};

/// Canonical tight window S^(-1/2) g computed from the sampled frame operator,
/// rescaled to frame constant 1. The grid step is snapped down so that lattice
/// time coordinates are integer multiples of it whenever the lattice allows.
TightWindow canonical_tight_window(const Window& w, const Lattice2& lat, const TightWindowOptions& opts = {});

}  // namespace accspec
