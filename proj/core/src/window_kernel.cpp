#include "accspec/window_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "accspec/error.hpp"
#include "accspec/summation.hpp"

namespace accspec {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool grid_shift(double x, double step, std::int64_t& m) {
  const double u = x / step;
  const double r = std::round(u);
  if (std::abs(u - r) > 1e-7) return false;
  m = static_cast<std::int64_t>(r);
  return true;
}

cdouble sample_at(const SampledGrid& g, std::int64_t idx) {
  if (idx < 0 || idx >= static_cast<std::int64_t>(g.samples.size())) return {0.0, 0.0};
  return g.samples[static_cast<std::size_t>(idx)];
}

// 4-point Lagrange interpolation with zero extension; exact at grid nodes.
cdouble interpolate(const SampledGrid& g, double t) {
  const double u = (t - g.lo) / g.step;
  const double n = static_cast<double>(g.samples.size());
  if (u < -2.0 || u > n + 1.0) return {0.0, 0.0};
  const double k = std::floor(u);
  const double f = u - k;
  const auto ki = static_cast<std::int64_t>(k);
  if (f < 1e-9) return sample_at(g, ki);
  if (1.0 - f < 1e-9) return sample_at(g, ki + 1);
  const double wm1 = -f * (f - 1.0) * (f - 2.0) / 6.0;
  const double w0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
  const double w1 = -(f + 1.0) * f * (f - 2.0) / 2.0;
  const double w2 = (f + 1.0) * f * (f - 1.0) / 6.0;
  return wm1 * sample_at(g, ki - 1) + w0 * sample_at(g, ki) + w1 * sample_at(g, ki + 1) + w2 * sample_at(g, ki + 2);
}

void require_resolution(const SampledGrid& g) {
  if (g.samples.size() < 4) {
    throw Error(ErrorCode::kInsufficientResolution, "sampled window needs at least 4 samples");
  }
}

double generalized_laguerre(int n, double alpha, double x) {
  if (n == 0) return 1.0;
  double lm1 = 1.0;
  double l = 1.0 + alpha - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * l - (k + alpha) * lm1) / (k + 1.0);
    lm1 = l;
    l = next;
  }
  return l;
}

cdouble int_pow(cdouble w, int k) {
  cdouble r(1.0, 0.0);
  for (int i = 0; i < k; ++i) r *= w;
  return r;
}

// V_g f(x, w) with g sampled and f sampled: sum over f's grid.
cdouble sampled_sampled(const SampledGrid& g, const SampledGrid& f, Vec2 z) {
  const double h = f.step;
  const auto nf = static_cast<std::int64_t>(f.samples.size());
  cdouble acc(0.0, 0.0);
  std::int64_t off = 0;
  const bool same_step = std::abs(f.step - g.step) <= 1e-12 * f.step;
  if (same_step && grid_shift(f.lo - z.x - g.lo, h, off)) {
    // g(t_i - x) is sample i + off of g.
    const auto ng = static_cast<std::int64_t>(g.samples.size());
    const std::int64_t i0 = std::max<std::int64_t>(0, -off);
    const std::int64_t i1 = std::min<std::int64_t>(nf, ng - off);
    for (std::int64_t i = i0; i < i1; ++i) {
      const double t = f.t(static_cast<std::size_t>(i));
      acc += f.samples[static_cast<std::size_t>(i)] * std::conj(g.samples[static_cast<std::size_t>(i + off)]) *
             std::polar(1.0, -kTwoPi * z.y * t);
    }
    return h * acc;
  }
  for (std::int64_t i = 0; i < nf; ++i) {
    const double t = f.t(static_cast<std::size_t>(i));
    const cdouble gv = interpolate(g, t - z.x);
    if (gv == cdouble(0.0, 0.0)) continue;
    acc += f.samples[static_cast<std::size_t>(i)] * std::conj(gv) * std::polar(1.0, -kTwoPi * z.y * t);
  }
  return h * acc;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double hermite_function(int order, double t) {
  const double u = std::sqrt(kTwoPi) * t;
  double prev = 0.0;
  double cur = std::pow(2.0, 0.25) * std::exp(-kPi * t * t);
  for (int k = 0; k < order; ++k) {
    const double next = std::sqrt(2.0 / (k + 1.0)) * u * cur - std::sqrt(k / (k + 1.0)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

cdouble hermite_cross_ambiguity(int m, int n, Vec2 z) {
  const double a = kPi * (z.x * z.x + z.y * z.y);
  const cdouble chirp = std::polar(1.0, -kPi * z.x * z.y);
  const double envelope = std::exp(-a / 2.0);
  const double sqrt_pi = std::sqrt(kPi);
  if (n >= m) {
    const int k = n - m;
    const double coef = std::exp(0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0)));
    const cdouble w = sqrt_pi * cdouble(z.x, -z.y);
    return chirp * coef * int_pow(w, k) * generalized_laguerre(m, k, a) * envelope;
  }
  const int k = m - n;
  const double coef = std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)));
  const cdouble w = -sqrt_pi * cdouble(z.x, z.y);
  return chirp * coef * int_pow(w, k) * generalized_laguerre(n, k, a) * envelope;
}

cdouble shift_phase(Vec2 src, Vec2 dst) { return std::polar(1.0, kTwoPi * (src.y - dst.y) * src.x); }

Window::Window(Kind kind, int order, std::shared_ptr<const SampledGrid> grid)
    : kind_(kind), order_(order), grid_(std::move(grid)) {
  if (grid_) {
    std::vector<double> sq(grid_->samples.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(grid_->samples[i]);
    l2_norm_sq_ = grid_->step * pairwise_sum(sq);
  }
}

Window Window::gaussian() { return Window(Kind::kGaussian, 0, nullptr); }

Window Window::hermite(int order) {
  if (order < 0) throw Error(ErrorCode::kInvalidArgument, "hermite order must be >= 0");
  return Window(Kind::kHermite, order, nullptr);
}

Window Window::sampled(double grid_lo, double step, std::vector<cdouble> samples) {
  if (!(step > 0.0) || !std::isfinite(step) || !std::isfinite(grid_lo)) {
    throw Error(ErrorCode::kInvalidArgument, "sampled window needs a finite step > 0");
  }
  for (const cdouble& s : samples) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
      throw Error(ErrorCode::kInvalidArgument, "sampled window has non-finite samples");
    }
  }
  auto grid = std::make_shared<SampledGrid>(SampledGrid{grid_lo, step, std::move(samples)});
  Window w(Kind::kSampled, 0, std::move(grid));
  if (!(w.l2_norm_sq_ > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sampled window has zero norm");
  return w;
}

Window Window::parse(std::string_view spec) {
  if (spec == "gaussian") return gaussian();
  if (spec.starts_with("hermite:")) {
    const std::string n(spec.substr(8));
    try {
      std::size_t used = 0;
      const int order = std::stoi(n, &used);
      if (used != n.size()) throw std::invalid_argument(n);
      return hermite(order);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kConfig, "bad hermite order in window spec '" + std::string(spec) + "'");
    }
  }
  if (spec.starts_with("file:")) return read_window_csv_file(std::string(spec.substr(5)));
  throw Error(ErrorCode::kConfig, "unknown window spec '" + std::string(spec) + "'");
}

const SampledGrid& Window::grid() const {
  if (!grid_) throw Error(ErrorCode::kInvalidArgument, "window is not sampled");
  return *grid_;
}

std::string Window::describe() const {
  switch (kind_) {
    case Kind::kGaussian: return "gaussian";
    case Kind::kHermite: return "hermite:" + std::to_string(order_);
    case Kind::kSampled:
      return "sampled(lo=" + fmt(grid_->lo) + ",step=" + fmt(grid_->step) + ",n=" +
             std::to_string(grid_->samples.size()) + ")";
  }
  return "?";
}

double Window::nyquist() const {
  return grid_ ? 0.5 / grid_->step : std::numeric_limits<double>::infinity();
}

cdouble Window::evaluate(double t) const {
  if (kind_ == Kind::kSampled) return interpolate(*grid_, t);
  return {hermite_function(order_, t), 0.0};
}

cdouble Window::ambiguity(Vec2 z) const { return cross_ambiguity(*this, z); }

cdouble Window::cross_ambiguity(const Window& f, Vec2 z) const {
  if (is_hermite_family() && f.is_hermite_family()) return hermite_cross_ambiguity(order_, f.order_, z);
  if (grid_) require_resolution(*grid_);
  if (f.grid_) require_resolution(*f.grid_);
  if (std::abs(z.y) > std::min(nyquist(), f.nyquist())) return {0.0, 0.0};

  if (grid_ && f.grid_) return sampled_sampled(*grid_, *f.grid_, z);

  if (grid_) {
    // V_g f(x, w) = exp(-2 pi i w x) sum_i f(t_i + x) conj(g_i) exp(-2 pi i w t_i) h.
    const SampledGrid& g = *grid_;
    cdouble acc(0.0, 0.0);
    for (std::size_t i = 0; i < g.samples.size(); ++i) {
      const double t = g.t(i);
      const double fv = hermite_function(f.order_, t + z.x);
      if (fv == 0.0) continue;
      acc += fv * std::conj(g.samples[i]) * std::polar(1.0, -kTwoPi * z.y * t);
    }
    return g.step * std::polar(1.0, -kTwoPi * z.y * z.x) * acc;
  }

  const SampledGrid& fg = *f.grid_;
  cdouble acc(0.0, 0.0);
  for (std::size_t i = 0; i < fg.samples.size(); ++i) {
    const double t = fg.t(i);
    const double gv = hermite_function(order_, t - z.x);
    if (gv == 0.0) continue;
    acc += fg.samples[i] * gv * std::polar(1.0, -kTwoPi * z.y * t);
  }
  return fg.step * acc;
}

cdouble Window::cross_inner(Vec2 src, Vec2 dst) const { return shift_phase(src, dst) * ambiguity(dst - src); }

Window Window::scaled(double factor) const {
  if (kind_ != Kind::kSampled) {
    throw Error(ErrorCode::kInvalidArgument, "only sampled windows can be rescaled");
  }
  std::vector<cdouble> s = grid_->samples;
  for (cdouble& v : s) v *= factor;
  return sampled(grid_->lo, grid_->step, std::move(s));
}

void write_window_csv(std::ostream& os, const Window& w) {
  const SampledGrid& g = w.grid();
  os << "# grid_lo=" << fmt(g.lo) << " step=" << fmt(g.step) << "\n";
  os << "t,re,im\n";
  for (std::size_t i = 0; i < g.samples.size(); ++i) {
    os << fmt(g.t(i)) << ',' << fmt(g.samples[i].real()) << ',' << fmt(g.samples[i].imag()) << '\n';
  }
}

Window read_window_csv(std::istream& is) {
  std::string line;
  std::map<std::string, double> meta;
  std::vector<double> ts;
  std::vector<cdouble> samples;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string tok;
      while (ls >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        try {
          meta[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
        } catch (const std::exception&) {
          throw Error(ErrorCode::kIo, "bad window csv header token '" + tok + "'");
        }
      }
      continue;
    }
    if (line.rfind("t,", 0) == 0) continue;
    double t = 0.0, re = 0.0, im = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &re, &im) != 3) {
      throw Error(ErrorCode::kIo, "bad window csv row '" + line + "'");
    }
    ts.push_back(t);
    samples.emplace_back(re, im);
  }
  if (ts.size() < 2) throw Error(ErrorCode::kInsufficientResolution, "window csv needs at least 2 rows");
  const double lo = meta.contains("grid_lo") ? meta["grid_lo"] : ts.front();
  const double step = meta.contains("step") ? meta["step"] : ts[1] - ts[0];
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double expect = lo + static_cast<double>(i) * step;
    if (std::abs(ts[i] - expect) > 1e-9 * std::max(1.0, std::abs(expect))) {
      throw Error(ErrorCode::kIo, "window csv rows are not on the declared grid");
    }
  }
  return Window::sampled(lo, step, std::move(samples));
}

Window read_window_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open window file '" + path + "'");
  return read_window_csv(in);
}

void write_window_csv_file(const std::string& path, const Window& w) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write window file '" + path + "'");
  write_window_csv(out, w);
}

MStarNorm mstar_norm(const Window& w, const Lattice2& lat, double truncation_radius) {
  if (!(truncation_radius >= 10.0 * lat.l_fund())) {
    throw Error(ErrorCode::kInvalidArgument, "mstar_norm needs truncation_radius >= 10 * l_fund");
  }
  const double shell = lat.l_fund();
  std::map<std::int64_t, std::vector<double>> shells;
  for (const LatticePoint& p : enumerate_in_box(lat, {-truncation_radius, -truncation_radius},
                                                {truncation_radius, truncation_radius})) {
    const Vec2 z = lat.point(p);
    const double r = norm(z);
    if (r > truncation_radius) continue;
    shells[static_cast<std::int64_t>(std::floor(r / shell))].push_back(r * std::norm(w.ambiguity(z)));
  }
  std::vector<double> shell_sums;
  for (const auto& [k, v] : shells) shell_sums.push_back(pairwise_sum(v));
  const double total = pairwise_sum(shell_sums);
  MStarNorm out;
  out.truncation_radius = truncation_radius;
  out.value = std::sqrt(total);
  out.tail_estimate = shell_sums.empty() ? 0.0 : shell_sums.back();
  out.tail_negligible = out.tail_estimate < 1e-8 * total;
  if (out.tail_estimate > 0.1 * total) {
    throw Error(ErrorCode::kDivergence, "M* norm tail above 10% of total; window does not decay on this lattice");
  }
  return out;
}

DecayFit decay_check(const Window& w, double s, double sample_radius) {
  if (!(s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "decay_check requires s > 0");
  constexpr double kDr = 0.05;
  constexpr int kAngles = 32;
  const int radial = static_cast<int>(std::ceil(sample_radius / kDr));
  DecayFit fit;
  for (int k = 0; k <= radial; ++k) {
    const double r = k * kDr;
    for (int a = 0; a < kAngles; ++a) {
      const double th = kTwoPi * a / kAngles;
      const double v = std::abs(w.ambiguity({r * std::cos(th), r * std::sin(th)})) * std::pow(1.0 + r, s);
      fit.c_fit = std::max(fit.c_fit, v);
    }
  }
  for (int k = 0; k < radial; ++k) {
    const double r = (k + 0.5) * kDr;
    for (int a = 0; a < kAngles; ++a) {
      const double th = kTwoPi * (a + 0.5) / kAngles;
      const double v = std::abs(w.ambiguity({r * std::cos(th), r * std::sin(th)})) * std::pow(1.0 + r, s);
      fit.worst_ratio = std::max(fit.worst_ratio, fit.c_fit > 0.0 ? v / fit.c_fit : 0.0);
    }
  }
  fit.ok = fit.c_fit > 0.0 && fit.worst_ratio <= 1.01;
  return fit;
}

bool nonvanishing_on_lattice(const Window& w, const Lattice2& lat, double radius) {
  // Closed forms are exact, so any nonzero value counts. Quadrature values
  // below 1e-14 |g|^2 are indistinguishable from roundoff.
  const double floor = w.is_hermite_family() ? 0.0 : 1e-14 * w.l2_norm_sq();
  for (const LatticePoint& p : enumerate_in_box(lat, {-radius, -radius}, {radius, radius})) {
    const Vec2 z = lat.point(p);
    if (norm(z) > radius + kContainmentTol) continue;
    if (!(std::abs(w.ambiguity(z)) > floor)) return false;
  }
  return true;
}

}  // namespace accspec
