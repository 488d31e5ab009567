#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "accspec/error.hpp"
#include "accspec/summation.hpp"
#include "accspec/window_kernel.hpp"

namespace accspec {
namespace {

constexpr double kShellTol = 1e-12;
constexpr int kMaxShells = 400;

void require_frame_density(const Lattice2& lat) {
  if (!(lat.density() > 1.0 + 1e-12)) {
    throw Error(ErrorCode::kNoFrame, "lattice density must exceed 1 for a Gabor frame");
  }
}

// Sum over lattice points of |V_g p(lambda - z)|^2, grown shell by shell
// around z until a shell adds less than kShellTol of the running total.
double lattice_energy(const Window& g, const Window& probe, const Lattice2& lat, Vec2 z) {
  const double width = lat.l_fund();
  std::vector<double> shell_sums;
  double running = 0.0;
  for (int k = 0; k < kMaxShells; ++k) {
    const double r_in = k * width;
    const double r_out = (k + 1) * width;
    std::vector<double> terms;
    for (const LatticePoint& p : enumerate_in_box(lat, {z.x - r_out, z.y - r_out}, {z.x + r_out, z.y + r_out})) {
      const Vec2 d = lat.point(p) - z;
      const double r = norm(d);
      if (r < r_in || r >= r_out) continue;
      terms.push_back(std::norm(g.cross_ambiguity(probe, d)));
    }
    const double shell = pairwise_sum(terms);
    shell_sums.push_back(shell);
    running += shell;
    if (k > 0 && shell < kShellTol * running) return pairwise_sum(shell_sums);
  }
  throw Error(ErrorCode::kDivergence, "frame energy did not converge within the shell limit");
}

}  // namespace

FrameBounds frame_bounds_estimate(const Window& w, const Lattice2& lat, int probe_count) {
  require_frame_density(lat);
  if (probe_count < 16) throw Error(ErrorCode::kInvalidArgument, "probe_count must be >= 16");
  const int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(probe_count))));
  const Window probes[] = {Window::gaussian(), Window::hermite(1), Window::hermite(2)};

  std::vector<Vec2> zs;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      zs.push_back((static_cast<double>(a) / m) * lat.v1() + (static_cast<double>(b) / m) * lat.v2());
    }
  }
  std::vector<double> q(zs.size() * 3);
  parallel_for(q.size(), [&](std::size_t idx) {
    q[idx] = lattice_energy(w, probes[idx % 3], lat, zs[idx / 3]);
  });
  FrameBounds out;
  out.lower = *std::min_element(q.begin(), q.end());
  out.upper = *std::max_element(q.begin(), q.end());
  out.probes = static_cast<int>(q.size());
  return out;
}

TightWindow canonical_tight_window(const Window& w, const Lattice2& lat, const TightWindowOptions& opts) {
  require_frame_density(lat);
  if (opts.grid_points < 256) {
    throw Error(ErrorCode::kInsufficientResolution, "tight window grid needs at least 256 points");
  }
  const double half = opts.grid_halfwidth;
  if (!(half > 0.0)) throw Error(ErrorCode::kInvalidArgument, "grid_halfwidth must be positive");
  if (std::abs(w.evaluate(half)) >= 1e-8 || std::abs(w.evaluate(-half)) >= 1e-8) {
    throw Error(ErrorCode::kInvalidArgument, "window is not below 1e-8 at the grid edge; increase grid_halfwidth");
  }

  const double h0 = 2.0 * half / (opts.grid_points - 1);
  const double quantum = lat.time_quantum();
  double h = h0;
  bool aligned = false;
  // When the grid also divides the modulation period 1/q (q = |det| / quantum),
  // the frequency sums collapse to an exact comb with period `comb` samples.
  std::int64_t comb = 0;
  if (quantum > 0.0) {
    const double inv_det = 1.0 / std::abs(lat.det());
    std::int64_t m = 1;
    while (m <= 64 && std::abs(m * inv_det - std::round(m * inv_det)) > 1e-9 * m * inv_det) ++m;
    if (m > 64) m = 1;
    auto per_quantum = static_cast<std::int64_t>(std::ceil(quantum / h0 - 1e-9));
    if (m > 1) per_quantum = ((per_quantum + m - 1) / m) * m;
    h = quantum / static_cast<double>(per_quantum);
    aligned = true;
    const double period = quantum * inv_det / h;
    if (std::abs(period - std::round(period)) < 1e-6) comb = std::llround(period);
  }
  const auto k_half = static_cast<std::int64_t>(std::ceil(half / h - 1e-9));
  const auto n = static_cast<Eigen::Index>(2 * k_half + 1);
  auto t_at = [&](Eigen::Index i) { return static_cast<double>(i - k_half) * h; };

  // Group atoms by time shift: atoms sharing x differ only by modulation, so
  // their contribution to S[i,j] is g(t_i-x) conj(g(t_j-x)) F_x(t_i - t_j)
  // with F_x(d) = sum_w exp(2 pi i w d), which depends on i - j only.
  const double rb = opts.lattice_box_radius;
  std::map<double, std::vector<double>> by_shift;
  for (const LatticePoint& p : enumerate_in_box(lat, {-rb, -rb}, {rb, rb})) {
    const Vec2 z = lat.point(p);
    by_shift[z.x].push_back(z.y);
  }

  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd gx(n);
  Eigen::VectorXcd f(n);
  for (const auto& [x, freqs] : by_shift) {
    Eigen::Index lo = n, hi = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      gx(i) = w.evaluate(t_at(i) - x);
      if (std::abs(gx(i)) > 1e-300) {
        lo = std::min(lo, i);
        hi = std::max(hi, i);
      }
    }
    if (hi < lo) continue;
    for (Eigen::Index d = 0; d <= hi - lo; ++d) {
      if (comb > 0) {
        f(d) = d % comb == 0
                   ? std::polar(static_cast<double>(comb), 2.0 * std::numbers::pi * freqs.front() * static_cast<double>(d) * h)
                   : cdouble(0.0, 0.0);
        continue;
      }
      cdouble acc(0.0, 0.0);
      for (double om : freqs) acc += std::polar(1.0, 2.0 * std::numbers::pi * om * static_cast<double>(d) * h);
      f(d) = acc;
    }
    for (Eigen::Index j = lo; j <= hi; ++j) {
      const cdouble gj = std::conj(gx(j));
      for (Eigen::Index i = lo; i <= hi; ++i) {
        const cdouble fd = i >= j ? f(i - j) : std::conj(f(j - i));
        s(i, j) += gx(i) * gj * fd;
      }
    }
  }
  s *= h;

  Eigen::VectorXcd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = w.evaluate(t_at(i));

  const double smax = s.cwiseAbs().maxCoeff();
  const double imax = s.imag().cwiseAbs().maxCoeff();
  Eigen::VectorXd evals;
  Eigen::MatrixXcd evecs;
  if (imax <= 1e-14 * smax) {
    Eigen::MatrixXd sr = s.real();
    sr = 0.5 * (sr + sr.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sr);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::kNumerical, "frame operator eigensolve failed");
    evals = es.eigenvalues();
    evecs = es.eigenvectors().cast<cdouble>();
  } else {
    Eigen::MatrixXcd sh = 0.5 * (s + s.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sh);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::kNumerical, "frame operator eigensolve failed");
    evals = es.eigenvalues();
    evecs = es.eigenvectors();
  }

  const double top = evals.maxCoeff();
  if (!(top > 0.0)) throw Error(ErrorCode::kIllConditionedFrame, "frame operator has no positive spectrum");
  const double floor = 1e-10 * top;
  const Eigen::VectorXcd coef = evecs.adjoint() * g;
  double floored = 0.0;
  double total = 0.0;
  Eigen::VectorXcd scaled(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double e = std::norm(coef(k));
    total += e;
    if (evals(k) < floor) floored += e;
    scaled(k) = coef(k) / std::sqrt(std::max(evals(k), floor));
  }
  const double floored_fraction = total > 0.0 ? floored / total : 0.0;
  if (floored_fraction > 1e-6) {
    throw Error(ErrorCode::kIllConditionedFrame,
                "window has significant energy in numerically singular directions of the frame operator");
  }
  const Eigen::VectorXcd gt = evecs * scaled;

  std::vector<cdouble> samples(gt.data(), gt.data() + n);
  const Window raw = Window::sampled(t_at(0), h, samples);
  const FrameBounds raw_bounds = frame_bounds_estimate(raw, lat);
  const double scale = 1.0 / std::sqrt(0.5 * (raw_bounds.lower + raw_bounds.upper));

  TightWindow out{raw.scaled(scale), raw_bounds, h, aligned, floored_fraction, scale};
  out.bounds.lower *= scale * scale;
  out.bounds.upper *= scale * scale;
  return out;
}

}  // namespace accspec
