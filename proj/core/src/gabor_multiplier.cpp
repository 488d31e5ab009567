#include "accspec/gabor_multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "accspec/error.hpp"
#include "accspec/summation.hpp"

namespace accspec {
namespace {

double mask_diameter(const Mask& mask) {
  Vec2 lo, hi;
  mask.bounding_box(lo, hi);
  return norm(hi - lo);
}

std::vector<LatticePoint> merge_sorted(const std::vector<LatticePoint>& a, const std::vector<LatticePoint>& b) {
  std::vector<LatticePoint> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Grows mask + B(0, k l_fund) shell by shell. eval(points) returns one value
// per point; growth stops once a shell's mass (sum of mass(value)) drops below
// tol times the running total.
struct ShellGrowth {
  std::vector<LatticePoint> points;
  std::vector<double> values;
  double pad = 0.0;
  double tail = 0.0;
};

template <class Eval, class Mass>
ShellGrowth grow_shells(const Mask& mask, const Lattice2& lat, const SpectrogramOptions& opts, Eval eval,
                                    Mass mass) {
  ShellGrowth out;
  std::vector<LatticePoint> covered;
  std::vector<std::pair<LatticePoint, double>> acc;
  double total = 0.0;
  for (int k = 0; k < opts.max_shells; ++k) {
    const double pad = k * lat.l_fund();
    std::vector<LatticePoint> region = points_near_mask(mask, lat, pad);
    std::sort(region.begin(), region.end());
    std::vector<LatticePoint> shell;
    std::set_difference(region.begin(), region.end(), covered.begin(), covered.end(), std::back_inserter(shell));
    const std::vector<double> vals = eval(shell);
    std::vector<double> masses(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) masses[i] = mass(shell[i], vals[i]);
    const double shell_mass = pairwise_sum(masses);
    total += shell_mass;
    for (std::size_t i = 0; i < shell.size(); ++i) acc.emplace_back(shell[i], vals[i]);
    covered = merge_sorted(covered, shell);
    out.pad = pad;
    out.tail = shell_mass;
    if (k > 0 && shell_mass <= opts.tail_tol * total) {
      std::sort(acc.begin(), acc.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [p, v] : acc) {
        out.points.push_back(p);
        out.values.push_back(v);
      }
      return out;
    }
  }
  throw Error(ErrorCode::kDivergence, "evaluation region did not converge within the shell limit");
}

}  // namespace

std::shared_ptr<const LatticeKernel> make_kernel(const Window& w, const Lattice2& lat, double table_radius,
                                                 bool corrupt_phase) {
  auto k = std::make_shared<LatticeKernel>(w, lat, table_radius);
  k->set_corrupt_phase(corrupt_phase);
  return k;
}

GramMatrix build_gram(std::shared_ptr<const LatticeKernel> kernel, std::vector<LatticePoint> points,
                      const GramOptions& opts) {
  if (points.empty()) throw Error(ErrorCode::kEmptyMask, "mask contains no lattice points");
  if (points.size() > opts.max_size) {
    throw Error(ErrorCode::kSizeLimit, "Gram matrix size " + std::to_string(points.size()) + " exceeds limit " +
                                           std::to_string(opts.max_size));
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  GramMatrix g{std::move(points), Eigen::MatrixXcd(n, n), std::move(kernel)};
  const LatticeKernel& k = *g.kernel;
  const bool mirror = !k.corrupt_phase();
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t jj) {
    const auto j = static_cast<Eigen::Index>(jj);
    const Eigen::Index i_end = mirror ? j + 1 : n;
    for (Eigen::Index i = 0; i < i_end; ++i) {
      g.entries(i, j) = k.cross_inner(g.points[static_cast<std::size_t>(j)], g.points[static_cast<std::size_t>(i)]);
    }
  });
  if (mirror) {
    for (Eigen::Index j = 0; j < n; ++j) {
      g.entries(j, j) = cdouble(g.entries(j, j).real(), 0.0);
      for (Eigen::Index i = j + 1; i < n; ++i) g.entries(i, j) = std::conj(g.entries(j, i));
    }
  }
  return g;
}

GramMatrix build_gram(std::shared_ptr<const LatticeKernel> kernel, const Mask& mask, const GramOptions& opts) {
  return build_gram(kernel, points_in_mask(mask, kernel->lattice()), opts);
}

GramMatrix build_gram(const Window& w, const Lattice2& lat, const Mask& mask, const GramOptions& opts) {
  return build_gram(make_kernel(w, lat, mask_diameter(mask) + lat.l_fund()), mask, opts);
}

SpectralDecomposition eigendecompose(const GramMatrix& gram, const EigenOptions& opts) {
  const Eigen::MatrixXcd h = 0.5 * (gram.entries + gram.entries.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      h, opts.compute_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumerical, "Hermitian eigensolver did not converge for a " +
                                           std::to_string(gram.size()) + "x" + std::to_string(gram.size()) +
                                           " Gram matrix");
  }
  const Eigen::VectorXd& raw = es.eigenvalues();
  const auto n = raw.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return raw(a) > raw(b); });

  SpectralDecomposition dec;
  const double top = raw(order.front());
  dec.raw_min = raw(order.back());
  if (opts.require_psd && dec.raw_min < -1e-10 * std::abs(top)) {
    throw Error(ErrorCode::kNumerical, "Gram matrix is not positive semidefinite: smallest eigenvalue " +
                                           std::to_string(dec.raw_min) + " vs largest " + std::to_string(top));
  }
  dec.eigenvalues.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) dec.eigenvalues(k) = std::max(0.0, raw(order[static_cast<std::size_t>(k)]));
  dec.norm_floor = opts.norm_floor_rel * top;
  if (opts.compute_vectors) {
    dec.coeffs.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) dec.coeffs.col(k) = es.eigenvectors().col(order[static_cast<std::size_t>(k)]);
  }
  return dec;
}

Eigen::VectorXcd kernel_vector(const GramMatrix& gram, Vec2 mu) {
  Eigen::VectorXcd kv(static_cast<Eigen::Index>(gram.size()));
  for (std::size_t j = 0; j < gram.size(); ++j) kv(static_cast<Eigen::Index>(j)) = gram.kernel->cross_inner(gram.points[j], mu);
  return kv;
}

cdouble eigenfunction_stft(const SpectralDecomposition& dec, const GramMatrix& gram, std::size_t k, Vec2 mu) {
  if (!dec.has_vectors()) throw Error(ErrorCode::kInvalidArgument, "decomposition has no eigenvectors");
  if (k >= dec.size()) throw Error(ErrorCode::kInvalidArgument, "eigenfunction index out of range");
  const double lam = dec.eigenvalues(static_cast<Eigen::Index>(k));
  if (lam < dec.norm_floor || lam <= 0.0) {
    throw Error(ErrorCode::kDeflatedEigenvalue, "eigenvalue " + std::to_string(k) + " is below the norm floor");
  }
  const Eigen::VectorXcd kv = kernel_vector(gram, mu);
  const cdouble u = dec.coeffs.col(static_cast<Eigen::Index>(k)).transpose() * kv;
  return u / std::sqrt(lam);
}

double orthonormality_error(const SpectralDecomposition& dec, const GramMatrix& gram, std::size_t count,
                            double min_rel) {
  if (dec.size() == 0) return 0.0;
  const double cut = std::max(dec.norm_floor, min_rel * dec.eigenvalues(0));
  std::size_t m = 0;
  while (m < std::min(count, dec.size()) && dec.eigenvalues(static_cast<Eigen::Index>(m)) >= cut &&
         dec.eigenvalues(static_cast<Eigen::Index>(m)) > 0.0) {
    ++m;
  }
  if (m == 0) return 0.0;
  const auto mm = static_cast<Eigen::Index>(m);
  const Eigen::MatrixXcd c = dec.coeffs.leftCols(mm);
  const Eigen::MatrixXcd gm = c.adjoint() * gram.entries * c;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < mm; ++j) {
    for (Eigen::Index k = 0; k < mm; ++k) {
      const double s = std::sqrt(dec.eigenvalues(j) * dec.eigenvalues(k));
      const cdouble v = gm(j, k) / s;
      worst = std::max(worst, std::abs(v - cdouble(j == k ? 1.0 : 0.0, 0.0)));
    }
  }
  return worst;
}

std::size_t a_omega(std::size_t n, double l2_norm_sq, double b) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "a_omega needs N >= 1");
  if (!(b > 0.0)) throw Error(ErrorCode::kInvalidArgument, "a_omega needs B > 0");
  const double v = static_cast<double>(n) * l2_norm_sq / b;
  return static_cast<std::size_t>(std::ceil(v * (1.0 - 1e-12)));
}

AccumulatedSpectrogram accumulated_spectrogram(const SpectralDecomposition& dec, const GramMatrix& gram,
                                               const Mask& mask, double b, const SpectrogramOptions& opts) {
  if (!dec.has_vectors()) throw Error(ErrorCode::kInvalidArgument, "decomposition has no eigenvectors");
  const double l2 = gram.window().l2_norm_sq();
  const Lattice2& lat = gram.lattice();
  AccumulatedSpectrogram out{LatticeField{lat, {}, {}}, {}, {}, 0, b, 0.0, 0.0, 0};
  out.a_omega = a_omega(gram.size(), l2, b);
  const auto a = static_cast<Eigen::Index>(std::min(out.a_omega, gram.size()));
  Eigen::VectorXd inv(a);
  for (Eigen::Index k = 0; k < a; ++k) {
    const double lam = dec.eigenvalues(k);
    if (lam < dec.norm_floor) ++out.guarded_terms;
    inv(k) = 1.0 / std::max(lam, dec.norm_floor);
  }
  const Eigen::MatrixXcd ct = dec.coeffs.leftCols(a).transpose();
  const auto n = static_cast<Eigen::Index>(gram.size());

  auto eval = [&](const std::vector<LatticePoint>& pts) {
    const auto p = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXcd km(n, p);
    parallel_for(pts.size(), [&](std::size_t q) {
      for (Eigen::Index j = 0; j < n; ++j) {
        km(j, static_cast<Eigen::Index>(q)) = gram.kernel->cross_inner(gram.points[static_cast<std::size_t>(j)], pts[q]);
      }
    });
    const Eigen::MatrixXcd u = ct * km;
    std::vector<double> rho(pts.size());
    for (Eigen::Index q = 0; q < p; ++q) {
      std::vector<double> terms(static_cast<std::size_t>(a));
      for (Eigen::Index k = 0; k < a; ++k) terms[static_cast<std::size_t>(k)] = std::norm(u(k, q)) * inv(k);
      rho[static_cast<std::size_t>(q)] = pairwise_sum(terms) / l2;
    }
    return rho;
  };
  auto grown = grow_shells(mask, lat, opts, eval, [](LatticePoint, double v) { return v; });

  out.field.points = std::move(grown.points);
  out.field.values = std::move(grown.values);
  out.eval_pad = grown.pad;
  out.tail_estimate = grown.tail;
  const double alt = l2 / (b * std::abs(lat.det()));
  out.rho_alt.reserve(out.field.values.size());
  out.chi.reserve(out.field.values.size());
  for (std::size_t i = 0; i < out.field.points.size(); ++i) {
    out.rho_alt.push_back(out.field.values[i] * alt);
    out.chi.push_back(mask.contains(lat.point(out.field.points[i])) ? 1.0 : 0.0);
  }
  return out;
}

std::vector<double> berezin_values(const GramMatrix& gram, std::span<const Vec2> mus) {
  std::vector<double> out(mus.size());
  parallel_for(mus.size(), [&](std::size_t q) {
    std::vector<double> terms(gram.size());
    for (std::size_t j = 0; j < gram.size(); ++j) terms[j] = std::norm(gram.kernel->cross_inner(gram.points[j], mus[q]));
    out[q] = pairwise_sum(terms);
  });
  return out;
}

LatticeField berezin_field(const Window& w, const Lattice2& lat, const Mask& mask, std::span<const LatticePoint> mus) {
  const std::vector<LatticePoint> pts = points_in_mask(mask, lat);
  LatticeField f{lat, std::vector<LatticePoint>(mus.begin(), mus.end()), std::vector<double>(mus.size())};
  parallel_for(mus.size(), [&](std::size_t q) {
    std::vector<double> terms(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j) terms[j] = std::norm(w.ambiguity(lat.point(mus[q] - pts[j])));
    f.values[q] = pairwise_sum(terms);
  });
  return f;
}

double berezin_from_spectrum(const SpectralDecomposition& dec, const GramMatrix& gram, Vec2 mu) {
  const Eigen::VectorXcd u = dec.coeffs.transpose() * kernel_vector(gram, mu);
  std::vector<double> terms(static_cast<std::size_t>(u.size()));
  for (Eigen::Index k = 0; k < u.size(); ++k) terms[static_cast<std::size_t>(k)] = std::norm(u(k));
  return pairwise_sum(terms);
}

std::vector<double> bessel_partial_sums(const SpectralDecomposition& dec, const GramMatrix& gram, Vec2 mu) {
  const Eigen::VectorXcd u = dec.coeffs.transpose() * kernel_vector(gram, mu);
  std::vector<double> out;
  double running = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const double lam = dec.eigenvalues(k);
    if (lam < dec.norm_floor || lam <= 0.0) break;
    running += std::norm(u(k)) / lam;
    out.push_back(running);
  }
  return out;
}

L1Error l1_error(const AccumulatedSpectrogram& rho) {
  std::vector<double> d(rho.field.values.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(rho.field.values[i] - rho.chi[i]);
  return {pairwise_sum(d), rho.tail_estimate};
}

std::vector<LatticePoint> reconstruct_mask(const AccumulatedSpectrogram& rho) {
  std::vector<LatticePoint> out;
  for (std::size_t i = 0; i < rho.field.points.size(); ++i) {
    if (rho.field.values[i] > 0.5) out.push_back(rho.field.points[i]);
  }
  return out;
}

std::size_t plunge_count(const Eigen::VectorXd& eigenvalues, double delta, double b) {
  if (!(delta > 0.0 && delta < 0.5)) throw Error(ErrorCode::kInvalidArgument, "plunge_count needs 0 < delta < 1/2");
  std::size_t c = 0;
  for (double lam : eigenvalues) c += (lam > delta * b && lam < (1.0 - delta) * b) ? 1 : 0;
  return c;
}

EigCountCheck eig_count_check(const Eigen::VectorXd& eigenvalues, double delta, double b, std::size_t n, double l2,
                              double hs) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::kInvalidArgument, "eig_count_check needs 0 < delta < 1");
  std::size_t above = 0;
  for (double lam : eigenvalues) above += lam > b * (1.0 - delta) ? 1 : 0;
  const double mass = static_cast<double>(n) * l2;
  EigCountCheck out;
  out.lhs = std::abs(b * static_cast<double>(above) - mass);
  out.rhs = std::max(1.0 / delta, 1.0 / (1.0 - delta)) * std::abs(mass - hs / b);
  out.ok = out.lhs <= out.rhs + 1e-9;
  return out;
}

double eigenvalue_sum(const Eigen::VectorXd& eigenvalues) {
  return pairwise_sum(std::span<const double>(eigenvalues.data(), static_cast<std::size_t>(eigenvalues.size())));
}

double eigenvalue_square_sum(const Eigen::VectorXd& eigenvalues) {
  std::vector<double> sq(static_cast<std::size_t>(eigenvalues.size()));
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = eigenvalues(static_cast<Eigen::Index>(i)) * eigenvalues(static_cast<Eigen::Index>(i));
  return pairwise_sum(sq);
}

double trace_difference(const Eigen::VectorXd& eigenvalues, double b) {
  if (!(b > 0.0)) throw Error(ErrorCode::kInvalidArgument, "trace_difference needs B > 0");
  return eigenvalue_sum(eigenvalues) - eigenvalue_square_sum(eigenvalues) / b;
}

double hilbert_schmidt_sum(const GramMatrix& gram) {
  const auto n = gram.entries.rows();
  std::vector<double> cols(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<double> terms(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) terms[static_cast<std::size_t>(i)] = std::norm(gram.entries(i, j));
    cols[static_cast<std::size_t>(j)] = pairwise_sum(terms);
  }
  return pairwise_sum(cols);
}

RegularizationCheck regularization_check(const LatticeKernel& kernel, const Mask& mask, double b, double r,
                                         double a_est, double b_est, const SpectrogramOptions& opts) {
  if (!(b > 0.0)) throw Error(ErrorCode::kInvalidArgument, "regularization_check needs B > 0");
  const Lattice2& lat = kernel.lattice();
  const std::vector<LatticePoint> inside = points_in_mask(mask, lat);
  if (inside.empty()) throw Error(ErrorCode::kEmptyMask, "mask contains no lattice points");
  const double norm_factor = 1.0 / (b * kernel.window().l2_norm_sq());

  auto eval = [&](const std::vector<LatticePoint>& pts) {
    std::vector<double> out(pts.size());
    parallel_for(pts.size(), [&](std::size_t q) {
      std::vector<double> terms(inside.size());
      for (std::size_t j = 0; j < inside.size(); ++j) terms[j] = kernel.ambiguity_sq(pts[q] - inside[j]);
      const double conv = pairwise_sum(terms) * norm_factor;
      const double chi = mask.contains(lat.point(pts[q])) ? 1.0 : 0.0;
      out[q] = std::abs(chi - conv);
    });
    return out;
  };
  auto grown = grow_shells(mask, lat, opts, eval, [](LatticePoint, double v) { return v; });

  RegularizationCheck out;
  out.lhs = pairwise_sum(grown.values);
  out.tail_estimate = grown.tail;
  out.boundary_term = boundary_count(mask, lat, r + lat.l_fund()).count;
  out.delta_term = (1.0 - a_est / b_est) * static_cast<double>(inside.size());
  const double denom = static_cast<double>(out.boundary_term) + out.delta_term;
  out.ratio = denom > 0.0 ? out.lhs / denom : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace accspec
