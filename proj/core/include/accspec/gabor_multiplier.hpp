#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "accspec/lattice_geom.hpp"
#include "accspec/lattice_kernel.hpp"
#include "accspec/window_kernel.hpp"

namespace accspec {

struct GramOptions {
  std::size_t max_size = 4000;
};

/// Gram matrix K[i,j] = <pi(lambda_j) g, pi(lambda_i) g> over the lattice
/// points of a mask, in lexicographic point order.
struct GramMatrix {
  std::vector<LatticePoint> points;
  Eigen::MatrixXcd entries;
  std::shared_ptr<const LatticeKernel> kernel;

  std::size_t size() const { return points.size(); }
  const Window& window() const { return kernel->window(); }
  const Lattice2& lattice() const { return kernel->lattice(); }
};

/// Shared kernel for Gram construction; table_radius should cover the largest
/// point difference that will be looked up.
std::shared_ptr<const LatticeKernel> make_kernel(const Window& w, const Lattice2& lat, double table_radius,
                                                 bool corrupt_phase = false);

GramMatrix build_gram(std::shared_ptr<const LatticeKernel> kernel, std::vector<LatticePoint> points,
                      const GramOptions& opts = {});
GramMatrix build_gram(std::shared_ptr<const LatticeKernel> kernel, const Mask& mask, const GramOptions& opts = {});
GramMatrix build_gram(const Window& w, const Lattice2& lat, const Mask& mask, const GramOptions& opts = {});

struct EigenOptions {
  bool compute_vectors = true;
  /// Throw kNumerical when an eigenvalue falls below -1e-10 * lambda_1.
  bool require_psd = true;
  double norm_floor_rel = 1e-12;
};

/// Eigenvalues in descending order (clamped at 0) and matching orthonormal
/// eigenvector columns. Ties keep the solver's original index order.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd coeffs;
  double norm_floor = 0.0;
  double raw_min = 0.0;  // smallest eigenvalue before clamping

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  bool has_vectors() const { return coeffs.size() > 0; }
};

SpectralDecomposition eigendecompose(const GramMatrix& gram, const EigenOptions& opts = {});

/// Vector k(mu) with k_j = <pi(lambda_j) g, pi(mu) g>.
Eigen::VectorXcd kernel_vector(const GramMatrix& gram, Vec2 mu);

/// V_g h_k(mu) for the unit-norm eigenfunction h_k (k is zero-based).
/// Throws kDeflatedEigenvalue when lambda_k is below the norm floor.
cdouble eigenfunction_stft(const SpectralDecomposition& dec, const GramMatrix& gram, std::size_t k, Vec2 mu);

/// Max |<h_j, h_k> - delta_jk| over the leading `count` eigenfunctions with
/// lambda_k above both the norm floor and min_rel * lambda_1. Roundoff in
/// <h_j, h_k> grows like eps * lambda_1 / lambda_k.
double orthonormality_error(const SpectralDecomposition& dec, const GramMatrix& gram, std::size_t count,
                            double min_rel = 0.0);

/// ceil(N * l2 / B), guarded against roundoff pushing an exact integer up.
std::size_t a_omega(std::size_t n, double l2_norm_sq, double b);

struct SpectrogramOptions {
  double tail_tol = 1e-8;
  int max_shells = 200;
};

struct AccumulatedSpectrogram {
  LatticeField field;            // rho over mask + B(0, eval_pad)
  std::vector<double> rho_alt;   // same sum divided by B |det| instead of |g|^2
  std::vector<double> chi;       // indicator of the mask at each field point
  std::size_t a_omega = 0;
  double b = 0.0;
  double eval_pad = 0.0;
  double tail_estimate = 0.0;    // rho mass of the last shell added
  std::size_t guarded_terms = 0; // eigenvalues below the norm floor used with the floor
};

AccumulatedSpectrogram accumulated_spectrogram(const SpectralDecomposition& dec, const GramMatrix& gram,
                                               const Mask& mask, double b, const SpectrogramOptions& opts = {});

/// Sum over the mask's lattice points of |V_g g(mu - lambda)|^2.
std::vector<double> berezin_values(const GramMatrix& gram, std::span<const Vec2> mus);
LatticeField berezin_field(const Window& w, const Lattice2& lat, const Mask& mask, std::span<const LatticePoint> mus);

/// sum_k lambda_k |V_g h_k(mu)|^2 evaluated as sum_k |c_k . k(mu)|^2, which
/// needs no division by small eigenvalues.
double berezin_from_spectrum(const SpectralDecomposition& dec, const GramMatrix& gram, Vec2 mu);

/// Running sums sum_{k<=m} |V_g h_k(mu)|^2 over eigenfunctions above the floor.
std::vector<double> bessel_partial_sums(const SpectralDecomposition& dec, const GramMatrix& gram, Vec2 mu);

struct L1Error {
  double value = 0.0;
  double tail_estimate = 0.0;
};
L1Error l1_error(const AccumulatedSpectrogram& rho);

/// Field points with rho strictly above 1/2.
std::vector<LatticePoint> reconstruct_mask(const AccumulatedSpectrogram& rho);

std::size_t plunge_count(const Eigen::VectorXd& eigenvalues, double delta, double b);

struct EigCountCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};
EigCountCheck eig_count_check(const Eigen::VectorXd& eigenvalues, double delta, double b, std::size_t n, double l2,
                              double hs);

double trace_difference(const Eigen::VectorXd& eigenvalues, double b);
double hilbert_schmidt_sum(const GramMatrix& gram);
double eigenvalue_sum(const Eigen::VectorXd& eigenvalues);
double eigenvalue_square_sum(const Eigen::VectorXd& eigenvalues);

struct RegularizationCheck {
  double lhs = 0.0;
  std::size_t boundary_term = 0;
  double delta_term = 0.0;
  double ratio = 0.0;
  double tail_estimate = 0.0;
};

/// ||chi - chi *_Lambda phi||_1 with phi = |V_g g|^2 / (B |g|^2), against the
/// boundary count at r + l_fund plus (1 - A/B) N.
RegularizationCheck regularization_check(const LatticeKernel& kernel, const Mask& mask, double b, double r,
                                         double a_est, double b_est, const SpectrogramOptions& opts = {});

}  // namespace accspec
