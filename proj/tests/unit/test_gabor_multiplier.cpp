#include <doctest.h>

#include <cmath>

#include "accspec/error.hpp"
#include "accspec/gabor_multiplier.hpp"
#include "oracles.hpp"

using namespace accspec;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an accspec::Error");
  return ErrorCode::kNumerical;
}

const Lattice2 kHalf = Lattice2::diagonal(0.5, 0.5);

// Sum over lambda != 0 of exp(-pi |lambda|^2) on diag(0.5, 0.5).
constexpr double kGaussTail = 3.000055797672288;

Eigen::VectorXd spectrum(std::initializer_list<double> v) {
  Eigen::VectorXd e(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) e(k++) = x;
  return e;
}

}  // namespace

TEST_CASE("single-point Gram matrix") {
  const GramMatrix g = build_gram(Window::gaussian(), kHalf, Mask::ball({0, 0}, 0.1));
  REQUIRE(g.size() == 1);
  CHECK(g.entries(0, 0) == cdouble(1.0, 0.0));
  const SpectralDecomposition d = eigendecompose(g);
  CHECK(d.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(std::abs(eigenfunction_stft(d, g, 0, {0, 0})) == doctest::Approx(1.0));
}

TEST_CASE("two-point Gram matrix and its eigenvalues") {
  const auto kernel = make_kernel(Window::gaussian(), kHalf, 4.0);
  const GramMatrix g = build_gram(kernel, std::vector<LatticePoint>{{0, 0}, {1, 1}});
  CHECK(std::abs(g.entries(0, 1)) == doctest::Approx(std::exp(-oracle::kPi / 4)).epsilon(1e-14));
  const SpectralDecomposition d = eigendecompose(g);
  CHECK(d.eigenvalues(0) == doctest::Approx(1.4559381277659962).epsilon(1e-14));
  CHECK(d.eigenvalues(1) == doctest::Approx(0.5440618722340038).epsilon(1e-14));
}

TEST_CASE("Gram entries match quadrature of the shifted atoms") {
  const GramMatrix g = build_gram(Window::gaussian(), Lattice2::from_rows({{{0.6, 0.2}, {0.1, 0.7}}}),
                                  Mask::ball({0, 0}, 1.2));
  for (std::size_t i = 0; i < g.size(); i += 3) {
    for (std::size_t j = 0; j < g.size(); j += 4) {
      const Vec2 li = g.lattice().point(g.points[i]);
      const Vec2 lj = g.lattice().point(g.points[j]);
      oracle::cd acc = 0.0;
      const double h = 2e-3;
      for (double t = -10; t <= 10; t += h) {
        acc += std::polar(1.0, 2 * oracle::kPi * (lj.y - li.y) * t) * oracle::hermite_poly_fn(0, t - lj.x) *
               oracle::hermite_poly_fn(0, t - li.x);
      }
      CHECK(std::abs(g.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - acc * h) < 1e-11);
    }
  }
}

TEST_CASE("Gram matrix structure on Ball(0,2)") {
  const GramMatrix g = build_gram(Window::gaussian(), kHalf, Mask::ball({0, 0}, 2));
  CHECK(g.size() == 49);
  for (Eigen::Index i = 0; i < g.entries.rows(); ++i) {
    CHECK(g.entries(i, i) == cdouble(1.0, 0.0));
    for (Eigen::Index j = 0; j < i; ++j) CHECK(g.entries(i, j) == std::conj(g.entries(j, i)));
  }
}

TEST_CASE("Gram construction errors") {
  CHECK(code_of([] { build_gram(Window::gaussian(), kHalf, Mask::ball({0.25, 0.25}, 0.1)); }) ==
        ErrorCode::kEmptyMask);
  CHECK(code_of([] { build_gram(Window::gaussian(), kHalf, Mask::ball({0, 0}, 3), GramOptions{100}); }) ==
        ErrorCode::kSizeLimit);
}

TEST_CASE("spectral identities on Ball(0,3)") {
  const GramMatrix g = build_gram(Window::gaussian(), kHalf, Mask::ball({0, 0}, 3));
  const SpectralDecomposition d = eigendecompose(g);
  REQUIRE(g.size() == 113);
  for (Eigen::Index k = 1; k < d.eigenvalues.size(); ++k) CHECK(d.eigenvalues(k) <= d.eigenvalues(k - 1));
  CHECK(std::abs(eigenvalue_sum(d.eigenvalues) - 113.0) / 113.0 < 1e-10);
  const double hs = hilbert_schmidt_sum(g);
  CHECK(std::abs(eigenvalue_square_sum(d.eigenvalues) - hs) / hs < 1e-10);
  CHECK(d.raw_min >= -1e-10 * d.eigenvalues(0));

  const Eigen::MatrixXcd back = d.coeffs * d.eigenvalues.cast<cdouble>().asDiagonal() * d.coeffs.adjoint();
  CHECK((back - g.entries).norm() / g.entries.norm() < 1e-9);

  CHECK(orthonormality_error(d, g, g.size(), 1e-6) < 1e-8);
  for (std::size_t k = 0; k < g.size(); k += 7) {
    const double lam = d.eigenvalues(static_cast<Eigen::Index>(k));
    if (lam < 1e-6 * d.eigenvalues(0)) break;
    double energy = 0.0;
    for (const LatticePoint& p : g.points) energy += std::norm(eigenfunction_stft(d, g, k, kHalf.point(p)));
    CAPTURE(k);
    CHECK(std::abs(energy - lam) / lam < 1e-8);
  }
  CHECK(code_of([&] { eigenfunction_stft(d, g, g.size() - 1, {0, 0}); }) == ErrorCode::kDeflatedEigenvalue);
}

TEST_CASE("eigenvalues-only decomposition matches the full one") {
  const GramMatrix g = build_gram(Window::hermite(1), kHalf, Mask::rect({-1, -1}, {1.5, 1}));
  const SpectralDecomposition full = eigendecompose(g);
  const SpectralDecomposition vals = eigendecompose(g, EigenOptions{false, true, 1e-12});
  CHECK_FALSE(vals.has_vectors());
  CHECK((full.eigenvalues - vals.eigenvalues).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("a_omega") {
  CHECK(a_omega(10, 1.0, 1.0) == 10);
  CHECK(a_omega(10, 1.0, 1.2) == 9);
  CHECK(a_omega(113, 1.0, 1.003) == 113);
  CHECK(a_omega(113, 0.25, 1.0) == 29);
  CHECK(code_of([] { a_omega(0, 1.0, 1.0); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { a_omega(1, 1.0, 0.0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("accumulated spectrogram of a single point") {
  const Mask m = Mask::ball({0, 0}, 0.1);
  const GramMatrix g = build_gram(Window::gaussian(), kHalf, m);
  const SpectralDecomposition d = eigendecompose(g);
  const AccumulatedSpectrogram rho = accumulated_spectrogram(d, g, m, 1.0);
  CHECK(rho.a_omega == 1);
  CHECK(rho.guarded_terms == 0);
  for (std::size_t i = 0; i < rho.field.points.size(); ++i) {
    const Vec2 z = kHalf.point(rho.field.points[i]);
    CHECK(rho.field.values[i] == doctest::Approx(std::exp(-oracle::kPi * (z.x * z.x + z.y * z.y))).epsilon(1e-13));
  }
  CHECK(l1_error(rho).value == doctest::Approx(kGaussTail).epsilon(1e-8));
  CHECK(rho.tail_estimate < 1e-8 * kGaussTail);
  const auto rec = reconstruct_mask(rho);
  REQUIRE(rec.size() == 1);
  CHECK(rec[0] == LatticePoint{0, 0});
}

TEST_CASE("accumulated spectrogram stays in [0, 1]") {
  const Mask m = Mask::polygon({{-2, -1}, {2, -1}, {0, 2}});
  const GramMatrix g = build_gram(Window::gaussian(), kHalf, m);
  const SpectralDecomposition d = eigendecompose(g);
  const AccumulatedSpectrogram rho = accumulated_spectrogram(d, g, m, 4.03);
  for (double v : rho.field.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-8);
  }
  CHECK(rho.rho_alt.size() == rho.field.values.size());
}

TEST_CASE("Berezin identity and far-field decay") {
  const Mask m = Mask::ball({0, 0}, 3);
  const GramMatrix g = build_gram(Window::gaussian(), kHalf, m);
  const SpectralDecomposition d = eigendecompose(g);
  oracle::Gen gen(21);
  std::vector<Vec2> mus;
  for (int k = 0; k < 50; ++k) mus.push_back({gen.uniform(-4, 4), gen.uniform(-4, 4)});
  const std::vector<double> direct = berezin_values(g, mus);
  for (std::size_t q = 0; q < mus.size(); ++q) {
    CHECK(std::abs(berezin_from_spectrum(d, g, mus[q]) - direct[q]) < 1e-8);
    const auto partial = bessel_partial_sums(d, g, mus[q]);
    for (double s : partial) CHECK(s <= 1.0 + 1e-8);
  }
  const std::vector<LatticePoint> far{{0, 30}, {-28, 0}};
  const LatticeField f = berezin_field(Window::gaussian(), kHalf, m, far);
  for (double v : f.values) CHECK(v < 1e-40);
  const std::vector<LatticePoint> here{{0, 0}};
  const LatticeField one = berezin_field(Window::gaussian(), kHalf, Mask::ball({0, 0}, 0.1), here);
  CHECK(one.values[0] == doctest::Approx(1.0));
}

TEST_CASE("plunge_count") {
  CHECK(plunge_count(spectrum({0.0, 1.0, 1.0, 0.0}), 0.1, 1.0) == 0);
  CHECK(plunge_count(spectrum({1.0}), 0.4999, 2.0) == 1);
  CHECK(plunge_count(spectrum({0.95, 0.5, 0.2, 0.05}), 0.1, 1.0) == 2);
  CHECK(code_of([] { plunge_count(spectrum({1.0}), 0.5, 1.0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("eig_count_check") {
  // Spectrum {1, 0}: H vanishes, both sides are exact.
  const EigCountCheck toy = eig_count_check(spectrum({1.0, 0.0}), 0.5, 1.0, 2, 0.5, 1.0);
  CHECK(toy.lhs == 0.0);
  CHECK(toy.rhs == 0.0);
  CHECK(toy.ok);
  // delta = 1/2 gives the factor 2.
  const EigCountCheck half = eig_count_check(spectrum({0.5}), 0.5, 1.0, 1, 1.0, 0.25);
  CHECK(half.rhs == doctest::Approx(2.0 * 0.75));

  const GramMatrix g = build_gram(Window::gaussian(), kHalf, Mask::ball({0, 0}, 4));
  const SpectralDecomposition d = eigendecompose(g);
  const double hs = hilbert_schmidt_sum(g);
  for (double delta : {0.1, 0.25, 0.5}) {
    CAPTURE(delta);
    CHECK(eig_count_check(d.eigenvalues, delta, 4.0031, g.size(), 1.0, hs).ok);
  }
}

TEST_CASE("trace_difference") {
  CHECK(trace_difference(spectrum({2.0}), 2.0) == 0.0);
  CHECK(trace_difference(spectrum({1.0}), 2.0) == doctest::Approx(0.5));
  const Eigen::VectorXd s = spectrum({0.9, 0.6, 0.3, 0.05});
  double terms = 0.0;
  for (double l : s) terms += l * (1.0 - l);
  CHECK(trace_difference(s, 1.0) == doctest::Approx(terms).epsilon(1e-14));
}

TEST_CASE("regularization check on a single point") {
  const LatticeKernel kernel(Window::gaussian(), kHalf, 10.0);
  const RegularizationCheck rc = regularization_check(kernel, Mask::ball({0, 0}, 0.1), 1.0, 1.0, 1.0, 1.0);
  CHECK(rc.lhs == doctest::Approx(kGaussTail).epsilon(1e-8));
  CHECK(rc.delta_term == 0.0);
  CHECK(rc.boundary_term > 0);
  CHECK(rc.ratio == doctest::Approx(rc.lhs / rc.boundary_term));
}

TEST_CASE("corrupted kernel phase breaks Hermitian symmetry") {
  const auto bad = make_kernel(Window::gaussian(), kHalf, 8.0, true);
  const GramMatrix g = build_gram(bad, Mask::ball({0, 0}, 3));
  const SpectralDecomposition d = eigendecompose(g, EigenOptions{true, false, 1e-12});
  const double hs = hilbert_schmidt_sum(g);
  CHECK(std::abs(eigenvalue_square_sum(d.eigenvalues) - hs) / hs > 1e-6);
}
