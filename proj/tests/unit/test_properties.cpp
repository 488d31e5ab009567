// Randomized property checks over generated lattices, windows and masks.

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "accspec/gabor_multiplier.hpp"
#include "oracles.hpp"

using namespace accspec;

namespace {

// Lattice with density in [1.5, 4] and moderate shear.
Lattice2 random_frame_lattice(oracle::Gen& gen) {
  const double a = gen.uniform(0.45, 0.8);
  const double d = gen.uniform(0.45, 0.8);
  const double shear = gen.uniform(-0.3, 0.3);
  return Lattice2::from_rows({{{a, shear}, {0.0, d}}});
}

Mask random_mask(oracle::Gen& gen) {
  switch (gen.integer(0, 2)) {
    case 0: return Mask::ball({gen.uniform(-0.5, 0.5), gen.uniform(-0.5, 0.5)}, gen.uniform(0.8, 2.5));
    case 1: {
      const double x0 = gen.uniform(-2, 0), y0 = gen.uniform(-2, 0);
      return Mask::rect({x0, y0}, {x0 + gen.uniform(1, 3), y0 + gen.uniform(1, 3)});
    }
    default: {
      const double s = gen.uniform(1.5, 3);
      return Mask::polygon({{-s, -s / 2}, {s, -s / 2}, {gen.uniform(-1, 1), s}});
    }
  }
}

Window random_window(oracle::Gen& gen) { return gen.integer(0, 1) ? Window::gaussian() : Window::hermite(gen.integer(1, 2)); }

}  // namespace

TEST_CASE("Gram spectra satisfy the exact identities on random setups") {
  oracle::Gen gen(101);
  for (int trial = 0; trial < 12; ++trial) {
    const Lattice2 lat = random_frame_lattice(gen);
    const Mask mask = random_mask(gen);
    const Window w = random_window(gen);
    const GramMatrix g = build_gram(w, lat, mask);
    const SpectralDecomposition d = eigendecompose(g);
    const double n = static_cast<double>(g.size());
    CAPTURE(trial);
    CAPTURE(mask.to_string());
    CHECK(std::abs(eigenvalue_sum(d.eigenvalues) - n) / n < 1e-10);
    const double hs = hilbert_schmidt_sum(g);
    CHECK(std::abs(eigenvalue_square_sum(d.eigenvalues) - hs) / hs < 1e-10);
    CHECK(d.raw_min >= -1e-10 * d.eigenvalues(0));
    // Gershgorin: the top eigenvalue is at most the largest absolute row sum.
    const double row_max = g.entries.cwiseAbs().rowwise().sum().maxCoeff();
    CHECK(d.eigenvalues(0) <= row_max * (1 + 1e-12));
    CHECK(trace_difference(d.eigenvalues, d.eigenvalues(0)) >= -1e-9);
  }
}

TEST_CASE("Berezin identity and Bessel bound on random setups") {
  oracle::Gen gen(202);
  for (int trial = 0; trial < 6; ++trial) {
    const Lattice2 lat = random_frame_lattice(gen);
    const Mask mask = random_mask(gen);
    const GramMatrix g = build_gram(Window::gaussian(), lat, mask);
    const SpectralDecomposition d = eigendecompose(g);
    std::vector<Vec2> mus;
    for (int k = 0; k < 10; ++k) mus.push_back({gen.uniform(-3, 3), gen.uniform(-3, 3)});
    const auto direct = berezin_values(g, mus);
    for (std::size_t q = 0; q < mus.size(); ++q) {
      CHECK(std::abs(berezin_from_spectrum(d, g, mus[q]) - direct[q]) < 1e-8);
      for (double s : bessel_partial_sums(d, g, mus[q])) CHECK(s <= 1.0 + 1e-8);
    }
  }
}

TEST_CASE("enumeration agrees with brute force on random boxes") {
  oracle::Gen gen(303);
  for (int trial = 0; trial < 25; ++trial) {
    const double a = gen.uniform(0.3, 1.5), b = gen.uniform(-1, 1), c = gen.uniform(-0.5, 0.5),
                 d = gen.uniform(0.3, 1.5);
    if (std::abs(a * d - b * c) < 0.1) continue;
    const Lattice2 lat = Lattice2::from_rows({{{a, b}, {c, d}}});
    const Vec2 lo{gen.uniform(-3, 0), gen.uniform(-3, 0)};
    const Vec2 hi{lo.x + gen.uniform(0.5, 4), lo.y + gen.uniform(0.5, 4)};
    std::size_t expect = 0;
    for (const auto& p : oracle::brute_points(a, b, c, d, 60)) {
      if (p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y) ++expect;
    }
    CAPTURE(trial);
    CHECK(enumerate_in_box(lat, lo, hi).size() == expect);
  }
}

TEST_CASE("boundary_count is monotone in r and l_min <= l_fund") {
  oracle::Gen gen(404);
  for (int trial = 0; trial < 15; ++trial) {
    const Lattice2 lat = random_frame_lattice(gen);
    CHECK(lat.l_min() <= lat.l_fund());
    const Mask mask = random_mask(gen);
    std::size_t prev = 0;
    for (double r = 0.0; r <= 2.0; r += 0.25) {
      const std::size_t c = boundary_count(mask, lat, r).count;
      CHECK(c >= prev);
      prev = c;
    }
  }
}

TEST_CASE("symmetric difference is a metric on point sets") {
  oracle::Gen gen(505);
  auto random_set = [&] {
    std::vector<LatticePoint> s;
    for (int k = 0; k < 20; ++k) s.push_back({gen.integer(-4, 4), gen.integer(-4, 4)});
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  };
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_set(), b = random_set(), c = random_set();
    CHECK(symmetric_difference_count(a, b) == symmetric_difference_count(b, a));
    CHECK(symmetric_difference_count(a, c) <= symmetric_difference_count(a, b) + symmetric_difference_count(b, c));
  }
}
