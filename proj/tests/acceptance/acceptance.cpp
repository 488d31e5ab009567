// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "accspec/experiments.hpp"
#include "accspec/gabor_multiplier.hpp"
#include "accspec/wh_ensemble.hpp"

using namespace accspec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const Lattice2 kHalf = Lattice2::diagonal(0.5, 0.5);
const Mask kBall3 = Mask::ball({0, 0}, 3);

struct DefaultSetup {
  GramMatrix gram;
  SpectralDecomposition dec;
  FrameBounds bounds;
};

const DefaultSetup& default_setup() {
  static const DefaultSetup s = [] {
    GramMatrix g = build_gram(Window::gaussian(), kHalf, kBall3);
    SpectralDecomposition d = eigendecompose(g);
    return DefaultSetup{std::move(g), std::move(d), frame_bounds_estimate(Window::gaussian(), kHalf)};
  }();
  return s;
}

const Window& tight_window() {
  static const Window w = resolve_window("tight(gaussian)", kHalf, TightWindowOptions{});
  return w;
}

ExperimentConfig tight_config() {
  ExperimentConfig cfg;
  cfg.window = "tight(gaussian)";
  return cfg;
}

Outcome trace_identity() {
  const GramMatrix g = build_gram(Window::gaussian(), kHalf, kBall3);
  const SpectralDecomposition d = eigendecompose(g, EigenOptions{false, true, 1e-12});
  const double n = static_cast<double>(g.size());
  const double rel = std::abs(eigenvalue_sum(d.eigenvalues) - n * g.window().l2_norm_sq()) / n;
  return {rel < 1e-10, fmt("N=%zu rel_err=%.3e", g.size(), rel)};
}

Outcome hs_identity() {
  const GramMatrix g = build_gram(Window::gaussian(), kHalf, kBall3);
  const SpectralDecomposition d = eigendecompose(g, EigenOptions{false, true, 1e-12});
  const double hs = hilbert_schmidt_sum(g);
  const double rel = std::abs(eigenvalue_square_sum(d.eigenvalues) - hs) / hs;
  return {rel < 1e-10, fmt("rel_err=%.3e", rel)};
}

Outcome berezin_identity() {
  const DefaultSetup& s = default_setup();
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::vector<Vec2> mus;
  for (int k = 0; k < 50; ++k) mus.push_back({u(rng), u(rng)});
  const std::vector<double> direct = berezin_values(s.gram, mus);
  double worst = 0.0;
  for (std::size_t q = 0; q < mus.size(); ++q) {
    worst = std::max(worst, std::abs(berezin_from_spectrum(s.dec, s.gram, mus[q]) - direct[q]));
  }
  return {worst < 1e-8, fmt("samples=50 max_dev=%.3e", worst)};
}

Outcome eigenvalue_bounds() {
  std::vector<Mask> masks;
  for (int r = 1; r <= 6; ++r) masks.push_back(Mask::ball({0, 0}, r));
  masks.push_back(Mask::rect({-2, -1}, {2, 1}));
  masks.push_back(Mask::rect({-0.3, -3.1}, {3.7, 2.2}));
  masks.push_back(Mask::polygon({{-3, -2}, {3, -2}, {0, 3}}));
  const double b_est = default_setup().bounds.upper;
  const auto kernel = make_kernel(Window::gaussian(), kHalf, 20.0);
  double worst_low = 0.0, worst_high = 0.0;
  bool ok = true;
  for (const Mask& m : masks) {
    const GramMatrix g = build_gram(kernel, m);
    const SpectralDecomposition d = eigendecompose(g, EigenOptions{false, false, 1e-12});
    const double l1 = d.eigenvalues(0);
    ok = ok && d.raw_min >= -1e-10 * l1 && l1 <= 1.02 * b_est;
    worst_low = std::min(worst_low, d.raw_min / l1);
    worst_high = std::max(worst_high, l1 / b_est);
  }
  return {ok, fmt("masks=%zu min(lambda_min/lambda_1)=%.3e max(lambda_1/B_est)=%.6f", masks.size(), worst_low,
                  worst_high)};
}

Outcome h_inequality() {
  const DefaultSetup& s = default_setup();
  const double b = s.bounds.upper * 1.01;
  const double hs = hilbert_schmidt_sum(s.gram);
  bool ok = true;
  std::string detail;
  for (double delta : {0.1, 0.25, 0.5}) {
    const EigCountCheck c =
        eig_count_check(s.dec.eigenvalues, delta, b, s.gram.size(), s.gram.window().l2_norm_sq(), hs);
    ok = ok && c.lhs <= c.rhs + 1e-9;
    detail += fmt("delta=%.2f lhs=%.4g rhs=%.4g ", delta, c.lhs, c.rhs);
  }
  return {ok, detail};
}

Outcome sharpness() {
  const CommandResult r = cmd_sharpness(tight_config(), {3, 4, 5, 6, 7, 8});
  const double tightness = r.report.at("setup").at("frame_bounds").at("tightness").get<double>();
  const double lo = r.report.at("summary").at("ratio_min").get<double>();
  const double hi = r.report.at("summary").at("ratio_max").get<double>();
  const bool finite = lo > 0.0 && std::isfinite(hi);
  const bool ok = tightness >= 0.999 && finite && hi / lo < 10.0;
  return {ok, fmt("tightness=%.6f ratio_min=%.4g ratio_max=%.4g spread=%.3f", tightness, lo, hi, hi / lo)};
}

Outcome reconstruction() {
  ExperimentConfig cfg = tight_config();
  double worst_ratio = 0.0, worst_dist = 0.0;
  for (int radius = 3; radius <= 8; ++radius) {
    cfg.mask = fmt("ball:0,0,%d", radius);
    const CommandResult r = cmd_reconstruct(cfg);
    worst_ratio = std::max(worst_ratio, r.report.at("summary").at("ratio").get<double>());
    worst_dist = std::max(worst_dist, r.report.at("summary").at("max_misclassified_distance").get<double>());
  }
  return {worst_ratio <= 5.0 && worst_dist <= 3.0,
          fmt("R=3..8 max_ratio=%.4g max_misclassified_distance=%.3g", worst_ratio, worst_dist)};
}

Outcome hyperuniformity() {
  const Window& w = tight_window();
  const FrameBounds fb = frame_bounds_estimate(w, kHalf);
  const VarianceCurve c = variance_scan(w, kHalf, {5, 8, 12, 16, 20, 25}, VarianceOptions{fb.tightness(), false});
  const LatticeKernel kernel(w, kHalf, 12.0);
  const double v5 = number_variance(kernel, 5.0);
  const GramMatrix g = build_gram(w, kHalf, Mask::ball({0, 0}, 5));
  const double td = trace_difference(eigendecompose(g, EigenOptions{false, true, 1e-12}).eigenvalues, 1.0);
  const double rel = std::abs(v5 - td) / std::abs(v5);
  const bool ok = c.slope_fit >= 0.7 && c.slope_fit <= 1.3 && rel < 1e-9;
  return {ok, fmt("slope=%.5f identity_rel_err(R=5)=%.3e", c.slope_fit, rel)};
}

Outcome regularization() {
  const Window& w = tight_window();
  const FrameBounds fb = frame_bounds_estimate(w, kHalf);
  const LatticeKernel kernel(w, kHalf, 20.0);
  std::vector<double> ratios;
  for (int radius = 2; radius <= 8; ++radius) {
    const RegularizationCheck rc =
        regularization_check(kernel, Mask::ball({0, 0}, radius), 1.0, 1.0, fb.lower, fb.upper);
    ratios.push_back(rc.ratio);
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  const bool ok = lo > 0.0 && std::isfinite(hi) && hi / lo < 10.0;
  return {ok, fmt("R=2..8 ratio_min=%.4g ratio_max=%.4g spread=%.3f", lo, hi, hi / lo)};
}

std::vector<std::pair<std::string, std::string>> read_dir(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out.emplace_back(e.path().filename().string(), ss.str());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "accspec_acceptance_det";
  fs::remove_all(root);
  bool ok = true;
  std::size_t files = 0;
  for (const char* cmd : {"identities", "sharpness"}) {
    const fs::path a = root / cmd / "a", b = root / cmd / "b";
    run_command(cmd, ExperimentConfig{}, {}, a.string());
    run_command(cmd, ExperimentConfig{}, {}, b.string());
    const auto da = read_dir(a), db = read_dir(b);
    ok = ok && !da.empty() && da == db;
    files += da.size();
  }
  fs::remove_all(root);
  return {ok, fmt("files_compared=%zu", files)};
}

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds, infinity when unbounded
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  constexpr double kNoLimit = std::numeric_limits<double>::infinity();
  const std::vector<Criterion> criteria{
      {1, "trace identity", 1.0, trace_identity},
      {2, "Hilbert-Schmidt identity", 1.0, hs_identity},
      {3, "Berezin identity", 5.0, berezin_identity},
      {4, "eigenvalue bounds", kNoLimit, eigenvalue_bounds},
      {5, "eigenvalue counting inequality", kNoLimit, h_inequality},
      {6, "sharpness scan", 300.0, sharpness},
      {7, "mask reconstruction", kNoLimit, reconstruction},
      {8, "hyperuniformity", 120.0, hyperuniformity},
      {9, "regularization bound", kNoLimit, regularization},
      {10, "determinism", kNoLimit, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.time_limit) {
      o.pass = false;
      o.detail += fmt(" runtime limit %.0fs exceeded", c.time_limit);
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %-32s %s  %s  (%.2fs)\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
