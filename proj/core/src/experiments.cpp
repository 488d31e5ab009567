#include "accspec/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "accspec/error.hpp"
#include "accspec/gabor_multiplier.hpp"
#include "accspec/summation.hpp"
#include "accspec/version.hpp"
#include "accspec/wh_ensemble.hpp"

namespace accspec {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config helpers

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{"window",      "lattice",      "mask",       "r",
                                          "B",           "B_inflation",  "tolerances", "output_dir",
                                          "tight",       "probe_count",  "seed",       "deltas",
                                          "sample_points", "allow_nontight", "max_gram", "corrupt_phase"};
  return keys;
}

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::kConfig, msg); }

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("config field '") + key + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Shared experiment setup

struct Setup {
  Lattice2 lat;
  Window window;
  std::optional<TightWindow> tight;
  FrameBounds bounds;
  double b = 0.0;
};

std::pair<Window, std::optional<TightWindow>> resolve_window_full(const std::string& spec, const Lattice2& lat,
                                                                  const TightWindowOptions& opts) {
  if (spec.starts_with("tight(") && spec.ends_with(")")) {
    const std::string inner = spec.substr(6, spec.size() - 7);
    const Window base = resolve_window_full(inner, lat, opts).first;
    TightWindow tw = canonical_tight_window(base, lat, opts);
    Window w = tw.window;
    return {w, std::move(tw)};
  }
  return {Window::parse(spec), std::nullopt};
}

Setup make_setup(const ExperimentConfig& cfg) {
  const Lattice2 lat = Lattice2::from_rows(cfg.lattice);
  auto [w, tight] = resolve_window_full(cfg.window, lat, cfg.tight);
  const FrameBounds bounds = tight ? tight->bounds : frame_bounds_estimate(w, lat, cfg.probe_count);
  const double b = cfg.b_fixed ? *cfg.b_fixed : bounds.upper * cfg.b_inflation;
  return Setup{lat, w, tight, bounds, b};
}

json setup_json(const Setup& s) {
  json j;
  j["window"] = s.window.describe();
  j["l2_norm_sq"] = s.window.l2_norm_sq();
  j["lattice"] = {{"rows", s.lat.rows()},
                  {"det", s.lat.det()},
                  {"density", s.lat.density()},
                  {"l_min", s.lat.l_min()},
                  {"l_fund", s.lat.l_fund()}};
  j["frame_bounds"] = {{"lower", s.bounds.lower},
                       {"upper", s.bounds.upper},
                       {"tightness", s.bounds.tightness()},
                       {"probes", s.bounds.probes},
                       {"inner_estimate", s.bounds.inner_estimate}};
  j["B_used"] = s.b;
  if (s.tight) {
    j["tight_window"] = {{"step", s.tight->step},
                         {"lattice_aligned", s.tight->lattice_aligned},
                         {"floored_energy", s.tight->floored_energy},
                         {"rescale", s.tight->rescale},
                         {"samples", s.tight->window.grid().samples.size()}};
  }
  return j;
}

json hypothesis_json(const Setup& s, double r) {
  const double reach = r + 3.0 * s.lat.l_fund();
  const DecayFit fit = decay_check(s.window, 3.0, 8.0);
  json j;
  j["nonvanishing_radius"] = reach;
  j["nonvanishing_on_lattice"] = nonvanishing_on_lattice(s.window, s.lat, reach);
  j["decay_s3"] = {{"c_fit", fit.c_fit}, {"ok", fit.ok}, {"worst_ratio", fit.worst_ratio}};
  const MStarNorm m = mstar_norm(s.window, s.lat, 10.0 * s.lat.l_fund());
  j["mstar_norm"] = {{"value", m.value},
                     {"tail_estimate", m.tail_estimate},
                     {"tail_negligible", m.tail_negligible},
                     {"truncation_radius", m.truncation_radius}};
  return j;
}

void require_tight(const Setup& s, const ExperimentConfig& cfg) {
  if (s.bounds.tightness() < kTightnessGate && !cfg.allow_nontight) {
    throw Error(ErrorCode::kTightness, "frame tightness " + format_double(s.bounds.tightness()) +
                                           " is below the 0.99 gate; use a tight(...) window or --allow-nontight");
  }
}

// Collects {check, value, bound, relation, pass} entries.
struct Checks {
  json items = json::array();
  bool pass = true;

  void add(const std::string& name, double value, double bound, bool upper, json extra = json::object()) {
    const bool ok = std::isfinite(value) && (upper ? value <= bound : value >= bound);
    json e{{"check", name}, {"value", value}, {"bound", bound}, {"relation", upper ? "<=" : ">="}, {"pass", ok}};
    for (auto& [k, v] : extra.items()) e[k] = v;
    items.push_back(std::move(e));
    pass = pass && ok;
  }
  void flag(const std::string& name, bool ok, json extra = json::object()) {
    json e{{"check", name}, {"pass", ok}};
    for (auto& [k, v] : extra.items()) e[k] = v;
    items.push_back(std::move(e));
    pass = pass && ok;
  }
};

json base_report(const std::string& command, const ExperimentConfig& cfg) {
  return json{{"command", command}, {"version", kVersion}, {"config", cfg.to_json()}};
}

std::vector<Vec2> random_points(const Mask& mask, std::uint64_t seed, int count) {
  Vec2 lo, hi;
  mask.bounding_box(lo, hi);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x - 1.0, hi.x + 1.0);
  std::uniform_real_distribution<double> uy(lo.y - 1.0, hi.y + 1.0);
  std::vector<Vec2> out;
  for (int i = 0; i < count; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    out.push_back({x, y});
  }
  return out;
}

double ratio_spread(const std::vector<double>& ratios) {
  const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
  if (!(*mn > 0.0) || !std::isfinite(*mx)) return std::numeric_limits<double>::infinity();
  return *mx / *mn;
}

double mask_reach(const Mask& mask) {
  Vec2 lo, hi;
  mask.bounding_box(lo, hi);
  return norm(hi - lo);
}

std::string occupancy_grid(const AccumulatedSpectrogram& rho, const std::vector<LatticePoint>& misclassified) {
  std::int64_t i0 = std::numeric_limits<std::int64_t>::max(), i1 = std::numeric_limits<std::int64_t>::min();
  std::int64_t j0 = i0, j1 = i1;
  std::map<LatticePoint, double> value;
  for (std::size_t k = 0; k < rho.field.points.size(); ++k) {
    const LatticePoint p = rho.field.points[k];
    value[p] = rho.field.values[k];
    i0 = std::min(i0, p.i);
    i1 = std::max(i1, p.i);
    j0 = std::min(j0, p.j);
    j1 = std::max(j1, p.j);
  }
  const std::set<LatticePoint> bad(misclassified.begin(), misclassified.end());
  std::ostringstream os;
  os << "# rows: second coefficient (top = largest), columns: first coefficient\n";
  os << "# ' ' outside region, '.' rho<0.25, '-' <0.5, '+' <0.75, '#' >=0.75, 'x' misclassified\n";
  for (std::int64_t j = j1; j >= j0; --j) {
    std::string line;
    for (std::int64_t i = i0; i <= i1; ++i) {
      const auto it = value.find({i, j});
      char c = ' ';
      if (bad.contains({i, j})) {
        c = 'x';
      } else if (it != value.end()) {
        const double v = it->second;
        c = v < 0.25 ? '.' : v < 0.5 ? '-' : v < 0.75 ? '+' : '#';
      }
      line.push_back(c);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
  }
  return os.str();
}

std::vector<double> default_or(std::vector<double> radii, std::vector<double> fallback) {
  return radii.empty() ? fallback : radii;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExperimentConfig

std::map<std::string, double> ExperimentConfig::default_tolerances() {
  return {{"trace", 1e-10},
          {"hilbert_schmidt", 1e-10},
          {"berezin", 1e-8},
          {"bessel", 1e-8},
          {"orthonormality", 1e-8},
          {"stft_energy", 1e-8},
          {"psd", 1e-10},
          {"eig_upper_slack", 0.02},
          {"h_inequality", 1e-9},
          {"trace_difference", 1e-9},
          {"rho_upper", 1e-8},
          {"spectrogram_tail", 1e-8},
          {"variance_identity", 1e-9},
          {"ratio_spread", 10.0},
          {"reconstruction_ratio", 5.0},
          {"misclassified_distance", 3.0},
          {"slope_min", 0.7},
          {"slope_max", 1.3}};
}

double ExperimentConfig::tol(const std::string& name) const {
  const auto it = tolerances.find(name);
  if (it != tolerances.end()) return it->second;
  return default_tolerances().at(name);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!known_keys().contains(k)) config_error("unknown config field '" + k + "'");
  }
  ExperimentConfig c;
  if (j.contains("window")) c.window = get_as<std::string>(j, "window");
  if (j.contains("lattice")) {
    const auto rows = get_as<std::vector<std::vector<double>>>(j, "lattice");
    if (rows.size() != 2 || rows[0].size() != 2 || rows[1].size() != 2) config_error("lattice must be a 2x2 matrix");
    c.lattice = {{{rows[0][0], rows[0][1]}, {rows[1][0], rows[1][1]}}};
  }
  if (j.contains("mask")) c.mask = get_as<std::string>(j, "mask");
  if (j.contains("r")) c.r = get_as<double>(j, "r");
  if (!(c.r >= 0.0)) config_error("r must be >= 0");
  if (j.contains("B")) {
    const json& b = j.at("B");
    if (b.is_string()) {
      if (b.get<std::string>() != "estimate") config_error("B must be \"estimate\" or a positive number");
    } else if (b.is_number()) {
      c.b_fixed = b.get<double>();
      if (!(*c.b_fixed > 0.0)) config_error("B must be positive");
    } else {
      config_error("B must be \"estimate\" or a positive number");
    }
  }
  if (j.contains("B_inflation")) c.b_inflation = get_as<double>(j, "B_inflation");
  if (!(c.b_inflation > 0.0)) config_error("B_inflation must be positive");
  if (j.contains("tolerances")) {
    const auto defaults = default_tolerances();
    for (const auto& [k, v] : j.at("tolerances").items()) {
      if (!defaults.contains(k)) config_error("unknown tolerance '" + k + "'");
      if (!v.is_number() || !(v.get<double>() > 0.0)) config_error("tolerance '" + k + "' must be a positive number");
      c.tolerances[k] = v.get<double>();
    }
  }
  if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j, "output_dir");
  if (j.contains("tight")) {
    const json& t = j.at("tight");
    if (!t.is_object()) config_error("tight must be an object");
    for (const auto& [k, v] : t.items()) {
      if (k != "grid_halfwidth" && k != "grid_points" && k != "box_radius") {
        config_error("unknown tight field '" + k + "'");
      }
    }
    if (t.contains("grid_halfwidth")) c.tight.grid_halfwidth = get_as<double>(t, "grid_halfwidth");
    if (t.contains("grid_points")) c.tight.grid_points = get_as<int>(t, "grid_points");
    if (t.contains("box_radius")) c.tight.lattice_box_radius = get_as<double>(t, "box_radius");
  }
  if (j.contains("probe_count")) c.probe_count = get_as<int>(j, "probe_count");
  if (c.probe_count < 16) config_error("probe_count must be >= 16");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("deltas")) c.deltas = get_as<std::vector<double>>(j, "deltas");
  for (double d : c.deltas) {
    if (!(d > 0.0 && d < 1.0)) config_error("deltas must lie in (0, 1)");
  }
  if (j.contains("sample_points")) c.sample_points = get_as<int>(j, "sample_points");
  if (c.sample_points < 1) config_error("sample_points must be >= 1");
  if (j.contains("allow_nontight")) c.allow_nontight = get_as<bool>(j, "allow_nontight");
  if (j.contains("max_gram")) c.max_gram = get_as<std::size_t>(j, "max_gram");
  if (j.contains("corrupt_phase")) c.corrupt_phase = get_as<bool>(j, "corrupt_phase");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    config_error("config '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json tol_json = json::object();
  for (const auto& [k, v] : default_tolerances()) tol_json[k] = tol(k);
  json j{{"window", window},
         {"lattice", {{lattice[0][0], lattice[0][1]}, {lattice[1][0], lattice[1][1]}}},
         {"mask", mask},
         {"r", r},
         {"B_inflation", b_inflation},
         {"tolerances", tol_json},
         {"output_dir", output_dir},
         {"tight",
          {{"grid_halfwidth", tight.grid_halfwidth},
           {"grid_points", tight.grid_points},
           {"box_radius", tight.lattice_box_radius}}},
         {"probe_count", probe_count},
         {"seed", seed},
         {"deltas", deltas},
         {"sample_points", sample_points},
         {"allow_nontight", allow_nontight},
         {"max_gram", max_gram},
         {"corrupt_phase", corrupt_phase}};
  if (b_fixed) {
    j["B"] = *b_fixed;
  } else {
    j["B"] = "estimate";
  }
  return j;
}

Window resolve_window(const std::string& spec, const Lattice2& lat, const TightWindowOptions& tight) {
  return resolve_window_full(spec, lat, tight).first;
}

// ---------------------------------------------------------------------------
// Commands

CommandResult cmd_identities(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  const Mask mask = Mask::parse(cfg.mask);
  const auto kernel = make_kernel(s.window, s.lat, mask_reach(mask) + 2.0, cfg.corrupt_phase);
  const GramMatrix gram = build_gram(kernel, mask, GramOptions{cfg.max_gram});
  const SpectralDecomposition dec = eigendecompose(gram, EigenOptions{true, false, 1e-12});
  const double l2 = s.window.l2_norm_sq();
  const auto n = gram.size();
  const double lam1 = dec.eigenvalues(0);

  Checks c;
  const double mass = static_cast<double>(n) * l2;
  c.add("trace", std::abs(eigenvalue_sum(dec.eigenvalues) - mass) / mass, cfg.tol("trace"), true);
  const double hs = hilbert_schmidt_sum(gram);
  const double sq = eigenvalue_square_sum(dec.eigenvalues);
  c.add("hilbert_schmidt", std::abs(sq - hs) / sq, cfg.tol("hilbert_schmidt"), true);

  const std::vector<Vec2> mus = random_points(mask, cfg.seed, cfg.sample_points);
  const std::vector<double> direct = berezin_values(gram, mus);
  double berezin_dev = 0.0;
  double bessel_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < mus.size(); ++q) {
    berezin_dev = std::max(berezin_dev, std::abs(berezin_from_spectrum(dec, gram, mus[q]) - direct[q]));
    const std::vector<double> partial = bessel_partial_sums(dec, gram, mus[q]);
    if (!partial.empty()) bessel_excess = std::max(bessel_excess, *std::max_element(partial.begin(), partial.end()) - l2);
  }
  c.add("berezin", berezin_dev, cfg.tol("berezin"), true, {{"samples", mus.size()}});
  c.add("bessel", bessel_excess, cfg.tol("bessel"), true);

  c.add("eigenvalue_lower", dec.raw_min / lam1, -cfg.tol("psd"), false);
  c.add("eigenvalue_upper", lam1 / s.bounds.upper, 1.0 + cfg.tol("eig_upper_slack"), true,
        {{"lambda_1", lam1}, {"B_est", s.bounds.upper}});

  for (double delta : cfg.deltas) {
    const EigCountCheck h = eig_count_check(dec.eigenvalues, delta, s.b, n, l2, hs);
    c.add("h_inequality", h.lhs - h.rhs, cfg.tol("h_inequality"), true,
          {{"delta", delta}, {"lhs", h.lhs}, {"rhs", h.rhs}});
  }
  if (s.b >= lam1) {
    c.add("trace_difference", trace_difference(dec.eigenvalues, s.b), -cfg.tol("trace_difference"), false);
  }
  // Both eigenfunction checks divide by lambda_k, so they are restricted to
  // lambda_k >= 1e-6 lambda_1 where that division is well conditioned.
  c.add("orthonormality", orthonormality_error(dec, gram, n, 1e-6), cfg.tol("orthonormality"), true);

  const Eigen::MatrixXcd u = gram.entries * dec.coeffs;
  double energy_dev = 0.0;
  std::size_t energy_count = 0;
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    const double lam = dec.eigenvalues(k);
    if (lam < 1e-6 * lam1) break;
    energy_dev = std::max(energy_dev, std::abs(u.col(k).squaredNorm() / lam - lam) / lam);
    ++energy_count;
  }
  c.add("stft_energy", energy_dev, cfg.tol("stft_energy"), true, {{"eigenfunctions", energy_count}});

  CommandResult r;
  r.report = base_report("identities", cfg);
  r.report["setup"] = setup_json(s);
  r.report["hypotheses"] = hypothesis_json(s, cfg.r);
  r.report["summary"] = {{"N", n},
                         {"lambda_1", lam1},
                         {"lambda_min_raw", dec.raw_min},
                         {"norm_floor", dec.norm_floor},
                         {"A_omega", a_omega(n, l2, s.b)},
                         {"corrupt_phase", cfg.corrupt_phase}};
  r.report["results"] = c.items;
  r.report["pass"] = c.pass;
  r.pass = c.pass;
  r.tables.emplace_back("spectrum.csv", spectrum_table(dec.eigenvalues));
  r.tables.emplace_back("points.csv", points_table(s.lat, gram.points));
  return r;
}

CommandResult cmd_sharpness(const ExperimentConfig& cfg, std::vector<double> radii) {
  radii = default_or(std::move(radii), {3, 4, 5, 6, 7, 8});
  const Setup s = make_setup(cfg);
  require_tight(s, cfg);
  Vec2 center{0.0, 0.0};
  const double l2 = s.window.l2_norm_sq();
  const double rmax = *std::max_element(radii.begin(), radii.end());
  const auto kernel = make_kernel(s.window, s.lat, 2.0 * rmax + 10.0, cfg.corrupt_phase);
  const double r_lambda = cfg.r + s.lat.l_fund();

  CsvTable csv({"R", "N", "l1_error", "boundary_count", "ratio"});
  json per_r = json::array();
  std::vector<double> ratios;
  Checks c;
  for (double radius : radii) {
    const Mask mask = Mask::ball(center, radius);
    const GramMatrix gram = build_gram(kernel, mask, GramOptions{cfg.max_gram});
    const SpectralDecomposition dec = eigendecompose(gram);
    const AccumulatedSpectrogram rho =
        accumulated_spectrogram(dec, gram, mask, s.b, SpectrogramOptions{cfg.tol("spectrogram_tail")});
    const L1Error err = l1_error(rho);
    const std::size_t bc = boundary_count(mask, s.lat, r_lambda).count;
    const double ratio = bc > 0 ? err.value / static_cast<double>(bc) : std::numeric_limits<double>::infinity();
    ratios.push_back(ratio);
    const double rho_max = *std::max_element(rho.field.values.begin(), rho.field.values.end());
    std::vector<double> plunge_terms(dec.size());
    for (std::size_t k = 0; k < dec.size(); ++k) {
      const double lam = dec.eigenvalues(static_cast<Eigen::Index>(k));
      plunge_terms[k] = lam * (1.0 - lam);
    }
    csv.row({format_double(radius), std::to_string(gram.size()), format_double(err.value), std::to_string(bc),
             format_double(ratio)});
    per_r.push_back({{"R", radius},
                     {"N", gram.size()},
                     {"A_omega", rho.a_omega},
                     {"l1_error", err.value},
                     {"tail_estimate", err.tail_estimate},
                     {"eval_pad", rho.eval_pad},
                     {"guarded_terms", rho.guarded_terms},
                     {"boundary_count", bc},
                     {"ratio", ratio},
                     {"rho_max", rho_max},
                     {"plunge_count_0.1", plunge_count(dec.eigenvalues, 0.1, s.b)},
                     {"l1_times_norm", err.value * l2},
                     {"sum_lambda_one_minus_lambda", pairwise_sum(plunge_terms)}});
    c.add("rho_upper", rho_max - 1.0, cfg.tol("rho_upper"), true, {{"R", radius}});
  }
  const double spread = ratio_spread(ratios);
  c.add("ratio_spread", spread, cfg.tol("ratio_spread"), true);

  CommandResult r;
  r.report = base_report("sharpness", cfg);
  r.report["setup"] = setup_json(s);
  r.report["hypotheses"] = hypothesis_json(s, cfg.r);
  r.report["r_lambda"] = r_lambda;
  r.report["scan"] = per_r;
  r.report["summary"] = {{"ratio_min", *std::min_element(ratios.begin(), ratios.end())},
                         {"ratio_max", *std::max_element(ratios.begin(), ratios.end())},
                         {"ratio_spread", spread}};
  r.report["results"] = c.items;
  r.report["pass"] = c.pass;
  r.pass = c.pass;
  r.tables.emplace_back("sharpness.csv", std::move(csv));
  return r;
}

CommandResult cmd_reconstruct(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  const Mask mask = Mask::parse(cfg.mask);
  const auto kernel = make_kernel(s.window, s.lat, mask_reach(mask) + 10.0, cfg.corrupt_phase);
  const GramMatrix gram = build_gram(kernel, mask, GramOptions{cfg.max_gram});
  const SpectralDecomposition dec = eigendecompose(gram);
  const AccumulatedSpectrogram rho =
      accumulated_spectrogram(dec, gram, mask, s.b, SpectrogramOptions{cfg.tol("spectrogram_tail")});
  const std::vector<LatticePoint> rec = reconstruct_mask(rho);
  const std::size_t sym = symmetric_difference_count(rec, gram.points);
  const double r_lambda = cfg.r + s.lat.l_fund();
  const std::size_t bc = boundary_count(mask, s.lat, r_lambda).count;
  const double ratio = bc > 0 ? static_cast<double>(sym) / static_cast<double>(bc)
                              : (sym == 0 ? 0.0 : std::numeric_limits<double>::infinity());

  std::vector<LatticePoint> mis;
  std::set_symmetric_difference(rec.begin(), rec.end(), gram.points.begin(), gram.points.end(),
                                std::back_inserter(mis));
  CsvTable mis_csv({"i", "j", "x", "y", "boundary_distance", "inside"});
  std::map<int, std::size_t> histogram;
  double worst = 0.0;
  for (const LatticePoint& p : mis) {
    const Vec2 z = s.lat.point(p);
    const double d = mask.boundary_distance(z);
    worst = std::max(worst, d);
    ++histogram[static_cast<int>(std::floor(d / 0.5))];
    mis_csv.row({std::to_string(p.i), std::to_string(p.j), format_double(z.x), format_double(z.y), format_double(d),
                 mask.contains(z) ? "1" : "0"});
  }
  json hist = json::array();
  for (const auto& [bin, count] : histogram) {
    hist.push_back({{"distance_lo", bin * 0.5}, {"distance_hi", (bin + 1) * 0.5}, {"count", count}});
  }

  Checks c;
  c.add("reconstruction_ratio", ratio, cfg.tol("reconstruction_ratio"), true);
  c.add("misclassified_distance", worst, cfg.tol("misclassified_distance"), true);

  CsvTable rho_csv({"i", "j", "x", "y", "rho", "rho_alt", "chi"});
  for (std::size_t k = 0; k < rho.field.points.size(); ++k) {
    const LatticePoint p = rho.field.points[k];
    const Vec2 z = s.lat.point(p);
    rho_csv.row({std::to_string(p.i), std::to_string(p.j), format_double(z.x), format_double(z.y),
                 format_double(rho.field.values[k]), format_double(rho.rho_alt[k]), format_double(rho.chi[k])});
  }

  CommandResult r;
  r.report = base_report("reconstruct", cfg);
  r.report["setup"] = setup_json(s);
  r.report["summary"] = {{"N", gram.size()},
                         {"A_omega", rho.a_omega},
                         {"reconstructed", rec.size()},
                         {"symmetric_difference", sym},
                         {"boundary_count", bc},
                         {"r_lambda", r_lambda},
                         {"ratio", ratio},
                         {"max_misclassified_distance", worst},
                         {"distance_histogram", hist},
                         {"tail_estimate", rho.tail_estimate},
                         {"eval_pad", rho.eval_pad},
                         {"guarded_terms", rho.guarded_terms}};
  r.report["results"] = c.items;
  r.report["pass"] = c.pass;
  r.pass = c.pass;
  r.tables.emplace_back("rho.csv", std::move(rho_csv));
  r.tables.emplace_back("reconstructed.csv", points_table(s.lat, rec));
  r.tables.emplace_back("misclassified.csv", std::move(mis_csv));
  r.texts.emplace_back("occupancy.txt", occupancy_grid(rho, mis));
  return r;
}

CommandResult cmd_hyperuniformity(const ExperimentConfig& cfg, std::vector<double> radii) {
  radii = default_or(std::move(radii), {5, 8, 12, 16, 20, 25});
  if (radii.size() < 4) config_error("hyperuniformity needs at least 4 radii");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) config_error("hyperuniformity radii must be strictly ascending");
  }
  const Setup s = make_setup(cfg);
  require_tight(s, cfg);
  const VarianceCurve curve =
      variance_scan(s.window, s.lat, radii, VarianceOptions{s.bounds.tightness(), cfg.allow_nontight});

  Checks c;
  c.add("slope_min", curve.slope_fit, cfg.tol("slope_min"), false);
  c.add("slope_max", curve.slope_fit, cfg.tol("slope_max"), true);

  json cross = nullptr;
  for (std::size_t k = radii.size(); k-- > 0;) {
    if (curve.counts[k] > 2000) continue;
    const Mask mask = Mask::ball({0.0, 0.0}, radii[k]);
    const GramMatrix gram = build_gram(s.window, s.lat, mask, GramOptions{cfg.max_gram});
    const SpectralDecomposition dec = eigendecompose(gram, EigenOptions{false, true, 1e-12});
    const double td = trace_difference(dec.eigenvalues, 1.0);
    const double rel = std::abs(td - curve.variances[k]) / std::abs(curve.variances[k]);
    cross = {{"R", radii[k]}, {"N", gram.size()}, {"trace_difference", td}, {"number_variance", curve.variances[k]}};
    c.add("variance_identity", rel, cfg.tol("variance_identity"), true, {{"R", radii[k]}});
    break;
  }
  if (cross.is_null()) c.flag("variance_identity", false, {{"reason", "no radius with N <= 2000"}});

  CsvTable csv({"R", "N", "variance"});
  for (std::size_t k = 0; k < radii.size(); ++k) {
    csv.row({format_double(curve.radii[k]), std::to_string(curve.counts[k]), format_double(curve.variances[k])});
  }
  bool monotone = true;
  for (std::size_t k = 1; k < radii.size(); ++k) monotone = monotone && curve.variances[k] >= curve.variances[k - 1];

  CommandResult r;
  r.report = base_report("hyperuniformity", cfg);
  r.report["setup"] = setup_json(s);
  r.report["summary"] = {{"slope_fit", curve.slope_fit},
                         {"intercept", curve.intercept},
                         {"residuals", curve.residuals},
                         {"window_tightness", curve.window_tightness},
                         {"monotone", monotone},
                         {"cross_check", cross}};
  r.report["results"] = c.items;
  r.report["pass"] = c.pass;
  r.pass = c.pass;
  r.tables.emplace_back("variance.csv", std::move(csv));
  return r;
}

CommandResult cmd_perimeter_compare(const ExperimentConfig& cfg, std::vector<double> radii) {
  if (radii.empty()) {
    for (int k = 2; k <= 20; ++k) radii.push_back(k);
  }
  const Lattice2 lat = Lattice2::from_rows(cfg.lattice);
  const Mask base = Mask::parse(cfg.mask);
  if (!base.is_ball()) config_error("perimeter comparison needs a ball mask");
  const Vec2 center = std::get<Ball>(base.shape()).center;

  CsvTable csv({"R", "boundary_count", "perimeter", "ratio"});
  std::vector<double> ratios;
  for (double radius : radii) {
    const Mask m = Mask::ball(center, radius);
    const std::size_t bc = boundary_count(m, lat, cfg.r).count;
    const double per = 2.0 * std::numbers::pi * radius;
    const double ratio = static_cast<double>(bc) / per;
    ratios.push_back(ratio);
    csv.row({format_double(radius), std::to_string(bc), format_double(per), format_double(ratio)});
  }
  Checks c;
  const double spread = ratio_spread(ratios);
  c.add("ratio_spread", spread, cfg.tol("ratio_spread"), true);

  CommandResult r;
  r.report = base_report("perimeter", cfg);
  r.report["summary"] = {{"ratio_min", *std::min_element(ratios.begin(), ratios.end())},
                         {"ratio_max", *std::max_element(ratios.begin(), ratios.end())},
                         {"ratio_spread", spread},
                         {"annulus_heuristic", 2.0 * cfg.r * lat.density()}};
  r.report["results"] = c.items;
  r.report["pass"] = c.pass;
  r.pass = c.pass;
  r.tables.emplace_back("perimeter.csv", std::move(csv));
  return r;
}

// ---------------------------------------------------------------------------
// Output

void write_outputs(const CommandResult& result, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  {
    std::ofstream out(base / "report.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write report.json in '" + dir + "'");
    out << result.report.dump(2) << '\n';
  }
  for (const auto& [name, table] : result.tables) table.write_file((base / name).string());
  for (const auto& [name, text] : result.texts) {
    std::ofstream out(base / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + name + "'");
    out << text;
  }
}

json error_report(const std::string& command, const json& config_echo, const std::string& code,
                  const std::string& message) {
  return json{{"command", command},
              {"version", kVersion},
              {"config", config_echo},
              {"error", {{"code", code}, {"message", message}}},
              {"results", json::array()},
              {"pass", false}};
}

int run_command(const std::string& command, const ExperimentConfig& cfg, const std::vector<double>& radii,
                const std::string& out_dir) {
  CommandResult result;
  try {
    if (command == "identities") {
      result = cmd_identities(cfg);
    } else if (command == "sharpness") {
      result = cmd_sharpness(cfg, radii);
    } else if (command == "reconstruct") {
      result = cmd_reconstruct(cfg);
    } else if (command == "hyperuniformity") {
      result = cmd_hyperuniformity(cfg, radii);
    } else if (command == "perimeter") {
      result = cmd_perimeter_compare(cfg, radii);
    } else {
      throw Error(ErrorCode::kConfig, "unknown command '" + command + "'");
    }
  } catch (const Error& e) {
    result = CommandResult{};
    result.report = error_report(command, cfg.to_json(), std::string(to_string(e.code())), e.what());
    write_outputs(result, out_dir);
    return 2;
  }
  write_outputs(result, out_dir);
  return result.pass ? 0 : 1;
}

}  // namespace accspec
