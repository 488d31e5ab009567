#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "accspec/error.hpp"
#include "accspec/experiments.hpp"

using namespace accspec;
using nlohmann::json;
namespace fs = std::filesystem;

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

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("accspec_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_report(const fs::path& dir) { return json::parse(slurp(dir / "report.json")); }

const json* find_check(const json& report, const std::string& name) {
  for (const auto& r : report.at("results")) {
    if (r.at("check") == name) return &r;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("empty config resolves to the documented defaults") {
  const ExperimentConfig c = ExperimentConfig::from_json(json::object());
  CHECK(c.window == "gaussian");
  CHECK(c.mask == "ball:0,0,3");
  CHECK(c.lattice[0][0] == 0.5);
  CHECK(c.lattice[1][1] == 0.5);
  CHECK_FALSE(c.b_fixed.has_value());
  CHECK(c.tol("trace") == 1e-10);
  CHECK(c.tight.grid_points == 1024);
  const json j = c.to_json();
  CHECK(ExperimentConfig::from_json(j).to_json() == j);
}

TEST_CASE("config validation") {
  CHECK(code_of([] { ExperimentConfig::from_json({{"windw", "gaussian"}}); }) == ErrorCode::kConfig);
  CHECK(code_of([] { ExperimentConfig::from_json({{"tolerances", {{"trace", -1}}}}); }) == ErrorCode::kConfig);
  CHECK(code_of([] { ExperimentConfig::from_json({{"tolerances", {{"bogus", 1}}}}); }) == ErrorCode::kConfig);
  CHECK(code_of([] { ExperimentConfig::from_json({{"B", "max"}}); }) == ErrorCode::kConfig);
  CHECK(code_of([] { ExperimentConfig::from_json({{"lattice", {1, 2, 3}}}); }) == ErrorCode::kConfig);
  CHECK(code_of([] { ExperimentConfig::from_json({{"r", "one"}}); }) == ErrorCode::kConfig);
  CHECK(code_of([] { ExperimentConfig::from_json({{"probe_count", 4}}); }) == ErrorCode::kConfig);
  CHECK(ExperimentConfig::from_json({{"B", 1.5}}).b_fixed == 1.5);
}

TEST_CASE("identities on the default setup pass") {
  const CommandResult r = cmd_identities(ExperimentConfig{});
  CHECK(r.pass);
  for (const char* name : {"trace", "hilbert_schmidt", "berezin", "bessel", "eigenvalue_lower", "eigenvalue_upper",
                           "h_inequality", "trace_difference", "orthonormality", "stft_energy"}) {
    CAPTURE(name);
    const json* c = find_check(r.report, name);
    REQUIRE(c != nullptr);
    CHECK(c->at("pass") == true);
  }
  CHECK(r.report.at("summary").at("N") == 113);
  CHECK(r.report.at("setup").at("frame_bounds").at("inner_estimate") == true);
  CHECK(r.report.at("hypotheses").at("nonvanishing_on_lattice") == true);
}

TEST_CASE("corrupted phase is caught by the Hilbert-Schmidt check") {
  ExperimentConfig cfg;
  cfg.corrupt_phase = true;
  const CommandResult r = cmd_identities(cfg);
  CHECK_FALSE(r.pass);
  CHECK(find_check(r.report, "hilbert_schmidt")->at("pass") == false);
}

TEST_CASE("errors become reports with the config echoed") {
  ExperimentConfig cfg;
  cfg.mask = "ball:0.25,0.25,0.1";
  const fs::path dir = scratch("empty");
  CHECK(run_command("identities", cfg, {}, dir.string()) == 2);
  const json rep = read_report(dir);
  CHECK(rep.at("error").at("code") == "empty-mask");
  CHECK(rep.at("config").at("mask") == "ball:0.25,0.25,0.1");
  CHECK(rep.at("pass") == false);

  const fs::path dir3 = scratch("three_radii");
  CHECK(run_command("hyperuniformity", ExperimentConfig{}, {5, 8, 12}, dir3.string()) == 2);
  CHECK(read_report(dir3).at("error").at("code") == "config");

  ExperimentConfig nontight;
  nontight.lattice = {{{0.8, 0.0}, {0.0, 0.8}}};
  const fs::path dirg = scratch("gate");
  CHECK(run_command("sharpness", nontight, {3, 4}, dirg.string()) == 2);
  CHECK(read_report(dirg).at("error").at("code") == "tightness");
  fs::remove_all(dir);
  fs::remove_all(dir3);
  fs::remove_all(dirg);
}

TEST_CASE("perimeter comparison") {
  ExperimentConfig cfg;
  cfg.lattice = {{{1.0, 0.0}, {0.0, 1.0}}};
  cfg.r = 0.5;
  const CommandResult r = cmd_perimeter_compare(cfg);
  CHECK(r.pass);
  CHECK(r.report.at("summary").at("ratio_spread").get<double>() < 10.0);
  CHECK(r.tables.at(0).second.rows() == 19);

  cfg.r = 0.0;
  std::vector<double> generic{2.1, 3.3, 5.7, 7.9};
  const CommandResult zero = cmd_perimeter_compare(cfg, generic);
  CHECK(zero.report.at("summary").at("ratio_max").get<double>() == 0.0);

  cfg.mask = "rect:0,0,1,1";
  CHECK(code_of([&] { cmd_perimeter_compare(cfg); }) == ErrorCode::kConfig);
}

TEST_CASE("reconstruction on a triangle completes") {
  ExperimentConfig cfg;
  cfg.mask = "poly:-3,-2,3,-2,0,3";
  const CommandResult r = cmd_reconstruct(cfg);
  CHECK(r.report.at("summary").contains("ratio"));
  CHECK(r.report.at("summary").contains("distance_histogram"));
  bool has_occupancy = false;
  for (const auto& [name, text] : r.texts) has_occupancy = has_occupancy || (name == "occupancy.txt" && !text.empty());
  CHECK(has_occupancy);
}

TEST_CASE("sharpness runs below the fundamental diameter") {
  const CommandResult r = cmd_sharpness(ExperimentConfig{}, {0.5, 1.0});
  CHECK(r.report.at("scan").size() == 2);
  CHECK(r.report.at("scan")[0].at("N") == 5);
}

TEST_CASE("reruns are byte identical") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(run_command("identities", ExperimentConfig{}, {}, a.string()) == 0);
  REQUIRE(run_command("identities", ExperimentConfig{}, {}, b.string()) == 0);
  for (const char* f : {"report.json", "spectrum.csv", "points.csv"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("command-line front end") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "cfg.json") << R"({"mask": "ball:0,0,2"})";
  }
  const std::string cli = ACCSPEC_CLI;
  auto run = [&](const std::string& args) {
    const int st = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  };
  const std::string cfg = (dir / "cfg.json").string();
  CHECK(run("identities --config " + cfg + " --out " + (dir / "ok").string()) == 0);
  CHECK(read_report(dir / "ok").at("command") == "identities");
  CHECK(run("hyperuniformity --config " + cfg + " --radii 3,x --out " + (dir / "bad").string()) == 2);
  CHECK(read_report(dir / "bad").at("error").at("code") == "config");
  CHECK(run("identities --config " + (dir / "missing.json").string() + " --out " + (dir / "io").string()) == 2);
  CHECK(read_report(dir / "io").at("error").at("code") == "io");
  CHECK(run("bogus --config " + cfg) != 0);
  fs::remove_all(dir);
}
