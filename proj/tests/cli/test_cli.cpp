#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"
#include "json.hpp"
#include "output.hpp"
#include "wgldos/errors.hpp"

using namespace wgldos;
using namespace wgldos::cli;
namespace fs = std::filesystem;

namespace {

const char* kWire = R"([spectral]
lambda_um = 1.0

[background]
kind = "homogeneous"
eps1 = 2.0

[guide]
shape = "circle"
center_nm = [0, 0]
radius_nm = 20

[guide.material]
model = "constant"
eps = [-50, 3.85]

[mesh]
h_nm = 4

[spectrum]
band = [1.6, 3.0]

[emitters]
ray = [1, 0]
distances_nm = [20]
orientation = "radial"
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wgldos_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Data rows (non-comment lines after the column header).
std::vector<std::vector<std::string>> rows(const fs::path& csv) {
  std::istringstream in(slurp(csv));
  std::vector<std::vector<std::string>> out;
  bool header = false;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    out.push_back(cells);
  }
  return out;
}

int line_of_error(const std::string& text) {
  try {
    parse_config(text, false, "inline");
  } catch (const cli::ConfigError& e) {
    return e.line();
  }
  return -1;
}

int run_cli(const std::string& args, const fs::path& err) {
  const std::string cmd = std::string(WGLDOS_CLI_PATH) + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("shortest round-trip number format") {
  CHECK(num(0.1) == "0.1");
  CHECK(num(2.0) == "2");
  CHECK(num(-0.0) == "0");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    const std::string s = num(x);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == x);
  }
}

TEST_CASE("config: resolved values and defaults") {
  const RunConfig cfg = parse_config(kWire, false, "inline");
  REQUIRE(cfg.problem.guide.has_value());
  CHECK(cfg.problem.h == doctest::Approx(0.004));
  CHECK(cfg.emitters.size() == 1);
  CHECK(cfg.emitters[0].distance() == doctest::Approx(0.02));
  CHECK(cfg.emitters[0].orientation().x() == doctest::Approx(1.0));
  CHECK(cfg.spectrum.band->first == 1.6);
  CHECK(cfg.spectrum.tol == 1e-3);
  CHECK(cfg.spectrum.workers == 1);
  CHECK(cfg.resolved.find("k_max = 50") != std::string::npos);
  CHECK(cfg.resolved.find("workers = 1") != std::string::npos);
  CHECK(cfg.resolved.find("eps = [ -50") != std::string::npos);
  CHECK_FALSE(cfg.lossless);
}

TEST_CASE("config: overrides land in the resolved config") {
  Overrides ov;
  ov.workers = 3;
  ov.tol = 2e-4;
  ov.lossless = true;
  ov.out_dir = "elsewhere";
  const RunConfig cfg = parse_config(kWire, false, "inline", ov);
  CHECK(cfg.spectrum.workers == 3);
  CHECK(cfg.spectrum.tol == 2e-4);
  CHECK(cfg.lossless);
  CHECK(permittivity(cfg.problem.guide->material(), cfg.problem.sp).imag() == 0.0);
  CHECK(cfg.out_dir == "elsewhere");
  CHECK(cfg.resolved.find("lossless = true") != std::string::npos);
  CHECK(cfg.resolved.find("tol = 0.0002") != std::string::npos);
}

TEST_CASE("config: JSON input resolves like TOML") {
  const std::string json = R"({
    "background": {"kind": "homogeneous", "eps1": 2.0},
    "guide": {"shape": "circle", "center_nm": [0, 0], "radius_nm": 20,
              "material": {"model": "constant", "eps": [-50, 3.85]}},
    "mesh": {"h_nm": 4},
    "spectral": {"lambda_um": 1.0},
    "spectrum": {"band": [1.6, 3.0]},
    "emitters": {"ray": [1, 0], "distances_nm": [20], "orientation": "radial"}
  })";
  CHECK(parse_config(json, true, "inline").resolved == parse_config(kWire, false, "inline").resolved);
  CHECK_THROWS_AS(parse_config("{\"mesh\": ", true, "inline"), cli::ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"mesh": {"typo": 1}, "emitters": {"positions_nm": [[0,0]]}})", true, "inline"),
                  cli::ConfigError);
}

TEST_CASE("config: unknown keys and bad values are line-anchored errors") {
  CHECK(line_of_error(replace(kWire, "h_nm = 4", "h_nm = 4\nhh_nm = 3")) == 19);
  CHECK(line_of_error(replace(kWire, "radius_nm = 20", "radius_nm = \"20\"")) == 11);
  CHECK(line_of_error(replace(kWire, "kind = \"homogeneous\"", "kind = \"slab\"")) == 5);
  CHECK(line_of_error(replace(kWire, "[mesh]", "[meshes]")) == 17);
  CHECK(line_of_error(replace(kWire, "eps = [-50, 3.85]", "eps = [-50, 3.85, 1]")) == 15);
  CHECK(line_of_error(replace(kWire, "lambda_um = 1.0", "lambda_um = 1.0 =")) == 2);
  try {
    parse_config(replace(kWire, "h_nm = 4", "h_nm = 4\nhh_nm = 3"), false, "inline");
  } catch (const cli::ConfigError& e) {
    CHECK(std::string(e.what()).find("unknown key \"hh_nm\" in [mesh]") != std::string::npos);
    CHECK(std::string(e.what()).rfind("line 19", 0) == 0);
  }
  CHECK_THROWS_AS(parse_config(replace(kWire, "distances_nm = [20]", "positions_nm = [[50, 0]]\ndistances_nm = [20]"),
                               false, "inline"),
                  cli::ConfigError);
  CHECK_THROWS_AS(parse_config("[background]\neps1 = 2.0\n", false, "inline"), cli::ConfigError);
}

TEST_CASE("spectrum: null contrast gives zero rows, worker count does not change rows") {
  const fs::path a = scratch("null"), b = scratch("w1"), c = scratch("w2");
  Overrides ov;
  ov.out_dir = a.string();
  cmd_spectrum(parse_config(replace(kWire, "eps = [-50, 3.85]", "eps = 2.0"), false, "inline", ov));
  const auto zero = rows(a / "spectrum.csv");
  REQUIRE(zero.size() > 10);
  for (const auto& r : zero) CHECK(r[1] == "0");

  ov.out_dir = b.string();
  ov.workers = 1;
  cmd_spectrum(parse_config(kWire, false, "inline", ov));
  ov.out_dir = c.string();
  ov.workers = 2;
  cmd_spectrum(parse_config(kWire, false, "inline", ov));
  const auto r1 = rows(b / "spectrum.csv");
  CHECK(r1 == rows(c / "spectrum.csv"));
  REQUIRE(r1.size() > 10);
  CHECK(r1[0].size() == 4);
  // peak row near n_eff = 2.28
  std::size_t best = 0;
  for (std::size_t i = 0; i < r1.size(); ++i)
    if (std::stod(r1[i][1]) > std::stod(r1[best][1])) best = i;
  CHECK(std::stod(r1[best][0]) == doctest::Approx(2.28).epsilon(0.02));
  const std::string text = slurp(b / "spectrum.csv");
  CHECK(text.rfind("# wgldos ", 0) == 0);
  CHECK(text.find("k_z_over_k0,delta_rho2d_u,rho_ref,refinement_level") != std::string::npos);
}

TEST_CASE("modes: JSON summary, lossless pole, no-mode error") {
  const fs::path a = scratch("modes"), b = scratch("modes_lossless");
  Overrides ov;
  ov.out_dir = a.string();
  cmd_modes(parse_config(kWire, false, "inline", ov));
  const auto j = nlohmann::json::parse(slurp(a / "modes.json"));
  CHECK(j["n_eff"].get<double>() == doctest::Approx(2.28).epsilon(0.02));
  CHECK(j["kind"] == "bound");
  CHECK(j["L_spp_um"].get<double>() > 0.5);
  CHECK(j["Gamma_rad_SPP_per_um"].is_null());
  CHECK(j.contains("fit"));
  CHECK(j["fit"]["residual_rms"].get<double>() < 0.05);

  ov.out_dir = b.string();
  ov.lossless = true;
  cmd_modes(parse_config(kWire, false, "inline", ov));
  const auto l = nlohmann::json::parse(slurp(b / "modes.json"));
  CHECK(l["L_spp_um"].is_null());
  CHECK(l["below_linewidth_resolution"] == true);
  CHECK(l["n_eff"].get<double>() == doctest::Approx(2.28).epsilon(0.02));

  ov.lossless = false;
  CHECK_THROWS_AS(cmd_modes(parse_config(replace(kWire, "eps = [-50, 3.85]", "eps = 2.0"), false, "inline", ov)),
                  NoModeError);
}

TEST_CASE("rates: zero contrast rows and column layout") {
  const fs::path a = scratch("rates");
  Overrides ov;
  ov.out_dir = a.string();
  std::string cfg = replace(kWire, "eps = [-50, 3.85]", "eps = 2.0");
  cfg = replace(cfg, "distances_nm = [20]", "distances_nm = [10, 40]");
  cfg = replace(cfg, "band = [1.6, 3.0]", "k_max = 10");
  cmd_rates(parse_config(cfg, false, "inline", ov));
  const std::string text = slurp(a / "rates.csv");
  CHECK(text.find("d_nm,gamma_pl,gamma_rad,gamma_scatt,gamma_pl_leak,gamma_NR,gamma_pl_NR,gamma_eh,beta") !=
        std::string::npos);
  const auto r = rows(a / "rates.csv");
  REQUIRE(r.size() == 2);
  CHECK(r[0][0] == "10");
  CHECK(r[1][0] == "40");
  for (const auto& row : r) {
    CHECK(row[1] == "0");
    CHECK(row[8] == "0");
    CHECK(std::stod(row[2]) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
  }
}

TEST_CASE("map: empty guide gives zeros; interior points masked") {
  const fs::path a = scratch("map_empty"), b = scratch("map_wire");
  Overrides ov;
  ov.out_dir = a.string();
  const char* empty = R"([background]
eps1 = 2.0
[emitters]
positions_nm = [[0, 0]]
[map]
x_nm = [-10, 10]
y_nm = [-10, 10]
nx = 3
ny = 3
)";
  cmd_map(parse_config(empty, false, "inline", ov));
  const auto z = rows(a / "map.csv");
  REQUIRE(z.size() == 9);
  for (const auto& r : z) CHECK(r[2] == "0");

  ov.out_dir = b.string();
  const std::string wire = std::string(kWire) + "\n[map]\nx_nm = [-40, 40]\ny_nm = [0, 0]\nnx = 9\nny = 1\nk_z_over_k0 = 2.28\n";
  cmd_map(parse_config(wire, false, "inline", ov));
  const auto m = rows(b / "map.csv");
  REQUIRE(m.size() == 9);
  CHECK(m[4][3] == "1");  // center of the wire
  CHECK(m[3][3] == "1");
  CHECK(m[0][3] == "0");
  CHECK(m[1][3] == "0");
  CHECK(std::stod(m[0][2]) == doctest::Approx(std::stod(m[8][2])).epsilon(1e-6));  // mirror symmetry
  CHECK(std::stod(m[1][2]) > std::stod(m[0][2]));
}

TEST_CASE("binary: exit codes and JSON errors") {
  const fs::path dir = scratch("bin");
  fs::create_directories(dir);
  const fs::path good = dir / "good.toml", bad = dir / "bad.toml", nomode = dir / "nomode.toml", err = dir / "err.txt";
  std::ofstream(good) << std::string(kWire) << "[run]\nout_dir = \"" << (dir / "out").string() << "\"\n";
  std::ofstream(bad) << replace(kWire, "h_nm = 4", "h_nm = 4\nhh_nm = 3");
  std::ofstream(nomode) << replace(kWire, "eps = [-50, 3.85]", "eps = 2.0") << "[run]\nout_dir = \""
                        << (dir / "nm").string() << "\"\n";

  CHECK(run_cli("spectrum --config " + good.string(), err) == 0);
  CHECK(fs::exists(dir / "out" / "spectrum.csv"));

  CHECK(run_cli("spectrum --config " + bad.string(), err) == 2);
  const auto e = nlohmann::json::parse(slurp(err));
  CHECK(e["error"]["kind"] == "config");
  CHECK(e["error"]["line"] == 19);

  CHECK(run_cli("modes --config " + nomode.string(), err) == 1);
  CHECK(nlohmann::json::parse(slurp(err))["error"]["kind"] == "no_mode");
  CHECK(nlohmann::json::parse(slurp(dir / "nm" / "modes.json"))["error"]["kind"] == "no_mode");

  CHECK(run_cli("spectrum", err) == 2);
  CHECK(run_cli("spectrum --config " + good.string() + " --workers 0", err) == 2);
}
