#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "cglwave/run.hpp"

using namespace cglwave;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("parse_config: minimal document fills defaults") {
  RunConfig rc = parse_config("experiment = simulate\n");
  CHECK(rc.experiment == Experiment::simulate);
  CHECK(rc.grid_n == 256);
  CHECK(rc.eps == 0.1);
  CHECK(rc.method == Method::strang_exact);
  CHECK(rc.solver().dt == Catch::Approx(0.1 * 0.1 / 4.0));
  std::string echo = effective_config_text(rc);
  CHECK(echo.find("grid.n = 256") != std::string::npos);
  CHECK(echo.find("params.s = 2") != std::string::npos);
}

TEST_CASE("parse_config: missing required key is named") {
  try {
    parse_config("grid.n = 64\n");
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("experiment") != std::string::npos);
  }
}

TEST_CASE("parse_config: eps bounds message") {
  try {
    parse_config("experiment = simulate\nparams.eps = 0\n");
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("eps must be in (0,1]") !=
          std::string::npos);
  }
}

TEST_CASE("parse_config: kappa above kappa0 rejected for verify-semigroup") {
  std::string doc = "experiment = verify-semigroup\nparams.kappa = 0.95\n";
  try {
    parse_config(doc);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("kappa0") != std::string::npos);
  }
  // same kappa is fine for plain simulation
  CHECK_NOTHROW(parse_config("experiment = simulate\nparams.kappa = 0.95\n"));
}

TEST_CASE("parse_config: unknown keys and multi-error reporting") {
  std::string doc =
      "experiment = simulate\n"
      "grid.m = 10\n"          // typo'd key
      "params.eps = -1\n"      // bad value
      "solver.record_stride = 0\n";
  try {
    parse_config(doc);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("unknown key 'grid.m'") != std::string::npos);
    CHECK(msg.find("eps must be in (0,1]") != std::string::npos);
    CHECK(msg.find("record_stride") != std::string::npos);
  }
}

TEST_CASE("initial data presets") {
  RunConfig rc = parse_config(
      "experiment = simulate\ninit.preset = single_mode\ninit.mode = 3\n"
      "init.amplitude = 0.2\n");
  auto [a0, phi0] = make_initial_data(rc);
  CHECK(linf_norm(a0) == Catch::Approx(0.2).epsilon(1e-12));
  Field s = to_spectral(a0);
  GridSpec g = rc.grid();
  for (std::size_t i = 0; i < s.size(); ++i) {
    int k = std::abs(g.k_of(static_cast<int>(i)));
    if (k != 3) CHECK(std::abs(s[i]) < 1e-13);
  }

  RunConfig rb = parse_config(
      "experiment = simulate\ninit.preset = random_band\ninit.target_m0 = "
      "0.05\n");
  auto [a1, p1] = make_initial_data(rb);
  CHECK(compute_M0(a1, p1, rb.params()) == Catch::Approx(0.05).epsilon(1e-12));

  RunConfig rg = parse_config(
      "experiment = simulate\ninit.preset = gaussian_bump\n");
  auto [a2, p2] = make_initial_data(rg);
  CHECK(linf_norm(p2) == 0.0);
  CHECK(linf_norm(a2) > 0.0);
}

TEST_CASE("snapshot round trip is bit exact") {
  TempDir tmp("cglwave_snapshot_test");
  GridSpec g = make_grid(1, 64, default_length());
  PerturbationParams p = make_params(0.1, 0.2, 2, 1);
  Field f = band_limited_random(g, 8, 1.0, 2.0, 5);
  std::string base = (tmp.path / "field").string();
  write_field_snapshot(base, f, "b", p, 1.25);

  auto [back, meta] = read_field_snapshot(base);
  CHECK(meta.variable == "b");
  CHECK(meta.time == 1.25);
  CHECK(meta.eps == 0.1);
  CHECK(meta.kappa == 0.2);
  CHECK(meta.n == 64);
  CHECK_FALSE(meta.is_complex);
  REQUIRE(back.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(back[i].real() == f[i].real());

  // complex field keeps both parts
  Field c = build_psi(f * 0.1, f * 0.05, p);
  write_field_snapshot(base + "_c", c, "psi", p, 0.0);
  auto [cback, cmeta] = read_field_snapshot(base + "_c");
  CHECK(cmeta.is_complex);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(cback[i] == c[i]);

  CHECK_THROWS_AS(read_field_snapshot((tmp.path / "absent").string()),
                  config_error);
}

TEST_CASE("run: simulate writes artifacts and a manifest") {
  TempDir tmp("cglwave_run_test");
  RunConfig rc = parse_config(
      "experiment = simulate\nsolver.t_end = 0.05\nsolver.record_stride = "
      "10\ninit.amplitude = 0.05\noutput.dir = " +
      (tmp.path / "out").string() + "\n");
  RunResult res = run(rc, true);
  CHECK(res.exit_code == kExitOk);
  REQUIRE_FALSE(res.artifacts.empty());
  for (const auto& a : res.artifacts)
    CHECK(std::filesystem::exists(a.path));
  // manifest present and references the artifacts
  bool found = false;
  for (const auto& entry :
       std::filesystem::directory_iterator(tmp.path / "out"))
    if (entry.path().filename().string().starts_with("manifest_")) {
      found = true;
      std::string text = slurp(entry.path().string());
      CHECK(text.find("simulate") != std::string::npos);
      CHECK(text.find("wall_time_sec") != std::string::npos);
    }
  CHECK(found);
}

TEST_CASE("run: simulate on zero data yields a constant trajectory") {
  TempDir tmp("cglwave_zero_run_test");
  RunConfig rc = parse_config(
      "experiment = simulate\nsolver.t_end = 0.02\nsolver.record_stride = 4\n"
      "init.amplitude = 0\noutput.dir = " +
      (tmp.path / "out").string() + "\n");
  RunResult res = run(rc, true);
  CHECK(res.exit_code == kExitOk);
  std::string csv;
  for (const auto& a : res.artifacts)
    if (a.path.find("simulate_eps") != std::string::npos) csv = a.path;
  REQUIRE_FALSE(csv.empty());
  // every diagnostics row reports the unperturbed state
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    auto c1 = line.find(','), c2 = line.find(',', line.find(',') + 1);
    double energy = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    CHECK(energy < 1e-20);
  }
  CHECK(rows >= 2);
}

TEST_CASE("run: verify-semigroup writes finite fitted constants") {
  TempDir tmp("cglwave_semigroup_run_test");
  RunConfig rc = parse_config(
      "experiment = verify-semigroup\nsemigroup.xi_points = 32\n"
      "output.dir = " +
      (tmp.path / "out").string() + "\n");
  RunResult res = run(rc, true);
  CHECK(res.exit_code == kExitOk);
  std::string js;
  for (const auto& a : res.artifacts)
    if (a.kind == "json") js = a.path;
  REQUIRE_FALSE(js.empty());
  std::string text = slurp(js);
  CHECK(text.find("\"feasible\": true") != std::string::npos);
  CHECK(text.find("low_band") != std::string::npos);
  CHECK(text.find("high_band") != std::string::npos);
}

TEST_CASE("run: compare emits e_m(0) = 0 rows") {
  TempDir tmp("cglwave_compare_test");
  RunConfig rc = parse_config(
      "experiment = compare\ncompare.samples = 5\ncompare.t_end_slow = 1.0\n"
      "init.target_m0 = 0.05\noutput.dir = " +
      (tmp.path / "out").string() + "\n");
  RunResult res = run(rc, true);
  CHECK(res.exit_code == kExitOk);
  std::string csv;
  for (const auto& a : res.artifacts)
    if (a.kind == "csv") csv = a.path;
  REQUIRE_FALSE(csv.empty());
  std::string text = slurp(csv);
  CHECK(text.starts_with("time,m,model,error\n"));
  CHECK(text.find("0,2,parabolic,") != std::string::npos);
}

TEST_CASE("run: identical config and seed give bit-identical CSV artifacts") {
  TempDir tmp("cglwave_determinism_test");
  auto run_into = [&](const std::string& sub) {
    RunConfig rc = parse_config(
        "experiment = diagnostics\nsolver.t_end = 0.02\n"
        "solver.dt = 0.00125\nsolver.record_stride = 2\n"
        "init.seed = 12\noutput.dir = " +
        (tmp.path / sub).string() + "\n");
    RunResult res = run(rc, true);
    REQUIRE(res.exit_code == kExitOk);
    std::map<std::string, std::string> contents;
    for (const auto& a : res.artifacts)
      if (a.kind == "csv")
        contents[std::filesystem::path(a.path).filename().string()] =
            slurp(a.path);
    return contents;
  };
  auto a = run_into("a");
  auto b = run_into("b");
  REQUIRE_FALSE(a.empty());
  REQUIRE(a.size() == b.size());
  for (const auto& [name, text] : a) {
    REQUIRE(b.count(name) == 1);
    CHECK(text == b.at(name));
  }
}

TEST_CASE("output root falls back to the environment variable") {
  setenv("CGLWAVE_OUT_ROOT", "/tmp/cglwave_env_root", 1);
  RunConfig rc = parse_config("experiment = simulate\n");
  CHECK(rc.output_dir == "/tmp/cglwave_env_root");
  unsetenv("CGLWAVE_OUT_ROOT");
  RunConfig rc2 = parse_config("experiment = simulate\n");
  CHECK(rc2.output_dir == "out");
  RunConfig rc3 = parse_config("experiment = simulate\noutput.dir = custom\n");
  CHECK(rc3.output_dir == "custom");
}

TEST_CASE("emit_report lists artifacts and flags truncation") {
  std::ostringstream out;
  emit_report({}, out);
  CHECK(out.str().empty());

  std::ostringstream out2;
  emit_report({{"csv", "a.csv", false}, {"json", "b.json", true}}, out2);
  std::string text = out2.str();
  CHECK(text.find("a.csv") != std::string::npos);
  CHECK(text.find("truncated") != std::string::npos);
}

TEST_CASE("emit_report renders the fitted-slope table of a comparison run") {
  TempDir tmp("cglwave_report_test");
  RunConfig rc = parse_config(
      "experiment = compare\ncompare.samples = 6\ncompare.t_end_slow = 0.5\n"
      "init.target_m0 = 0.05\noutput.dir = " +
      (tmp.path / "out").string() + "\n");
  RunResult res = run(rc, true);
  REQUIRE(res.exit_code == kExitOk);
  std::ostringstream out;
  emit_report(res.artifacts, out);
  std::string text = out.str();
  CHECK(text.find("fitted slopes") != std::string::npos);
  CHECK(text.find("m=0") != std::string::npos);
  CHECK(text.find("m=2") != std::string::npos);
}
