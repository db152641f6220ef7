#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rydberg/coupling.hpp"
#include "rydberg/error.hpp"
#include "rydberg/manybody.hpp"
#include "rydberg/scanner.hpp"
#include "rydberg/units.hpp"
#include "rydberg/weakfield.hpp"

using namespace rydberg;

namespace {

ScanJob parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.cfg");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing ", path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string csv_of(const ScanJob& job, Execution exec) {
  std::ostringstream os;
  write_csv(os, job, run_scan(job, exec));
  return os.str();
}

const char* kAnalytic = R"(
mode = single-atom-analytic
element = Rb
n = 55
channels = 55 54
D_um = 2.5
kappa_min = -3
kappa_max = 3
kappa_count = 13
kappa_spacing = linear
)";

std::size_t column(const ScanResult& r, const std::string& name) {
  for (std::size_t i = 0; i < r.columns.size(); ++i)
    if (r.columns[i] == name) return i;
  FAIL("no column " << name);
  return 0;
}

}  // namespace

TEST_SUITE("scanner") {

TEST_CASE("mode names round trip") {
  for (auto m : {ScanMode::SingleAtomNumeric, ScanMode::SingleAtomAnalytic, ScanMode::Polarization,
                 ScanMode::ManyBody, ScanMode::Table1}) {
    CHECK(parse_scan_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_scan_mode("fig9"), ConfigError);
}

TEST_CASE("kappa grids") {
  KappaGrid g{0.1, 10.0, 3, GridSpacing::Log};
  const auto p = g.points();
  REQUIRE(p.size() == 3);
  CHECK(p[0] == 0.1);
  CHECK(p[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p[2] == 10.0);
  g.spacing = GridSpacing::Linear;
  CHECK(g.points()[1] == doctest::Approx(5.05));
  CHECK(KappaGrid{2.0, 2.0, 1, GridSpacing::Log}.points() == std::vector<double>{2.0});
  CHECK_THROWS_AS((KappaGrid{1.0, 1.0, 4, GridSpacing::Linear}.validate()), ConfigError);
  CHECK_THROWS_AS((KappaGrid{-1.0, 1.0, 4, GridSpacing::Log}.validate()), ConfigError);
  CHECK_THROWS_AS((KappaGrid{0.1, 1.0, 0, GridSpacing::Log}.validate()), ConfigError);
  CHECK_NOTHROW((KappaGrid{-1.0, 1.0, 4, GridSpacing::Linear}.validate()));
}

TEST_CASE("config parsing") {
  const auto job = parse(kAnalytic);
  CHECK(job.mode == ScanMode::SingleAtomAnalytic);
  CHECK(job.element == "Rb");
  CHECK(job.channels == std::vector<int>{55, 54});
  REQUIRE(job.distance_a0.has_value());
  CHECK(*job.distance_a0 == doctest::Approx(units::micrometres_to_bohr(2.5)));
  CHECK(job.grid.spacing == GridSpacing::Linear);
  CHECK(job.l_max == 4);
  CHECK(parse("mode = table1\nelement = Li\nn = 38\neta_target = 0.25\ntargets = 0.1\n").l_max == 8);

  const auto sections = parse("[run]\nmode = many-body  # comment\nelement = \"Rb\"\nn = 55\nD_a0 = 40000\n"
                              "R_at_um = 5\natoms = 3\n");
  CHECK(sections.atoms == 3);
  CHECK(*sections.spacing_a0 == doctest::Approx(units::micrometres_to_bohr(5.0)));
  CHECK(*sections.distance_a0 == 40000.0);

  const auto explicit_basis = parse("mode = single-atom-numeric\nelement = Rb\nn = 55\nD_um = 2.5\n"
                                    "states = 55s 55p-1 55p+1\nframe = bare\nauto_window = false\n");
  CHECK(explicit_basis.states.size() == 3);
  CHECK(explicit_basis.propagation.frame == Frame::Bare);
  CHECK_FALSE(explicit_basis.propagation.auto_window);
}

TEST_CASE("config errors name the line") {
  const std::string base = "mode = single-atom-analytic\nelement = Rb\nn = 55\n";
  CHECK_THROWS_WITH_AS(parse(base + "D_um = 2.5\nfoo = 1\n"), doctest::Contains("test.cfg:5: unknown key 'foo'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base + "D_um = 2.5\nn = 54\n"), doctest::Contains("test.cfg:5: duplicate key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base + "D = 2.5\n"), doctest::Contains("needs a unit suffix"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base + "sigma = 0.1\nD_um = 2.5\n"), doctest::Contains("test.cfg:4"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base + "D_um = abc\n"), doctest::Contains("test.cfg:4"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base + "D_um = 2.5\nkappa_spacing = cubic\n"), doctest::Contains("test.cfg:5"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base + "D_um = 2.5\njunk\n"), doctest::Contains("expected 'key = value'"), ConfigError);
  CHECK_THROWS_AS(parse(base), ConfigError);  // no D
  CHECK_THROWS_AS(parse(base + "D_um = 2.5\nD_a0 = 4e4\n"), ConfigError);
  CHECK_THROWS_AS(parse(base + "D_um = 2.5\neta_target = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse(base + "D_um = 2.5\nsigma_um = 0.1\nsigma_a0 = 10\n"), ConfigError);
  CHECK_THROWS_AS(parse(base + "D_um = -2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse("element = Rb\nn = 55\nD_um = 2.5\n"), ConfigError);  // no mode
  CHECK_THROWS_AS(parse("mode = many-body\nelement = Rb\nn = 55\nD_um = 2.5\nR_at_um = 5\nR_at_over_D = 2\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse("mode = table1\nelement = Rb\nn = 55\nD_um = 2.5\n"), ConfigError);  // no targets
  CHECK_THROWS_AS(parse("mode = table1\nelement = Rb\nn = 55\nD_um = 2.5\ntargets = 1.5\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base + "D_um = 2.5\nstates = 55q\n"), doctest::Contains("test.cfg:5"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("canonical text round trips") {
  for (const char* name : {"fig2a_analytic.cfg", "fig5_manybody.cfg", "table1_li38.cfg", "fig4_rb72.cfg"}) {
    const auto job = load_config(std::string(RYDBERG_CONFIG_DIR) + "/" + name);
    const auto again = parse(job.canonical_text());
    CHECK(again.canonical_text() == job.canonical_text());
    CHECK(again.hash() == job.hash());
  }
  const auto a = parse(kAnalytic);
  auto b = a;
  b.grid.count += 1;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("configs are recovered from CSV and JSON output") {
  const auto job = parse(kAnalytic);
  const auto result = run_scan(job);
  std::ostringstream csv, json;
  write_csv(csv, job, result);
  write_json(json, job, result);
  std::istringstream csv_in(csv.str()), json_in(json.str());
  CHECK(parse_config(csv_in, "out.csv").canonical_text() == job.canonical_text());
  CHECK(parse_config(json_in, "out.json").canonical_text() == job.canonical_text());
}

TEST_CASE("shipped configs validate") {
  for (const char* name : {"fig2a_analytic.cfg", "fig3_rb55.cfg", "fig3_rb72.cfg", "fig3_li38.cfg",
                           "fig3_li55.cfg", "fig4_rb55.cfg", "fig4_rb72.cfg", "fig4_li38.cfg",
                           "fig4_li55.cfg", "fig5_manybody.cfg", "table1_rb55.cfg", "table1_rb72.cfg",
                           "table1_li38.cfg", "table1_li55.cfg"}) {
    CHECK_NOTHROW(load_config(std::string(RYDBERG_CONFIG_DIR) + "/" + name));
  }
}

TEST_CASE("context resolution") {
  auto job = parse("mode = single-atom-analytic\nelement = Rb\nn = 55\neta_target = 0.18\n");
  const auto ctx = ScanContext::build(job);
  CHECK(ctx.eta_nn == doctest::Approx(0.18).epsilon(1e-12));
  CHECK(ctx.basis.states.empty());
  CHECK(ctx.kappa_of_energy(ctx.energy_ev(1.7)) == doctest::Approx(1.7).epsilon(1e-13));
  const auto scale = MomentumScale::reference(ctx.model, 55, ctx.distance);
  CHECK(ctx.energy_ev(2.0) == doctest::Approx(from_kappa(2.0, scale).energy_ev));

  const auto li = ScanContext::build(parse("mode = single-atom-numeric\nelement = Li\nn = 38\nD_um = 2.5\n"
                                           "n_window = 1\nl_max = 3\n"));
  CHECK(li.basis.size() == build_basis(builtin_defect_model("Li"), {38, 0, 0}, 1, 3).size());
  CHECK(li.table.size() == li.basis.size());

  std::ofstream("/tmp/rydberg_test_defects.txt") << "element = Rb\nl_cutoff = 1\ndelta_0 = 3.131\ndelta_1 = 2.65\n";
  const auto custom = ScanContext::build(parse("mode = single-atom-analytic\nelement = Rb\n"
                                               "defects_file = /tmp/rydberg_test_defects.txt\nn = 55\nD_um = 2.5\n"));
  CHECK(custom.model.defect(2) == 0.0);
}

TEST_CASE("analytic scan matches the closed form") {
  const auto job = parse(kAnalytic);
  const auto result = run_scan(job);
  const auto ctx = ScanContext::build(job);
  REQUIRE(result.records.size() == 13);
  REQUIRE(result.failures.empty());
  const auto rb = builtin_defect_model("Rb");
  const double e55 = eta(55, 55, *job.distance_a0, rb), e54 = eta(55, 54, *job.distance_a0, rb);
  for (const auto& rec : result.records) {
    const double kappa = rec.values[0];
    const double p55m = analytic_probability({e55, 1, Sublevel::Minus}, kappa).probability;
    const double p54p = analytic_probability({e54, -1, Sublevel::Plus}, kappa).probability;
    CHECK(rec.values[column(result, "P_55p-1")] == doctest::Approx(p55m));
    CHECK(rec.values[column(result, "P_54p+1")] == doctest::Approx(p54p));
    double sum = 0.0;
    for (std::size_t i = 2; i + 1 < result.columns.size(); ++i) sum += rec.values[i];
    CHECK(rec.values[column(result, "P_total")] == doctest::Approx(sum));
    if (kappa != 0.0) CHECK(rec.values[1] == doctest::Approx(ctx.energy_ev(std::abs(kappa))));
  }
}

TEST_CASE("many-body scan columns") {
  auto job = parse("mode = many-body\nelement = Rb\nn = 55\nD_um = 2.5\natoms = 3\nR_at_over_D = 2\n"
                   "kappa_min = 0.2\nkappa_max = 4\nkappa_count = 6\n");
  const auto result = run_scan(job);
  CHECK(result.columns.size() == 2 + 6 + 1);
  CHECK(result.columns[2] == "m1_chi+1");
  CHECK(result.columns[3] == "m1_chi-1");
  const auto chain = make_chain(builtin_defect_model("Rb"), 55, 55, 3, 2.0 * *job.distance_a0, *job.distance_a0);
  const double e = eta(55, 55, *job.distance_a0, builtin_defect_model("Rb"));
  for (const auto& rec : result.records) {
    CHECK(rec.values[3] == doctest::Approx(collective_probability({1, -1}, chain, rec.values[0], e, 1)));
    CHECK(rec.values.back() == doctest::Approx(total_collective_probability(chain, rec.values[0], e)));
  }
}

TEST_CASE("serial and parallel scans are byte identical") {
  for (const std::string cfg : {std::string(RYDBERG_CONFIG_DIR) + "/fig5_manybody.cfg",
                                std::string(RYDBERG_GOLDEN_DIR) + "/rb55_three_level.cfg",
                                std::string(RYDBERG_GOLDEN_DIR) + "/rb55_three_level_polarization.cfg"}) {
    const auto job = load_config(cfg);
    CHECK(csv_of(job, Execution::Serial) == csv_of(job, Execution::Parallel));
  }
}

TEST_CASE("output matches the golden files") {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {std::string(RYDBERG_CONFIG_DIR) + "/fig2a_analytic.cfg", "fig2a_analytic.csv"},
      {std::string(RYDBERG_CONFIG_DIR) + "/fig5_manybody.cfg", "fig5_manybody.csv"},
      {std::string(RYDBERG_GOLDEN_DIR) + "/rb55_three_level.cfg", "rb55_three_level.csv"},
      {std::string(RYDBERG_GOLDEN_DIR) + "/rb55_three_level_polarization.cfg", "rb55_three_level_polarization.csv"},
      {std::string(RYDBERG_GOLDEN_DIR) + "/rb55_three_level_table1.cfg", "rb55_three_level_table1.csv"}};
  for (const auto& [cfg, golden] : cases) {
    const auto job = load_config(cfg);
    CHECK_MESSAGE(csv_of(job, Execution::Parallel) == read_file(std::string(RYDBERG_GOLDEN_DIR) + "/" + golden), golden);
  }
}

TEST_CASE("JSON output") {
  const auto job = load_config(std::string(RYDBERG_GOLDEN_DIR) + "/rb55_three_level_table1.cfg");
  auto unreachable = job;
  unreachable.targets = {0.1, 0.5};
  const auto result = run_scan(unreachable);
  std::ostringstream os;
  write_json(os, unreachable, result);
  const auto j = nlohmann::json::parse(os.str());
  CHECK(j["mode"] == "table1");
  CHECK(j["columns"].size() == result.columns.size());
  REQUIRE(j["records"].size() == 2);
  CHECK(j["records"][0]["status"] == "ok");
  CHECK(j["records"][1]["E_kin_eV"].is_null());
  CHECK(j["records"][1]["status"].get<std::string>().rfind("error:", 0) == 0);
  CHECK(j["failures"].size() == 1);
  CHECK(j["provenance"].contains("config_hash"));
}

TEST_CASE("depletion inversion") {
  const auto job = load_config(std::string(RYDBERG_GOLDEN_DIR) + "/rb55_three_level_table1.cfg");
  const auto ctx = ScanContext::build(job);
  const auto r = invert_for_depletion(ctx, job, 0.1, job.grid.points(), depletion_scan(ctx, job));
  CHECK(r.kappa > r.kappa_at_max);
  CHECK(r.energy_ev == doctest::Approx(ctx.energy_ev(r.kappa)).epsilon(1e-12));
  CHECK(r.bracket_lo_ev <= r.energy_ev);
  CHECK(r.bracket_hi_ev >= r.energy_ev);
  CHECK(r.bracket_hi_ev / r.bracket_lo_ev <= 1.0 + job.energy_rel_tol + 1e-12);
  CHECK(r.depletion_lo >= 0.1);
  CHECK(r.depletion_hi <= 0.1);
  REQUIRE(r.ascending_energy_ev.has_value());
  CHECK(*r.ascending_energy_ev < r.energy_ev);
  const auto point = numeric_point(ctx, job, r.kappa);
  CHECK(point.populations.depletion() == doctest::Approx(0.1).epsilon(2e-3));

  CHECK_THROWS_AS(invert_for_depletion(ctx, job, 0.5, job.grid.points(), depletion_scan(ctx, job)),
                  UnreachableTargetError);
  try {
    invert_for_depletion(ctx, job, 0.5, job.grid.points(), depletion_scan(ctx, job));
  } catch (const UnreachableTargetError& e) {
    CHECK(e.achievable() == doctest::Approx(r.max_depletion));
  }
}

TEST_CASE("numeric scan records integrator failures per point") {
  auto job = load_config(std::string(RYDBERG_GOLDEN_DIR) + "/rb55_three_level.cfg");
  job.propagation.norm_tol = 1e-300;
  job.propagation.rel_tol = 1e-4;
  const auto result = run_scan(job);
  REQUIRE(result.records.size() == static_cast<std::size_t>(job.grid.count));
  CHECK_FALSE(result.failures.empty());
  for (const auto& rec : result.records) {
    if (rec.status != "ok") {
      CHECK(rec.status.rfind("error:", 0) == 0);
      CHECK(std::isnan(rec.values[column(result, "P_ns")]));
      CHECK(rec.values[0] > 0.0);  // kappa is still reported
    }
  }
}

TEST_CASE("numeric scan records are physical") {
  const auto job = load_config(std::string(RYDBERG_GOLDEN_DIR) + "/rb55_three_level.cfg");
  const auto result = run_scan(job);
  for (const auto& rec : result.records) {
    CHECK(rec.status == "ok");
    const double total = rec.values[column(result, "P_ns")] + rec.values[column(result, "P_other_s")] +
                         rec.values[column(result, "P_p")] + rec.values[column(result, "P_d")] +
                         rec.values[column(result, "P_l_gt_d")];
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rec.values[column(result, "norm_drift")] < 1e-8);
    CHECK(rec.values[column(result, "window_converged")] == 1.0);
  }
}

}  // TEST_SUITE
