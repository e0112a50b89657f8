#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <sbt/sbt.hpp>

using sbt::json;

namespace {

sbt::ExperimentConfig small_config() {
  return sbt::ExperimentConfig::from_json(json::parse(R"({
    "geometry": "circle", "force": "harmonic",
    "eps_list": [0.01, 0.005, 0.0025],
    "n_theta": 32, "n_s": 4, "seed": 7
  })"));
}

}  // namespace

TEST(FitSlope, Examples) {
  const std::vector<std::pair<double, double>> line{{0, 0}, {1, 1}, {2, 2}};
  const auto f = sbt::fit_slope(line);
  EXPECT_DOUBLE_EQ(f.slope, 1.0);
  EXPECT_DOUBLE_EQ(f.intercept, 0.0);
  EXPECT_DOUBLE_EQ(f.r_squared, 1.0);

  const std::vector<std::pair<double, double>> flat{{0, 5}, {1, 5}, {2, 5}};
  EXPECT_DOUBLE_EQ(sbt::fit_slope(flat).slope, 0.0);

  // Hand OLS: xbar = 1, ybar = 2, Sxy = 3.9, Sxx = 2.
  const std::vector<std::pair<double, double>> noisy{{0, 0}, {1, 2.1}, {2, 3.9}};
  const auto g = sbt::fit_slope(noisy);
  EXPECT_NEAR(g.slope, 1.95, 1e-12);
  EXPECT_NEAR(g.intercept, 2.0 - 1.95, 1e-12);
  const double ss_res = std::pow(0 - 0.05, 2) + std::pow(2.1 - 2.0, 2) + std::pow(3.9 - 3.95, 2);
  const double ss_tot = 4.0 + 0.01 + 3.61;
  EXPECT_NEAR(g.r_squared, 1.0 - ss_res / ss_tot, 1e-12);
}

TEST(FitSlope, Degenerate) {
  const std::vector<std::pair<double, double>> same_x{{1, 0}, {1, 1}, {1, 2}};
  EXPECT_THROW(sbt::fit_slope(same_x), sbt::DegenerateFit);
  const std::vector<std::pair<double, double>> two{{0, 0}, {1, 1}};
  EXPECT_THROW(sbt::fit_slope(two), sbt::DegenerateFit);
}

TEST(VerifyLemmas, AllPass) {
  const auto rep = sbt::verify_lemmas();
  EXPECT_TRUE(rep.all_pass());
  bool saw_d09 = false;
  for (const auto& c : rep.checks) {
    if (c.name == "d_09 double factorial") {
      saw_d09 = true;
      EXPECT_NEAR(c.expected, 32.0 / 35.0, 1e-15);
    }
  }
  EXPECT_TRUE(saw_d09);
  EXPECT_DOUBLE_EQ(sbt::double_factorial(6), 48.0);
  EXPECT_DOUBLE_EQ(sbt::double_factorial(7), 105.0);
}

TEST(Config, Validation) {
  EXPECT_THROW(sbt::ExperimentConfig::from_json(json::parse(R"({"eps_list": [0.01, 0.005]})")), sbt::ConfigInvalid);
  EXPECT_THROW(sbt::ExperimentConfig::from_json(json::parse(R"({"geometry": "square"})")), sbt::ConfigInvalid);
  EXPECT_THROW(sbt::ExperimentConfig::from_json(json::parse(R"({"n_theta": 8})")), sbt::ConfigInvalid);
  EXPECT_THROW(sbt::ExperimentConfig::from_json(json::parse(R"({"eps_list": "x"})")), sbt::ConfigInvalid);
  EXPECT_THROW(sbt::ExperimentConfig::from_json(json::parse("[]")), sbt::ConfigInvalid);
  auto cfg = sbt::ExperimentConfig::from_json(json::parse(R"({"eps_list": [0.05, 0.01, 0.005]})"));
  EXPECT_THROW(sbt::run_sweep(cfg, 1), sbt::EpsilonTooLarge);
}

TEST(Config, DefaultEpsListFitsTube) {
  const auto fr = sbt::Frame::build(sbt::Centerline::build(sbt::named_geometry("circle")));
  const auto eps = sbt::default_eps_list(fr);
  ASSERT_EQ(eps.size(), 6u);
  EXPECT_DOUBLE_EQ(eps.front(), std::ldexp(1.0, -6));
  EXPECT_DOUBLE_EQ(eps.back(), std::ldexp(1.0, -11));
  for (double e : eps) EXPECT_LT(e, fr.max_admissible_epsilon());
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = small_config().to_json();
  const auto b = small_config().to_json();
  EXPECT_EQ(sbt::config_hash(a), sbt::config_hash(b));
  auto c = small_config();
  c.seed = 8;
  EXPECT_NE(sbt::config_hash(a), sbt::config_hash(c.to_json()));
  EXPECT_EQ(sbt::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Sweep, DeterministicAcrossThreadCounts) {
  const auto cfg = small_config();
  const auto a = sbt::run_sweep(cfg, 1);
  const auto b = sbt::run_sweep(cfg, 3);
  EXPECT_EQ(a.payload().dump(), b.payload().dump());
  EXPECT_EQ(a.config_hash, b.config_hash);
  ASSERT_EQ(a.records.size(), 3u);
  for (const auto& r : a.records) {
    EXPECT_EQ(r.status, "ok");
    EXPECT_LT(r.closure_rel_max, 1e-10);
  }
  ASSERT_NE(a.slope("ur_max"), nullptr);
  EXPECT_EQ(a.slope("ur_max")->regressor, "log(eps|log eps|)");
  EXPECT_EQ(a.slope("force_residual_max")->regressor, "log(eps)");
  for (const auto& fc : a.field_checks) EXPECT_LT(fc.trace_rel, 1e-10);
}

TEST(Sweep, WritesReportFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "sbt_harness_test";
  std::filesystem::remove_all(dir);
  const auto rep = sbt::run_sweep(small_config(), 1);
  sbt::write_report(rep, dir);
  const auto j = sbt::read_json_file(dir / "report.json");
  EXPECT_EQ(j["toolkit_version"], sbt::kToolkitVersion);
  EXPECT_EQ(j["config_hash"], rep.config_hash);
  EXPECT_EQ(j["payload"]["records"].size(), 3u);
  EXPECT_TRUE(j.contains("runtime"));
  std::ifstream csv(dir / "sweep.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("eps,status,ur_max", 0), 0u);
  std::filesystem::remove_all(dir);
}

TEST(Io, ModesRoundTrip) {
  const auto modes = sbt::named_geometry("fourier-knot");
  const auto back = sbt::modes_from_json(sbt::modes_to_json(modes));
  ASSERT_EQ(back.size(), modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    EXPECT_EQ(back[i].k, modes[i].k);
    EXPECT_EQ(back[i].cos, modes[i].cos);
    EXPECT_EQ(back[i].sin, modes[i].sin);
  }
  EXPECT_THROW(sbt::modes_from_json(json::parse(R"({"modes": [{"k": -1}]})")), sbt::ConfigInvalid);
  EXPECT_THROW(sbt::modes_from_json(json::parse(R"({"modes": [{"k": 1, "cos": [1, 2]}]})")), sbt::ConfigInvalid);
  EXPECT_EQ(sbt::resolve_modes(json("circle"), false).size(), 1u);
  EXPECT_EQ(sbt::resolve_modes(json::parse(R"({"name": "harmonic"})"), true).size(), 3u);
}

TEST(Io, PointsCsv) {
  std::istringstream in("x,y,z\n# comment\n1,2,3\n\n0.5, -1e-2 ,4\n");
  const auto pts = sbt::parse_points_csv(in);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[1], sbt::Vec3(0.5, -0.01, 4));
  std::istringstream bad("1,2\n");
  EXPECT_THROW(sbt::parse_points_csv(bad), sbt::ConfigInvalid);
}

TEST(Io, FrameCsv) {
  const auto fr = sbt::Frame::build(sbt::Centerline::build(sbt::named_geometry("circle")), 128);
  std::istringstream in(sbt::frame_csv(fr));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# kappa3=0");
  std::getline(in, line);
  EXPECT_EQ(line, "s,etx,ety,etz,en1x,en1y,en1z,en2x,en2y,en2z,kappa1,kappa2");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 128);
}

TEST(Parallel, RethrowsLowestIndexError) {
  std::vector<int> out(10, 0);
  try {
    sbt::parallel_for(
        10,
        [&](std::size_t i) {
          if (i == 3 || i == 7) throw std::runtime_error("idx " + std::to_string(i));
          out[i] = 1;
        },
        4);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "idx 3");
  }
  EXPECT_EQ(out[9], 1);
}
