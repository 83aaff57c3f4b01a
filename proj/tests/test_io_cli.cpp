#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fdie/config.hpp"
#include "fdie/csvio.hpp"
#include "fdie/systems.hpp"

using namespace fdie;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("fdie_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE_BEGIN("io_cli");

TEST_CASE("dataset and matrix CSV round trips") {
  const auto dir = temp_dir("csv");
  IoDataset d;
  d.U = Mat::Random(2, 37);
  d.Y = Mat::Random(3, 37);
  write_dataset_csv(dir / "d.csv", d);
  const IoDataset back = read_dataset_csv(dir / "d.csv");
  CHECK((back.U - d.U).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((back.Y - d.Y).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(slurp(dir / "d.csv").substr(0, 10) == "k,u1,u2,y1");

  const Mat m = Mat::Random(4, 5);
  write_matrix_csv(dir / "m.csv", m);
  CHECK((read_matrix_csv(dir / "m.csv") - m).cwiseAbs().maxCoeff() < 1e-15);

  MarkovSequence seq;
  seq.H = {Mat::Random(2, 2), Mat::Random(2, 2), Mat::Random(2, 2)};
  write_markov_csv(dir / "h.csv", seq);
  const MarkovSequence hs = read_markov_csv(dir / "h.csv");
  REQUIRE(hs.L() == 2);
  for (int b = 0; b <= 2; ++b)
    CHECK((hs.H[b] - seq.H[b]).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("config parsing fills defaults and validates") {
  SUBCASE("minimal named-model config") {
    const auto cfg = RunConfig::from_map(ConfigMap::parse_text(
        "[model]\nname = \"min_phase\"\n", "test"));
    CHECK(cfg.split_ratio == 0.7);
    CHECK(cfg.lambda_tol == 1e-6);
    CHECK(cfg.T == 1000);
    CHECK(cfg.model->n() == 4);
  }
  SUBCASE("filter sections with pinned poles") {
    const auto cfg = RunConfig::from_map(ConfigMap::parse_text(
        "[model]\nname = \"nonmin_phase\"\n"
        "[filter:det]\nkind = \"detection\"\ni = 2\n"
        "poles = [0.3, 0.3, 0.26, 0.44]\n",
        "test"));
    REQUIRE(cfg.filters.size() == 1);
    CHECK(cfg.filters[0].poles == std::vector<double>{0.3, 0.3, 0.26, 0.44});
  }
  SUBCASE("out-of-range output channel is rejected") {
    CHECK_THROWS_AS(RunConfig::from_map(ConfigMap::parse_text(
                        "[model]\nname = \"min_phase\"\n"
                        "[filter:x]\nkind = \"sensor_estimation\"\np = {9}\n",
                        "test")),
                    std::invalid_argument);
  }
  SUBCASE("kind rules are enforced at load time") {
    CHECK_THROWS_AS(
        RunConfig::from_map(ConfigMap::parse_text(
            "[model]\nname = \"min_phase\"\n"
            "[filter:x]\nkind = \"sensor_estimation\"\nq = {1}\n",
            "test")),
        std::invalid_argument);
  }
  SUBCASE("fault grammar") {
    const auto cfg = RunConfig::from_map(ConfigMap::parse_text(
        "[model]\nname = \"min_phase\"\n"
        "[faults]\nactuator1 = \"step 150 1.0\"\nsensor2 = \"sine 50 2 0.3\"\n",
        "test"));
    CHECK(cfg.scenario.actuator[0].shape == FaultShape::step);
    CHECK(cfg.scenario.sensor[1].shape == FaultShape::sinusoid);
    CHECK_THROWS_AS(RunConfig::from_map(ConfigMap::parse_text(
                        "[model]\nname = \"min_phase\"\n"
                        "[faults]\nsensor7 = \"step 1 1\"\n",
                        "test")),
                    std::invalid_argument);
  }
  SUBCASE("parse errors carry location") {
    CHECK_THROWS_WITH_AS(ConfigMap::parse_text("foo\n", "cfg"),
                         doctest::Contains("cfg:1"), std::invalid_argument);
  }
}

TEST_CASE("dispatch statuses and reproducible artifacts") {
  SUBCASE("unknown subcommand returns usage status") {
    auto cfg = RunConfig::from_map(
        ConfigMap::parse_text("[model]\nname = \"min_phase\"\n", "t"));
    cfg.out_dir = temp_dir("badcmd");
    CHECK(dispatch("frobnicate", cfg, true) == 2);
  }
  SUBCASE("infeasible synthesis returns domain-failure status") {
    auto cfg = RunConfig::from_map(ConfigMap::parse_text(
        "[model]\nname = \"nonmin_phase\"\n"
        "[identification]\nT = 600\namplitude = 3.0\n"
        "[filter:act]\nkind = \"actuator_estimation\"\nq = {1, 2}\n",
        "t"));
    cfg.out_dir = temp_dir("infeasible");
    CHECK(dispatch("synth", cfg, true) == 1);
  }
  SUBCASE("same config and seed give byte-identical datasets") {
    auto cfg = RunConfig::from_map(ConfigMap::parse_text(
        "[model]\nname = \"min_phase\"\n[identification]\nT = 120\n", "t"));
    cfg.out_dir = temp_dir("repro_a");
    REQUIRE(dispatch("simulate", cfg, true) == 0);
    const std::string a = slurp(cfg.out_dir / "dataset.csv");
    cfg.out_dir = temp_dir("repro_b");
    REQUIRE(dispatch("simulate", cfg, true) == 0);
    CHECK(a == slurp(cfg.out_dir / "dataset.csv"));
    CHECK(a.size() > 1000);
  }
  SUBCASE("identify writes markov and predictor artifacts") {
    auto cfg = RunConfig::from_map(ConfigMap::parse_text(
        "[model]\nname = \"min_phase\"\n[identification]\nT = 400\nL = 10\n",
        "t"));
    cfg.out_dir = temp_dir("ident");
    REQUIRE(dispatch("identify", cfg, true) == 0);
    CHECK(fs::exists(cfg.out_dir / "markov.csv"));
    CHECK(fs::exists(cfg.out_dir / "M_hat.csv"));
    CHECK(fs::exists(cfg.out_dir / "manifest.json"));
    const Mat M = read_matrix_csv(cfg.out_dir / "M_hat.csv");
    CHECK(M.rows() == 4);
  }
}

TEST_CASE("filter bundle carries spec and identity residuals") {
  const auto dir = temp_dir("bundle");
  const StateSpaceModel sys = benchmark::min_phase();
  FilterSpec spec;
  spec.i = 2;
  spec.sel = IndexSelection({}, {}, 2, 2);
  spec.kind = FilterKind::detection;
  const FilterRealization f = synthesize_exact(sys, spec);
  write_filter_bundle(dir / "f", f);
  CHECK(fs::exists(dir / "f" / "Ar.csv"));
  const std::string manifest = slurp(dir / "f" / "manifest.json");
  CHECK(manifest.find("\"kind\": \"detection\"") != std::string::npos);
  CHECK(manifest.find("eq_sum_residual") != std::string::npos);
}

TEST_SUITE_END();
