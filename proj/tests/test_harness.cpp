#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gibbslab/harness.hpp"

using namespace gibbslab;
namespace fs = std::filesystem;

namespace {
std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmpdir(const char* tag) {
  const fs::path d = fs::temp_directory_path() / (std::string("gibbslab_") + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d.string();
}
}  // namespace

TEST_CASE("minimal spectral config round-trips to identical canonical json") {
  const std::string text = R"({
    "kind": "SPECTRAL",
    "potential": {"name": "quadratic", "params": {"c": 1.0}},
    "betas": [4.0],
    "grid": {"lo": [-4.0], "hi": [4.0], "nodes": [512]}
  })";
  const ExperimentConfig cfg = parse_config(text);
  const std::string canon = cfg.canonical_json();
  const ExperimentConfig again = parse_config(canon);
  CHECK(again.canonical_json() == canon);
}

TEST_CASE("unknown keys rejected with field paths") {
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"kind":"SPECTRAL","betaa":[1.0]})"),
      doctest::Contains("betaa"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"kind":"SPECTRAL","potential":{"name":"quadratic"},
                       "betas":[1.0],
                       "grid":{"lo":[-4],"hi":[4],"nodes":[64],"tolx":1}})"),
      doctest::Contains("grid.tolx"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"kind":"NOPE"})"), std::invalid_argument);
  // missing grid for a kind that needs one
  CHECK_THROWS_AS(parse_config(R"({"kind":"SPECTRAL",
    "potential":{"name":"quadratic"},"betas":[1.0]})"), std::invalid_argument);
}

TEST_CASE("beta list expands to one run per beta") {
  const std::string text = R"({
    "kind": "BETA_SCALING",
    "potential": {"name": "quadratic", "params": {"c": 1.0}},
    "betas": [25, 50, 100, 200, 400],
    "grid": {"lo": [-8.0], "hi": [8.0], "nodes": [1024],
             "scale_bounds_inv_sqrt_beta": true}
  })";
  const ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.betas.size() == 5);
}

TEST_CASE("beta scaling experiment recovers the 1/beta slope") {
  const std::string out = tmpdir("betascaling");
  ExperimentConfig cfg = parse_config(R"({
    "kind": "BETA_SCALING",
    "potential": {"name": "quadratic", "params": {"c": 1.0}},
    "betas": [25, 50, 100, 200, 400],
    "plots": true,
    "grid": {"lo": [-8.0], "hi": [8.0], "nodes": [1024],
             "scale_bounds_inv_sqrt_beta": true}
  })");
  cfg.out_dir = out;
  const ExperimentResult res = run_experiment(cfg);
  double slope = 0.0;
  std::size_t cpi_rows = 0;
  for (const auto& r : res.rows) {
    if (r.metric == "loglog_slope") slope = r.value;
    if (r.metric == "c_pi") ++cpi_rows;
  }
  CHECK(cpi_rows == 5);
  CHECK(slope >= -1.05);
  CHECK(slope <= -0.95);
  CHECK(fs::exists(out + "/metrics.csv"));
  CHECK(fs::exists(out + "/config_echo.json"));
  // log-log SVG plot emitted
  bool svg = false;
  for (const auto& f : res.files) svg = svg || f.ends_with(".svg");
  CHECK(svg);

  const std::string csv = slurp(out + "/metrics.csv");
  CHECK(csv.starts_with("experiment_id,kind,beta,parameter,metric,value,provenance"));
}

TEST_CASE("same config and seed give byte-identical reports across thread counts") {
  auto run_with = [&](const char* dir, int threads) {
    ExperimentConfig cfg = parse_config(R"({
      "kind": "SAMPLE_GLD",
      "potential": {"name": "quadratic", "params": {"c": 1.0}},
      "betas": [4.0],
      "seed": 11,
      "sampler": {"eta": 1e-3, "steps": 4000, "chains": 16, "burn_in": 0.5},
      "grid": {"lo": [-3.2], "hi": [3.2], "nodes": [48]}
    })");
    cfg.out_dir = tmpdir(dir);
    cfg.threads = threads;
    run_experiment(cfg);
    return slurp(cfg.out_dir + "/metrics.csv");
  };
  const std::string a = run_with("det_a", 1);
  const std::string b = run_with("det_b", 4);
  CHECK(a == b);
}

TEST_CASE("certify experiment reports soundness against the spectral oracle") {
  ExperimentConfig cfg = parse_config(R"({
    "kind": "CERTIFY",
    "potential": {"name": "pl_sine"},
    "betas": [9365.4],
    "certify": {"cert": "PI_PL", "l_b": 1.0, "use_oracle": true},
    "grid": {"lo": [-1.25], "hi": [1.25], "nodes": [4096]}
  })");
  cfg.out_dir = tmpdir("certify");
  const ExperimentResult res = run_experiment(cfg);
  double sound = -1.0, certified = 0.0, measured = 0.0;
  for (const auto& r : res.rows) {
    if (r.metric == "certificate_sound") sound = r.value;
    if (r.metric == "certified_bound") certified = r.value;
    if (r.metric == "c_pi_measured") measured = r.value;
  }
  CHECK(sound == 1.0);
  CHECK(certified > measured);
  bool wrote_cert = false;
  for (const auto& f : res.files) wrote_cert = wrote_cert || f.find("certificate_") != std::string::npos;
  CHECK(wrote_cert);
}

TEST_CASE("empty result set yields a header-only csv") {
  const std::string path = tmpdir("emptycsv") + "/metrics.csv";
  write_metrics_csv({}, path);
  CHECK(slurp(path) == "experiment_id,kind,beta,parameter,metric,value,provenance\n");
}

TEST_CASE("svg axis ranges cover the data with margin") {
  const std::string path = tmpdir("svg") + "/plot.svg";
  write_svg_plot(path, "test", {{1.0, 2.0}, {2.0, 4.0}, {3.0, 1.0}}, false);
  const std::string svg = slurp(path);
  CHECK(svg.starts_with("<svg"));
  CHECK(svg.find("<script") == std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("verify-lyapunov experiment emits the bump suite metrics") {
  ExperimentConfig cfg = parse_config(R"({
    "kind": "VERIFY_LYAPUNOV",
    "potential": {"name": "pl_sine"}
  })");
  cfg.out_dir = tmpdir("verify");
  const ExperimentResult res = run_experiment(cfg);
  std::map<std::string, double> metrics;
  for (const auto& r : res.rows) metrics[r.parameter + "/" + r.metric] = r.value;
  CHECK(metrics.at("h/value_at_half") == 0.09375);
  CHECK(metrics.at("h/value_at_one") == 1.0);
  CHECK(metrics.at("p_tilde/grid_min") >= -1e-12);
  CHECK(metrics.count("ball_sups/B_bump") == 1);
}
