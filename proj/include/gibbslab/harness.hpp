#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gibbslab/catalogue.hpp"

namespace gibbslab {

enum class ExperimentKind {
  SAMPLE_GLD,
  SAMPLE_PROX,
  SPECTRAL,
  LOCAL_PI,
  CERTIFY,
  VERIFY_LYAPUNOV,
  BETA_SCALING,
  INIT_DIVERGENCE,
};
const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct GridConfig {
  std::vector<double> lo, hi;
  std::vector<std::size_t> nodes;
  double tol = 1e-10;
  bool scale_bounds_inv_sqrt_beta = false;
};

struct SamplerSection {
  std::string type = "gld";  // gld | proximal
  double eta = 1e-3;
  std::size_t steps = 1000;
  std::size_t chains = 8;
  double gamma_init = 1.0;
  std::size_t record_stride = 1;
  double burn_in = 0.5;
  std::string oracle = "EXACT";
  std::size_t batch = 1;
  double h = 0.0;  // 0 = default 1/(4 beta L)
  std::size_t outer_steps = 200;
  double prox_tol = 1e-10;
  std::size_t max_rejections = 100000;
};

struct LocalSection {
  std::vector<double> center;
  double radius = 1.0;
};

struct CertifySection {
  std::string cert = "PI_PL";
  double lambda = 0.0, theta = 0.0, L = 0.0, l_b = 1.0, C_local = 0.0;
  double d = 1.0, S = 0.0, sup_min_norm = 0.0, M = 0.0, gamma = 1.0;
  bool use_oracle = false;  // pull C_local/S/M from the grid oracles
};

struct LyapunovSection {
  std::size_t ball_points = 4096;
  double l_b = 1.0;
  bool quad_growth = false;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SPECTRAL;
  std::string name;
  std::string potential_name;
  ParamMap potential_params;
  std::vector<double> betas;
  std::uint64_t seed = 0;
  int threads = 1;
  bool plots = false;
  std::string out_dir = ".";
  std::optional<GridConfig> grid;
  SamplerSection sampler;
  LocalSection local;
  CertifySection certify;
  LyapunovSection lyapunov;

  std::string canonical_json() const;  // defaults filled in, keys sorted
};

// Strict JSON parse: schema violations and unknown keys are rejected with
// field paths. The result echoes every defaulted field explicitly.
ExperimentConfig parse_config(const std::string& json_text);

struct MetricRow {
  std::string experiment_id;
  std::string kind;
  double beta;  // NaN for whole-experiment rows
  std::string parameter;
  std::string metric;
  double value;
  std::string provenance;
};

struct ExperimentResult {
  std::vector<MetricRow> rows;
  std::vector<std::string> files;  // paths written
};

// Runs the experiment and writes metrics.csv, config_echo.json and optional
// SVG plots under cfg.out_dir; deterministic bytes for a fixed (config, seed).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::string& path);
// data as (x, y) pairs; log-log axes optional; self-contained static SVG
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<std::pair<double, double>>& points,
                    bool loglog);

}  // namespace gibbslab
