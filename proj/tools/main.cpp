#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gibbslab/catalogue.hpp"
#include "gibbslab/format.hpp"
#include "gibbslab/harness.hpp"

using namespace gibbslab;
using nlohmann::json;

namespace {

int run_and_report(ExperimentConfig cfg, const std::string& out,
                   std::uint64_t seed, int threads, bool seed_set) {
  cfg.out_dir = out;
  cfg.threads = threads;
  if (seed_set) cfg.seed = seed;
  const ExperimentResult res = run_experiment(cfg);
  for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
  for (const auto& r : res.rows)
    if (r.metric == "certificate_sound" || r.metric == "bound_holds")
      std::cout << r.metric << " = " << (r.value == 1.0 ? "true" : "false") << "\n";
  return 0;
}

json params_json(const std::vector<std::string>& kv) {
  json out = json::object();
  for (const auto& item : kv) {
    const auto pos = item.find('=');
    if (pos == std::string::npos)
      throw std::invalid_argument("--param expects name=value, got '" + item + "'");
    out[item.substr(0, pos)] = std::stod(item.substr(pos + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gibbslab: sampling and certification laboratory for Gibbs measures"};
  app.require_subcommand(1);

  std::string out = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  bool seed_set = false;
  app.add_option("--out", out, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "master RNG seed")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--threads", threads, "worker threads")->capture_default_str();

  // catalogue list
  auto* cat = app.add_subcommand("catalogue", "potential catalogue");
  auto* cat_list = cat->add_subcommand("list", "list catalogue potentials");

  // sample
  auto* sample = app.add_subcommand("sample", "run a sampler and write metrics");
  std::string s_pot = "quadratic", s_sampler = "gld";
  std::vector<std::string> s_params;
  double s_beta = 4.0, s_eta = 1e-3, s_h = 0.0, s_burn = 0.5;
  std::size_t s_steps = 100000, s_chains = 64, s_outer = 200, s_stride = 1;
  double s_lo = -4.0, s_hi = 4.0;
  std::size_t s_nodes = 512;
  sample->add_option("--potential", s_pot, "catalogue name")->capture_default_str();
  sample->add_option("--param", s_params, "potential parameter name=value");
  sample->add_option("--sampler", s_sampler, "gld | proximal")->capture_default_str();
  sample->add_option("--beta", s_beta)->capture_default_str();
  sample->add_option("--eta", s_eta)->capture_default_str();
  sample->add_option("--steps", s_steps)->capture_default_str();
  sample->add_option("--chains", s_chains)->capture_default_str();
  sample->add_option("--outer-steps", s_outer)->capture_default_str();
  sample->add_option("--h", s_h, "proximal step (0 = 1/(4 beta L))")->capture_default_str();
  sample->add_option("--burn-in", s_burn)->capture_default_str();
  sample->add_option("--record-stride", s_stride)->capture_default_str();
  sample->add_option("--lo", s_lo, "grid lower bound")->capture_default_str();
  sample->add_option("--hi", s_hi, "grid upper bound")->capture_default_str();
  sample->add_option("--nodes", s_nodes, "grid nodes")->capture_default_str();

  // spectral
  auto* spectral = app.add_subcommand("spectral", "grid spectral-gap oracle");
  std::string g_pot = "quadratic";
  std::vector<std::string> g_params;
  std::vector<double> g_betas{4.0};
  double g_lo = -4.0, g_hi = 4.0, g_tol = 1e-10, g_radius = 0.0;
  std::size_t g_nodes = 2048;
  bool g_scale = false;
  spectral->add_option("--potential", g_pot)->capture_default_str();
  spectral->add_option("--param", g_params, "potential parameter name=value");
  spectral->add_option("--beta", g_betas, "one or more betas");
  spectral->add_option("--lo", g_lo)->capture_default_str();
  spectral->add_option("--hi", g_hi)->capture_default_str();
  spectral->add_option("--nodes", g_nodes)->capture_default_str();
  spectral->add_option("--tol", g_tol)->capture_default_str();
  spectral->add_option("--local-radius", g_radius,
                       "restrict to a ball of this radius about the minimizer");
  spectral->add_flag("--scale-bounds", g_scale, "scale bounds by 1/sqrt(beta)");

  // certify
  auto* certify = app.add_subcommand("certify", "evaluate a certificate");
  std::string c_kind = "PI_PL", c_pot;
  std::vector<std::string> c_params;
  double c_lambda = 0.0, c_theta = 0.0, c_L = 0.0, c_lb = 1.0, c_Clocal = 0.0;
  double c_d = 1.0, c_beta = 0.0, c_S = 0.0, c_sup = 0.0, c_M = 0.0, c_gamma = 1.0;
  certify->add_option("--kind", c_kind, "PI_PL | PI_KL | LSI_PL | PI_GEN | INIT_DIV")
      ->capture_default_str();
  certify->add_option("--potential", c_pot, "needed for PI_GEN / INIT_DIV");
  certify->add_option("--param", c_params, "potential parameter name=value");
  certify->add_option("--lambda", c_lambda);
  certify->add_option("--theta", c_theta);
  certify->add_option("--L", c_L);
  certify->add_option("--l-b", c_lb)->capture_default_str();
  certify->add_option("--c-local", c_Clocal)->capture_default_str();
  certify->add_option("--d", c_d)->capture_default_str();
  certify->add_option("--beta", c_beta)->required();
  certify->add_option("--S", c_S);
  certify->add_option("--sup-min-norm", c_sup);
  certify->add_option("--M", c_M, "first moment for INIT_DIV");
  certify->add_option("--gamma", c_gamma)->capture_default_str();

  // verify-lyapunov
  auto* verify = app.add_subcommand("verify-lyapunov", "bump and polynomial suite");
  std::string v_pot = "pl_sine";
  verify->add_option("--potential", v_pot)->capture_default_str();

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run a JSON experiment config");
  std::string config_path;
  experiment->add_option("config", config_path, "config JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cat_list) {
      for (const auto& name : catalogue_names()) {
        const Potential p = catalogue(name);
        std::cout << name << ": dim=" << p.dim;
        if (p.smoothness_L) std::cout << " L=" << format17(*p.smoothness_L);
        if (p.pl_lambda) std::cout << " pl_lambda=" << format17(*p.pl_lambda);
        if (p.kl_params)
          std::cout << " kl=(" << format17(p.kl_params->lambda) << ","
                    << format17(p.kl_params->theta) << ")";
        if (p.dissipativity)
          std::cout << " dissipative=(" << format17(p.dissipativity->m) << ","
                    << format17(p.dissipativity->b) << ")";
        std::cout << "\n";
      }
      return 0;
    }

    if (*sample) {
      json cfg = {
          {"kind", s_sampler == "proximal" ? "SAMPLE_PROX" : "SAMPLE_GLD"},
          {"potential", {{"name", s_pot}, {"params", params_json(s_params)}}},
          {"betas", {s_beta}},
          {"sampler",
           {{"type", s_sampler},
            {"eta", s_eta},
            {"steps", s_steps},
            {"chains", s_chains},
            {"outer_steps", s_outer},
            {"h", s_h},
            {"burn_in", s_burn},
            {"record_stride", s_stride}}},
          {"grid", {{"lo", {s_lo}}, {"hi", {s_hi}}, {"nodes", {s_nodes}}}}};
      return run_and_report(parse_config(cfg.dump()), out, seed, threads, seed_set);
    }

    if (*spectral) {
      json cfg = {
          {"kind", g_radius > 0.0 ? "LOCAL_PI" : "SPECTRAL"},
          {"potential", {{"name", g_pot}, {"params", params_json(g_params)}}},
          {"betas", g_betas},
          {"grid",
           {{"lo", {g_lo}},
            {"hi", {g_hi}},
            {"nodes", {g_nodes}},
            {"tol", g_tol},
            {"scale_bounds_inv_sqrt_beta", g_scale}}}};
      if (g_radius > 0.0) {
        const Potential p = catalogue(g_pot, {});
        cfg["local"] = {{"center", p.minimizer}, {"radius", g_radius}};
      }
      return run_and_report(parse_config(cfg.dump()), out, seed, threads, seed_set);
    }

    if (*certify) {
      json cfg = {{"kind", "CERTIFY"},
                  {"betas", {c_beta}},
                  {"certify",
                   {{"cert", c_kind},
                    {"lambda", c_lambda},
                    {"theta", c_theta},
                    {"L", c_L},
                    {"l_b", c_lb},
                    {"C_local", c_Clocal},
                    {"d", c_d},
                    {"S", c_S},
                    {"sup_min_norm", c_sup},
                    {"M", c_M},
                    {"gamma", c_gamma}}}};
      if (!c_pot.empty())
        cfg["potential"] = {{"name", c_pot}, {"params", params_json(c_params)}};
      return run_and_report(parse_config(cfg.dump()), out, seed, threads, seed_set);
    }

    if (*verify) {
      json cfg = {{"kind", "VERIFY_LYAPUNOV"},
                  {"potential", {{"name", v_pot}, {"params", json::object()}}}};
      return run_and_report(parse_config(cfg.dump()), out, seed, threads, seed_set);
    }

    if (*experiment) {
      std::ifstream in(config_path);
      if (!in) throw std::invalid_argument("cannot open config: " + config_path);
      std::ostringstream ss;
      ss << in.rdbuf();
      return run_and_report(parse_config(ss.str()), out, seed, threads, seed_set);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
