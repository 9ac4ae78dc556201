#include "gibbslab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gibbslab/catalogue.hpp"
#include "gibbslab/format.hpp"
#include "gibbslab/parallel.hpp"
#include "gibbslab/grid_measure.hpp"
#include "gibbslab/lyapunov.hpp"
#include "gibbslab/proximal.hpp"
#include "gibbslab/samplers.hpp"
#include "gibbslab/spectral.hpp"

namespace gibbslab {

using nlohmann::json;

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::SAMPLE_GLD: return "SAMPLE_GLD";
    case ExperimentKind::SAMPLE_PROX: return "SAMPLE_PROX";
    case ExperimentKind::SPECTRAL: return "SPECTRAL";
    case ExperimentKind::LOCAL_PI: return "LOCAL_PI";
    case ExperimentKind::CERTIFY: return "CERTIFY";
    case ExperimentKind::VERIFY_LYAPUNOV: return "VERIFY_LYAPUNOV";
    case ExperimentKind::BETA_SCALING: return "BETA_SCALING";
    case ExperimentKind::INIT_DIVERGENCE: return "INIT_DIVERGENCE";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  static const std::map<std::string, ExperimentKind> m = {
      {"SAMPLE_GLD", ExperimentKind::SAMPLE_GLD},
      {"SAMPLE_PROX", ExperimentKind::SAMPLE_PROX},
      {"SPECTRAL", ExperimentKind::SPECTRAL},
      {"LOCAL_PI", ExperimentKind::LOCAL_PI},
      {"CERTIFY", ExperimentKind::CERTIFY},
      {"VERIFY_LYAPUNOV", ExperimentKind::VERIFY_LYAPUNOV},
      {"BETA_SCALING", ExperimentKind::BETA_SCALING},
      {"INIT_DIVERGENCE", ExperimentKind::INIT_DIVERGENCE}};
  auto it = m.find(s);
  if (it == m.end())
    throw std::invalid_argument("unknown experiment kind '" + s + "'");
  return it->second;
}

namespace {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" +
                        (path.empty() ? it.key() : path + "." + it.key()) + "'");
  }
}

double need_number(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key))
    throw ConfigError("config: missing required field '" + path + key + "'");
  if (!obj[key].is_number())
    throw ConfigError("config: field '" + path + key + "' must be a number");
  return obj[key].get<double>();
}

// JSON writer with 17-significant-digit floats (nlohmann prints shortest
// round-trip forms, which is not the report contract)
void emit_json17(const json& j, std::ostream& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ',';
        first = false;
        out << '"' << json_escape(it.key()) << "\":";
        emit_json17(it.value(), out);
      }
      out << '}';
      break;
    }
    case json::value_t::array: {
      out << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ',';
        emit_json17(j[i], out);
      }
      out << ']';
      break;
    }
    case json::value_t::string: out << '"' << json_escape(j.get<std::string>()) << '"'; break;
    case json::value_t::boolean: out << (j.get<bool>() ? "true" : "false"); break;
    case json::value_t::number_unsigned: out << j.get<std::uint64_t>(); break;
    case json::value_t::number_integer: out << j.get<std::int64_t>(); break;
    case json::value_t::number_float: out << format17(j.get<double>()); break;
    default: out << "null";
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["kind"] = to_string(kind);
  j["name"] = name;
  j["potential"] = {{"name", potential_name}, {"params", json::object()}};
  for (const auto& [k, v] : potential_params) j["potential"]["params"][k] = v;
  j["betas"] = betas;
  j["seed"] = seed;
  j["threads"] = threads;
  j["plots"] = plots;
  if (grid) {
    j["grid"] = {{"lo", grid->lo},
                 {"hi", grid->hi},
                 {"nodes", grid->nodes},
                 {"tol", grid->tol},
                 {"scale_bounds_inv_sqrt_beta", grid->scale_bounds_inv_sqrt_beta}};
  }
  j["sampler"] = {{"type", sampler.type},
                  {"eta", sampler.eta},
                  {"steps", sampler.steps},
                  {"chains", sampler.chains},
                  {"gamma_init", sampler.gamma_init},
                  {"record_stride", sampler.record_stride},
                  {"burn_in", sampler.burn_in},
                  {"oracle", sampler.oracle},
                  {"batch", sampler.batch},
                  {"h", sampler.h},
                  {"outer_steps", sampler.outer_steps},
                  {"prox_tol", sampler.prox_tol},
                  {"max_rejections", sampler.max_rejections}};
  if (!local.center.empty())
    j["local"] = {{"center", local.center}, {"radius", local.radius}};
  j["certify"] = {{"cert", certify.cert},
                  {"lambda", certify.lambda},
                  {"theta", certify.theta},
                  {"L", certify.L},
                  {"l_b", certify.l_b},
                  {"C_local", certify.C_local},
                  {"d", certify.d},
                  {"S", certify.S},
                  {"sup_min_norm", certify.sup_min_norm},
                  {"M", certify.M},
                  {"gamma", certify.gamma},
                  {"use_oracle", certify.use_oracle}};
  j["lyapunov"] = {{"ball_points", lyapunov.ball_points},
                   {"l_b", lyapunov.l_b},
                   {"quad_growth", lyapunov.quad_growth}};
  std::ostringstream out;
  emit_json17(j, out);
  return out.str();
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  require_keys(j, "", {"kind", "name", "potential", "betas", "seed", "threads",
                       "plots", "grid", "sampler", "local", "certify",
                       "lyapunov", "out"});

  ExperimentConfig cfg;
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("config: missing required string field 'kind'");
  cfg.kind = experiment_kind_from_string(j["kind"].get<std::string>());
  cfg.name = j.value("name", lower(to_string(cfg.kind)));
  if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();

  if (j.contains("potential")) {
    const auto& p = j["potential"];
    require_keys(p, "potential", {"name", "params"});
    if (!p.contains("name") || !p["name"].is_string())
      throw ConfigError("config: 'potential.name' must be a string");
    cfg.potential_name = p["name"].get<std::string>();
    if (p.contains("params")) {
      if (!p["params"].is_object())
        throw ConfigError("config: 'potential.params' must be an object");
      for (auto it = p["params"].begin(); it != p["params"].end(); ++it) {
        if (!it.value().is_number())
          throw ConfigError("config: 'potential.params." + it.key() +
                            "' must be a number");
        cfg.potential_params[it.key()] = it.value().get<double>();
      }
    }
  }

  if (j.contains("betas")) {
    if (!j["betas"].is_array() || j["betas"].empty())
      throw ConfigError("config: 'betas' must be a nonempty array");
    for (const auto& b : j["betas"]) {
      if (!b.is_number() || b.get<double>() <= 0.0)
        throw ConfigError("config: every entry of 'betas' must be a positive number");
      cfg.betas.push_back(b.get<double>());
    }
  }
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.threads = j.value("threads", 1);
  if (cfg.threads < 1) throw ConfigError("config: 'threads' must be >= 1");
  cfg.plots = j.value("plots", false);

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    require_keys(g, "grid",
                 {"lo", "hi", "nodes", "tol", "scale_bounds_inv_sqrt_beta"});
    GridConfig gc;
    for (const char* key : {"lo", "hi", "nodes"}) {
      if (!g.contains(key) || !g[key].is_array())
        throw ConfigError(std::string("config: 'grid.") + key +
                          "' must be an array");
    }
    gc.lo = g["lo"].get<std::vector<double>>();
    gc.hi = g["hi"].get<std::vector<double>>();
    gc.nodes = g["nodes"].get<std::vector<std::size_t>>();
    if (gc.lo.size() != gc.hi.size() || gc.lo.size() != gc.nodes.size() ||
        gc.lo.empty() || gc.lo.size() > 2)
      throw ConfigError("config: 'grid' axes must agree and be 1D or 2D");
    gc.tol = g.value("tol", 1e-10);
    gc.scale_bounds_inv_sqrt_beta = g.value("scale_bounds_inv_sqrt_beta", false);
    cfg.grid = gc;
  }

  if (j.contains("sampler")) {
    const auto& s = j["sampler"];
    require_keys(s, "sampler",
                 {"type", "eta", "steps", "chains", "gamma_init", "record_stride",
                  "burn_in", "oracle", "batch", "h", "outer_steps", "prox_tol",
                  "max_rejections"});
    cfg.sampler.type = s.value("type", std::string("gld"));
    if (cfg.sampler.type != "gld" && cfg.sampler.type != "proximal")
      throw ConfigError("config: 'sampler.type' must be 'gld' or 'proximal'");
    cfg.sampler.eta = s.value("eta", 1e-3);
    cfg.sampler.steps = s.value("steps", std::size_t{1000});
    cfg.sampler.chains = s.value("chains", std::size_t{8});
    cfg.sampler.gamma_init = s.value("gamma_init", 1.0);
    cfg.sampler.record_stride = s.value("record_stride", std::size_t{1});
    cfg.sampler.burn_in = s.value("burn_in", 0.5);
    cfg.sampler.oracle = s.value("oracle", std::string("EXACT"));
    if (cfg.sampler.oracle != "EXACT" && cfg.sampler.oracle != "STOCHASTIC")
      throw ConfigError("config: 'sampler.oracle' must be EXACT or STOCHASTIC");
    cfg.sampler.batch = s.value("batch", std::size_t{1});
    cfg.sampler.h = s.value("h", 0.0);
    cfg.sampler.outer_steps = s.value("outer_steps", std::size_t{200});
    cfg.sampler.prox_tol = s.value("prox_tol", 1e-10);
    cfg.sampler.max_rejections = s.value("max_rejections", std::size_t{100000});
  }

  if (j.contains("local")) {
    const auto& l = j["local"];
    require_keys(l, "local", {"center", "radius"});
    if (!l.contains("center") || !l["center"].is_array())
      throw ConfigError("config: 'local.center' must be an array");
    cfg.local.center = l["center"].get<std::vector<double>>();
    cfg.local.radius = need_number(l, "local.", "radius");
  }

  if (j.contains("certify")) {
    const auto& c = j["certify"];
    require_keys(c, "certify",
                 {"cert", "lambda", "theta", "L", "l_b", "C_local", "d", "S",
                  "sup_min_norm", "M", "gamma", "use_oracle"});
    cfg.certify.cert = c.value("cert", std::string("PI_PL"));
    cert_kind_from_string(cfg.certify.cert);  // validate
    cfg.certify.lambda = c.value("lambda", 0.0);
    cfg.certify.theta = c.value("theta", 0.0);
    cfg.certify.L = c.value("L", 0.0);
    cfg.certify.l_b = c.value("l_b", 1.0);
    cfg.certify.C_local = c.value("C_local", 0.0);
    cfg.certify.d = c.value("d", 1.0);
    cfg.certify.S = c.value("S", 0.0);
    cfg.certify.sup_min_norm = c.value("sup_min_norm", 0.0);
    cfg.certify.M = c.value("M", 0.0);
    cfg.certify.gamma = c.value("gamma", 1.0);
    cfg.certify.use_oracle = c.value("use_oracle", false);
  }

  if (j.contains("lyapunov")) {
    const auto& l = j["lyapunov"];
    require_keys(l, "lyapunov", {"ball_points", "l_b", "quad_growth"});
    cfg.lyapunov.ball_points = l.value("ball_points", std::size_t{4096});
    cfg.lyapunov.l_b = l.value("l_b", 1.0);
    cfg.lyapunov.quad_growth = l.value("quad_growth", false);
  }

  // per-kind requirements
  const bool needs_potential = cfg.kind != ExperimentKind::CERTIFY ||
                               cfg.certify.use_oracle ||
                               cfg.certify.cert == "INIT_DIV";
  if (needs_potential && cfg.kind != ExperimentKind::VERIFY_LYAPUNOV &&
      cfg.potential_name.empty())
    throw ConfigError("config: 'potential' is required for this experiment kind");
  const bool needs_grid =
      cfg.kind == ExperimentKind::SAMPLE_GLD ||
      cfg.kind == ExperimentKind::SAMPLE_PROX ||
      cfg.kind == ExperimentKind::SPECTRAL ||
      cfg.kind == ExperimentKind::LOCAL_PI ||
      cfg.kind == ExperimentKind::BETA_SCALING ||
      cfg.kind == ExperimentKind::INIT_DIVERGENCE ||
      (cfg.kind == ExperimentKind::CERTIFY && cfg.certify.use_oracle);
  if (needs_grid && !cfg.grid)
    throw ConfigError("config: 'grid' is required for this experiment kind");
  if (cfg.kind == ExperimentKind::LOCAL_PI && cfg.local.center.empty())
    throw ConfigError("config: 'local' is required for LOCAL_PI");
  if (cfg.kind == ExperimentKind::BETA_SCALING && cfg.betas.size() < 2)
    throw ConfigError("config: BETA_SCALING needs at least two betas");
  if (cfg.betas.empty() && cfg.kind != ExperimentKind::VERIFY_LYAPUNOV)
    throw ConfigError("config: 'betas' is required for this experiment kind");
  if (cfg.betas.empty()) cfg.betas = {1.0};
  if (cfg.name.empty()) cfg.name = lower(to_string(cfg.kind));
  return cfg;
}

namespace {

Box grid_box(const GridConfig& g, double beta) {
  Box b{g.lo, g.hi};
  if (g.scale_bounds_inv_sqrt_beta) {
    const double s = 1.0 / std::sqrt(beta);
    for (auto& x : b.lo) x *= s;
    for (auto& x : b.hi) x *= s;
  }
  return b;
}

double nan_beta() { return std::numeric_limits<double>::quiet_NaN(); }

// least-squares slope of y against x
double lsq_slope(const std::vector<std::pair<double, double>>& pts) {
  const double n = static_cast<double>(pts.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct Runner {
  const ExperimentConfig& cfg;
  ExperimentResult result;
  Potential pot;

  void row(double beta, const std::string& parameter, const std::string& metric,
           double value, const std::string& provenance) {
    result.rows.push_back({cfg.name, to_string(cfg.kind), beta, parameter,
                           metric, value, provenance});
  }

  GridMeasure gibbs(double beta) const {
    return grid_measure(pot, beta, grid_box(*cfg.grid, beta), cfg.grid->nodes);
  }

  void spectral_rows(double beta, const SpectralResult& sr, const char* prov) {
    row(beta, "", "lambda1", sr.lambda1, prov);
    row(beta, "", "c_pi", sr.c_pi, prov);
    row(beta, "", "residual", sr.residual, prov);
    row(beta, "", "support_nodes", static_cast<double>(sr.support_nodes), prov);
  }

  void run_spectral() {
    for (double beta : cfg.betas)
      spectral_rows(beta, generator_spectral_gap(gibbs(beta), cfg.grid->tol),
                    "spectral_oracle");
  }

  void run_local_pi() {
    for (double beta : cfg.betas)
      spectral_rows(beta,
                    local_poincare(gibbs(beta), cfg.local.center,
                                   cfg.local.radius, cfg.grid->tol),
                    "local_spectral_oracle");
  }

  void run_beta_scaling() {
    std::vector<std::pair<double, double>> loglog;
    for (double beta : cfg.betas) {
      const SpectralResult sr = generator_spectral_gap(gibbs(beta), cfg.grid->tol);
      spectral_rows(beta, sr, "spectral_oracle");
      loglog.emplace_back(std::log(beta), std::log(sr.c_pi));
    }
    row(nan_beta(), "", "loglog_slope", lsq_slope(loglog), "least_squares_fit");
  }

  void run_sampler(bool proximal) {
    for (double beta : cfg.betas) {
      const GridMeasure gm = gibbs(beta);
      Trajectory traj;
      if (proximal) {
        ProximalConfig pc;
        pc.h = cfg.sampler.h > 0.0
                   ? cfg.sampler.h
                   : 1.0 / (4.0 * beta * pot.smoothness_L.value_or(1.0));
        pc.outer_steps = cfg.sampler.outer_steps;
        pc.prox_tol = cfg.sampler.prox_tol;
        pc.max_rejections = cfg.sampler.max_rejections;
        pc.seed = cfg.seed;
        pc.chains = cfg.sampler.chains;
        pc.record_stride = cfg.sampler.record_stride;
        const GaussianInit gi = init_gaussian(
            pot.dim, beta, pot.smoothness_L.value_or(1.0), cfg.sampler.gamma_init);
        traj = run_proximal(pot, pc, beta,
                            [gi](Rng& r, std::span<double> o) { gi.draw(r, o); });
        row(beta, "", "total_rejections",
            static_cast<double>(traj.total_rejections), "sampler");
      } else {
        SamplerConfig sc;
        sc.beta = beta;
        sc.eta = cfg.sampler.eta;
        sc.steps = cfg.sampler.steps;
        sc.chains = cfg.sampler.chains;
        sc.gamma_init = cfg.sampler.gamma_init;
        sc.seed = cfg.seed;
        sc.record_stride = cfg.sampler.record_stride;
        sc.oracle = cfg.sampler.oracle == "STOCHASTIC" ? OracleKind::STOCHASTIC
                                                       : OracleKind::EXACT;
        sc.batch = cfg.sampler.batch;
        traj = run_gld(pot, sc);
      }
      const GridMeasure hist = histogram(traj, gm, cfg.sampler.burn_in);
      row(beta, "", "tv_to_grid", divergence(hist, gm, DivergenceKind::TV),
          "histogram_vs_grid_oracle");
      row(beta, "", "out_of_range_mass", hist.out_of_range_mass, "histogram");
      const Moments mo = moments(hist);
      row(beta, "", "sample_second_moment", mo.second, "histogram");
      row(beta, "", "grid_second_moment", moments(gm).second, "grid_oracle");
    }
  }

  void run_certify() {
    for (double beta : cfg.betas) {
      CertifySection cs = cfg.certify;
      std::optional<GridMeasure> gm;
      if (cs.use_oracle) {
        gm = gibbs(beta);
        const double r_lb = pot.sublevel_radius
                                ? pot.sublevel_radius(cs.l_b)
                                : cfg.local.radius;
        const SpectralResult local =
            local_poincare(*gm, pot.minimizer, r_lb, cfg.grid->tol);
        cs.C_local = local.c_pi;
        const Moments mo = moments(*gm);
        cs.S = mo.second;
        cs.M = mo.first_abs;
        row(beta, "", "C_local", cs.C_local, "local_spectral_oracle");
        row(beta, "", "S", cs.S, "grid_oracle");
        row(beta, "", "M", cs.M, "grid_oracle");
        if (cs.lambda == 0.0 && pot.pl_lambda) cs.lambda = *pot.pl_lambda;
        if (cs.L == 0.0 && pot.smoothness_L) cs.L = *pot.smoothness_L;
      }
      Certificate cert;
      const CertKind kind = cert_kind_from_string(cs.cert);
      switch (kind) {
        case CertKind::PI_PL:
          cert = cert_pi_pl(cs.lambda, cs.L, cs.l_b, cs.C_local, cs.d, beta);
          break;
        case CertKind::PI_KL:
          cert = cert_pi_kl(cs.lambda, cs.theta, cs.L, cs.l_b, cs.C_local, cs.d, beta);
          break;
        case CertKind::LSI_PL:
          cert = cert_lsi_pl(cs.lambda, cs.L, cs.l_b, cs.C_local, cs.d, beta,
                             cs.S, cs.sup_min_norm);
          break;
        case CertKind::PI_GEN:
        case CertKind::LSI_GEN: {
          if (!pot.pl_lambda || !pot.linearizability || !pot.smoothness_L)
            throw std::invalid_argument(
                "CERTIFY PI_GEN: potential needs pl_lambda, smoothness_L and "
                "linearizability (the PL special case backs the general route)");
          const LyapunovSpec spec = pl_lyapunov_spec(pot);
          const BumpProfile bp{pot.minimizer, spec.R};
          const BallSups sups =
              estimate_ball_sups(spec, bp, cfg.lyapunov.ball_points);
          std::optional<std::pair<double, double>> qg;
          if (cfg.lyapunov.quad_growth) qg = quadratic_growth_constants(pot);
          cert = cert_general(spec, pot, sups, cs.l_b, cs.C_local, cs.d, beta,
                              cs.S, qg);
          break;
        }
        case CertKind::INIT_DIV:
          cert = init_divergence_bound(pot, beta, cs.gamma, cs.M, cs.d);
          break;
      }
      row(beta, cs.cert, "certified_bound", cert.bound, "certificate");
      row(beta, cs.cert, "beta_threshold", cert.beta_threshold, "certificate");
      if (gm && kind != CertKind::INIT_DIV) {
        const SpectralResult sr = generator_spectral_gap(*gm, cfg.grid->tol);
        row(beta, "", "c_pi_measured", sr.c_pi, "spectral_oracle");
        row(beta, cs.cert, "certificate_sound",
            cert.bound >= sr.c_pi ? 1.0 : 0.0, "cross_oracle_comparison");
      }
      const std::string path = cfg.out_dir + "/certificate_" + cs.cert + "_beta" +
                               format17(beta) + ".json";
      atomic_write(path, certificate_to_json(cert));
      result.files.push_back(path);
    }
  }

  void run_verify_lyapunov() {
    const PolyReport pr = poly_checks();
    row(nan_beta(), "h", "value_at_half", pr.h_at_half, "polynomial_eval");
    row(nan_beta(), "h", "value_at_one", pr.h_at_one, "polynomial_eval");
    row(nan_beta(), "h", "grid_min", pr.h_min, "polynomial_grid");
    row(nan_beta(), "h3", "grid_min", pr.h3_min, "polynomial_grid");
    row(nan_beta(), "h3", "grid_argmin", pr.h3_argmin, "polynomial_grid");

    double pt_min = std::numeric_limits<double>::infinity();
    double prof_sup = 0.0;
    const std::size_t n = 10000;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = 1e-3 + (1.0 - 2e-3) * static_cast<double>(k) /
                                  static_cast<double>(n - 1);
      pt_min = std::min(pt_min, p_tilde(x));
      prof_sup = std::max(prof_sup, bump_profile_deriv(x));
    }
    row(nan_beta(), "p_tilde", "grid_min", pt_min, "profile_grid");
    row(nan_beta(), "profile_deriv", "grid_sup", prof_sup, "profile_grid");

    if (!cfg.potential_name.empty()) {
      const Potential p = catalogue(cfg.potential_name, cfg.potential_params);
      if (p.pl_lambda && p.linearizability && p.smoothness_L) {
        const LyapunovSpec spec = pl_lyapunov_spec(p);
        const BumpProfile bp{p.minimizer, spec.R};
        const BallSups sups = estimate_ball_sups(spec, bp, cfg.lyapunov.ball_points);
        row(nan_beta(), "ball_sups", "M_prime", sups.M_prime, "ball_grid");
        row(nan_beta(), "ball_sups", "L_prime", sups.L_prime, "ball_grid");
        row(nan_beta(), "ball_sups", "B_bump", sups.B_bump, "profile_grid");
      }
    }
  }

  void run_init_divergence() {
    for (double beta : cfg.betas) {
      const GridMeasure gm = gibbs(beta);
      const Moments mo = moments(gm);
      const Certificate cert =
          init_divergence_bound(pot, beta, cfg.certify.gamma, mo.first_abs, pot.dim);
      // Gaussian initialization as a Gibbs grid on the same bounds:
      // exp(-(2 beta L + gamma)|w|^2/2) = exp(-beta * c0 |w|^2/2)
      const double L = pot.holder->L_hold;
      const double c0 = (2.0 * beta * L + cfg.certify.gamma) / beta;
      const Potential init_pot =
          catalogue("quadratic", {{"c", c0}, {"dim", static_cast<double>(pot.dim)}});
      const GridMeasure gm0 =
          grid_measure(init_pot, beta, grid_box(*cfg.grid, beta), cfg.grid->nodes);
      const double kl = divergence(gm0, gm, DivergenceKind::KL);
      row(beta, "", "init_kl", kl, "grid_oracle");
      row(beta, "", "certified_bound", cert.bound, "certificate");
      row(beta, "", "bound_holds", kl <= cert.bound ? 1.0 : 0.0,
          "cross_oracle_comparison");
      row(beta, "", "M", mo.first_abs, "grid_oracle");
    }
  }

  void maybe_plot() {
    if (!cfg.plots) return;
    const std::map<ExperimentKind, std::string> headline = {
        {ExperimentKind::SPECTRAL, "c_pi"},
        {ExperimentKind::LOCAL_PI, "c_pi"},
        {ExperimentKind::BETA_SCALING, "c_pi"},
        {ExperimentKind::SAMPLE_GLD, "tv_to_grid"},
        {ExperimentKind::SAMPLE_PROX, "tv_to_grid"},
        {ExperimentKind::INIT_DIVERGENCE, "init_kl"}};
    auto it = headline.find(cfg.kind);
    if (it == headline.end()) return;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : result.rows)
      if (r.metric == it->second && !std::isnan(r.beta))
        pts.emplace_back(r.beta, r.value);
    if (pts.size() < 2) return;
    const std::string path = cfg.out_dir + "/" + cfg.name + "_" + it->second + ".svg";
    write_svg_plot(path, it->second + " vs beta", pts,
                   cfg.kind == ExperimentKind::BETA_SCALING);
    result.files.push_back(path);
  }
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  set_thread_count(cfg.threads);
  Runner runner{cfg, {}, {}};
  if (!cfg.potential_name.empty())
    runner.pot = catalogue(cfg.potential_name, cfg.potential_params);

  switch (cfg.kind) {
    case ExperimentKind::SPECTRAL: runner.run_spectral(); break;
    case ExperimentKind::LOCAL_PI: runner.run_local_pi(); break;
    case ExperimentKind::BETA_SCALING: runner.run_beta_scaling(); break;
    case ExperimentKind::SAMPLE_GLD: runner.run_sampler(false); break;
    case ExperimentKind::SAMPLE_PROX: runner.run_sampler(true); break;
    case ExperimentKind::CERTIFY: runner.run_certify(); break;
    case ExperimentKind::VERIFY_LYAPUNOV: runner.run_verify_lyapunov(); break;
    case ExperimentKind::INIT_DIVERGENCE: runner.run_init_divergence(); break;
  }

  const std::string csv_path = cfg.out_dir + "/metrics.csv";
  write_metrics_csv(runner.result.rows, csv_path);
  runner.result.files.push_back(csv_path);
  const std::string echo_path = cfg.out_dir + "/config_echo.json";
  atomic_write(echo_path, cfg.canonical_json());
  runner.result.files.push_back(echo_path);
  runner.maybe_plot();
  return runner.result;
}

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::string& path) {
  std::ostringstream out;
  out << "experiment_id,kind,beta,parameter,metric,value,provenance\n";
  for (const auto& r : rows) {
    out << r.experiment_id << ',' << r.kind << ','
        << (std::isnan(r.beta) ? "" : format17(r.beta)) << ',' << r.parameter
        << ',' << r.metric << ',' << format17(r.value) << ',' << r.provenance
        << '\n';
  }
  atomic_write(path, out.str());
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<std::pair<double, double>>& points,
                    bool loglog) {
  std::vector<std::pair<double, double>> pts = points;
  if (loglog)
    for (auto& [x, y] : pts) {
      x = std::log10(x);
      y = std::log10(y);
    }
  double xmin = pts[0].first, xmax = pts[0].first;
  double ymin = pts[0].second, ymax = pts[0].second;
  for (auto [x, y] : pts) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  // 5% margin, degenerate ranges padded
  const double xpad = std::max(0.05 * (xmax - xmin), 1e-6);
  const double ypad = std::max(0.05 * (ymax - ymin), 1e-6);
  xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

  const double W = 640.0, H = 480.0, ml = 70.0, mb = 50.0, mt = 30.0, mr = 20.0;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mb - mt); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << json_escape(title)
      << (loglog ? " (log-log)" : "") << "</text>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
      << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << ml
      << "\" y2=\"" << mt << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 4.0;
    const double fy = ymin + (ymax - ymin) * k / 4.0;
    svg << "<text x=\"" << px(fx) << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << format17(fx).substr(0, 8) << "</text>\n";
    svg << "<text x=\"" << ml - 6 << "\" y=\"" << py(fy) + 3
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << format17(fy).substr(0, 8) << "</text>\n";
  }
  svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (auto [x, y] : pts) svg << px(x) << ',' << py(y) << ' ';
  svg << "\"/>\n";
  for (auto [x, y] : pts)
    svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y)
        << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  svg << "</svg>\n";
  atomic_write(path, svg.str());
}

}  // namespace gibbslab
