#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gibbslab/bump.hpp"
#include "gibbslab/catalogue.hpp"
#include "gibbslab/grid_measure.hpp"
#include "gibbslab/harness.hpp"
#include "gibbslab/lyapunov.hpp"
#include "gibbslab/proximal.hpp"
#include "gibbslab/samplers.hpp"
#include "gibbslab/spectral.hpp"

namespace py = pybind11;
using namespace gibbslab;

namespace {

Box make_box(const std::vector<double>& lo, const std::vector<double>& hi) {
  return Box{lo, hi};
}

std::map<std::string, double> optional_map(const py::dict& d) {
  std::map<std::string, double> out;
  for (auto item : d)
    out[py::cast<std::string>(item.first)] = py::cast<double>(item.second);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core: potentials, samplers, spectral oracles, certificates";

  py::class_<Potential>(m, "Potential")
      .def_readonly("name", &Potential::name)
      .def_readonly("dim", &Potential::dim)
      .def_readonly("minimizer", &Potential::minimizer)
      .def_readonly("minimizer_radius", &Potential::minimizer_radius)
      .def_property_readonly("smoothness_L",
                             [](const Potential& p) { return p.smoothness_L; })
      .def_property_readonly("pl_lambda",
                             [](const Potential& p) { return p.pl_lambda; })
      .def_property_readonly("kl_params",
                             [](const Potential& p) -> py::object {
                               if (!p.kl_params) return py::none();
                               return py::make_tuple(p.kl_params->lambda,
                                                     p.kl_params->theta);
                             })
      .def("value", [](const Potential& p, const Point& w) { return p.value(w); })
      .def("gradient",
           [](const Potential& p, const Point& w) { return p.gradient(w); })
      .def("sublevel_radius",
           [](const Potential& p, double l) { return p.sublevel_radius(l); });

  m.def("catalogue",
        [](const std::string& name, const py::dict& params) {
          return catalogue(name, optional_map(params));
        },
        py::arg("name"), py::arg("params") = py::dict());
  m.def("catalogue_names", &catalogue_names);

  m.def("condition_residual",
        [](const Potential& p, const std::string& kind, const Point& w) {
          return condition_residual(p, condition_kind_from_string(kind), w);
        });
  m.def("quadratic_growth_constants", &quadratic_growth_constants);
  m.def("finite_diff_grad",
        [](const Potential& p, const Point& w, double step) {
          return finite_diff_grad(p, w, step);
        },
        py::arg("p"), py::arg("w"), py::arg("step") = 1e-5);
  m.def("sweep_check",
        [](const Potential& p, const std::string& kind,
           const std::vector<double>& lo, const std::vector<double>& hi,
           std::size_t n) {
          const auto rep =
              sweep_check(p, condition_kind_from_string(kind), make_box(lo, hi), n);
          py::dict out;
          out["condition_kind"] = std::string(to_string(rep.condition_kind));
          out["points_checked"] = rep.points_checked;
          out["min_margin"] = rep.min_margin;
          out["worst_point"] = rep.worst_point;
          return out;
        });

  py::class_<SamplerConfig>(m, "SamplerConfig")
      .def(py::init([](double beta, double eta, std::size_t steps,
                       std::size_t chains, double gamma_init, std::uint64_t seed,
                       std::size_t record_stride) {
             SamplerConfig c;
             c.beta = beta;
             c.eta = eta;
             c.steps = steps;
             c.chains = chains;
             c.gamma_init = gamma_init;
             c.seed = seed;
             c.record_stride = record_stride;
             return c;
           }),
           py::arg("beta"), py::arg("eta"), py::arg("steps"),
           py::arg("chains") = 1, py::arg("gamma_init") = 1.0,
           py::arg("seed") = 0, py::arg("record_stride") = 1)
      .def_readwrite("beta", &SamplerConfig::beta)
      .def_readwrite("eta", &SamplerConfig::eta)
      .def_readwrite("steps", &SamplerConfig::steps)
      .def_readwrite("chains", &SamplerConfig::chains)
      .def_readwrite("seed", &SamplerConfig::seed);

  py::class_<ProximalConfig>(m, "ProximalConfig")
      .def(py::init([](double h, std::size_t outer_steps, std::size_t chains,
                       std::uint64_t seed, double prox_tol,
                       std::size_t max_rejections, std::size_t record_stride) {
             ProximalConfig c;
             c.h = h;
             c.outer_steps = outer_steps;
             c.chains = chains;
             c.seed = seed;
             c.prox_tol = prox_tol;
             c.max_rejections = max_rejections;
             c.record_stride = record_stride;
             return c;
           }),
           py::arg("h"), py::arg("outer_steps"), py::arg("chains") = 1,
           py::arg("seed") = 0, py::arg("prox_tol") = 1e-10,
           py::arg("max_rejections") = 100000, py::arg("record_stride") = 1);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("chains", &Trajectory::chains)
      .def_readonly("dim", &Trajectory::dim)
      .def_readonly("steps", &Trajectory::steps)
      .def_readonly("n_records", &Trajectory::n_records)
      .def_readonly("record_steps", &Trajectory::record_steps)
      .def_readonly("total_rejections", &Trajectory::total_rejections)
      .def("state",
           [](const Trajectory& t, std::size_t chain, std::size_t record) {
             const auto s = t.state(chain, record);
             return Point(s.begin(), s.end());
           })
      .def("chain_states",
           [](const Trajectory& t, std::size_t chain) { return t.states.at(chain); });

  m.def("run_gld",
        [](const Potential& p, const SamplerConfig& cfg) { return run_gld(p, cfg); },
        py::call_guard<py::gil_scoped_release>());
  m.def("run_proximal",
        [](const Potential& p, const ProximalConfig& cfg, double beta) {
          if (!p.smoothness_L)
            throw std::invalid_argument("run_proximal: potential needs smoothness_L");
          const GaussianInit gi = init_gaussian(p.dim, beta, *p.smoothness_L, 1.0);
          return run_proximal(p, cfg, beta,
                              [gi](Rng& r, std::span<double> o) { gi.draw(r, o); });
        },
        py::call_guard<py::gil_scoped_release>());
  m.def("proximal_oracle",
        [](const Potential& p, double beta, double h, const Point& wp, double tol) {
          return proximal_oracle(p, beta, h, wp, tol);
        },
        py::arg("p"), py::arg("beta"), py::arg("h"), py::arg("w_prime"),
        py::arg("tol") = 1e-10);
  m.def("rgo_sample",
        [](const Potential& p, double beta, double h, const Point& wp,
           std::uint64_t seed) {
          const RgoResult r = rgo_sample(p, beta, h, wp, seed);
          return py::make_tuple(r.point, r.rejections);
        });

  py::class_<GridMeasure>(m, "GridMeasure")
      .def_readonly("dim", &GridMeasure::dim)
      .def_readonly("nodes", &GridMeasure::nodes)
      .def_readonly("weights", &GridMeasure::weights)
      .def_readonly("log_density", &GridMeasure::log_density)
      .def_readonly("boundary_peak_ratio", &GridMeasure::boundary_peak_ratio)
      .def_readonly("out_of_range_mass", &GridMeasure::out_of_range_mass)
      .def("node_point", &GridMeasure::node_point);

  m.def("grid_measure",
        [](const Potential& p, double beta, const std::vector<double>& lo,
           const std::vector<double>& hi, const std::vector<std::size_t>& nodes) {
          return grid_measure(p, beta, make_box(lo, hi), nodes);
        });

  py::class_<Moments>(m, "Moments")
      .def_readonly("first_abs", &Moments::first_abs)
      .def_readonly("second", &Moments::second)
      .def_readonly("mean_F", &Moments::mean_F);
  m.def("moments", &moments);

  m.def("divergence",
        [](const GridMeasure& a, const GridMeasure& b, const std::string& kind) {
          return divergence(a, b, divergence_kind_from_string(kind));
        });

  py::class_<SpectralResult>(m, "SpectralResult")
      .def_readonly("lambda1", &SpectralResult::lambda1)
      .def_readonly("c_pi", &SpectralResult::c_pi)
      .def_readonly("residual", &SpectralResult::residual)
      .def_readonly("iterations", &SpectralResult::iterations)
      .def_readonly("support_nodes", &SpectralResult::support_nodes)
      .def_readonly("grid_summary", &SpectralResult::grid_summary);

  m.def("generator_spectral_gap", &generator_spectral_gap, py::arg("gm"),
        py::arg("tol") = 1e-10, py::call_guard<py::gil_scoped_release>());
  m.def("local_poincare", &local_poincare, py::arg("gm"), py::arg("center"),
        py::arg("radius"), py::arg("tol") = 1e-10,
        py::call_guard<py::gil_scoped_release>());
  m.def("histogram", &histogram, py::arg("traj"), py::arg("template"),
        py::arg("burn_in") = 0.5);
  m.def("variance_decay_rate",
        [](const Potential& p, double beta, double eta, py::function obs,
           const Trajectory& traj, double stationary_variance) {
          DecayFitOptions opts;
          opts.stationary_variance = stationary_variance;
          return variance_decay_rate(
              p, beta, eta,
              [obs](std::span<const double> w) {
                return py::cast<double>(obs(Point(w.begin(), w.end())));
              },
              traj, opts);
        },
        py::arg("p"), py::arg("beta"), py::arg("eta"), py::arg("observable"),
        py::arg("ensemble"), py::arg("stationary_variance") = 0.0);

  m.def("bump_eval", [](const Point& center, double R, const Point& w) {
    return bump_eval(BumpProfile{center, R}, w);
  });
  m.def("bump_grad", [](const Point& center, double R, const Point& w) {
    return bump_grad(BumpProfile{center, R}, w);
  });
  m.def("p_tilde", &p_tilde);
  m.def("bump_profile_deriv", &bump_profile_deriv);
  m.def("poly_h", &poly_h);
  m.def("poly_h3", &poly_h3);

  py::class_<BallSups>(m, "BallSups")
      .def_readonly("M_prime", &BallSups::M_prime)
      .def_readonly("L_prime", &BallSups::L_prime)
      .def_readonly("B_bump", &BallSups::B_bump);
  m.def("estimate_ball_sups",
        [](const Potential& p, std::size_t n) {
          const LyapunovSpec spec = pl_lyapunov_spec(p);
          return estimate_ball_sups(spec, BumpProfile{p.minimizer, spec.R}, n);
        },
        py::arg("p"), py::arg("n") = 4096,
        "ball suprema for the PL special-case Lyapunov function of p");

  py::class_<Certificate>(m, "Certificate")
      .def_property_readonly(
          "kind", [](const Certificate& c) { return std::string(to_string(c.kind)); })
      .def_readonly("bound", &Certificate::bound)
      .def_readonly("beta_threshold", &Certificate::beta_threshold)
      .def_readonly("inputs", &Certificate::inputs)
      .def_readonly("details", &Certificate::details);

  m.def("cert_pi_pl", &cert_pi_pl, py::arg("lambda_"), py::arg("L"),
        py::arg("l_b"), py::arg("C_local"), py::arg("d"), py::arg("beta"));
  m.def("cert_pi_kl", &cert_pi_kl, py::arg("lambda_"), py::arg("theta"),
        py::arg("L"), py::arg("l_b"), py::arg("C_local"), py::arg("d"),
        py::arg("beta"));
  m.def("cert_lsi_pl", &cert_lsi_pl, py::arg("lambda_"), py::arg("L"),
        py::arg("l_b"), py::arg("C_local"), py::arg("d"), py::arg("beta"),
        py::arg("S"), py::arg("sup_min_norm"));
  m.def("init_divergence_bound", &init_divergence_bound, py::arg("p"),
        py::arg("beta"), py::arg("gamma_init"), py::arg("M_first_moment"),
        py::arg("d"));
  m.def("recompute_certificate", &recompute_certificate);
  m.def("certificate_to_json", &certificate_to_json);

  m.def("run_experiment_json",
        [](const std::string& config_text, const std::string& out_dir) {
          ExperimentConfig cfg = parse_config(config_text);
          cfg.out_dir = out_dir;
          const ExperimentResult res = run_experiment(cfg);
          py::list rows;
          for (const auto& r : res.rows) {
            py::dict d;
            d["experiment_id"] = r.experiment_id;
            d["kind"] = r.kind;
            d["beta"] = r.beta;
            d["parameter"] = r.parameter;
            d["metric"] = r.metric;
            d["value"] = r.value;
            d["provenance"] = r.provenance;
            rows.append(d);
          }
          py::dict out;
          out["rows"] = rows;
          out["files"] = res.files;
          return out;
        },
        py::arg("config_text"), py::arg("out_dir") = ".");
}
