#include "gibbslab/samplers.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "gibbslab/format.hpp"
#include "gibbslab/parallel.hpp"

namespace gibbslab {

GaussianInit init_gaussian(int dim, double beta, double L, double gamma_init) {
  if (beta <= 0.0 || L <= 0.0)
    throw std::invalid_argument("init_gaussian: beta and L must be > 0");
  if (!(gamma_init > 0.0 && gamma_init <= 1.0))
    throw std::invalid_argument("init_gaussian: gamma must lie in (0,1]");
  return GaussianInit{dim, 1.0 / (2.0 * beta * L + gamma_init)};
}

Point gld_step(const Potential& p, double beta, double eta,
               std::span<const double> w, std::span<const double> noise) {
  if (eta <= 0.0) throw std::invalid_argument("gld_step: eta must be > 0");
  Point g(w.size());
  p.gradient_into(w, g);
  const double root = std::sqrt(2.0 * eta);
  Point out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    out[i] = w[i] - eta * beta * g[i] + root * noise[i];
  return out;
}

void StochasticGradOracle::eval(std::span<const double> w, std::span<double> out,
                                Rng& rng) const {
  const std::size_t n = components.size();
  const std::size_t b = std::min(batch, n);
  // without-replacement batch via partial Fisher-Yates on a scratch index list
  thread_local std::vector<std::size_t> idx;
  idx.resize(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t k = 0; k < b; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(n - k));
    std::swap(idx[k], idx[j]);
  }
  std::fill(out.begin(), out.end(), 0.0);
  thread_local Point g;
  g.resize(w.size());
  for (std::size_t k = 0; k < b; ++k) {
    components[idx[k]].gradient_into(w, g);
    for (std::size_t i = 0; i < w.size(); ++i) out[i] += g[i];
  }
  const double scale = static_cast<double>(n) / static_cast<double>(b);
  for (auto& x : out) x *= scale;
}

StochasticGradOracle stochastic_grad_oracle(std::vector<Potential> components,
                                            std::size_t batch) {
  if (components.empty())
    throw std::invalid_argument("stochastic_grad_oracle: empty component list");
  if (batch < 1) throw std::invalid_argument("stochastic_grad_oracle: batch >= 1");
  const int dim = components.front().dim;
  for (const auto& c : components)
    if (c.dim != dim)
      throw std::invalid_argument("stochastic_grad_oracle: components must share dim");
  return StochasticGradOracle{std::move(components), batch};
}

namespace {

struct DivergedState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check_stability(const Potential& p, const SamplerConfig& cfg) {
  if (p.smoothness_L && cfg.eta * cfg.beta * (*p.smoothness_L) >= 1.0) {
    // heuristic only; large steps on stiff potentials tend to diverge
    std::fprintf(stderr,
                 "warning: eta*beta*L = %g >= 1; GLD step likely unstable\n",
                 cfg.eta * cfg.beta * (*p.smoothness_L));
  }
}

}  // namespace

Trajectory run_gld(const Potential& p, const SamplerConfig& cfg,
                   const PointSampler& init,
                   const std::vector<Potential>& components) {
  if (cfg.eta <= 0.0 || cfg.beta <= 0.0)
    throw std::invalid_argument("run_gld: beta and eta must be > 0");
  if (cfg.chains < 1) throw std::invalid_argument("run_gld: need >= 1 chain");
  if (!(cfg.gamma_init > 0.0 && cfg.gamma_init <= 1.0))
    throw std::invalid_argument("run_gld: gamma_init must lie in (0,1]");
  if (cfg.oracle == OracleKind::STOCHASTIC && components.empty())
    throw std::invalid_argument(
        "run_gld: STOCHASTIC oracle needs a finite-sum component list");
  check_stability(p, cfg);

  const std::size_t dim = static_cast<std::size_t>(p.dim);
  PointSampler draw_init = init;
  if (!draw_init) {
    if (!p.smoothness_L)
      throw std::invalid_argument(
          "run_gld: default initialization needs smoothness_L");
    const GaussianInit gi =
        init_gaussian(p.dim, cfg.beta, *p.smoothness_L, cfg.gamma_init);
    draw_init = [gi](Rng& rng, std::span<double> out) { gi.draw(rng, out); };
  }

  std::optional<StochasticGradOracle> oracle;
  if (cfg.oracle == OracleKind::STOCHASTIC)
    oracle = stochastic_grad_oracle(components, cfg.batch);

  Trajectory traj;
  traj.chains = cfg.chains;
  traj.dim = dim;
  traj.steps = cfg.steps;
  traj.stride = std::max<std::size_t>(1, cfg.record_stride);
  traj.seed = cfg.seed;
  traj.beta = cfg.beta;
  traj.eta = cfg.eta;
  traj.potential_id = p.name;
  for (std::size_t s = 0; s <= cfg.steps; s += traj.stride) traj.record_steps.push_back(s);
  if (traj.record_steps.back() != cfg.steps) traj.record_steps.push_back(cfg.steps);
  traj.n_records = traj.record_steps.size();
  traj.states.assign(cfg.chains, std::vector<double>(traj.n_records * dim));

  std::mutex err_mu;
  std::string err;
  parallel_chunks(cfg.chains, [&](std::size_t b, std::size_t e, int) {
    Point w(dim), g(dim);
    try {
      for (std::size_t c = b; c < e; ++c) {
        Rng rng(stream_seed(cfg.seed, c));
        draw_init(rng, w);
        auto* rec = traj.states[c].data();
        std::size_t next_rec = 0;
        auto record = [&](std::size_t step) {
          if (next_rec < traj.n_records && traj.record_steps[next_rec] == step) {
            std::copy(w.begin(), w.end(), rec + next_rec * dim);
            ++next_rec;
          }
        };
        record(0);
        const double root = std::sqrt(2.0 * cfg.eta);
        for (std::size_t t = 0; t < cfg.steps; ++t) {
          if (oracle)
            oracle->eval(w, g, rng);
          else
            p.gradient_into(w, g);
          for (std::size_t i = 0; i < dim; ++i)
            w[i] += -cfg.eta * cfg.beta * g[i] + root * rng.normal();
          if (!all_finite(w))
            throw DivergedState("run_gld: non-finite state in chain " +
                                std::to_string(c) + " at step " +
                                std::to_string(t + 1));
          record(t + 1);
        }
      }
    } catch (const std::exception& ex) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (err.empty()) err = ex.what();
    }
  });
  if (!err.empty()) throw std::runtime_error(err);
  return traj;
}

Potential modified_potential(const Potential& p, double beta, double gamma_init,
                             double R) {
  if (R <= 0.0) throw std::invalid_argument("modified_potential: R must be > 0");
  if (beta <= 0.0) throw std::invalid_argument("modified_potential: beta must be > 0");
  Potential out = p;
  out.name = p.name + "_modified";
  const auto base_value = p.value;
  const auto base_grad = p.gradient_into;
  const double c = gamma_init / (2.0 * beta);
  out.value = [base_value, c, R](std::span<const double> w) {
    const double excess = std::max(0.0, norm(w) - R);
    return base_value(w) + c * excess * excess;
  };
  out.gradient_into = [base_grad, c, R](std::span<const double> w,
                                        std::span<double> g) {
    base_grad(w, g);
    const double r = norm(w);
    if (r > R) {
      const double scale = 2.0 * c * (r - R) / r;
      for (std::size_t i = 0; i < w.size(); ++i) g[i] += scale * w[i];
    }
  };
  // dissipativity carries over unchanged; the penalty only adds outward pull
  if (p.smoothness_L) out.smoothness_L = *p.smoothness_L + gamma_init / beta;
  out.pl_lambda.reset();
  out.kl_params.reset();
  out.linearizability.reset();
  return out;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ostringstream out;
  out << "chain,step,coordinate,value\n";
  for (std::size_t c = 0; c < traj.chains; ++c)
    for (std::size_t r = 0; r < traj.n_records; ++r)
      for (std::size_t i = 0; i < traj.dim; ++i)
        out << c << ',' << traj.record_steps[r] << ',' << i << ','
            << format17(traj.state(c, r)[i]) << '\n';
  atomic_write(path, out.str());
}

}  // namespace gibbslab
