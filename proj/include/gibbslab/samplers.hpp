#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gibbslab/potential.hpp"
#include "gibbslab/rng.hpp"

namespace gibbslab {

enum class OracleKind { EXACT, STOCHASTIC };

struct SamplerConfig {
  double beta = 1.0;
  double eta = 1e-3;
  std::size_t steps = 0;
  std::size_t chains = 1;
  double gamma_init = 1.0;  // gamma of the Gaussian initialization, in (0,1]
  std::uint64_t seed = 0;
  OracleKind oracle = OracleKind::EXACT;
  double sigma = 0.0;          // reported stochastic-gradient variance
  std::size_t batch = 1;       // stochastic oracle batch size
  std::size_t record_stride = 1;
};

// Seeded sampler output: recorded states over time across independent
// chains. Step 0 is always recorded (the initialization sample), then every
// record_stride-th step, then the final step.
struct Trajectory {
  std::size_t chains = 0;
  std::size_t dim = 0;
  std::size_t steps = 0;
  std::size_t stride = 1;
  std::size_t n_records = 0;
  std::vector<std::size_t> record_steps;
  std::vector<std::vector<double>> states;  // per chain, n_records * dim
  std::uint64_t seed = 0;
  double beta = 0.0;
  double eta = 0.0;
  std::uint64_t total_rejections = 0;  // proximal runs only
  std::string potential_id;

  std::span<const double> state(std::size_t chain, std::size_t record) const {
    return {states[chain].data() + record * dim, dim};
  }
};

using PointSampler = std::function<void(Rng&, std::span<double>)>;

// mu_0 ~ N(0, 1/(2 beta L + gamma) I_d)
struct GaussianInit {
  int dim;
  double variance;
  void draw(Rng& rng, std::span<double> out) const {
    const double sd = std::sqrt(variance);
    for (auto& x : out) x = sd * rng.normal();
  }
};
GaussianInit init_gaussian(int dim, double beta, double L, double gamma_init);

// w - eta*beta*grad F(w) + sqrt(2 eta)*noise
Point gld_step(const Potential& p, double beta, double eta,
               std::span<const double> w, std::span<const double> noise);

// Unbiased finite-sum gradient oracle: component count times the mean
// gradient over a uniformly drawn without-replacement batch.
struct StochasticGradOracle {
  std::vector<Potential> components;
  std::size_t batch;
  void eval(std::span<const double> w, std::span<double> out, Rng& rng) const;
};
StochasticGradOracle stochastic_grad_oracle(std::vector<Potential> components,
                                            std::size_t batch);

// Runs `chains` independent GLD chains with per-chain RNG streams split
// deterministically from the seed; identical output for any thread count.
// Throws on a non-finite state, naming the chain and step.
// `init` defaults to the Gaussian initialization above (requires
// p.smoothness_L); `components` backs the STOCHASTIC oracle.
Trajectory run_gld(const Potential& p, const SamplerConfig& cfg,
                   const PointSampler& init = nullptr,
                   const std::vector<Potential>& components = {});

// F_hat = F + (gamma/2 beta) max{0, |w|-R}^2; dissipativity inherited.
Potential modified_potential(const Potential& p, double beta, double gamma_init,
                             double R);

// chain, step, coordinate, value CSV with header; 17 significant digits
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace gibbslab
