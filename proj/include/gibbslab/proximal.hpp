#pragma once

#include <cstdint>
#include <stdexcept>

#include "gibbslab/samplers.hpp"

namespace gibbslab {

struct ProximalConfig {
  double h = 0.0;  // joint-distribution step size; must satisfy h <= 1/(2 beta L)
  std::size_t outer_steps = 0;
  double prox_tol = 1e-10;
  std::size_t max_rejections = 100000;
  std::uint64_t seed = 0;
  std::size_t chains = 1;          // ensemble width for desk-scale histograms
  std::size_t record_stride = 1;
  std::size_t prox_max_iters = 200000;
};

struct ProxNotConverged : std::runtime_error {
  double grad_norm;
  explicit ProxNotConverged(double g)
      : std::runtime_error("proximal oracle: gradient norm " +
                           std::to_string(g) + " above tolerance at iteration cap"),
        grad_norm(g) {}
};

struct RgoRejectionCap : std::runtime_error {
  double acceptance_rate;
  explicit RgoRejectionCap(double rate)
      : std::runtime_error("restricted Gaussian oracle: rejection cap hit, "
                           "empirical acceptance rate " + std::to_string(rate)),
        acceptance_rate(rate) {}
};

// argmin of g(w) = beta F(w) + |w - w'|^2/(2h) by gradient descent with step
// 1/(beta L + 1/h); g is (1/h - beta L)-strongly convex under the h bound, so
// convergence is linear. Returns w with |grad g(w)| <= tol.
Point proximal_oracle(const Potential& p, double beta, double h,
                      std::span<const double> w_prime, double tol = 1e-10,
                      std::size_t max_iters = 200000);

// Exact sample from the conditional density ~ exp(-beta F(w) - |w-w'|^2/(2h))
// by rejection: propose from the strong-convexity minorant Gaussian around
// the proximal point, accept with the minorant ratio (always in [0,1]).
struct RgoResult {
  Point point;
  std::size_t rejections;
};
RgoResult rgo_sample(const Potential& p, double beta, double h,
                     std::span<const double> w_prime, Rng& rng,
                     double tol = 1e-10, std::size_t max_rejections = 100000);
RgoResult rgo_sample(const Potential& p, double beta, double h,
                     std::span<const double> w_prime, std::uint64_t seed,
                     double tol = 1e-10, std::size_t max_rejections = 100000);

// Proximal Sampler recursion: w'_k ~ N(w_k, h I), then w_{k+1} from the
// restricted Gaussian oracle. Records total rejections across chains.
Trajectory run_proximal(const Potential& p, const ProximalConfig& cfg,
                        double beta, const PointSampler& init);

}  // namespace gibbslab
