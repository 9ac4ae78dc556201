#pragma once

#include <functional>
#include <string>

#include "gibbslab/grid_measure.hpp"
#include "gibbslab/samplers.hpp"

namespace gibbslab {

struct SpectralResult {
  double lambda1 = 0.0;   // smallest nonzero eigenvalue of the negated generator
  double c_pi = 0.0;      // 1/lambda1
  double residual = 0.0;  // scale-free eigen-residual of the returned pair
  int iterations = 0;
  std::size_t support_nodes = 0;
  std::string grid_summary;
};

// Spectral gap of L = Laplacian - beta <grad F, grad .> on the grid:
// mu-weighted finite-difference Dirichlet form (face weights = geometric mean
// of adjacent node densities) against the diagonal node-mass matrix, zero-flux
// boundary, constant mode deflated, smallest eigenvalue by shift-free inverse
// iteration (direct tridiagonal solves in 1D, conjugate gradients in 2D).
SpectralResult generator_spectral_gap(const GridMeasure& gm, double tol = 1e-10);

// Same eigenproblem restricted to grid nodes inside B(center, radius), with
// zero-flux boundary on the ball's discrete boundary. Needs >= 8 nodes per
// axis inside the ball.
SpectralResult local_poincare(const GridMeasure& gm, const Point& center,
                              double radius, double tol = 1e-10);

// Quadrature variance of a node vector f under gm.
double grid_variance(const GridMeasure& gm, std::span<const double> f);
// Discrete Dirichlet energy of f with the same face weights as the
// eigenproblem assembly.
double grid_dirichlet(const GridMeasure& gm, std::span<const double> f);

// Empirical law of sampler output on the template's cells (nearest-node
// binning, post burn-in, all chains pooled). Errors if more than 1e-3 of the
// mass falls outside the grid.
GridMeasure histogram(const Trajectory& traj, const GridMeasure& gm_template,
                      double burn_in);

struct DecayFitOptions {
  // Stationary variance of the observable (grid oracle value). The fit runs
  // on ln|V_t - stationary_variance|; 0 fits the raw log variance.
  double stationary_variance = 0.0;
  double skip_time = 0.0;     // discard records before this time
  double floor_sigmas = 3.0;  // stop once the gap drops below the noise floor
  std::size_t min_points = 8;
};

// Least-squares slope of the log cross-chain variance of `observable`
// against time t = step*eta; returns the decay rate (positive for decay).
// Errors if the variance falls below the noise floor before enough fit
// points accumulate.
double variance_decay_rate(
    const Potential& p, double beta, double eta,
    const std::function<double(std::span<const double>)>& observable,
    const Trajectory& ensemble, const DecayFitOptions& opts = {});

}  // namespace gibbslab
