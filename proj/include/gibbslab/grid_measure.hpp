#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gibbslab/potential.hpp"

namespace gibbslab {

// A discretized probability measure on a uniform 1D/2D grid, the
// brute-force stand-in for mu_beta. Node masses are trapezoidal-quadrature
// weights and sum to 1; unnormalized log-densities are retained so KL and
// chi^2 stay accurate far below the peak. Immutable after construction.
struct GridMeasure {
  int dim = 1;
  std::vector<std::size_t> nodes;  // per axis
  std::vector<double> lo, hi, spacing;
  std::vector<double> weights;      // size prod(nodes), sums to 1
  std::vector<double> log_density;  // -beta*F(node); histogram grids store ln(weight/cell volume)
  double log_norm = 0.0;            // ln Z for weight_i = coeff_i*vol*exp(log_density_i - log_norm)
  double beta = 0.0;                // 0 when not Gibbs-constructed
  double boundary_peak_ratio = 0.0;
  double out_of_range_mass = 0.0;   // histogram grids only

  std::size_t size() const { return weights.size(); }
  std::size_t flat(std::size_t i, std::size_t j = 0) const {
    return i + (dim == 2 ? nodes[0] * j : 0);
  }
  double coord(int axis, std::size_t idx) const {
    return lo[static_cast<std::size_t>(axis)] +
           spacing[static_cast<std::size_t>(axis)] * static_cast<double>(idx);
  }
  Point node_point(std::size_t f) const;
  // trapezoid endpoint coefficient (1/2 per touching boundary per axis)
  double trapezoid_coeff(std::size_t f) const;
  double cell_volume() const;
  bool same_grid(const GridMeasure& other) const;
};

// weights ~ exp(-beta F(node)), trapezoid-normalized. Errors if the
// boundary-to-peak density ratio exceeds 1e-8 (bounds too narrow).
GridMeasure grid_measure(const Potential& p, double beta, const Box& bounds,
                         const std::vector<std::size_t>& n);

// (M, S, mean_F) = (∫|w| dmu, ∫|w|^2 dmu, ∫F dmu). mean_F is NaN for grids
// without retained Gibbs log-densities (histograms).
struct Moments {
  double first_abs;   // M
  double second;      // S
  double mean_F;
};
Moments moments(const GridMeasure& gm);

enum class DivergenceKind { KL, TV, CHI2 };
DivergenceKind divergence_kind_from_string(const std::string& s);

// Quadrature divergence on identical grids; KL/chi^2 use the retained
// log-densities, TV is half the L1 distance of the weights.
double divergence(const GridMeasure& gm_p, const GridMeasure& gm_q,
                  DivergenceKind kind);

void write_grid_csv(const GridMeasure& gm, const std::string& path);

}  // namespace gibbslab
