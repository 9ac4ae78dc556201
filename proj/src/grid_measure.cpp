#include "gibbslab/grid_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gibbslab/format.hpp"

namespace gibbslab {

Point GridMeasure::node_point(std::size_t f) const {
  Point w(static_cast<std::size_t>(dim));
  w[0] = coord(0, f % nodes[0]);
  if (dim == 2) w[1] = coord(1, f / nodes[0]);
  return w;
}

double GridMeasure::trapezoid_coeff(std::size_t f) const {
  double c = 1.0;
  const std::size_t i = f % nodes[0];
  if (i == 0 || i + 1 == nodes[0]) c *= 0.5;
  if (dim == 2) {
    const std::size_t j = f / nodes[0];
    if (j == 0 || j + 1 == nodes[1]) c *= 0.5;
  }
  return c;
}

double GridMeasure::cell_volume() const {
  double v = spacing[0];
  if (dim == 2) v *= spacing[1];
  return v;
}

bool GridMeasure::same_grid(const GridMeasure& o) const {
  return dim == o.dim && nodes == o.nodes && lo == o.lo && hi == o.hi;
}

GridMeasure grid_measure(const Potential& p, double beta, const Box& bounds,
                         const std::vector<std::size_t>& n) {
  const std::size_t dim = n.size();
  if (dim < 1 || dim > 2)
    throw std::invalid_argument("grid_measure: only 1D and 2D grids supported");
  if (static_cast<int>(dim) != p.dim)
    throw std::invalid_argument("grid_measure: potential dimension mismatch");
  if (bounds.lo.size() != dim || bounds.hi.size() != dim)
    throw std::invalid_argument("grid_measure: bounds dimension mismatch");
  for (std::size_t a = 0; a < dim; ++a) {
    if (n[a] < 2) throw std::invalid_argument("grid_measure: need >= 2 nodes per axis");
    if (!(bounds.lo[a] < bounds.hi[a]))
      throw std::invalid_argument("grid_measure: empty axis bounds");
  }
  if (dim == 2 && (n[0] > 512 || n[1] > 512))
    throw std::invalid_argument("grid_measure: 2D grids capped at 512x512");
  if (beta <= 0.0) throw std::invalid_argument("grid_measure: beta must be > 0");

  GridMeasure gm;
  gm.dim = static_cast<int>(dim);
  gm.nodes = n;
  gm.lo = bounds.lo;
  gm.hi = bounds.hi;
  gm.beta = beta;
  gm.spacing.resize(dim);
  for (std::size_t a = 0; a < dim; ++a)
    gm.spacing[a] = (bounds.hi[a] - bounds.lo[a]) / static_cast<double>(n[a] - 1);

  std::size_t total = n[0] * (dim == 2 ? n[1] : 1);
  gm.log_density.resize(total);
  Point w(dim);
  for (std::size_t f = 0; f < total; ++f) {
    w[0] = gm.coord(0, f % n[0]);
    if (dim == 2) w[1] = gm.coord(1, f / n[0]);
    const double F = p.value(w);
    if (!std::isfinite(F)) throw std::runtime_error("grid_measure: non-finite F at node");
    gm.log_density[f] = -beta * F;
  }

  const double peak = *std::max_element(gm.log_density.begin(), gm.log_density.end());

  // boundary gate: density at the truncation boundary must be negligible
  double boundary_max = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < total; ++f) {
    const std::size_t i = f % n[0];
    bool on_boundary = (i == 0 || i + 1 == n[0]);
    if (dim == 2) {
      const std::size_t j = f / n[0];
      on_boundary = on_boundary || j == 0 || j + 1 == n[1];
    }
    if (on_boundary) boundary_max = std::max(boundary_max, gm.log_density[f]);
  }
  gm.boundary_peak_ratio = std::exp(boundary_max - peak);
  if (gm.boundary_peak_ratio > 1e-8) {
    throw std::invalid_argument(
        "grid_measure: boundary-to-peak weight ratio " +
        format17(gm.boundary_peak_ratio) + " exceeds 1e-8; widen the bounds");
  }

  const double vol = gm.cell_volume();
  gm.weights.resize(total);
  double z = 0.0;
  for (std::size_t f = 0; f < total; ++f) {
    gm.weights[f] = gm.trapezoid_coeff(f) * vol * std::exp(gm.log_density[f] - peak);
    z += gm.weights[f];
  }
  for (auto& x : gm.weights) x /= z;
  gm.log_norm = std::log(z) + peak;  // ln Z with weight = coeff*vol*exp(ld - lnZ)
  return gm;
}

Moments moments(const GridMeasure& gm) {
  Moments mo{0.0, 0.0, 0.0};
  Point w;
  for (std::size_t f = 0; f < gm.size(); ++f) {
    w = gm.node_point(f);
    const double r2 = dot(w, w);
    mo.first_abs += gm.weights[f] * std::sqrt(r2);
    mo.second += gm.weights[f] * r2;
  }
  if (gm.beta > 0.0) {
    for (std::size_t f = 0; f < gm.size(); ++f)
      mo.mean_F += gm.weights[f] * (-gm.log_density[f] / gm.beta);
  } else {
    mo.mean_F = std::numeric_limits<double>::quiet_NaN();
  }
  return mo;
}

DivergenceKind divergence_kind_from_string(const std::string& s) {
  if (s == "KL") return DivergenceKind::KL;
  if (s == "TV") return DivergenceKind::TV;
  if (s == "CHI2") return DivergenceKind::CHI2;
  throw std::invalid_argument("unknown divergence kind: " + s);
}

double divergence(const GridMeasure& gp, const GridMeasure& gq, DivergenceKind kind) {
  if (!gp.same_grid(gq)) throw std::invalid_argument("divergence: grid mismatch");
  const std::size_t total = gp.size();

  if (kind == DivergenceKind::TV) {
    double s = 0.0;
    for (std::size_t f = 0; f < total; ++f) s += std::abs(gp.weights[f] - gq.weights[f]);
    return 0.5 * s;
  }

  // log(p_f/q_f) from retained log-densities; cell geometry cancels on a
  // shared grid
  auto log_ratio = [&](std::size_t f) {
    return (gp.log_density[f] - gp.log_norm) - (gq.log_density[f] - gq.log_norm);
  };

  if (kind == DivergenceKind::KL) {
    double s = 0.0;
    for (std::size_t f = 0; f < total; ++f) {
      if (gp.weights[f] == 0.0) continue;
      if (gq.weights[f] == 0.0) return std::numeric_limits<double>::infinity();
      s += gp.weights[f] * log_ratio(f);
    }
    return s;
  }

  // chi^2 = sum p^2/q - 1
  double s = 0.0;
  for (std::size_t f = 0; f < total; ++f) {
    if (gp.weights[f] == 0.0) continue;
    if (gq.weights[f] == 0.0) return std::numeric_limits<double>::infinity();
    s += gp.weights[f] * std::exp(log_ratio(f));
  }
  return s - 1.0;
}

void write_grid_csv(const GridMeasure& gm, const std::string& path) {
  std::ostringstream out;
  out << (gm.dim == 2 ? "x,y,weight,log_density\n" : "x,weight,log_density\n");
  for (std::size_t f = 0; f < gm.size(); ++f) {
    const Point w = gm.node_point(f);
    out << format17(w[0]) << ',';
    if (gm.dim == 2) out << format17(w[1]) << ',';
    out << format17(gm.weights[f]) << ',' << format17(gm.log_density[f]) << '\n';
  }
  atomic_write(path, out.str());
}

}  // namespace gibbslab
