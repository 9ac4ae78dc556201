#include "gibbslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gibbslab/format.hpp"

namespace gibbslab {

namespace {

// Nodes whose relative log-density falls below this never influence the gap
// at double precision; dropping them keeps the linear solves away from
// underflow.
constexpr double kSupportLogFloor = -300.0;

struct Assembly {
  int dim;
  std::size_t nx, ny;
  std::vector<char> active;
  std::vector<double> mass;      // 0 on inactive nodes
  std::vector<double> fx, fy;    // face conductances; 0 across inactive nodes
  std::size_t n_active = 0;
  std::size_t first_active = 0, last_active = 0;  // 1D contiguous range

  std::size_t flat(std::size_t i, std::size_t j) const { return i + nx * j; }

  void apply(const std::vector<double>& v, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (dim == 1) {
      for (std::size_t i = 0; i + 1 < nx; ++i) {
        const double c = fx[i];
        if (c == 0.0) continue;
        const double d = v[i] - v[i + 1];
        out[i] += c * d;
        out[i + 1] -= c * d;
      }
      return;
    }
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i + 1 < nx; ++i) {
        const double c = fx[i + (nx - 1) * j];
        if (c == 0.0) continue;
        const std::size_t f = flat(i, j);
        const double d = v[f] - v[f + 1];
        out[f] += c * d;
        out[f + 1] -= c * d;
      }
    for (std::size_t j = 0; j + 1 < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const double c = fy[i + nx * j];
        if (c == 0.0) continue;
        const std::size_t f = flat(i, j);
        const double d = v[f] - v[f + nx];
        out[f] += c * d;
        out[f + nx] -= c * d;
      }
  }

  double mdot(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0.0;
    for (std::size_t f = 0; f < mass.size(); ++f) s += mass[f] * a[f] * b[f];
    return s;
  }

  void deflate(std::vector<double>& v) const {
    double num = 0.0, den = 0.0;
    for (std::size_t f = 0; f < mass.size(); ++f) {
      num += mass[f] * v[f];
      den += mass[f];
    }
    const double shift = num / den;
    for (std::size_t f = 0; f < mass.size(); ++f)
      v[f] = active[f] ? v[f] - shift : 0.0;
  }
};

Assembly assemble(const GridMeasure& gm, const std::vector<char>& region_mask) {
  Assembly as;
  as.dim = gm.dim;
  as.nx = gm.nodes[0];
  as.ny = gm.dim == 2 ? gm.nodes[1] : 1;
  const std::size_t total = gm.size();

  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < total; ++f)
    if (region_mask[f]) peak = std::max(peak, gm.log_density[f]);
  if (!std::isfinite(peak))
    throw std::invalid_argument("spectral: empty restriction region");

  as.active.assign(total, 0);
  as.mass.assign(total, 0.0);
  const double vol = gm.cell_volume();
  for (std::size_t f = 0; f < total; ++f) {
    if (!region_mask[f]) continue;
    const double rel = gm.log_density[f] - peak;
    if (rel < kSupportLogFloor) continue;
    as.active[f] = 1;
    as.mass[f] = gm.trapezoid_coeff(f) * vol * std::exp(rel);
    ++as.n_active;
  }
  if (as.n_active < 3)
    throw std::invalid_argument("spectral: fewer than 3 supported nodes");

  // face conductances: geometric mean of adjacent node densities
  auto face = [&](std::size_t a, std::size_t b, double geom) {
    if (!as.active[a] || !as.active[b]) return 0.0;
    return std::exp(0.5 * (gm.log_density[a] + gm.log_density[b]) - peak) * geom;
  };
  if (gm.dim == 1) {
    as.fx.assign(as.nx - 1, 0.0);
    const double geom = vol / (gm.spacing[0] * gm.spacing[0]);
    for (std::size_t i = 0; i + 1 < as.nx; ++i) as.fx[i] = face(i, i + 1, geom);
    // contiguity: the active set must be one interval
    std::size_t first = total, last = 0;
    for (std::size_t f = 0; f < total; ++f)
      if (as.active[f]) {
        first = std::min(first, f);
        last = std::max(last, f);
      }
    for (std::size_t f = first; f <= last; ++f)
      if (!as.active[f])
        throw std::runtime_error(
            "spectral: measure support disconnected at grid resolution");
    as.first_active = first;
    as.last_active = last;
  } else {
    as.fx.assign((as.nx - 1) * as.ny, 0.0);
    as.fy.assign(as.nx * (as.ny - 1), 0.0);
    const double gx = vol / (gm.spacing[0] * gm.spacing[0]);
    const double gy = vol / (gm.spacing[1] * gm.spacing[1]);
    for (std::size_t j = 0; j < as.ny; ++j)
      for (std::size_t i = 0; i + 1 < as.nx; ++i)
        as.fx[i + (as.nx - 1) * j] = face(as.flat(i, j), as.flat(i + 1, j), gx);
    for (std::size_t j = 0; j + 1 < as.ny; ++j)
      for (std::size_t i = 0; i < as.nx; ++i)
        as.fy[i + as.nx * j] = face(as.flat(i, j), as.flat(i, j + 1), gy);

    // BFS connectivity over active faces
    std::size_t start = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < total; ++f)
      if (as.active[f] && gm.log_density[f] > best) {
        best = gm.log_density[f];
        start = f;
      }
    std::vector<char> seen(total, 0);
    std::deque<std::size_t> q{start};
    seen[start] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
      const std::size_t f = q.front();
      q.pop_front();
      const std::size_t i = f % as.nx, j = f / as.nx;
      auto push = [&](std::size_t g, double cond) {
        if (cond != 0.0 && !seen[g]) {
          seen[g] = 1;
          ++count;
          q.push_back(g);
        }
      };
      if (i > 0) push(f - 1, as.fx[i - 1 + (as.nx - 1) * j]);
      if (i + 1 < as.nx) push(f + 1, as.fx[i + (as.nx - 1) * j]);
      if (j > 0) push(f - as.nx, as.fy[i + as.nx * (j - 1)]);
      if (j + 1 < as.ny) push(f + as.nx, as.fy[i + as.nx * j]);
    }
    if (count != as.n_active)
      throw std::runtime_error(
          "spectral: measure support disconnected at grid resolution");
  }
  return as;
}

// Direct tridiagonal solve of A y = r on the active interval with the
// nullspace pinned by y[last] = 0; the dropped last equation holds
// automatically because r is deflated. Pivot updates stay in ratio form so
// exponentially small conductances never underflow by squaring.
void solve_1d(const Assembly& as, const std::vector<double>& r,
              std::vector<double>& y) {
  const std::size_t s = as.first_active, e = as.last_active;
  std::fill(y.begin(), y.end(), 0.0);
  if (e <= s) return;
  const std::size_t m = e - s;  // unknowns y[s..e-1]
  std::vector<double> diag(m), rhs(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = s + k;
    const double cl = i > s ? as.fx[i - 1] : 0.0;
    const double cr = as.fx[i];  // face to i+1 always present inside interval
    diag[k] = cl + cr;
    rhs[k] = r[i];
  }
  // forward elimination: sub/super diagonal entries are -fx
  for (std::size_t k = 1; k < m; ++k) {
    const double w = -as.fx[s + k - 1] / diag[k - 1];
    diag[k] -= w * (-as.fx[s + k - 1]);
    rhs[k] -= w * rhs[k - 1];
  }
  y[s + m - 1] = rhs[m - 1] / diag[m - 1];
  for (std::size_t k = m - 1; k-- > 0;)
    y[s + k] = (rhs[k] + as.fx[s + k] * y[s + k + 1]) / diag[k];
}

// Jacobi-preconditioned CG on the deflated subspace (A is PSD with the
// constants as kernel; the deflated system is definite).
void solve_2d(const Assembly& as, const std::vector<double>& r,
              std::vector<double>& y) {
  const std::size_t total = as.mass.size();
  std::vector<double> diag(total, 0.0);
  for (std::size_t j = 0; j < as.ny; ++j)
    for (std::size_t i = 0; i + 1 < as.nx; ++i) {
      const double c = as.fx[i + (as.nx - 1) * j];
      diag[as.flat(i, j)] += c;
      diag[as.flat(i + 1, j)] += c;
    }
  for (std::size_t j = 0; j + 1 < as.ny; ++j)
    for (std::size_t i = 0; i < as.nx; ++i) {
      const double c = as.fy[i + as.nx * j];
      diag[as.flat(i, j)] += c;
      diag[as.flat(i, j + 1)] += c;
    }

  std::vector<double> res(r), z(total, 0.0), p(total, 0.0), ap(total, 0.0);
  std::fill(y.begin(), y.end(), 0.0);
  as.deflate(res);
  double rnorm0 = 0.0;
  for (std::size_t f = 0; f < total; ++f) rnorm0 += res[f] * res[f];
  rnorm0 = std::sqrt(rnorm0);
  if (rnorm0 == 0.0) return;

  auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (std::size_t f = 0; f < total; ++f)
      out[f] = as.active[f] && diag[f] > 0.0 ? in[f] / diag[f] : 0.0;
  };
  precond(res, z);
  as.deflate(z);
  p = z;
  double rz = std::inner_product(res.begin(), res.end(), z.begin(), 0.0);
  const std::size_t cap = 40 * as.n_active + 100;
  for (std::size_t it = 0; it < cap; ++it) {
    as.apply(p, ap);
    const double pap = std::inner_product(p.begin(), p.end(), ap.begin(), 0.0);
    if (pap <= 0.0) break;
    const double alpha = rz / pap;
    double rnorm = 0.0;
    for (std::size_t f = 0; f < total; ++f) {
      y[f] += alpha * p[f];
      res[f] -= alpha * ap[f];
      rnorm += res[f] * res[f];
    }
    if (std::sqrt(rnorm) <= 1e-14 * rnorm0) break;
    as.deflate(res);
    precond(res, z);
    as.deflate(z);
    const double rz_new = std::inner_product(res.begin(), res.end(), z.begin(), 0.0);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t f = 0; f < total; ++f) p[f] = z[f] + beta * p[f];
  }
  as.deflate(y);
}

SpectralResult smallest_nonzero(const GridMeasure& gm, const Assembly& as,
                                double tol) {
  const std::size_t total = gm.size();
  std::vector<double> v(total, 0.0), rhs(total), y(total), ay(total);

  // coordinate ramp plus a deterministic jitter; generic against v1
  for (std::size_t f = 0; f < total; ++f) {
    if (!as.active[f]) continue;
    const std::size_t i = f % as.nx, j = f / as.nx;
    v[f] = gm.coord(0, i) + (gm.dim == 2 ? gm.coord(1, j) : 0.0) +
           1e-3 * (static_cast<double>(splitmix64(f) >> 11) * 0x1.0p-53 - 0.5);
  }
  as.deflate(v);
  double nv = std::sqrt(as.mdot(v, v));
  if (nv == 0.0) throw std::runtime_error("spectral: degenerate start vector");
  for (auto& x : v) x /= nv;

  const int cap = 1000;
  double lambda = 0.0, residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= cap; ++it) {
    for (std::size_t f = 0; f < total; ++f) rhs[f] = as.mass[f] * v[f];
    if (gm.dim == 1)
      solve_1d(as, rhs, y);
    else
      solve_2d(as, rhs, y);
    as.deflate(y);
    const double ymy = as.mdot(y, y);
    if (!(ymy > 0.0)) throw std::runtime_error("spectral: inverse iteration broke down");
    as.apply(y, ay);
    double yay = 0.0;
    for (std::size_t f = 0; f < total; ++f) yay += y[f] * ay[f];
    lambda = yay / ymy;

    // scale-free residual |Ay - lambda M y| / max(|Ay|, lambda |My|)
    double num = 0.0, na = 0.0, nm = 0.0;
    for (std::size_t f = 0; f < total; ++f) {
      const double my = as.mass[f] * y[f];
      const double d = ay[f] - lambda * my;
      num += d * d;
      na += ay[f] * ay[f];
      nm += my * my;
    }
    residual = std::sqrt(num) / std::max(std::sqrt(na), lambda * std::sqrt(nm));
    const double ny = std::sqrt(ymy);
    for (auto& x : y) x /= ny;
    v.swap(y);
    if (residual <= tol) {
      SpectralResult res;
      res.lambda1 = lambda;
      res.c_pi = 1.0 / lambda;
      res.residual = residual;
      res.iterations = it;
      res.support_nodes = as.n_active;
      std::ostringstream ss;
      ss << "dim=" << gm.dim << " nodes=" << gm.nodes[0];
      if (gm.dim == 2) ss << "x" << gm.nodes[1];
      ss << " support=" << as.n_active << " log_floor=" << kSupportLogFloor;
      res.grid_summary = ss.str();
      return res;
    }
  }
  throw std::runtime_error("spectral: inverse iteration did not reach tolerance " +
                           format17(tol) + " in 1000 iterations (residual " +
                           format17(residual) + ")");
}

}  // namespace

SpectralResult generator_spectral_gap(const GridMeasure& gm, double tol) {
  std::vector<char> mask(gm.size(), 1);
  return smallest_nonzero(gm, assemble(gm, mask), tol);
}

SpectralResult local_poincare(const GridMeasure& gm, const Point& center,
                              double radius, double tol) {
  if (center.size() != static_cast<std::size_t>(gm.dim))
    throw std::invalid_argument("local_poincare: center dimension mismatch");
  std::vector<char> mask(gm.size(), 0);
  std::vector<std::size_t> per_axis_i, per_axis_j;
  for (std::size_t f = 0; f < gm.size(); ++f) {
    const Point w = gm.node_point(f);
    if (dist(w, center) <= radius) {
      mask[f] = 1;
      per_axis_i.push_back(f % gm.nodes[0]);
      if (gm.dim == 2) per_axis_j.push_back(f / gm.nodes[0]);
    }
  }
  auto distinct = [](std::vector<std::size_t>& v) {
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
  };
  if (distinct(per_axis_i) < 8 || (gm.dim == 2 && distinct(per_axis_j) < 8))
    throw std::invalid_argument("local_poincare: ball covers fewer than 8 nodes per axis");
  return smallest_nonzero(gm, assemble(gm, mask), tol);
}

double grid_variance(const GridMeasure& gm, std::span<const double> f) {
  double mean = 0.0, second = 0.0;
  for (std::size_t i = 0; i < gm.size(); ++i) {
    mean += gm.weights[i] * f[i];
    second += gm.weights[i] * f[i] * f[i];
  }
  return second - mean * mean;
}

double grid_dirichlet(const GridMeasure& gm, std::span<const double> f) {
  const double vol = gm.cell_volume();
  const std::size_t nx = gm.nodes[0];
  const std::size_t ny = gm.dim == 2 ? gm.nodes[1] : 1;
  double s = 0.0;
  const double gx = vol / (gm.spacing[0] * gm.spacing[0]);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const std::size_t a = i + nx * j;
      const double d = f[a] - f[a + 1];
      s += gx * std::exp(0.5 * (gm.log_density[a] + gm.log_density[a + 1]) - gm.log_norm) * d * d;
    }
  if (gm.dim == 2) {
    const double gy = vol / (gm.spacing[1] * gm.spacing[1]);
    for (std::size_t j = 0; j + 1 < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t a = i + nx * j;
        const double d = f[a] - f[a + nx];
        s += gy * std::exp(0.5 * (gm.log_density[a] + gm.log_density[a + nx]) - gm.log_norm) * d * d;
      }
  }
  return s;
}

GridMeasure histogram(const Trajectory& traj, const GridMeasure& gm_template,
                      double burn_in) {
  if (traj.dim != static_cast<std::size_t>(gm_template.dim))
    throw std::invalid_argument("histogram: trajectory dimension mismatch");
  if (burn_in < 0.0 || burn_in >= 1.0)
    throw std::invalid_argument("histogram: burn_in must lie in [0,1)");

  GridMeasure out;
  out.dim = gm_template.dim;
  out.nodes = gm_template.nodes;
  out.lo = gm_template.lo;
  out.hi = gm_template.hi;
  out.spacing = gm_template.spacing;
  out.weights.assign(gm_template.size(), 0.0);
  out.log_density.assign(gm_template.size(),
                         -std::numeric_limits<double>::infinity());

  const double threshold = burn_in * static_cast<double>(traj.steps);
  std::size_t in_range = 0, total_states = 0;
  for (std::size_t c = 0; c < traj.chains; ++c) {
    for (std::size_t r = 0; r < traj.n_records; ++r) {
      if (static_cast<double>(traj.record_steps[r]) < threshold) continue;
      ++total_states;
      const auto w = traj.state(c, r);
      bool ok = true;
      std::size_t idx[2] = {0, 0};
      for (int a = 0; a < out.dim; ++a) {
        const double t = (w[static_cast<std::size_t>(a)] - out.lo[static_cast<std::size_t>(a)]) /
                         out.spacing[static_cast<std::size_t>(a)];
        const long k = std::lround(t);
        if (k < 0 || k >= static_cast<long>(out.nodes[static_cast<std::size_t>(a)])) {
          ok = false;
          break;
        }
        idx[a] = static_cast<std::size_t>(k);
      }
      if (!ok) continue;
      ++in_range;
      out.weights[out.flat(idx[0], idx[1])] += 1.0;
    }
  }
  if (total_states == 0) throw std::invalid_argument("histogram: no post-burn-in states");
  out.out_of_range_mass =
      static_cast<double>(total_states - in_range) / static_cast<double>(total_states);
  if (out.out_of_range_mass > 1e-3)
    throw std::runtime_error("histogram: out-of-range mass " +
                             format17(out.out_of_range_mass) + " exceeds 1e-3");

  const double vol = out.cell_volume();
  for (std::size_t f = 0; f < out.size(); ++f) {
    out.weights[f] /= static_cast<double>(in_range);
    if (out.weights[f] > 0.0)
      out.log_density[f] = std::log(out.weights[f] / (out.trapezoid_coeff(f) * vol));
  }
  return out;
}

double variance_decay_rate(
    const Potential& p, double beta, double eta,
    const std::function<double(std::span<const double>)>& observable,
    const Trajectory& ensemble, const DecayFitOptions& opts) {
  (void)p;
  (void)beta;
  if (ensemble.chains < 2)
    throw std::invalid_argument("variance_decay_rate: need >= 2 chains");

  const std::size_t C = ensemble.chains;
  std::vector<double> times, lngaps;
  const double sv = opts.stationary_variance;
  double scale = sv;
  // noise floor of the cross-chain variance estimate
  if (scale <= 0.0) {
    double mean = 0.0, second = 0.0;
    const std::size_t r = ensemble.n_records - 1;
    for (std::size_t c = 0; c < C; ++c) {
      const double x = observable(ensemble.state(c, r));
      mean += x;
      second += x * x;
    }
    mean /= static_cast<double>(C);
    scale = second / static_cast<double>(C) - mean * mean;
  }
  const double floor =
      opts.floor_sigmas * std::sqrt(2.0 / static_cast<double>(C)) * std::max(scale, 0.0);

  for (std::size_t r = 0; r < ensemble.n_records; ++r) {
    const double t = eta * static_cast<double>(ensemble.record_steps[r]);
    if (t < opts.skip_time) continue;
    double mean = 0.0, second = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double x = observable(ensemble.state(c, r));
      mean += x;
      second += x * x;
    }
    mean /= static_cast<double>(C);
    const double var = second / static_cast<double>(C) - mean * mean;
    const double gap = std::abs(var - sv);
    if (gap <= floor) break;
    times.push_back(t);
    lngaps.push_back(std::log(gap));
  }
  if (times.size() < opts.min_points)
    throw std::runtime_error(
        "variance_decay_rate: variance fell below the noise floor before the "
        "fit window collected " + std::to_string(opts.min_points) + " points");

  // least-squares slope of ln gap against time
  const double n = static_cast<double>(times.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    st += times[i];
    sy += lngaps[i];
    stt += times[i] * times[i];
    sty += times[i] * lngaps[i];
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  return -slope;
}

}  // namespace gibbslab
