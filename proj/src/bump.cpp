#include "gibbslab/bump.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gibbslab {

namespace {

// shifted exponentials of the two profile terms; exact near both endpoints
struct ProfileExp {
  double eu, ev, m;  // eu = exp(lu - m), ev = exp(lv - m)
};

ProfileExp profile_exp(double x) {
  const double lu = -1.0 / (x * x);
  const double lv = -1.0 / (1.0 - x * x);
  const double m = std::max(lu, lv);
  return {std::exp(lu - m), std::exp(lv - m), m};
}

}  // namespace

double bump_eval(const BumpProfile& bp, std::span<const double> w) {
  if (bp.R < 1.0) throw std::invalid_argument("bump: R must be >= 1");
  const double x = dist(w, bp.center) - bp.R;
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const auto [eu, ev, m] = profile_exp(x);
  return eu / (eu + ev);
}

double p_tilde(double x) {
  if (!(x > 0.0 && x < 1.0))
    throw std::domain_error("p_tilde: x must lie in (0,1)");
  const double lu = -1.0 / (x * x);
  const double lv = -1.0 / (1.0 - x * x);
  const double m = std::max(lu, lv);
  const double eu = std::exp(lu - m), ev = std::exp(lv - m);
  const double den = eu + ev;
  const double la = std::log(2.0) - 3.0 * std::log(x);              // ln(2/x^3)
  const double lb = std::log(2.0 * x) - 2.0 * std::log1p(-x * x);   // ln(2x/(1-x^2)^2)
  const double term1 = std::exp(lu - m + la) / den;
  const double term2a = std::exp(2.0 * (lu - m) + la) / (den * den);
  const double term2b = std::exp(lu + lv - 2.0 * m + lb) / (den * den);
  return term1 + term2a - term2b;
}

double bump_profile_deriv(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const auto [eu, ev, m] = profile_exp(x);
  const double den = eu + ev;
  const double lu = -1.0 / (x * x);
  const double lv = -1.0 / (1.0 - x * x);
  const double la = std::log(2.0) - 3.0 * std::log(x);
  const double lb = std::log(2.0 * x) - 2.0 * std::log1p(-x * x);
  const double lmax = std::max(la, lb);
  const double log_scale = lmax + std::log(std::exp(la - lmax) + std::exp(lb - lmax));
  return std::exp(lu + lv - 2.0 * m + log_scale) / (den * den);
}

Point bump_grad(const BumpProfile& bp, std::span<const double> w) {
  if (bp.R < 1.0) throw std::invalid_argument("bump: R must be >= 1");
  Point g(w.size(), 0.0);
  const double r = dist(w, bp.center);
  const double x = r - bp.R;
  if (x <= 0.0 || x >= 1.0) return g;
  const double mag = bump_profile_deriv(x);
  for (std::size_t i = 0; i < w.size(); ++i)
    g[i] = mag * (w[i] - bp.center[i]) / r;
  return g;
}

double poly_h(double x) {
  // -6x^6+36x^5-69x^4+65x^3-33x^2+9x-1
  return ((((((-6.0 * x + 36.0) * x - 69.0) * x + 65.0) * x - 33.0) * x + 9.0) * x - 1.0);
}

double poly_h3(double x) { return ((-120.0 * x + 360.0) * x - 276.0) * x + 65.0; }

PolyReport poly_checks() {
  PolyReport rep{};
  rep.grid_points = 10000;
  rep.h_at_half = poly_h(0.5);
  rep.h_at_one = poly_h(1.0);
  rep.h_min = rep.h3_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rep.grid_points; ++k) {
    const double x = 0.5 + 0.5 * static_cast<double>(k) /
                               static_cast<double>(rep.grid_points - 1);
    const double hv = poly_h(x);
    if (hv < rep.h_min) {
      rep.h_min = hv;
      rep.h_argmin = x;
    }
    const double h3v = poly_h3(x);
    if (h3v < rep.h3_min) {
      rep.h3_min = h3v;
      rep.h3_argmin = x;
    }
  }
  return rep;
}

}  // namespace gibbslab
