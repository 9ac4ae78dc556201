#pragma once

#include "gibbslab/vec.hpp"

namespace gibbslab {

// Radial bump: 0 on B(center, R), 1 outside B(center, R+1), two-exponential
// profile in between. R >= 1.
struct BumpProfile {
  Point center;
  double R;
};

// chi(w) in [0,1]; exactly 0 / exactly 1 in the inner / outer regions.
double bump_eval(const BumpProfile& bp, std::span<const double> w);

// The printed two-term scalar profile in u = e^{-1/x^2}, v = e^{-1/(1-x^2)},
// evaluated with log-space shifted exponentials. Nonnegative on (0,1).
double p_tilde(double x);

// True derivative of the interpolation profile u/(u+v):
// (u'v - uv')/(u+v)^2 = uv (2/x^3 + 2x/(1-x^2)^2) / (u+v)^2.
double bump_profile_deriv(double x);

// Radial gradient of chi: profile derivative times the unit radial vector;
// zero outside the open shell. The profile derivative here is the true one,
// so finite differences of bump_eval match; the printed p_tilde is exposed
// above for the nonnegativity check.
Point bump_grad(const BumpProfile& bp, std::span<const double> w);

double poly_h(double x);   // -6x^6+36x^5-69x^4+65x^3-33x^2+9x-1
double poly_h3(double x);  // -120x^3+360x^2-276x+65

struct PolyReport {
  double h_min, h_argmin;
  double h_at_half, h_at_one;
  double h3_min, h3_argmin;
  std::size_t grid_points;
};
// Grid minima of h and h3 over [1/2, 1] (1e4 points).
PolyReport poly_checks();

}  // namespace gibbslab
