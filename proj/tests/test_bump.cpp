#include <doctest.h>

#include <cmath>

#include "gibbslab/bump.hpp"
#include "gibbslab/lyapunov.hpp"
#include "gibbslab/rng.hpp"

using namespace gibbslab;

TEST_CASE("bump region identities") {
  const BumpProfile bp{{0.0, 0.0}, 2.0};
  CHECK(bump_eval(bp, Point{1.0, 0.0}) == 0.0);   // |w| = R/2
  CHECK(bump_eval(bp, Point{0.0, 0.0}) == 0.0);
  CHECK(bump_eval(bp, Point{4.0, 0.0}) == 1.0);   // |w| = R+2
  CHECK(bump_eval(bp, Point{0.0, 3.0}) == 1.0);
  // shell values strictly inside [0,1]
  for (double r : {2.1, 2.5, 2.9}) {
    const double v = bump_eval(bp, Point{r, 0.0});
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  CHECK_THROWS_AS(bump_eval(BumpProfile{{0.0}, 0.5}, Point{0.0}),
                  std::invalid_argument);
}

TEST_CASE("profile value at the midpoint") {
  // chi profile at x=0.5: e^{-4}/(e^{-4}+e^{-4/3})
  const BumpProfile bp{{0.0}, 1.0};
  const double expected = std::exp(-4.0) / (std::exp(-4.0) + std::exp(-4.0 / 3.0));
  CHECK(bump_eval(bp, Point{1.5}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.0650).epsilon(1e-2));
}

TEST_CASE("printed p_tilde nonnegative on the profile grid") {
  CHECK(p_tilde(0.5) > 0.0);
  CHECK(p_tilde(1e-3) == doctest::Approx(0.0).epsilon(1e-30));
  double mn = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10000; ++k) {
    const double x = 1e-3 + (1.0 - 2e-3) * k / 9999.0;
    mn = std::min(mn, p_tilde(x));
  }
  CHECK(mn >= -1e-12);
  CHECK_THROWS_AS(p_tilde(0.0), std::domain_error);
  CHECK_THROWS_AS(p_tilde(1.0), std::domain_error);
}

TEST_CASE("bump continuity across both spheres") {
  const BumpProfile bp{{0.0}, 1.5};
  const double eps = 1e-6;
  for (double r : {1.5, 2.5}) {
    const double lo = bump_eval(bp, Point{r - eps});
    const double hi = bump_eval(bp, Point{r + eps});
    CHECK(std::abs(hi - lo) <= 1e-4);
  }
}

TEST_CASE("bump_grad matches finite differences and is radially aligned") {
  const BumpProfile bp{{0.3, -0.2}, 1.0};
  Rng rng(99);
  int checked = 0;
  while (checked < 100) {
    // random shell point, radius uniform in (R, R+1)
    const double ang = 2.0 * 3.14159265358979312 * rng.uniform();
    const double r = 1.0 + 1e-3 + (1.0 - 2e-3) * rng.uniform();
    const Point w{bp.center[0] + r * std::cos(ang), bp.center[1] + r * std::sin(ang)};
    const Point g = bump_grad(bp, w);

    // radial alignment: <grad chi, w - w*> = |grad chi| |w - w*| >= 0
    double inner = 0.0;
    for (std::size_t i = 0; i < 2; ++i) inner += g[i] * (w[i] - bp.center[i]);
    CHECK(inner >= 0.0);
    CHECK(inner == doctest::Approx(norm(g) * r).epsilon(1e-10));

    // central finite differences of bump_eval
    const double step = 1e-6;
    Point fd(2);
    for (std::size_t i = 0; i < 2; ++i) {
      Point wp = w, wm = w;
      wp[i] += step;
      wm[i] -= step;
      fd[i] = (bump_eval(bp, wp) - bump_eval(bp, wm)) / (2.0 * step);
    }
    const double scale = std::max(norm(g), 1e-30);
    if (norm(g) > 1e-12) {
      CHECK(dist(fd, g) / scale <= 1e-6);
      ++checked;
    } else {
      ++checked;  // deep in a tail where both vanish
    }
  }
  // zero vector inside the inner ball and outside the outer one
  CHECK(norm(bump_grad(bp, Point{bp.center[0], bp.center[1]})) == 0.0);
  CHECK(norm(bump_grad(bp, Point{bp.center[0] + 3.0, bp.center[1]})) == 0.0);
}

TEST_CASE("polynomial checks") {
  const PolyReport rep = poly_checks();
  CHECK(rep.h_at_half == 0.09375);  // exact in double precision
  CHECK(rep.h_at_one == 1.0);
  CHECK(rep.h_min >= 0.0);
  CHECK(rep.h_min == 0.09375);  // the boundary value is the grid minimum
  CHECK(rep.h3_min > 0.0);
  const double h3_argmin_exact = 1.0 - std::sqrt(7.0 / 30.0);
  CHECK(std::abs(rep.h3_argmin - h3_argmin_exact) <= 1e-3);
}

TEST_CASE("phi_tilde equals the pieces in the pure regions") {
  // Phi = |w|^2 (spec phi), Phi2 = |w - w*|^2/(2 r1) + M'
  LyapunovSpec spec;
  spec.phi = [](std::span<const double> w) { return dot(w, w); };
  spec.phi_grad = [](std::span<const double> w, std::span<double> g) {
    for (std::size_t i = 0; i < w.size(); ++i) g[i] = 2.0 * w[i];
  };
  spec.g = [](double x) { return x; };
  spec.rho = [](double t) { return 2.0 * std::sqrt(std::max(t, 1.0)); };
  spec.r1 = 1.0;
  spec.r2 = 1.0;
  spec.R = 1.0;
  const BumpProfile bp{{0.0}, 1.0};
  const double Mprime = 4.0;  // sup over B(0,2) of |w|^2

  CHECK(phi_tilde(spec, bp, Mprime, Point{0.0}) == 0.0);           // = Phi(w*)
  CHECK(phi_tilde(spec, bp, Mprime, Point{0.5}) == 0.25);          // inside R
  CHECK(phi_tilde(spec, bp, Mprime, Point{3.0}) ==
        doctest::Approx(3.0 * 3.0 / 2.0 + 4.0));                    // outside R+1
  // convex combination bound on the shell
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const double r = 1.0 + rng.uniform();
    const Point w{r};
    const double phi = spec.phi(w);
    const double phi2 = r * r / 2.0 + Mprime;
    const double v = phi_tilde(spec, bp, Mprime, w);
    CHECK(v >= std::min(phi, phi2) - 1e-12);
    CHECK(v <= std::max(phi, phi2) + 1e-12);
  }
}

TEST_CASE("estimate_ball_sups on closed forms") {
  LyapunovSpec spec;
  spec.phi = [](std::span<const double> w) { return dot(w, w); };
  spec.phi_grad = [](std::span<const double> w, std::span<double> g) {
    for (std::size_t i = 0; i < w.size(); ++i) g[i] = 2.0 * w[i];
  };
  spec.g = [](double x) { return x; };
  spec.rho = [](double t) { return t; };
  spec.r1 = spec.r2 = 1.0;
  spec.R = 1.0;
  const BumpProfile bp{{0.0}, 1.0};
  const BallSups sups = estimate_ball_sups(spec, bp, 100000);
  // sup over B(0, 2) of |w|^2 = 4
  CHECK(sups.M_prime == doctest::Approx(4.0).epsilon(0.01));
  CHECK(sups.B_bump > 0.0);
  CHECK(std::isfinite(sups.B_bump));
  CHECK(sups.profile_resolution == 10000);

  // constant Phi: sup equals the constant
  LyapunovSpec flat = spec;
  flat.phi = [](std::span<const double>) { return 2.5; };
  CHECK(estimate_ball_sups(flat, bp, 1000).M_prime == doctest::Approx(2.5));

  CHECK_THROWS_AS(estimate_ball_sups(spec, bp, 100), std::invalid_argument);
}
