#include <doctest.h>

#include <cmath>

#include "gibbslab/catalogue.hpp"
#include "gibbslab/grid_measure.hpp"

using namespace gibbslab;

namespace {
GridMeasure ou_grid(double beta, std::size_t n = 2048, double half = 0.0) {
  const Potential p = catalogue("quadratic", {{"c", 1.0}});
  const double a = half > 0.0 ? half : 8.0 / std::sqrt(beta);
  return grid_measure(p, beta, Box{{-a}, {a}}, {n});
}
}  // namespace

TEST_CASE("grid weights normalize and reflect symmetry") {
  const GridMeasure gm = ou_grid(4.0);
  double s = 0.0;
  for (double w : gm.weights) {
    CHECK(w >= 0.0);
    s += w;
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  // symmetric F on symmetric bounds: reflection symmetry of weights
  const std::size_t n = gm.nodes[0];
  for (std::size_t i = 0; i < n / 2; ++i)
    CHECK(gm.weights[i] == doctest::Approx(gm.weights[n - 1 - i]).epsilon(1e-12));
}

TEST_CASE("gaussian moments from the grid") {
  const GridMeasure gm = ou_grid(4.0);
  const Moments mo = moments(gm);
  CHECK(mo.second == doctest::Approx(0.25).epsilon(0.005));       // S = 1/beta
  CHECK(mo.mean_F == doctest::Approx(0.125).epsilon(0.01));       // E F = 1/(2 beta)
  CHECK(mo.first_abs ==
        doctest::Approx(std::sqrt(2.0 / (3.14159265358979312 * 4.0))).epsilon(0.005));

  // mean_F * beta stays near 1/2 across betas (d=1 case of the d/beta law)
  for (double beta : {4.0, 40.0, 400.0}) {
    const Moments m = moments(ou_grid(beta));
    CHECK(m.mean_F * beta >= 0.4);
    CHECK(m.mean_F * beta <= 0.6);
  }

  // symmetric measure: grid mean vanishes
  const GridMeasure g4 = ou_grid(4.0);
  double mean = 0.0;
  for (std::size_t f = 0; f < g4.size(); ++f)
    mean += g4.weights[f] * g4.node_point(f)[0];
  CHECK(std::abs(mean) <= 1e-12);
}

TEST_CASE("boundary gate rejects narrow bounds") {
  const Potential p = catalogue("quadratic", {{"c", 1.0}});
  CHECK_THROWS_WITH_AS(grid_measure(p, 1.0, Box{{-2.0}, {2.0}}, {256}),
                       doctest::Contains("widen"), std::invalid_argument);
}

TEST_CASE("divergences on closed forms") {
  const GridMeasure gm = ou_grid(4.0);
  CHECK(divergence(gm, gm, DivergenceKind::KL) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(divergence(gm, gm, DivergenceKind::TV) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(divergence(gm, gm, DivergenceKind::CHI2) ==
        doctest::Approx(0.0).epsilon(1e-10));

  // two gaussians N(0, s2), N(mu, s2): KL = mu^2/(2 s2)
  Potential shifted = catalogue("quadratic", {{"c", 1.0}});
  const auto base_value = shifted.value;
  shifted.value = [base_value](std::span<const double> w) {
    const Point v{w[0] - 0.25};
    return base_value(v);
  };
  const auto base_grad = shifted.gradient_into;
  shifted.gradient_into = [base_grad](std::span<const double> w, std::span<double> g) {
    const Point v{w[0] - 0.25};
    base_grad(v, g);
  };
  shifted.minimizer = {0.25};
  const double beta = 4.0;
  const Box wide{{-6.0}, {6.0}};
  const GridMeasure gp = grid_measure(catalogue("quadratic", {{"c", 1.0}}), beta, wide, {4096});
  const GridMeasure gq = grid_measure(shifted, beta, wide, {4096});
  const double kl = divergence(gp, gq, DivergenceKind::KL);
  CHECK(kl == doctest::Approx(0.25 * 0.25 / (2.0 / beta)).epsilon(0.01));

  // chi2 of the same pair: exp(mu^2/s2) - 1
  const double chi2 = divergence(gp, gq, DivergenceKind::CHI2);
  CHECK(chi2 == doctest::Approx(std::exp(0.0625 * beta) - 1.0).epsilon(0.01));

  // grid mismatch rejected
  const GridMeasure other = ou_grid(4.0, 1024);
  CHECK_THROWS_AS(divergence(gm, other, DivergenceKind::KL), std::invalid_argument);
}

TEST_CASE("disjoint supports give TV 1") {
  GridMeasure a, b;
  a.dim = b.dim = 1;
  a.nodes = b.nodes = {4};
  a.lo = b.lo = {0.0};
  a.hi = b.hi = {3.0};
  a.spacing = b.spacing = {1.0};
  a.weights = {0.5, 0.5, 0.0, 0.0};
  b.weights = {0.0, 0.0, 0.5, 0.5};
  a.log_density = {0.0, 0.0, -1e9, -1e9};
  b.log_density = {-1e9, -1e9, 0.0, 0.0};
  CHECK(divergence(a, b, DivergenceKind::TV) == doctest::Approx(1.0));
  CHECK(std::isinf(divergence(a, b, DivergenceKind::KL)));
}

TEST_CASE("2D grid measure is a product for separable potentials") {
  const Potential p2 = catalogue("quadratic", {{"c", 1.0}, {"dim", 2}});
  const GridMeasure gm =
      grid_measure(p2, 4.0, Box{{-4.0, -4.0}, {4.0, 4.0}}, {128, 128});
  const Moments mo = moments(gm);
  CHECK(mo.second == doctest::Approx(0.5).epsilon(0.01));  // 2 * (1/beta)
  CHECK(gm.size() == 128 * 128);
  CHECK_THROWS_AS(
      grid_measure(p2, 4.0, Box{{-4.0, -4.0}, {4.0, 4.0}}, {600, 600}),
      std::invalid_argument);
}
