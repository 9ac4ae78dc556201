#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gibbslab/parallel.hpp"

#include "gibbslab/catalogue.hpp"
#include "gibbslab/samplers.hpp"
#include "gibbslab/spectral.hpp"

using namespace gibbslab;

TEST_CASE("gaussian initialization law") {
  const GaussianInit gi = init_gaussian(1, 1.0, 1.0, 1.0);
  CHECK(gi.variance == doctest::Approx(1.0 / 3.0));

  // sample mean within 4 standard errors of 0, variance within 1% of target
  const GaussianInit g2 = init_gaussian(1, 10.0, 2.0, 1.0);
  Rng rng(5);
  const std::size_t n = 1000000;
  double sum = 0.0, sq = 0.0;
  Point x(1);
  for (std::size_t k = 0; k < n; ++k) {
    g2.draw(rng, x);
    sum += x[0];
    sq += x[0] * x[0];
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  const double target = 1.0 / (2.0 * 10.0 * 2.0 + 1.0);
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(target / n));
  CHECK(var == doctest::Approx(target).epsilon(0.01));

  CHECK_THROWS_AS(init_gaussian(1, 1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(init_gaussian(1, 1.0, 1.0, 1.5), std::invalid_argument);
}

TEST_CASE("gld_step formula") {
  const Potential p = catalogue("quadratic", {{"c", 1.0}});
  // fixed point: zero gradient, zero noise
  const Point at_min = gld_step(p, 4.0, 0.1, Point{0.0}, Point{0.0});
  CHECK(at_min[0] == 0.0);
  // hand evaluation: w=1, beta=1, eta=0.1 -> 0.9
  const Point w1 = gld_step(p, 1.0, 0.1, Point{1.0}, Point{0.0});
  CHECK(w1[0] == doctest::Approx(0.9));
  // affine in the noise
  const Point wn = gld_step(p, 1.0, 0.1, Point{1.0}, Point{2.0});
  CHECK(wn[0] == doctest::Approx(0.9 + std::sqrt(0.2) * 2.0));
  CHECK_THROWS_AS(gld_step(p, 1.0, 0.0, Point{1.0}, Point{0.0}),
                  std::invalid_argument);
}

TEST_CASE("one-step law variance is 2 eta") {
  const Potential p = catalogue("quadratic", {{"c", 1.0}});
  const double eta = 0.05;
  Rng rng(17);
  const std::size_t n = 100000;
  double sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Point out = gld_step(p, 1.0, eta, Point{0.0}, Point{rng.normal()});
    sq += out[0] * out[0];
  }
  CHECK(sq / n == doctest::Approx(2.0 * eta).epsilon(0.03));
}

TEST_CASE("run_gld determinism and stationary variance") {
  const Potential p = catalogue("quadratic", {{"c", 1.0}});
  SamplerConfig cfg;
  cfg.beta = 4.0;
  cfg.eta = 1e-3;
  cfg.steps = 20000;
  cfg.chains = 32;
  cfg.seed = 42;
  cfg.record_stride = 10;

  set_thread_count(1);
  const Trajectory a = run_gld(p, cfg);
  set_thread_count(4);
  const Trajectory b = run_gld(p, cfg);
  set_thread_count(1);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t c = 0; c < a.chains; ++c) CHECK(a.states[c] == b.states[c]);

  // pooled tail-half sample variance near 1/beta
  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < a.chains; ++c)
    for (std::size_t r = a.n_records / 2; r < a.n_records; ++r) {
      sq += a.state(c, r)[0] * a.state(c, r)[0];
      ++count;
    }
  CHECK(sq / count == doctest::Approx(0.25).epsilon(0.1));

  // steps=0 leaves only the initialization
  SamplerConfig zero = cfg;
  zero.steps = 0;
  const Trajectory t0 = run_gld(p, zero);
  CHECK(t0.n_records == 1);
  CHECK(t0.record_steps[0] == 0);

  // mean contraction factor per step is 1 - eta*beta*c for the quadratic
  SamplerConfig drift = cfg;
  drift.steps = 1;
  drift.chains = 4096;
  drift.record_stride = 1;
  const PointSampler at_one = [](Rng&, std::span<double> out) { out[0] = 1.0; };
  const Trajectory td = run_gld(p, drift, at_one);
  double mean1 = 0.0;
  for (std::size_t c = 0; c < td.chains; ++c) mean1 += td.state(c, 1)[0];
  mean1 /= static_cast<double>(td.chains);
  CHECK(mean1 ==
        doctest::Approx(1.0 - cfg.eta * cfg.beta * 1.0)
            .epsilon(4.0 * std::sqrt(2.0 * cfg.eta / 4096.0)));
}

TEST_CASE("gld divergence aborts with the step index") {
  Potential blow = catalogue("quadratic", {{"c", 1.0}});
  blow.gradient_into = [](std::span<const double> w, std::span<double> g) {
    g[0] = -1e3 * (1.0 + std::abs(w[0]));  // uphill explosion
  };
  blow.smoothness_L.reset();
  SamplerConfig cfg;
  cfg.beta = 1.0;
  cfg.eta = 1.0;
  cfg.steps = 10000;
  cfg.chains = 1;
  cfg.seed = 1;
  const PointSampler at_zero = [](Rng&, std::span<double> o) { o[0] = 0.0; };
  CHECK_THROWS_WITH_AS(run_gld(blow, cfg, at_zero), doctest::Contains("step"),
                       std::runtime_error);
}

TEST_CASE("stochastic gradient oracle unbiasedness") {
  // components F_i with sum F = full quadratic
  std::vector<Potential> comps;
  for (double c : {0.5, 1.0, 1.5, 2.0}) comps.push_back(catalogue("quadratic", {{"c", c}}));
  const StochasticGradOracle oracle = stochastic_grad_oracle(comps, 2);

  const Point w{1.3};
  Point full(1, 0.0), g(1);
  for (const auto& comp : comps) {
    comp.gradient_into(w, g);
    full[0] += g[0];
  }

  // batch = full set: exact gradient
  const StochasticGradOracle exact = stochastic_grad_oracle(comps, 4);
  Rng rng(3);
  exact.eval(w, g, rng);
  CHECK(g[0] == doctest::Approx(full[0]).epsilon(1e-12));

  // two identical components: zero-variance estimator
  std::vector<Potential> twins{comps[0], comps[0]};
  const StochasticGradOracle tw = stochastic_grad_oracle(twins, 1);
  double first = 0.0;
  for (int k = 0; k < 10; ++k) {
    tw.eval(w, g, rng);
    if (k == 0) first = g[0];
    CHECK(g[0] == first);
  }

  // mean over 1e5 calls within 4 standard errors of the full gradient
  double sum = 0.0, sq = 0.0;
  const std::size_t n = 100000;
  for (std::size_t k = 0; k < n; ++k) {
    oracle.eval(w, g, rng);
    sum += g[0];
    sq += g[0] * g[0];
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - full[0]) <= 4.0 * se);

  CHECK_THROWS_AS(stochastic_grad_oracle({}, 1), std::invalid_argument);
}

TEST_CASE("modified potential activates only outside the ball") {
  const Potential p = catalogue("pl_sine");
  const double beta = 2.0, gamma = 1.0, R = 3.0;
  const Potential hat = modified_potential(p, beta, gamma, R);

  // untouched inside B(0, R)
  for (double w : {0.0, 1.0, -2.5, 2.99}) {
    CHECK(hat.value(Point{w}) == p.value(Point{w}));
    CHECK(hat.gradient(Point{w})[0] == p.gradient(Point{w})[0]);
  }
  // |w| = R+1: penalty adds gamma/(2 beta)
  CHECK(hat.value(Point{R + 1.0}) ==
        doctest::Approx(p.value(Point{R + 1.0}) + gamma / (2.0 * beta)));

  // gradient continuity across |w| = R by finite differences
  for (int k = 0; k < 10; ++k) {
    const double w = R + (k - 5) * 1e-7;
    const Point fd = finite_diff_grad(hat, Point{w}, 1e-6);
    CHECK(std::abs(fd[0] - hat.gradient(Point{w})[0]) <= 1e-4);
  }

  // dissipativity constants inherited
  CHECK(hat.dissipativity->m == p.dissipativity->m);
  CHECK(hat.dissipativity->b == p.dissipativity->b);
  const auto rep = sweep_check(hat, ConditionKind::DISSIPATIVE, Box{{-12.0}, {12.0}}, 30001);
  CHECK(rep.min_margin >= -1e-9);
}

TEST_CASE("trajectory csv format") {
  const Potential p = catalogue("quadratic", {{"c", 1.0}});
  SamplerConfig cfg;
  cfg.beta = 1.0;
  cfg.steps = 3;
  cfg.chains = 2;
  cfg.seed = 9;
  const Trajectory t = run_gld(p, cfg);
  const std::string path = "/tmp/gibbslab_test_traj.csv";
  write_trajectory_csv(t, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "chain,step,coordinate,value");
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == t.chains * t.n_records * t.dim);
}

TEST_CASE("variance decay on the quadratic matches 2 beta") {
  const Potential p = catalogue("quadratic", {{"c", 1.0}});
  SamplerConfig cfg;
  cfg.beta = 4.0;
  cfg.eta = 1e-3;
  cfg.steps = 900;
  cfg.chains = 4096;
  cfg.seed = 31;
  const PointSampler wide = [](Rng& rng, std::span<double> o) {
    o[0] = 2.0 * rng.normal();  // over-dispersed against Var = 1/beta
  };
  const Trajectory traj = run_gld(p, cfg, wide);
  DecayFitOptions opts;
  opts.stationary_variance = 0.25;
  const double rate = variance_decay_rate(
      p, cfg.beta, cfg.eta, [](std::span<const double> w) { return w[0]; }, traj,
      opts);
  CHECK(rate == doctest::Approx(2.0 * cfg.beta).epsilon(0.15));

  // constant observable: variance identically zero -> error path
  CHECK_THROWS_AS(variance_decay_rate(
                      p, cfg.beta, cfg.eta,
                      [](std::span<const double>) { return 1.0; }, traj, opts),
                  std::runtime_error);
}
