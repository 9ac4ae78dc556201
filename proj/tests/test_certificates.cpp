#include <doctest.h>

#include <cmath>

#include "gibbslab/catalogue.hpp"
#include "gibbslab/lyapunov.hpp"

using namespace gibbslab;

TEST_CASE("cert_pi_pl worked example is exact") {
  const Certificate c = cert_pi_pl(4.0, 2.0, 1.0, 0.1, 1.0, 100.0);
  CHECK(c.bound == 0.23);  // 0.02*1.5 + 0.2, exact in double arithmetic
  CHECK(c.beta_threshold == doctest::Approx(4.5));

  // beta just below the threshold is rejected with the threshold stated
  CHECK_THROWS_WITH_AS(cert_pi_pl(4.0, 2.0, 1.0, 0.1, 1.0, 4.4),
                       doctest::Contains("threshold"), std::invalid_argument);

  // C_local = 0: bound decreases monotonically toward 0 as beta grows
  double prev = std::numeric_limits<double>::infinity();
  for (double beta : {10.0, 100.0, 1000.0, 10000.0}) {
    const double b = cert_pi_pl(4.0, 2.0, 1.0, 0.0, 1.0, beta).bound;
    CHECK(b < prev);
    prev = b;
  }
  CHECK(prev <= 1e-3);
}

TEST_CASE("cert_pi_pl strictly monotone in C_local and limits to 2*C_local") {
  const double base = cert_pi_pl(4.0, 2.0, 1.0, 0.1, 1.0, 100.0).bound;
  const double more = cert_pi_pl(4.0, 2.0, 1.0, 0.2, 1.0, 100.0).bound;
  CHECK(more > base);
  const double huge_beta = cert_pi_pl(4.0, 2.0, 1.0, 0.1, 1.0, 1e12).bound;
  CHECK(huge_beta == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("cert_pi_kl worked example and threshold casework") {
  // L=6, lambda=9: max(4/L, 4L/lambda^2) = max(2/3, 24/81) = 2/3
  const Certificate c = cert_pi_kl(9.0, 1.0 / 3.0, 6.0, 1.0, 0.05, 1.0, 200.0);
  const double amp = 1.0 + 6.0 / 9.0;
  CHECK(c.details.at("d_offset") == doctest::Approx(2.0 / 3.0));
  CHECK(c.beta_threshold == doctest::Approx(2.0 * (1.0 + 2.0 / 3.0) * amp));
  CHECK(c.bound == doctest::Approx(2.0 * ((1.0 / 200.0) * amp + 0.05)));

  // theta = 0 collapses to the PL-style amplification with the KL d-offset
  const Certificate c0 = cert_pi_kl(4.0, 0.0, 2.0, 1.0, 0.1, 1.0, 100.0);
  CHECK(c0.details.at("amplification") == doctest::Approx(1.5));
  CHECK(c0.details.count("theta_endpoint_flag") == 1);
}

TEST_CASE("cert_lsi_pl chain of proof constants") {
  const double lambda = 4.0, L = 2.0, l_b = 1.0, C_local = 0.1, d = 1.0,
               beta = 100.0, S = 0.25, sup = 0.0;
  const Certificate c = cert_lsi_pl(lambda, L, l_b, C_local, d, beta, S, sup);
  const double m = lambda / 8.0;
  const double b = 0.0;
  CHECK(c.details.at("m") == m);
  CHECK(c.details.at("b") == b);
  CHECK(c.details.at("kappa") == doctest::Approx(d * L + b * lambda * (beta - 1.0)));
  CHECK(c.details.at("gamma_lyap") == doctest::Approx(m * lambda * (beta - 1.0)));
  CHECK(c.details.at("delta") ==
        doctest::Approx(1.0 / std::sqrt(m * lambda * (beta - 1.0))));
  const double C1 = (4.0 * L + 3.0) / (2.0 * m * lambda) + 1.5;
  const double C2 = (L + 2.0 * std::sqrt(m * lambda)) *
                    ((2.0 * d * L / beta + b * lambda) / (m * lambda) + S) * beta;
  CHECK(c.details.at("C1") == doctest::Approx(C1));
  CHECK(c.details.at("C2") == doctest::Approx(C2));
  const double pi = cert_pi_pl(lambda, L, l_b, C_local, d, beta).bound;
  CHECK(c.bound == doctest::Approx(C1 + 2.0 * C2 * pi));
  CHECK(c.details.at("K") == L);

  // bound dominates the embedded PI bound
  CHECK(c.bound >= c.details.at("pi_bound"));

  // degenerate S = 0, sup = 0 still finite
  const Certificate c0 = cert_lsi_pl(lambda, L, l_b, C_local, d, beta, 0.0, 0.0);
  CHECK(std::isfinite(c0.bound));
  CHECK(c0.bound >= 0.0);
}

TEST_CASE("cert_general C' arithmetic and PL cross-check") {
  // C' with R=1, M'=1, r1=r2=m'=1, L~ forced to 1 by hand inputs:
  // max(8*5, 2, 32) = 40
  {
    Certificate c;
    std::map<std::string, double> in = {
        {"M_prime", 1.0}, {"L_prime", 0.0}, {"B_bump", 0.0}, {"m_prime", 1.0},
        {"b_prime", 0.5}, {"g_lb", 1.0},    {"r1", 1.0},     {"r2", 1.0},
        {"R", 1.0},       {"l_b", 1.0},     {"C_local", 0.0}, {"d", 1.0},
        {"beta", 1e6},    {"S", 1.0}};
    // recompute path exercises the pure-arithmetic core directly
    Certificate seed;
    seed.kind = CertKind::PI_GEN;
    seed.inputs = in;
    c = recompute_certificate(seed);
    // with B=0, L'=0: shell = 0 + (1/r1+0) = 1; L~ = max(1, max(0,1), 1, 1) = 1
    CHECK(c.details.at("L_tilde") == doctest::Approx(1.0));
    CHECK(c.details.at("C_prime") == doctest::Approx(40.0));
  }

  // Phi = F/lambda for quadratic(2): finite PI_GEN bound whose structure
  // matches cert_pi_pl with L~ in place of L
  const Potential p = catalogue("quadratic", {{"c", 2.0}});
  const LyapunovSpec spec = pl_lyapunov_spec(p);
  const BumpProfile bp{p.minimizer, spec.R};
  const BallSups sups = estimate_ball_sups(spec, bp, 20000);
  const double l_b = 1.0, C_local = 0.05, d = 1.0, S = 0.3;
  const double beta = 1e7;
  const Certificate cg =
      cert_general(spec, p, sups, l_b, C_local, d, beta, S, std::nullopt);
  CHECK(std::isfinite(cg.bound));
  const double ltilde = cg.details.at("L_tilde");
  // g(l_b) = lambda*l_b: the general amplification is 1 + L~/(lambda l_b)
  CHECK(cg.details.at("amplification") ==
        doctest::Approx(1.0 + ltilde / (4.0 * l_b)));
  const double pl_like = (2.0 / beta) * (1.0 + ltilde / (4.0 * l_b)) + 2.0 * C_local;
  CHECK(cg.bound == doctest::Approx(pl_like));

  // LSI branch: gates and recorded intermediates
  const auto qg = quadratic_growth_constants(p);
  const Certificate cl =
      cert_general(spec, p, sups, l_b, C_local, d, beta, S, qg);
  CHECK(cl.details.count("lsi_bound") == 1);
  CHECK(cl.details.at("gamma_lyap") == doctest::Approx(0.5 * beta * qg.first));
  CHECK(cl.details.at("lsi_bound") >= 0.0);

  // g(l_b) = 0 rejected
  LyapunovSpec bad = spec;
  bad.g = [](double) { return 0.0; };
  CHECK_THROWS_AS(
      cert_general(bad, p, sups, l_b, C_local, d, beta, S, std::nullopt),
      std::invalid_argument);
}

TEST_CASE("init divergence bound worked example") {
  const Potential p = catalogue("quadratic", {{"c", 1.0}});
  const Certificate c = init_divergence_bound(p, 1.0, 1.0, 1.0, 1.0);
  CHECK(c.bound == doctest::Approx(1.0 + 0.0 + 2.0 + 0.5 * std::log(4.0 * 1.5)));

  // increasing in beta for fixed other inputs
  double prev = 0.0;
  for (double beta : {1.0, 2.0, 5.0, 10.0, 100.0}) {
    const double b = init_divergence_bound(p, beta, 1.0, 1.0, 1.0).bound;
    CHECK(b > prev);
    prev = b;
  }

  // potential without Hoelder declaration rejected
  const Potential dw = catalogue("double_well");
  CHECK_THROWS_AS(init_divergence_bound(dw, 1.0, 1.0, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("certificates recompute bit-identically and serialize deterministically") {
  std::vector<Certificate> certs;
  certs.push_back(cert_pi_pl(4.0, 2.0, 1.0, 0.1, 1.0, 100.0));
  certs.push_back(cert_pi_kl(9.0, 1.0 / 3.0, 6.0, 1.0, 0.05, 1.0, 200.0));
  certs.push_back(cert_lsi_pl(4.0, 2.0, 1.0, 0.1, 1.0, 100.0, 0.25, 0.0));
  const Potential p = catalogue("quadratic", {{"c", 1.0}});
  certs.push_back(init_divergence_bound(p, 10.0, 1.0, 0.3, 1.0));
  const LyapunovSpec spec = pl_lyapunov_spec(p);
  const BumpProfile bp{p.minimizer, spec.R};
  const BallSups sups = estimate_ball_sups(spec, bp, 5000);
  certs.push_back(cert_general(spec, p, sups, 1.0, 0.05, 1.0, 1e7, 0.3,
                               quadratic_growth_constants(p)));

  for (const auto& c : certs) {
    const Certificate r = recompute_certificate(c);
    CHECK(r.bound == c.bound);  // bit-identical
    CHECK(r.beta_threshold == c.beta_threshold);
    for (const auto& [k, v] : c.details) CHECK(r.details.at(k) == v);
    CHECK(certificate_to_json(r) == certificate_to_json(c));
    CHECK(c.bound >= 0.0);
  }

  // JSON shape: sorted keys, kind string present
  const std::string js = certificate_to_json(certs[0]);
  CHECK(js.find("\"kind\":\"PI_PL\"") != std::string::npos);
  CHECK(js.find("\"bound\":") < js.find("\"details\":"));
  CHECK(js.find("\"details\":") < js.find("\"inputs\":"));
}
