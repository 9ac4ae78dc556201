#include "gibbslab/lyapunov.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gibbslab/format.hpp"

namespace gibbslab {

const char* to_string(CertKind k) {
  switch (k) {
    case CertKind::PI_PL: return "PI_PL";
    case CertKind::PI_KL: return "PI_KL";
    case CertKind::PI_GEN: return "PI_GEN";
    case CertKind::LSI_PL: return "LSI_PL";
    case CertKind::LSI_GEN: return "LSI_GEN";
    case CertKind::INIT_DIV: return "INIT_DIV";
  }
  return "?";
}

CertKind cert_kind_from_string(const std::string& s) {
  if (s == "PI_PL") return CertKind::PI_PL;
  if (s == "PI_KL") return CertKind::PI_KL;
  if (s == "PI_GEN") return CertKind::PI_GEN;
  if (s == "LSI_PL") return CertKind::LSI_PL;
  if (s == "LSI_GEN") return CertKind::LSI_GEN;
  if (s == "INIT_DIV") return CertKind::INIT_DIV;
  throw std::invalid_argument("unknown certificate kind: " + s);
}

double phi_tilde(const LyapunovSpec& spec, const BumpProfile& bp, double Mprime,
                 std::span<const double> w) {
  const double chi = bump_eval(bp, w);
  double q = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = w[i] - bp.center[i];
    q += d * d;
  }
  const double phi2 = q / (2.0 * spec.r1) + Mprime;
  if (chi == 0.0) return spec.phi(w);
  if (chi == 1.0) return phi2;
  return chi * phi2 + (1.0 - chi) * spec.phi(w);
}

BallSups estimate_ball_sups(const LyapunovSpec& spec, const BumpProfile& bp,
                            std::size_t n) {
  if (n < 1000)
    throw std::invalid_argument("estimate_ball_sups: need >= 1e3 grid points");
  const std::size_t dim = bp.center.size();
  const double radius = bp.R + 1.0;
  std::size_t k = static_cast<std::size_t>(
      std::ceil(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(dim))));
  k = std::max<std::size_t>(k, 2);

  BallSups sups{};
  sups.M_prime = -std::numeric_limits<double>::infinity();
  sups.L_prime = -std::numeric_limits<double>::infinity();

  std::size_t total = 1;
  for (std::size_t a = 0; a < dim; ++a) total *= k;
  Point w(dim);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double q = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
      const std::size_t idx = rest % k;
      rest /= k;
      w[a] = bp.center[a] - radius +
             2.0 * radius * static_cast<double>(idx) / static_cast<double>(k - 1);
      const double d = w[a] - bp.center[a];
      q += d * d;
    }
    if (q > radius * radius) continue;
    ++sups.ball_points;
    const double phi = spec.phi(w);
    if (!std::isfinite(phi))
      throw std::runtime_error("estimate_ball_sups: non-finite Phi on the ball");
    sups.M_prime = std::max(sups.M_prime, phi);
    sups.L_prime = std::max(sups.L_prime, spec.rho(phi));
  }

  sups.profile_resolution = 10000;
  const double step = 1.0 / static_cast<double>(sups.profile_resolution);
  double sup_q = 0.0, sup_dq = 0.0, prev = 0.0, cur = 0.0;
  for (std::size_t j = 0; j <= sups.profile_resolution; ++j) {
    const double x = std::min(1.0 - 0.5 * step, std::max(0.5 * step, step * static_cast<double>(j)));
    cur = bump_profile_deriv(x);
    sup_q = std::max(sup_q, cur);
    if (j > 0) sup_dq = std::max(sup_dq, std::abs(cur - prev) / step);
    prev = cur;
  }
  sups.B_bump = std::max(sup_q, sup_dq + 2.0 * sup_q);
  return sups;
}

namespace {

void record(Certificate& c, const char* key, double v) { c.details[key] = v; }

Certificate finish(Certificate c) {
  if (!(c.bound >= 0.0) || !std::isfinite(c.bound))
    throw std::runtime_error(std::string("certificate ") + to_string(c.kind) +
                             ": non-finite or negative bound " + format17(c.bound));
  return c;
}

}  // namespace

Certificate cert_pi_pl(double lambda, double L, double l_b, double C_local,
                       double d, double beta) {
  if (lambda <= 0.0 || L <= 0.0 || l_b <= 0.0 || d <= 0.0 || beta <= 0.0 ||
      C_local < 0.0)
    throw std::invalid_argument("cert_pi_pl: inputs must be positive (C_local >= 0)");
  Certificate c;
  c.kind = CertKind::PI_PL;
  c.inputs = {{"lambda", lambda}, {"L", L},     {"l_b", l_b},
              {"C_local", C_local}, {"d", d},   {"beta", beta}};
  const double amp = 1.0 + L / (lambda * l_b);
  c.beta_threshold = 2.0 * (d + 2.0 / lambda) * amp;
  if (beta < c.beta_threshold)
    throw std::invalid_argument("cert_pi_pl: beta " + format17(beta) +
                                " below threshold " + format17(c.beta_threshold));
  c.bound = (2.0 / beta) * amp + 2.0 * C_local;
  record(c, "amplification", amp);
  return finish(c);
}

Certificate cert_pi_kl(double lambda, double theta, double L, double l_b,
                       double C_local, double d, double beta) {
  if (lambda <= 0.0 || L <= 0.0 || l_b <= 0.0 || d <= 0.0 || beta <= 0.0 ||
      C_local < 0.0)
    throw std::invalid_argument("cert_pi_kl: inputs must be positive (C_local >= 0)");
  if (theta < 0.0 || theta > 1.0)
    throw std::invalid_argument("cert_pi_kl: theta must lie in [0,1]");
  Certificate c;
  c.kind = CertKind::PI_KL;
  c.inputs = {{"lambda", lambda}, {"theta", theta}, {"L", L},
              {"l_b", l_b},       {"C_local", C_local}, {"d", d},
              {"beta", beta}};
  const double amp = 1.0 + L / (lambda * std::pow(l_b, 1.0 + theta));
  const double offset = std::max(4.0 / L, 4.0 * L / (lambda * lambda));
  c.beta_threshold = 2.0 * (d + offset) * amp;
  if (beta < c.beta_threshold)
    throw std::invalid_argument("cert_pi_kl: beta " + format17(beta) +
                                " below threshold " + format17(c.beta_threshold));
  c.bound = 2.0 * ((1.0 / beta) * amp + C_local);
  record(c, "amplification", amp);
  record(c, "d_offset", offset);
  if (theta == 0.0 || theta == 1.0) record(c, "theta_endpoint_flag", 1.0);
  return finish(c);
}

Certificate cert_lsi_pl(double lambda, double L, double l_b, double C_local,
                        double d, double beta, double S, double sup_min_norm) {
  if (S < 0.0 || sup_min_norm < 0.0)
    throw std::invalid_argument("cert_lsi_pl: S and sup_min_norm must be >= 0");
  Certificate pi = cert_pi_pl(lambda, L, l_b, C_local, d, beta);
  Certificate c;
  c.kind = CertKind::LSI_PL;
  c.inputs = pi.inputs;
  c.inputs["S"] = S;
  c.inputs["sup_min_norm"] = sup_min_norm;
  c.beta_threshold = std::max(2.0, pi.beta_threshold);
  if (beta < c.beta_threshold)
    throw std::invalid_argument("cert_lsi_pl: beta below threshold " +
                                format17(c.beta_threshold));

  const double m = lambda / 8.0;
  const double b = 0.5 * lambda * sup_min_norm * sup_min_norm;
  const double kappa = d * L + b * lambda * (beta - 1.0);
  const double gamma_lyap = m * lambda * (beta - 1.0);
  const double delta = 1.0 / std::sqrt(gamma_lyap);
  const double C1 = (4.0 * L + 3.0) / (2.0 * m * lambda) + 1.5;
  const double C2 = (L + 2.0 * std::sqrt(m * lambda)) *
                    ((2.0 * d * L / beta + b * lambda) / (m * lambda) + S) * beta;
  c.bound = C1 + 2.0 * C2 * pi.bound;
  record(c, "m", m);
  record(c, "b", b);
  record(c, "kappa", kappa);
  record(c, "gamma_lyap", gamma_lyap);
  record(c, "delta", delta);
  record(c, "C1", C1);
  record(c, "C2", C2);
  record(c, "pi_bound", pi.bound);
  record(c, "K", L);
  return finish(c);
}

namespace {

Certificate cert_general_core(std::map<std::string, double> in) {
  const double Mp = in.at("M_prime"), Lp = in.at("L_prime"), B = in.at("B_bump");
  const double mprime = in.at("m_prime"), bprime = in.at("b_prime");
  const double g_lb = in.at("g_lb");
  const double r1 = in.at("r1"), r2 = in.at("r2"), R = in.at("R");
  const double l_b = in.at("l_b"), C_local = in.at("C_local");
  const double d = in.at("d"), beta = in.at("beta"), S = in.at("S");
  if (g_lb <= 0.0) throw std::invalid_argument("cert_general: g(l_b) must be > 0");
  if (r1 <= 0.0 || r2 <= 0.0 || R < 1.0 || mprime <= 0.0 || bprime < 0.0)
    throw std::invalid_argument("cert_general: bad linearizability/tail constants");

  Certificate c;
  c.kind = CertKind::PI_GEN;
  c.inputs = std::move(in);

  // smoothness of the spliced Lyapunov function
  const double Rp1 = R + 1.0;
  const double shell = Lp + B * (Rp1 * Rp1 / (2.0 * r1) + 2.0 * Mp) +
                       (1.0 / r1 + Lp) + 2.0 * B * (Lp + Rp1 / r1);
  const double ltilde =
      std::max({shell, std::max(Lp, 1.0 / r1), 2.0 * bprime, 1.0});
  const double cprime =
      std::max({8.0 * (R * R + 4.0 * Mp * r1) / (r1 * ltilde),
                2.0 * ltilde / (r1 * r2 * r2 * mprime * mprime),
                32.0 * Mp / ltilde});
  const double amp = 1.0 + ltilde / g_lb;
  c.beta_threshold = 2.0 * amp * (d + cprime);
  if (beta < c.beta_threshold)
    throw std::invalid_argument("cert_general: beta " + format17(beta) +
                                " below PI threshold " + format17(c.beta_threshold));
  c.bound = 2.0 * C_local + (2.0 / beta) * amp;
  record(c, "L_tilde", ltilde);
  record(c, "hessian_shell_bound", shell);
  record(c, "C_prime", cprime);
  record(c, "amplification", amp);

  if (c.inputs.count("qg_m")) {
    const double m = c.inputs.at("qg_m"), b = c.inputs.at("qg_b");
    const double L = c.inputs.at("L"), wstar = c.inputs.at("w_star_norm");
    if (m <= 0.0 || b < 0.0)
      throw std::invalid_argument("cert_general: quadratic growth needs m > 0, b >= 0");
    const double lsi_gate = 4.0 / (r1 * r1 * m);
    if (beta < lsi_gate || beta < 2.0)
      throw std::invalid_argument("cert_general: beta below LSI gate " +
                                  format17(std::max(lsi_gate, 2.0)));
    const double kappa = d * ltilde + Lp + (2.0 / (r1 * r1)) * wstar * wstar +
                         beta * b + 0.5 * beta * m * Rp1 * Rp1;
    const double gamma_lyap = 0.5 * beta * m;
    const double delta = 1.0 / std::sqrt(gamma_lyap);
    const double C1 = (4.0 * L + 3.0) / (2.0 * m) + 1.5;
    const double bracket = Rp1 * Rp1 + 2.0 * b / m +
                           (4.0 / (beta * m * r1 * r1)) * wstar * wstar +
                           2.0 * (d * ltilde + Lp) / (beta * m) + S;
    const double C2 = 2.0 * (std::sqrt(0.5 * beta * m) + 0.5 * beta * L) * bracket;
    const double lsi = C1 + 2.0 * (1.0 + (L + std::sqrt(m)) * bracket) *
                                ((1.0 + ltilde / l_b) + beta * C_local);
    record(c, "kappa", kappa);
    record(c, "gamma_lyap", gamma_lyap);
    record(c, "delta", delta);
    record(c, "C1", C1);
    record(c, "C2", C2);
    record(c, "lsi_gate", std::max(lsi_gate, 2.0));
    record(c, "lsi_bound", lsi);
    record(c, "K", L);
  }
  return finish(c);
}

}  // namespace

Certificate cert_general(const LyapunovSpec& spec, const Potential& p,
                         const BallSups& sups, double l_b, double C_local,
                         double d, double beta, double S,
                         std::optional<std::pair<double, double>> quad_growth) {
  std::map<std::string, double> in = {
      {"M_prime", sups.M_prime}, {"L_prime", sups.L_prime},
      {"B_bump", sups.B_bump},   {"m_prime", spec.m_prime},
      {"b_prime", spec.b_prime}, {"g_lb", spec.g(l_b)},
      {"r1", spec.r1},           {"r2", spec.r2},
      {"R", spec.R},             {"l_b", l_b},
      {"C_local", C_local},      {"d", d},
      {"beta", beta},            {"S", S}};
  if (quad_growth) {
    if (!p.smoothness_L)
      throw std::invalid_argument(
          "cert_general: LSI branch needs smoothness_L (condition K = L)");
    in["qg_m"] = quad_growth->first;
    in["qg_b"] = quad_growth->second;
    in["L"] = *p.smoothness_L;
    in["w_star_norm"] = norm(p.minimizer);
  }
  return cert_general_core(std::move(in));
}

Certificate init_divergence_bound(const Potential& p, double beta,
                                  double gamma_init, double M_first_moment,
                                  double d) {
  if (!p.holder)
    throw std::invalid_argument(
        "init_divergence_bound: potential must declare Hoelder constants");
  if (M_first_moment <= 0.0)
    throw std::invalid_argument("init_divergence_bound: M must be > 0");
  if (!(gamma_init > 0.0 && gamma_init <= 1.0))
    throw std::invalid_argument("init_divergence_bound: gamma must lie in (0,1]");
  const Point origin(static_cast<std::size_t>(p.dim), 0.0);
  const double F0 = p.value(origin);

  Certificate c;
  c.kind = CertKind::INIT_DIV;
  c.inputs = {{"L_hold", p.holder->L_hold}, {"s", p.holder->s},
              {"F0", F0},                   {"beta", beta},
              {"gamma", gamma_init},        {"M", M_first_moment},
              {"d", d}};
  const double L = p.holder->L_hold;
  c.bound = beta * L + beta * F0 + 2.0 +
            0.5 * d * std::log(4.0 * M_first_moment * M_first_moment *
                               (beta * L + 0.5 * gamma_init));
  c.beta_threshold = 0.0;
  record(c, "init_variance", 1.0 / (2.0 * beta * L + gamma_init));
  return finish(c);
}

LyapunovSpec pl_lyapunov_spec(const Potential& p) {
  if (!p.pl_lambda || !p.smoothness_L || !p.linearizability)
    throw std::invalid_argument(
        "pl_lyapunov_spec: needs pl_lambda, smoothness_L and linearizability");
  const double lam = *p.pl_lambda;
  const double L = *p.smoothness_L;
  LyapunovSpec spec;
  const auto value = p.value;
  const auto grad = p.gradient_into;
  spec.phi = [value, lam](std::span<const double> w) { return value(w) / lam; };
  spec.phi_grad = [grad, lam](std::span<const double> w, std::span<double> g) {
    grad(w, g);
    for (auto& x : g) x /= lam;
  };
  spec.m_prime = lam;
  spec.b_prime = 0.0;
  spec.g = [lam](double x) { return lam * x; };
  // |grad Phi| <= sqrt(4 L F)/lam = sqrt(4 L Phi/lam); |hess Phi| <= L/lam
  spec.rho = [L, lam](double t) {
    return std::max(L / lam, std::sqrt(4.0 * L * std::max(0.0, t) / lam));
  };
  spec.r1 = p.linearizability->r1;
  spec.r2 = p.linearizability->r2;
  spec.R = std::max(1.0, p.linearizability->R);
  return spec;
}

Certificate recompute_certificate(const Certificate& cert) {
  const auto& in = cert.inputs;
  switch (cert.kind) {
    case CertKind::PI_PL:
      return cert_pi_pl(in.at("lambda"), in.at("L"), in.at("l_b"),
                        in.at("C_local"), in.at("d"), in.at("beta"));
    case CertKind::PI_KL:
      return cert_pi_kl(in.at("lambda"), in.at("theta"), in.at("L"),
                        in.at("l_b"), in.at("C_local"), in.at("d"),
                        in.at("beta"));
    case CertKind::LSI_PL:
      return cert_lsi_pl(in.at("lambda"), in.at("L"), in.at("l_b"),
                         in.at("C_local"), in.at("d"), in.at("beta"),
                         in.at("S"), in.at("sup_min_norm"));
    case CertKind::PI_GEN:
    case CertKind::LSI_GEN:
      return cert_general_core(in);
    case CertKind::INIT_DIV: {
      Certificate c;
      c.kind = CertKind::INIT_DIV;
      c.inputs = in;
      const double L = in.at("L_hold");
      c.bound = in.at("beta") * L + in.at("beta") * in.at("F0") + 2.0 +
                0.5 * in.at("d") *
                    std::log(4.0 * in.at("M") * in.at("M") *
                             (in.at("beta") * L + 0.5 * in.at("gamma")));
      c.beta_threshold = 0.0;
      record(c, "init_variance",
             1.0 / (2.0 * in.at("beta") * L + in.at("gamma")));
      return finish(c);
    }
  }
  throw std::logic_error("unreachable certificate kind");
}

std::string certificate_to_json(const Certificate& cert) {
  std::ostringstream out;
  auto emit_map = [&](const std::map<std::string, double>& m) {
    out << '{';
    bool first = true;
    for (const auto& [k, v] : m) {
      if (!first) out << ',';
      first = false;
      out << '"' << json_escape(k) << "\":" << format17(v);
    }
    out << '}';
  };
  out << "{\"beta_threshold\":" << format17(cert.beta_threshold)
      << ",\"bound\":" << format17(cert.bound) << ",\"details\":";
  emit_map(cert.details);
  out << ",\"inputs\":";
  emit_map(cert.inputs);
  out << ",\"kind\":\"" << to_string(cert.kind) << "\"}";
  return out.str();
}

}  // namespace gibbslab
