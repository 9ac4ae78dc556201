#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "gibbslab/bump.hpp"
#include "gibbslab/potential.hpp"

namespace gibbslab {

// Optimizability witness: Phi with <grad Phi, grad F> >= g(F), g monotone and
// nonnegative with linear tail g(x) >= m'x - b', and the self-bounding rate
// rho with |grad Phi|, |hess Phi|_op <= rho(Phi).
struct LyapunovSpec {
  std::function<double(std::span<const double>)> phi;
  std::function<void(std::span<const double>, std::span<double>)> phi_grad;
  double m_prime = 1.0;
  double b_prime = 0.0;
  std::function<double(double)> g;
  std::function<double(double)> rho;
  double r1 = 1.0, r2 = 1.0, R = 1.0;
};

enum class CertKind { PI_PL, PI_KL, PI_GEN, LSI_PL, LSI_GEN, INIT_DIV };
const char* to_string(CertKind k);
CertKind cert_kind_from_string(const std::string& s);

// A theorem-derived bound with its input constants and intermediates.
// Recomputing from `inputs` reproduces `bound` bit-for-bit.
struct Certificate {
  CertKind kind;
  double bound = 0.0;
  double beta_threshold = 0.0;
  std::map<std::string, double> inputs;
  std::map<std::string, double> details;
};

// chi*Phi2 + (1-chi)*Phi with Phi2 = |w-w*|^2/(2 r1) + M'. Equals Phi inside
// radius R and Phi2 outside R+1.
double phi_tilde(const LyapunovSpec& spec, const BumpProfile& bp, double Mprime,
                 std::span<const double> w);

struct BallSups {
  double M_prime;   // sup of Phi over B(w*, R+1)
  double L_prime;   // sup of rho(Phi) over the same ball
  double B_bump;    // max(sup profile, sup |profile'| + 2 sup profile)
  std::size_t ball_points;
  std::size_t profile_resolution;
};
// Deterministic product-grid suprema over the ball (n >= 1e3 points) plus the
// 1e4-point profile grid backing the bump constant.
BallSups estimate_ball_sups(const LyapunovSpec& spec, const BumpProfile& bp,
                            std::size_t n);

Certificate cert_pi_pl(double lambda, double L, double l_b, double C_local,
                       double d, double beta);
Certificate cert_pi_kl(double lambda, double theta, double L, double l_b,
                       double C_local, double d, double beta);
Certificate cert_lsi_pl(double lambda, double L, double l_b, double C_local,
                        double d, double beta, double S, double sup_min_norm);
Certificate cert_general(const LyapunovSpec& spec, const Potential& p,
                         const BallSups& sups, double l_b, double C_local,
                         double d, double beta, double S,
                         std::optional<std::pair<double, double>> quad_growth);

// KL and ln(chi^2+1) bound at the Gaussian initialization
// N(0, 1/(2 beta L + gamma)): beta*L + beta*F(0) + 2 + (d/2) ln(4M^2(beta*L + gamma/2)).
// Uses the declared Hoelder constant of p; pass the modified potential and
// M-hat for the hatted variant.
Certificate init_divergence_bound(const Potential& p, double beta,
                                  double gamma_init, double M_first_moment,
                                  double d);

// Phi = F/lambda with g(x) = lambda*x: the PL special case driving the
// general certificate route. Needs pl_lambda, smoothness_L, linearizability.
LyapunovSpec pl_lyapunov_spec(const Potential& p);

// Re-derives the certificate from its recorded inputs (determinism check).
Certificate recompute_certificate(const Certificate& cert);

// kind/bound/beta_threshold/inputs/details, keys sorted, 17 significant digits
std::string certificate_to_json(const Certificate& cert);

}  // namespace gibbslab
