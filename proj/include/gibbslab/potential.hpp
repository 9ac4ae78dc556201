#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gibbslab/vec.hpp"

namespace gibbslab {

// A differentiable energy F with its declared landscape constants. F is
// shifted so inf F = 0 and F(minimizer) = 0. Immutable after construction;
// safe to evaluate concurrently.
struct Potential {
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradFn = std::function<void(std::span<const double>, std::span<double>)>;

  std::string name;
  int dim = 1;
  ValueFn value;
  GradFn gradient_into;  // writes ∇F(w) into a caller-owned buffer

  std::optional<double> smoothness_L;       // operator-norm bound on the Hessian
  std::optional<double> smoothness_window;  // half-width of the validity window, if not global
  struct Holder {
    double L_hold;
    double s;  // exponent in (0,1]
  };
  std::optional<Holder> holder;
  std::optional<double> pl_lambda;
  struct KlParams {
    double lambda;
    double theta;
  };
  std::optional<KlParams> kl_params;
  struct Dissipativity {
    double m;
    double b;  // <w, grad F(w)> >= m|w|^2 - b
  };
  std::optional<Dissipativity> dissipativity;
  struct Linearizability {
    double r1;
    double r2;
    double R;  // valid outside B(minimizer, R), R >= 1
  };
  std::optional<Linearizability> linearizability;

  Point minimizer;                 // designated w* with F(w*) = 0
  double minimizer_radius = 0.0;   // sup over W* of |w'|
  std::function<double(double)> sublevel_radius;  // l -> r(l), {F<=l} in B(W*, r(l))

  Point gradient(std::span<const double> w) const {
    Point g(w.size());
    gradient_into(w, g);
    return g;
  }
};

enum class ConditionKind {
  PL,
  KL,
  SMOOTH_GRAD_BOUND,
  QUAD_GROWTH,
  DISSIPATIVE,
  LINEARIZABLE,
};

const char* to_string(ConditionKind k);
ConditionKind condition_kind_from_string(const std::string& s);

struct ConditionResidualReport {
  ConditionKind condition_kind;
  std::size_t points_checked = 0;
  double min_margin = 0.0;
  Point worst_point;
};

// Axis-aligned evaluation box for grid sweeps.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

// Left-minus-right margin of the inequality named by `kind` at w.
// Nonnegative means the condition holds there.
double condition_residual(const Potential& p, ConditionKind kind,
                          std::span<const double> w);

// m = lambda/8, b = (lambda/2) * minimizer_radius^2
std::pair<double, double> quadratic_growth_constants(const Potential& p);

// Uniform grid with endpoints included, n points per axis; ties in
// worst_point broken by lowest flat index. Deterministic for any thread count.
ConditionResidualReport sweep_check(const Potential& p, ConditionKind kind,
                                    const Box& domain, std::size_t n);

// Central differences, componentwise (F(w+h e_i) - F(w-h e_i)) / (2h).
Point finite_diff_grad(const Potential& p, std::span<const double> w, double step);

}  // namespace gibbslab
