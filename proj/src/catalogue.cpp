#include "gibbslab/catalogue.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace gibbslab {

namespace {

void check_params(const std::string& family, const ParamMap& params,
                  const std::set<std::string>& allowed) {
  for (const auto& [k, v] : params) {
    if (!allowed.count(k))
      throw std::invalid_argument("catalogue " + family + ": unknown parameter '" + k + "'");
  }
}

double get_or(const ParamMap& params, const std::string& key, double dflt) {
  auto it = params.find(key);
  return it == params.end() ? dflt : it->second;
}

Potential make_quadratic(const ParamMap& params) {
  check_params("quadratic", params, {"c", "dim"});
  const double c = get_or(params, "c", 1.0);
  const int dim = static_cast<int>(get_or(params, "dim", 1.0));
  if (c <= 0.0) throw std::invalid_argument("catalogue quadratic: c must be > 0");
  if (dim < 1) throw std::invalid_argument("catalogue quadratic: dim must be >= 1");

  Potential p;
  p.name = "quadratic";
  p.dim = dim;
  p.value = [c](std::span<const double> w) { return 0.5 * c * dot(w, w); };
  p.gradient_into = [c](std::span<const double> w, std::span<double> g) {
    for (std::size_t i = 0; i < w.size(); ++i) g[i] = c * w[i];
  };
  p.smoothness_L = c;
  p.pl_lambda = 2.0 * c;  // |grad F|^2 = 2c F identically
  p.holder = Potential::Holder{c, 1.0};
  p.dissipativity = Potential::Dissipativity{c, 0.0};
  p.linearizability = Potential::Linearizability{2.0, 0.5 * c, 1.0};
  p.minimizer.assign(static_cast<std::size_t>(dim), 0.0);
  p.minimizer_radius = 0.0;
  p.sublevel_radius = [c](double l) { return std::sqrt(2.0 * std::max(0.0, l) / c); };
  return p;
}

Potential make_pl_sine(const ParamMap& params) {
  check_params("pl_sine", params, {});
  Potential p;
  p.name = "pl_sine";
  p.dim = 1;
  p.value = [](std::span<const double> w) {
    const double s = std::sin(w[0]);
    return w[0] * w[0] + 3.0 * s * s;
  };
  p.gradient_into = [](std::span<const double> w, std::span<double> g) {
    g[0] = 2.0 * w[0] + 3.0 * std::sin(2.0 * w[0]);
  };
  p.smoothness_L = 8.0;  // |F''| = |2 + 6 cos 2w| <= 8
  // Validated against the grid-minimization oracle over [-20,20]\{0}
  // (1e6 points); the empirical PL-ratio minimum is ~0.351, so 1/16 sits
  // below the 0.95x safety line. See tests/test_potentials.cpp.
  p.pl_lambda = 1.0 / 16.0;
  p.holder = Potential::Holder{4.0, 1.0};  // F(w) <= w^2 + 3w^2
  p.dissipativity = Potential::Dissipativity{1.0, 2.25};
  p.linearizability = Potential::Linearizability{0.75, 3.0, 3.0};
  p.minimizer = {0.0};
  p.minimizer_radius = 0.0;
  p.sublevel_radius = [](double l) { return std::sqrt(std::max(0.0, l)); };
  return p;
}

Potential make_kl_power(const ParamMap& params) {
  check_params("kl_power", params, {"theta", "window"});
  const double theta = get_or(params, "theta", 0.5);
  const double W = get_or(params, "window", 10.0);
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument(
        "catalogue kl_power: theta must lie strictly in (0,1); the endpoint "
        "cases are not accepted");
  if (W <= 0.0) throw std::invalid_argument("catalogue kl_power: window must be > 0");
  const double pexp = 2.0 / (1.0 - theta);

  Potential p;
  p.name = "kl_power";
  p.dim = 1;
  p.value = [pexp](std::span<const double> w) {
    return std::pow(std::abs(w[0]), pexp);
  };
  p.gradient_into = [pexp](std::span<const double> w, std::span<double> g) {
    const double a = std::abs(w[0]);
    g[0] = a == 0.0 ? 0.0
                    : pexp * std::pow(a, pexp - 1.0) * (w[0] > 0.0 ? 1.0 : -1.0);
  };
  // second derivative p(p-1)|w|^{p-2} is unbounded; declared on [-W, W] only
  p.smoothness_L = pexp * (pexp - 1.0) * std::pow(W, pexp - 2.0);
  p.smoothness_window = W;
  p.kl_params = Potential::KlParams{pexp * pexp, theta};
  p.dissipativity = Potential::Dissipativity{pexp, pexp};
  p.linearizability = Potential::Linearizability{1.0, 1.0, 1.0};
  p.minimizer = {0.0};
  p.minimizer_radius = 0.0;
  p.sublevel_radius = [pexp](double l) {
    return std::pow(std::max(0.0, l), 1.0 / pexp);
  };
  return p;
}

Potential make_double_well(const ParamMap& params) {
  check_params("double_well", params, {"window"});
  const double W = get_or(params, "window", 2.0);
  if (W < 1.0) throw std::invalid_argument("catalogue double_well: window must be >= 1");

  Potential p;
  p.name = "double_well";
  p.dim = 1;
  p.value = [](std::span<const double> w) {
    const double t = w[0] * w[0] - 1.0;
    return t * t;
  };
  p.gradient_into = [](std::span<const double> w, std::span<double> g) {
    g[0] = 4.0 * w[0] * (w[0] * w[0] - 1.0);
  };
  p.smoothness_L = 12.0 * W * W - 4.0;
  p.smoothness_window = W;
  // no pl_lambda / kl_params: the stationary maximum at 0 violates both
  p.dissipativity = Potential::Dissipativity{1.0, 25.0 / 16.0};
  p.minimizer = {1.0};
  p.minimizer_radius = 1.0;  // W* = {-1, +1}
  p.sublevel_radius = [](double l) {
    l = std::max(0.0, l);
    if (l <= 1.0) return 1.0 - std::sqrt(1.0 - std::sqrt(l));
    return std::max(1.0, std::sqrt(1.0 + std::sqrt(l)) - 1.0);
  };
  return p;
}

Potential make_dissipative_quartic(const ParamMap& params) {
  check_params("dissipative_quartic", params, {"window"});
  const double W = get_or(params, "window", 2.0);
  if (W < 1.0)
    throw std::invalid_argument("catalogue dissipative_quartic: window must be >= 1");

  Potential p;
  p.name = "dissipative_quartic";
  p.dim = 1;
  // w^4/4 - w^2/2 + 1/4 written as (w^2-1)^2/4 so the minimum is exactly 0
  p.value = [](std::span<const double> w) {
    const double t = w[0] * w[0] - 1.0;
    return 0.25 * t * t;
  };
  p.gradient_into = [](std::span<const double> w, std::span<double> g) {
    g[0] = w[0] * (w[0] * w[0] - 1.0);
  };
  p.smoothness_L = 3.0 * W * W - 1.0;
  p.smoothness_window = W;
  p.dissipativity = Potential::Dissipativity{0.5, 9.0 / 16.0};
  p.minimizer = {1.0};
  p.minimizer_radius = 1.0;
  p.sublevel_radius = [](double l) {
    const double s = 2.0 * std::sqrt(std::max(0.0, l));
    if (s <= 1.0) return 1.0 - std::sqrt(1.0 - s);
    return std::max(1.0, std::sqrt(1.0 + s) - 1.0);
  };
  return p;
}

}  // namespace

Potential catalogue(const std::string& name, const ParamMap& params) {
  if (name == "quadratic") return make_quadratic(params);
  if (name == "pl_sine") return make_pl_sine(params);
  if (name == "kl_power") return make_kl_power(params);
  if (name == "double_well") return make_double_well(params);
  if (name == "dissipative_quartic") return make_dissipative_quartic(params);
  throw std::invalid_argument("catalogue: unknown potential '" + name + "'");
}

std::vector<std::string> catalogue_names() {
  return {"quadratic", "pl_sine", "kl_power", "double_well", "dissipative_quartic"};
}

}  // namespace gibbslab
