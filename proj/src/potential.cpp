#include "gibbslab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "gibbslab/parallel.hpp"

namespace gibbslab {

namespace {
int g_threads = 1;
}

int thread_count() { return g_threads; }
void set_thread_count(int n) { g_threads = std::max(1, n); }

const char* to_string(ConditionKind k) {
  switch (k) {
    case ConditionKind::PL: return "PL";
    case ConditionKind::KL: return "KL";
    case ConditionKind::SMOOTH_GRAD_BOUND: return "SMOOTH_GRAD_BOUND";
    case ConditionKind::QUAD_GROWTH: return "QUAD_GROWTH";
    case ConditionKind::DISSIPATIVE: return "DISSIPATIVE";
    case ConditionKind::LINEARIZABLE: return "LINEARIZABLE";
  }
  return "?";
}

ConditionKind condition_kind_from_string(const std::string& s) {
  if (s == "PL") return ConditionKind::PL;
  if (s == "KL") return ConditionKind::KL;
  if (s == "SMOOTH_GRAD_BOUND") return ConditionKind::SMOOTH_GRAD_BOUND;
  if (s == "QUAD_GROWTH") return ConditionKind::QUAD_GROWTH;
  if (s == "DISSIPATIVE") return ConditionKind::DISSIPATIVE;
  if (s == "LINEARIZABLE") return ConditionKind::LINEARIZABLE;
  throw std::invalid_argument("unknown condition kind: " + s);
}

double condition_residual(const Potential& p, ConditionKind kind,
                          std::span<const double> w) {
  thread_local Point grad_buf;
  grad_buf.resize(w.size());
  const double F = p.value(w);

  switch (kind) {
    case ConditionKind::PL: {
      if (!p.pl_lambda) throw std::invalid_argument("PL residual: pl_lambda absent");
      p.gradient_into(w, grad_buf);
      return dot(grad_buf, grad_buf) - *p.pl_lambda * F;
    }
    case ConditionKind::KL: {
      if (!p.kl_params) throw std::invalid_argument("KL residual: kl_params absent");
      p.gradient_into(w, grad_buf);
      return dot(grad_buf, grad_buf) -
             p.kl_params->lambda * std::pow(F, 1.0 + p.kl_params->theta);
    }
    case ConditionKind::SMOOTH_GRAD_BOUND: {
      if (!p.smoothness_L)
        throw std::invalid_argument("smooth-grad residual: smoothness_L absent");
      p.gradient_into(w, grad_buf);
      return 4.0 * (*p.smoothness_L) * F - dot(grad_buf, grad_buf);
    }
    case ConditionKind::QUAD_GROWTH: {
      const auto [m, b] = quadratic_growth_constants(p);
      return F - (m * dot(w, w) - b);
    }
    case ConditionKind::DISSIPATIVE: {
      if (!p.dissipativity)
        throw std::invalid_argument("dissipative residual: constants absent");
      p.gradient_into(w, grad_buf);
      return dot(w, grad_buf) - p.dissipativity->m * dot(w, w) +
             p.dissipativity->b;
    }
    case ConditionKind::LINEARIZABLE: {
      if (!p.linearizability)
        throw std::invalid_argument("linearizable residual: constants absent");
      const double r = dist(w, p.minimizer);
      if (r <= p.linearizability->R)
        throw std::domain_error("linearizable residual queried inside B(w*, R)");
      p.gradient_into(w, grad_buf);
      double inner = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i)
        inner += grad_buf[i] * (w[i] - p.minimizer[i]);
      const double m1 = inner - p.linearizability->r1 * F;
      const double m2 = F - p.linearizability->r2 * r;
      return std::min(m1, m2);
    }
  }
  throw std::logic_error("unreachable condition kind");
}

std::pair<double, double> quadratic_growth_constants(const Potential& p) {
  if (!p.pl_lambda || *p.pl_lambda <= 0.0)
    throw std::invalid_argument("quadratic_growth_constants: pl_lambda absent");
  const double lam = *p.pl_lambda;
  return {lam / 8.0, (lam / 2.0) * p.minimizer_radius * p.minimizer_radius};
}

ConditionResidualReport sweep_check(const Potential& p, ConditionKind kind,
                                    const Box& domain, std::size_t n) {
  const std::size_t dim = domain.lo.size();
  if (dim != domain.hi.size() || dim == 0 || static_cast<int>(dim) != p.dim)
    throw std::invalid_argument("sweep_check: box/potential dimension mismatch");
  if (n < 2) throw std::invalid_argument("sweep_check: need n >= 2 per axis");

  std::size_t total = 1;
  for (std::size_t a = 0; a < dim; ++a) total *= n;

  struct Partial {
    double min_margin = std::numeric_limits<double>::infinity();
    std::size_t worst = 0;
    bool any = false;
  };
  std::vector<Partial> parts;
  std::mutex mu;

  parallel_chunks(total, [&](std::size_t b, std::size_t e, int worker) {
    Partial part;
    Point w(dim);
    for (std::size_t flat = b; flat < e; ++flat) {
      std::size_t rest = flat;
      for (std::size_t a = 0; a < dim; ++a) {
        const std::size_t idx = rest % n;
        rest /= n;
        w[a] = domain.lo[a] +
               (domain.hi[a] - domain.lo[a]) * static_cast<double>(idx) /
                   static_cast<double>(n - 1);
      }
      const double m = condition_residual(p, kind, w);
      if (!part.any || m < part.min_margin) {
        part.min_margin = m;
        part.worst = flat;
        part.any = true;
      }
    }
    std::lock_guard<std::mutex> lk(mu);
    parts.resize(std::max(parts.size(), static_cast<std::size_t>(worker) + 1));
    parts[static_cast<std::size_t>(worker)] = part;
  });

  // chunk-ordered reduction, lowest flat index wins ties
  Partial best;
  for (const auto& part : parts) {
    if (!part.any) continue;
    if (!best.any || part.min_margin < best.min_margin ||
        (part.min_margin == best.min_margin && part.worst < best.worst)) {
      best = part;
    }
  }
  if (!best.any) throw std::invalid_argument("sweep_check: empty domain");

  ConditionResidualReport rep;
  rep.condition_kind = kind;
  rep.points_checked = total;
  rep.min_margin = best.min_margin;
  rep.worst_point.resize(dim);
  std::size_t rest = best.worst;
  for (std::size_t a = 0; a < dim; ++a) {
    const std::size_t idx = rest % n;
    rest /= n;
    rep.worst_point[a] = domain.lo[a] +
                         (domain.hi[a] - domain.lo[a]) *
                             static_cast<double>(idx) /
                             static_cast<double>(n - 1);
  }
  return rep;
}

Point finite_diff_grad(const Potential& p, std::span<const double> w, double step) {
  if (step <= 0.0) throw std::invalid_argument("finite_diff_grad: step must be > 0");
  Point g(w.size());
  Point wp(w.begin(), w.end());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double save = wp[i];
    wp[i] = save + step;
    const double fp = p.value(wp);
    wp[i] = save - step;
    const double fm = p.value(wp);
    wp[i] = save;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace gibbslab
