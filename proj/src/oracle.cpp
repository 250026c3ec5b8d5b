#include "apig/oracle.hpp"

#include <cmath>
#include <random>

namespace apig {

namespace {

// FNV-1a over raw bytes; used to derive deterministic per-call RNG seeds.
std::uint64_t hash_bytes(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t call_seed(std::uint64_t base, const Vec& x, int iteration, double lambda) {
  std::uint64_t h = 14695981039346656037ULL ^ base;
  h = hash_bytes(&iteration, sizeof(iteration), h);
  h = hash_bytes(&lambda, sizeof(lambda), h);
  h = hash_bytes(x.data(), sizeof(double) * static_cast<std::size_t>(x.size()), h);
  return h;
}

Vec random_unit_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec u(n);
  double norm = 0.0;
  do {
    for (Index j = 0; j < n; ++j) u[j] = normal(rng);
    norm = u.norm();
  } while (norm < 1e-12);
  return u / norm;
}

}  // namespace

ErrorBudget ErrorBudget::checked(ErrorSequence eta_g, double a, double b, ErrorSequence eta_f,
                                 double c, double theta) {
  require(eta_g.scale >= 0.0 && eta_f.scale >= 0.0, "error sequences must be nonnegative");
  require(a >= 0.0 && a < 1.0, "budget requires a in [0, 1)");
  require(b >= 0.0, "budget requires b >= 0");
  require(theta > 0.0 && theta < 1.0, "budget requires theta in (0, 1)");
  require(c >= 0.0 && c <= theta / 4.0, "budget requires c in [0, theta/4]");
  ErrorBudget budget;
  budget.eta_g = eta_g;
  budget.a = a;
  budget.b = b;
  budget.eta_f = eta_f;
  budget.c = c;
  return budget;
}

bool check_gradient_condition(const Vec& err, const ErrorBudget& budget, int i, double lambda,
                              double displacement) {
  require(lambda > 0.0, "gradient condition requires lambda > 0");
  require(displacement >= 0.0, "displacement must be nonnegative");
  return err.squaredNorm() <= budget.gradient_bound_sq(i, lambda, displacement);
}

bool check_function_condition(double err, const ErrorBudget& budget, int i, double lambda,
                              double displacement) {
  require(lambda > 0.0, "function condition requires lambda > 0");
  return std::abs(err) <= budget.function_bound(i, lambda, displacement);
}

std::pair<Vec, bool> inject_gradient_error(const Vec& exact_grad, const ErrorBudget& budget,
                                           int i, const ProxFunction& h, double lambda,
                                           const Vec& x, std::uint64_t rng_seed) {
  require(lambda > 0.0, "error injection requires lambda > 0");
  std::mt19937_64 rng(rng_seed);
  const Vec direction = random_unit_vector(exact_grad.size(), rng);

  // Initial magnitude from the bound evaluated at the exact-gradient
  // displacement; the self-consistency loop below corrects it. The small
  // shave keeps boundary proposals from failing on rounding alone.
  const double d0 = (x - h.prox(lambda, x - lambda * exact_grad)).norm();
  double mag = std::sqrt(budget.gradient_bound_sq(i, lambda, d0)) * (1.0 - 1e-9);
  if (mag <= 0.0) return {exact_grad, true};

  for (int halvings = 0; halvings <= 60; ++halvings) {
    Vec noisy = exact_grad + mag * direction;
    Vec realized = noisy - exact_grad;
    double displacement = (x - h.prox(lambda, x - lambda * noisy)).norm();
    if (check_gradient_condition(realized, budget, i, lambda, displacement)) {
      return {noisy, true};
    }
    mag *= 0.5;
  }
  return {exact_grad, true};
}

double inject_function_error(double exact_f, const ErrorBudget& budget, int i, double lambda,
                             double displacement, std::uint64_t rng_seed,
                             std::optional<double> fraction) {
  require(lambda > 0.0, "error injection requires lambda > 0");
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double bound = budget.function_bound(i, lambda, displacement);
  const double frac = fraction ? *fraction : uniform(rng);
  const double sign = uniform(rng) < 0.5 ? -1.0 : 1.0;
  return exact_f + sign * frac * bound;
}

InexactEval NoisyOracle::evaluate(const Vec& x, int iteration,
                                  const std::optional<EvalContext>& ctx, bool need_gradient) {
  const double lambda = ctx ? ctx->lambda : 1.0;
  const std::uint64_t seed = call_seed(seed_, x, iteration, lambda);

  InexactEval out;
  // The quadratic term of the function condition is exploited only when the
  // caller supplied the realized displacement; otherwise fall back to the
  // absolute part, which certifies at any stepsize.
  const double displacement = (ctx && ctx->displacement) ? *ctx->displacement : 0.0;
  out.f = inject_function_error(f_(x), budget_, iteration, lambda, displacement, seed);
  if (need_gradient) {
    out.gradient = inject_gradient_error(grad_(x), budget_, iteration, h_, lambda, x, seed ^ 0x9e3779b97f4a7c15ULL).first;
  }
  out.cost = 1;
  return out;
}

}  // namespace apig
