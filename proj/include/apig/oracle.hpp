#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "apig/prox.hpp"
#include "apig/types.hpp"

namespace apig {

/// Nonnegative scalar sequence i -> scale * (i+1)^(-exponent). The family
/// declares its summability; a zero scale stands for the all-zero sequence.
struct ErrorSequence {
  double scale = 0.0;
  double exponent = 0.0;

  static ErrorSequence zero() { return {}; }
  static ErrorSequence constant(double s) { return {s, 0.0}; }
  static ErrorSequence power(double s, double p) { return {s, p}; }
  /// 10^(-delta1) * (i+1)^(-delta2).
  static ErrorSequence decade(double delta1, double delta2) {
    return {std::pow(10.0, -delta1), delta2};
  }

  double at(int i) const {
    if (scale == 0.0) return 0.0;
    return exponent == 0.0 ? scale : scale * std::pow(i + 1.0, -exponent);
  }
  bool summable() const { return scale == 0.0 || exponent > 1.0; }
  bool square_summable() const { return scale == 0.0 || exponent > 0.5; }
};

/// Error-budget parameters of the gradient condition
///   ||eps_g||^2 <= (eta_g_i)^2 + (a^2/lambda^2 + b^2) ||x(lambda) - x||^2
/// and the function condition
///   |eps_f| <= eta_f_i + c/lambda * ||x(lambda) - x||^2.
struct ErrorBudget {
  ErrorSequence eta_g;
  double a = 0.0;
  double b = 0.0;
  ErrorSequence eta_f;
  double c = 0.0;

  static ErrorBudget zero() { return {}; }

  /// Validates against the line-search parameter theta (c must lie in [0, theta/4]).
  static ErrorBudget checked(ErrorSequence eta_g, double a, double b, ErrorSequence eta_f,
                             double c, double theta);

  double gradient_bound_sq(int i, double lambda, double displacement) const {
    double eg = eta_g.at(i);
    return eg * eg + (a * a / (lambda * lambda) + b * b) * displacement * displacement;
  }
  double function_bound(int i, double lambda, double displacement) const {
    return eta_f.at(i) + c / lambda * displacement * displacement;
  }
};

bool check_gradient_condition(const Vec& err, const ErrorBudget& budget, int i, double lambda,
                              double displacement);
bool check_function_condition(double err, const ErrorBudget& budget, int i, double lambda,
                              double displacement);

/// Adds noise to exact_grad at the largest magnitude the gradient condition
/// admits along a random direction. The condition references the displacement
/// induced by the noisy gradient itself, so the magnitude is halved until the
/// self-consistent check passes; zero error always passes, which bounds the
/// loop. Returns the noisy gradient and whether the check passed (always true
/// on return).
std::pair<Vec, bool> inject_gradient_error(const Vec& exact_grad, const ErrorBudget& budget,
                                           int i, const ProxFunction& h, double lambda,
                                           const Vec& x, std::uint64_t rng_seed);

/// Adds noise to exact_f at a uniform fraction of the admissible bound.
/// Pass fraction to pin the magnitude (e.g. 1.0 saturates the bound);
/// otherwise it is drawn from the seeded RNG.
double inject_function_error(double exact_f, const ErrorBudget& budget, int i, double lambda,
                             double displacement, std::uint64_t rng_seed,
                             std::optional<double> fraction = std::nullopt);

/// One approximate evaluation: inexact f, optional inexact gradient, and the
/// inner-iteration count spent producing them (for cost accounting).
struct InexactEval {
  double f = 0.0;
  std::optional<Vec> gradient;
  std::uint64_t cost = 0;
};

/// Stepsize context for an evaluation. The displacement ||x(lambda) - x|| is
/// known only for evaluations at the post-prox trial point.
struct EvalContext {
  double lambda = 1.0;
  std::optional<double> displacement;
};

/// Approximate (f, g) source. Implementations must be deterministic for
/// repeated calls with identical (x, iteration, context) and seed.
class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;
  virtual InexactEval evaluate(const Vec& x, int iteration,
                               const std::optional<EvalContext>& ctx, bool need_gradient) = 0;
};

/// Error-free oracle over closed-form callables.
class ExactOracle : public SmoothOracle {
 public:
  ExactOracle(std::function<double(const Vec&)> f, std::function<Vec(const Vec&)> grad)
      : f_(std::move(f)), grad_(std::move(grad)) {}

  InexactEval evaluate(const Vec& x, int, const std::optional<EvalContext>&,
                       bool need_gradient) override {
    InexactEval out;
    out.f = f_(x);
    if (need_gradient) out.gradient = grad_(x);
    out.cost = 1;
    return out;
  }

 private:
  std::function<double(const Vec&)> f_;
  std::function<Vec(const Vec&)> grad_;
};

/// Wraps an exact oracle and manufactures condition-respecting noise.
/// Function noise at a point without a known displacement uses only the
/// absolute part of the budget, so the condition holds at every stepsize a
/// line search may later try; gradient noise is certified through
/// inject_gradient_error at the stepsize in context.
class NoisyOracle : public SmoothOracle {
 public:
  NoisyOracle(std::function<double(const Vec&)> f, std::function<Vec(const Vec&)> grad,
              ErrorBudget budget, ProxFunction h, std::uint64_t seed)
      : f_(std::move(f)), grad_(std::move(grad)), budget_(budget), h_(std::move(h)), seed_(seed) {}

  InexactEval evaluate(const Vec& x, int iteration, const std::optional<EvalContext>& ctx,
                       bool need_gradient) override;

 private:
  std::function<double(const Vec&)> f_;
  std::function<Vec(const Vec&)> grad_;
  ErrorBudget budget_;
  ProxFunction h_;
  std::uint64_t seed_;
};

}  // namespace apig
