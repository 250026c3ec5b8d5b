#pragma once

#include <functional>
#include <limits>

#include "apig/parallel.hpp"
#include "apig/types.hpp"

namespace apig {

namespace kernels {
// Componentwise projection/shrinkage kernels. Serial and Parallel paths
// compute each output element independently and agree bitwise.
void project_nonneg(const double* x, double* y, Index n, ExecMode mode);
void clamp_box(const double* x, const double* lo, const double* hi, double* y, Index n,
               ExecMode mode);
void soft_threshold(const double* x, double t, double* y, Index n, ExecMode mode);
}  // namespace kernels

/// The convex term h of a composite objective f + h, restricted to variants
/// whose proximal map has an O(n) closed form. A custom variant accepts a
/// user-supplied (prox, value) pair for anything beyond the built-ins.
class ProxFunction {
 public:
  enum class Kind { Zero, NonnegOrthant, Box, L1, Custom };

  using ProxFn = std::function<Vec(double /*lambda*/, const Vec&)>;
  using ValueFn = std::function<double(const Vec&)>;

  ProxFunction() : kind_(Kind::Zero) {}

  static ProxFunction zero() { return ProxFunction(); }
  static ProxFunction nonneg();
  static ProxFunction box(Vec lower, Vec upper);
  static ProxFunction l1(double weight);
  static ProxFunction custom(ProxFn prox_fn, ValueFn value_fn);

  Kind kind() const { return kind_; }
  double l1_weight() const { return weight_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

  /// h(x); +inf outside an indicator's domain.
  double value(const Vec& x) const;

  bool in_domain(const Vec& x) const;

  /// Whether dom(h) is a proper subset of R^n.
  bool has_bounded_domain() const {
    return kind_ == Kind::NonnegOrthant || kind_ == Kind::Box;
  }

  /// argmin_y { ||y - x||^2 / (2 lambda) + h(y) }.
  Vec prox(double lambda, const Vec& x, ExecMode mode = ExecMode::Serial) const;

 private:
  Kind kind_;
  Vec lower_, upper_;     // Box
  double weight_ = 0.0;   // L1
  ProxFn custom_prox_;
  ValueFn custom_value_;
};

inline Vec prox(const ProxFunction& h, double lambda, const Vec& x,
                ExecMode mode = ExecMode::Serial) {
  return h.prox(lambda, x, mode);
}

/// G_lambda(x, d) together with the post-prox point x(lambda), which callers
/// reuse as the trial iterate. The identity value = (x - prox_point)/lambda
/// holds by construction.
struct GradientMapping {
  Vec value;
  double stepsize = 0.0;
  Vec prox_point;
};

GradientMapping gradient_mapping(const ProxFunction& h, double lambda, const Vec& x,
                                 const Vec& d, ExecMode mode = ExecMode::Serial);

/// ||G_lambda(x, exact_grad)||; zero exactly at stationary points of f + h.
double stationarity_residual(const ProxFunction& h, double lambda, const Vec& x,
                             const Vec& exact_grad);

}  // namespace apig
