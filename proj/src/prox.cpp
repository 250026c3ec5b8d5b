#include "apig/prox.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace apig {

namespace kernels {

void project_nonneg(const double* x, double* y, Index n, ExecMode mode) {
  parallel_for(n, mode, [&](Index i) { y[i] = x[i] > 0.0 ? x[i] : 0.0; });
}

void clamp_box(const double* x, const double* lo, const double* hi, double* y, Index n,
               ExecMode mode) {
  parallel_for(n, mode, [&](Index i) { y[i] = std::min(std::max(x[i], lo[i]), hi[i]); });
}

void soft_threshold(const double* x, double t, double* y, Index n, ExecMode mode) {
  parallel_for(n, mode, [&](Index i) {
    double v = x[i];
    y[i] = v > t ? v - t : (v < -t ? v + t : 0.0);
  });
}

}  // namespace kernels

ProxFunction ProxFunction::nonneg() {
  ProxFunction h;
  h.kind_ = Kind::NonnegOrthant;
  return h;
}

ProxFunction ProxFunction::box(Vec lower, Vec upper) {
  require(lower.size() == upper.size(), "box bounds must have equal dimensions");
  require_finite(lower, "box lower bound");
  require_finite(upper, "box upper bound");
  require((lower.array() <= upper.array()).all(), "box requires lower <= upper componentwise");
  ProxFunction h;
  h.kind_ = Kind::Box;
  h.lower_ = std::move(lower);
  h.upper_ = std::move(upper);
  return h;
}

ProxFunction ProxFunction::l1(double weight) {
  require(weight >= 0.0, "l1 weight must be nonnegative");
  ProxFunction h;
  h.kind_ = Kind::L1;
  h.weight_ = weight;
  return h;
}

ProxFunction ProxFunction::custom(ProxFn prox_fn, ValueFn value_fn) {
  require(static_cast<bool>(prox_fn) && static_cast<bool>(value_fn),
          "custom prox requires both a prox and a value function");
  ProxFunction h;
  h.kind_ = Kind::Custom;
  h.custom_prox_ = std::move(prox_fn);
  h.custom_value_ = std::move(value_fn);
  return h;
}

double ProxFunction::value(const Vec& x) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::NonnegOrthant:
      return (x.array() >= 0.0).all() ? 0.0 : std::numeric_limits<double>::infinity();
    case Kind::Box:
      require(x.size() == lower_.size(), "dimension mismatch with box bounds");
      return ((x.array() >= lower_.array()) && (x.array() <= upper_.array())).all()
                 ? 0.0
                 : std::numeric_limits<double>::infinity();
    case Kind::L1:
      return weight_ * x.lpNorm<1>();
    case Kind::Custom:
      return custom_value_(x);
  }
  return 0.0;
}

bool ProxFunction::in_domain(const Vec& x) const { return std::isfinite(value(x)); }

Vec ProxFunction::prox(double lambda, const Vec& x, ExecMode mode) const {
  require(lambda > 0.0, "prox requires lambda > 0");
  require_finite(x, "prox input");
  Vec y(x.size());
  switch (kind_) {
    case Kind::Zero:
      return x;
    case Kind::NonnegOrthant:
      kernels::project_nonneg(x.data(), y.data(), x.size(), mode);
      return y;
    case Kind::Box:
      require(x.size() == lower_.size(), "dimension mismatch with box bounds");
      kernels::clamp_box(x.data(), lower_.data(), upper_.data(), y.data(), x.size(), mode);
      return y;
    case Kind::L1:
      kernels::soft_threshold(x.data(), lambda * weight_, y.data(), x.size(), mode);
      return y;
    case Kind::Custom:
      return custom_prox_(lambda, x);
  }
  return y;
}

GradientMapping gradient_mapping(const ProxFunction& h, double lambda, const Vec& x,
                                 const Vec& d, ExecMode mode) {
  require(lambda > 0.0, "gradient mapping requires lambda > 0");
  require(x.size() == d.size(), "direction dimension mismatch");
  GradientMapping g;
  g.stepsize = lambda;
  g.prox_point = h.prox(lambda, x - lambda * d, mode);
  g.value = (x - g.prox_point) / lambda;
  return g;
}

double stationarity_residual(const ProxFunction& h, double lambda, const Vec& x,
                             const Vec& exact_grad) {
  return gradient_mapping(h, lambda, x, exact_grad).value.norm();
}

}  // namespace apig
