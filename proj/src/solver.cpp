#include "apig/solver.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace apig {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::LsFailure: return "ls_failure";
  }
  return "unknown";
}

void ApigConfig::validate() const {
  require(theta > 0.0 && theta < 1.0, "theta must lie in (0, 1)");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(lambda_min > 0.0 && lambda_min < lambda_max, "need 0 < lambda_min < lambda_max");
  require(lambda0 >= lambda_min && lambda0 <= lambda_max,
          "lambda0 must lie in [lambda_min, lambda_max]");
  require(epsilon > 0.0, "epsilon must be positive");
  require(max_outer_iters > 0, "max_outer_iters must be positive");
  require(budget.a >= 0.0 && budget.a < 1.0, "budget requires a in [0, 1)");
  require(budget.b >= 0.0, "budget requires b >= 0");
  require(budget.c >= 0.0 && budget.c <= theta / 4.0, "budget requires c in [0, theta/4]");
  if (ls_variant == LsVariant::B1) {
    require(budget.a < 1.0 - 2.0 * budget.c - theta,
            "B1 line search requires a < 1 - 2c - theta");
  } else {
    require(budget.a < 1.0 - 4.0 * budget.c, "B2 line search requires a < 1 - 4c");
  }
}

int ApigConfig::ls_trial_cap() const {
  const double geometric = std::log(lambda_min / lambda_max) / std::log(alpha);
  return static_cast<int>(std::ceil(geometric)) + ls_extra_trials;
}

std::uint64_t ApigResult::total_inner_cost() const {
  std::uint64_t total = 0;
  for (const auto& rec : trace) total += rec.fp_inner_cost;
  return total;
}

double upsilon1(double lambda, double a, double b) {
  if (a == 0.0 && b == 0.0) return 0.5;
  const double inf = std::numeric_limits<double>::infinity();
  const double first = a > 0.0 ? lambda / (2.0 * a) : inf;
  const double second = b > 0.0 ? 1.0 / (2.0 * b) : inf;
  return std::min(first, second);
}

double relaxation_nu(double lambda, const ErrorBudget& budget, int i) {
  require(lambda > 0.0, "relaxation requires lambda > 0");
  const double eg = budget.eta_g.at(i);
  return upsilon1(lambda, budget.a, budget.b) * eg * eg + 2.0 * budget.eta_f.at(i);
}

bool check_ls_b1(double f_trial, double h_trial, double f_cur, double h_cur,
                 double displacement, double lambda, double theta, double nu) {
  require(lambda > 0.0, "line search requires lambda > 0");
  return f_trial + h_trial <=
         f_cur + h_cur - theta / lambda * displacement * displacement + nu;
}

bool check_ls_b2(double f_trial, double f_cur, const Vec& g, const Vec& step, double lambda,
                 double nu) {
  require(lambda > 0.0, "line search requires lambda > 0");
  return f_trial <= f_cur + g.dot(step) + step.squaredNorm() / (2.0 * lambda) + nu;
}

double abb_stepsize(const Vec& s, const Vec& y, int i, double lambda_max_fallback) {
  const double sty = std::abs(s.dot(y));
  if (i % 2 == 0) {
    if (sty < 1e-300) return lambda_max_fallback;
    return s.squaredNorm() / sty;
  }
  const double yy = y.squaredNorm();
  if (yy < 1e-300) return lambda_max_fallback;
  return sty / yy;
}

double initial_trial_stepsize(int i, const ApigConfig& config, const Vec& s, const Vec& y) {
  if (i < 2) return config.lambda0;
  const double abb = abb_stepsize(s, y, i - 1, config.lambda_max);
  return std::min(std::max(abb, config.lambda_min), config.lambda_max);
}

double termination_delta(double g_mapped_norm, const ErrorBudget& budget, int i, double lambda,
                         double displacement) {
  require(lambda > 0.0, "termination requires lambda > 0");
  return g_mapped_norm + std::sqrt(budget.gradient_bound_sq(i, lambda, displacement));
}

ApigResult run(const Problem& problem, const ApigConfig& config, const Vec& x0) {
  config.validate();
  require(problem.oracle != nullptr, "problem requires an oracle");
  require_finite(x0, "x0");

  ApigResult result;
  Vec x = x0;
  // Start feasible: one projection via prox with a tiny stepsize.
  if (problem.h.has_bounded_domain() && !problem.h.in_domain(x)) {
    x = problem.h.prox(1e-12, x);
  }

  Vec x_prev, g_prev;
  double trial0 = config.lambda0;
  const int ls_cap = config.ls_trial_cap();

  for (int i = 0; i < config.max_outer_iters; ++i) {
    // f_i and g^i are evaluated once per iteration; the context carries the
    // largest stepsize this iteration will try.
    std::uint64_t inner_cost = 0;
    InexactEval at_x =
        problem.oracle->evaluate(x, i, EvalContext{trial0, std::nullopt}, true);
    inner_cost += at_x.cost;
    require(at_x.gradient.has_value(), "oracle returned no gradient");
    const Vec& g = *at_x.gradient;
    const double h_cur = problem.h.value(x);

    double lambda = trial0;
    GradientMapping gm;
    double nu = 0.0;
    bool accepted = false;
    int ell = 0;
    for (; ell <= ls_cap; ++ell) {
      lambda = trial0 * std::pow(config.alpha, ell);
      gm = gradient_mapping(problem.h, lambda, x, g);
      const double displacement = lambda * gm.value.norm();
      nu = relaxation_nu(lambda, config.budget, i);
      InexactEval at_trial = problem.oracle->evaluate(
          gm.prox_point, i, EvalContext{lambda, displacement}, false);
      inner_cost += at_trial.cost;
      if (config.ls_variant == LsVariant::B1) {
        const double h_trial = problem.h.value(gm.prox_point);
        accepted = check_ls_b1(at_trial.f, h_trial, at_x.f, h_cur, displacement, lambda,
                               config.theta, nu);
      } else {
        accepted = check_ls_b2(at_trial.f, at_x.f, g, gm.prox_point - x, lambda, nu);
      }
      if (accepted) break;
    }

    IterationRecord rec;
    rec.i = i;
    if (config.store_points) rec.x = x;
    rec.lambda = lambda;
    rec.ls_trials = ell;
    rec.g_norm_mapped = gm.value.norm();
    rec.nu = nu;
    rec.f_inexact = at_x.f;
    rec.fp_inner_cost = inner_cost;

    if (!accepted) {
      // The guaranteed-progress bound failed far past its cap: the oracle
      // is not honoring its declared budget.
      rec.delta_g = std::numeric_limits<double>::quiet_NaN();
      result.trace.push_back(std::move(rec));
      result.x_final = x;
      result.status = SolveStatus::LsFailure;
      return result;
    }

    const double displacement = lambda * rec.g_norm_mapped;
    rec.delta_g = termination_delta(rec.g_norm_mapped, config.budget, i, lambda, displacement);
    result.trace.push_back(rec);

    if (rec.delta_g <= config.epsilon) {
      result.x_final = x;  // the certificate is about x^i, not x^{i+1}
      result.status = SolveStatus::Converged;
      return result;
    }

    const Vec x_next = gm.prox_point;
    if (i >= 1) {
      trial0 = initial_trial_stepsize(i + 1, config, x - x_prev, g - g_prev);
    }
    x_prev = x;
    g_prev = g;
    x = x_next;
  }

  result.x_final = x;
  result.status = SolveStatus::MaxIters;
  return result;
}

void write_trace_csv(const ApigResult& result, std::ostream& os) {
  os << "i,lambda,ls_trials,g_mapped_norm,delta_g,nu,f_inexact,inner_cost\n";
  for (const auto& rec : result.trace) {
    os << rec.i << ',' << rec.lambda << ',' << rec.ls_trials << ',' << rec.g_norm_mapped << ','
       << rec.delta_g << ',' << rec.nu << ',' << rec.f_inexact << ',' << rec.fp_inner_cost
       << '\n';
  }
}

}  // namespace apig
