#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "apig/oracle.hpp"
#include "apig/prox.hpp"
#include "apig/types.hpp"

namespace apig {

enum class LsVariant { B1, B2 };
enum class SolveStatus { Converged, MaxIters, LsFailure };

std::string to_string(SolveStatus status);

/// Parameters of the adaptive proximal inexact gradient loop.
struct ApigConfig {
  double theta = 0.1;          // sufficient-decrease parameter, in (0,1)
  double alpha = 0.5;          // backtracking ratio, in (0,1)
  double lambda_min = 1e-10;
  double lambda_max = 1e10;
  double lambda0 = 1.0;        // initial trial stepsize for iterations 0 and 1
  double epsilon = 1e-6;       // termination tolerance
  LsVariant ls_variant = LsVariant::B1;
  ErrorBudget budget;
  int max_outer_iters = 100000;
  bool store_points = true;    // keep x^i in the trace (off for long sweeps)
  int ls_extra_trials = 80;    // safety margin added to the geometric LS cap

  /// Throws std::invalid_argument on parameter incompatibilities, including
  /// the line-search compatibility constraints a < 1 - 2c - theta (B1) and
  /// a < 1 - 4c (B2).
  void validate() const;

  int ls_trial_cap() const;
};

struct IterationRecord {
  int i = 0;
  Vec x;                      // iterate x^i (empty when store_points is off)
  double lambda = 0.0;        // accepted stepsize
  int ls_trials = 0;          // backtracking steps before acceptance
  double g_norm_mapped = 0.0; // ||G_lambda(x^i, g^i)||
  double delta_g = 0.0;       // termination quantity
  double nu = 0.0;            // line-search relaxation
  double f_inexact = 0.0;     // inexact f at x^i
  std::uint64_t fp_inner_cost = 0;
};

struct ApigResult {
  Vec x_final;
  SolveStatus status = SolveStatus::MaxIters;
  std::vector<IterationRecord> trace;

  std::uint64_t total_inner_cost() const;
};

/// Upsilon_1(lambda): 1/2 when a = b = 0, else min{lambda/(2a), 1/(2b)} with
/// zero denominators treated as +inf.
double upsilon1(double lambda, double a, double b);

/// nu_i = Upsilon_1(lambda) (eta_g_i)^2 + 2 eta_f_i.
double relaxation_nu(double lambda, const ErrorBudget& budget, int i);

/// Sufficient decrease of the full inexact objective:
///   f(lambda) + h(lambda) <= f + h - theta/lambda * d^2 + nu.
bool check_ls_b1(double f_trial, double h_trial, double f_cur, double h_cur,
                 double displacement, double lambda, double theta, double nu);

/// Inexact upper-quadratic condition:
///   f(lambda) <= f + <g, step> + ||step||^2/(2 lambda) + nu.
bool check_ls_b2(double f_trial, double f_cur, const Vec& g, const Vec& step, double lambda,
                 double nu);

/// Alternate Barzilai-Borwein stepsize from s = x^i - x^{i-1} and
/// y = g^i - g^{i-1}; index parity picks the form. Degenerate denominators
/// fall back to lambda_max_fallback.
double abb_stepsize(const Vec& s, const Vec& y, int i, double lambda_max_fallback);

/// Initial trial stepsize: lambda0 for i in {0, 1}; for i >= 2 the clamped
/// ABB value computed from the previous pair of iterates/gradients.
double initial_trial_stepsize(int i, const ApigConfig& config, const Vec& s, const Vec& y);

/// Termination quantity Delta_i combining the mapped-gradient norm with the
/// gradient-error bound realized at the accepted step.
double termination_delta(double g_mapped_norm, const ErrorBudget& budget, int i, double lambda,
                         double displacement);

struct Problem {
  SmoothOracle* oracle = nullptr;
  ProxFunction h;
};

/// Runs the adaptive proximal inexact gradient loop from x0.
ApigResult run(const Problem& problem, const ApigConfig& config, const Vec& x0);

/// Writes the trace as CSV with columns
/// i,lambda,ls_trials,g_mapped_norm,delta_g,nu,f_inexact,inner_cost.
void write_trace_csv(const ApigResult& result, std::ostream& os);

}  // namespace apig
