#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "apig/solver.hpp"
#include "apig/types.hpp"

#include <nlohmann/json_fwd.hpp>

namespace apig::bf {

struct NetworkInstance;

/// Plug-in for finite fronthaul capacities. The default (infinite capacity)
/// keeps the compression covariance at zero; a finite-capacity implementation
/// supplies the diagonal loading terms and the matrices A_k that make
/// Q(p) = sum_k p_k A_k.
class CapacityHook {
 public:
  virtual ~CapacityHook() = default;
  virtual Vec lambda_diag(const NetworkInstance& instance, const Vec& beta, const Vec& x) const;
  virtual std::vector<CMat> coupling_matrices(const NetworkInstance& instance, const Vec& beta,
                                              const Vec& x) const;
};

/// One downlink network: M single-antenna base stations serving K users.
struct NetworkInstance {
  int M = 0;
  int K = 0;
  CMat H;           // M x K; column k is the channel h_k of user k
  Vec sigma2;       // noise powers, length K
  Vec gamma_bar;    // SINR targets, length K
  Vec p_bar;        // per-antenna power budgets, length M
  std::uint64_t seed = 0;
  std::shared_ptr<const CapacityHook> capacity;  // null: infinite fronthaul capacity

  void validate() const;
};

/// Rayleigh-fading instance: channel entries are circularly symmetric complex
/// Gaussian with zero mean and unit variance.
NetworkInstance random_instance(int M, int K, double gamma_bar, double p_bar, double sigma2,
                                std::uint64_t seed);

nlohmann::json instance_to_json(const NetworkInstance& instance);
NetworkInstance instance_from_json(const nlohmann::json& j);

/// max_k |ln p_k - ln q_k| on the strictly positive orthant.
double thompson_metric(const Vec& p, const Vec& q);

namespace kernels {
/// C(beta, x) = I + H diag(beta) H^dagger + Diag(x + extra_diag); entries are
/// accumulated in a fixed order so Serial and Parallel agree bitwise.
CMat coupling_matrix(const CMat& H, const Vec& beta, const Vec& x, const Vec& extra_diag,
                     ExecMode mode);
/// Column-by-column solve Z = C^{-1} H from a Cholesky factorization.
CMat solve_columns(const Eigen::LLT<CMat>& llt, const CMat& H, ExecMode mode);
/// gains(k, j) = |h_k^dagger u_j|^2 for u_j = z_j / ||z_j||.
Mat cross_gains(const CMat& H, const CMat& Z, const Vec& col_norms, ExecMode mode);
}  // namespace kernels

/// Shared factorization data for one (beta, x) pair.
struct CouplingSolve {
  CMat Z;            // C^{-1} H
  Vec channel_gain;  // h_k^dagger C^{-1} h_k (real, positive)
  Vec col_norm;      // ||C^{-1} h_k||
};
CouplingSolve solve_coupling(const NetworkInstance& instance, const Vec& x, const Vec& beta,
                             ExecMode mode = ExecMode::Serial);

/// Componentwise map whose fixed point solves the dual uplink problem:
/// (I_x(beta))_k = gamma_k/(gamma_k + 1) / (h_k^dagger C^{-1} h_k).
Vec mapping_I(const NetworkInstance& instance, const Vec& x, const Vec& beta,
              ExecMode mode = ExecMode::Serial);

/// Componentwise power map at fixed (beta, x):
/// (J(p))_k = gamma_k (sum_{j != k} p_j |h_k^dagger u_j|^2 + sigma_k^2) / |h_k^dagger u_k|^2.
Vec mapping_J(const NetworkInstance& instance, const Vec& x, const Vec& beta, const Vec& p,
              ExecMode mode = ExecMode::Serial);

/// Normalized receive/transmit direction C^{-1} h_k / ||C^{-1} h_k||.
CVec beamformer_u(const NetworkInstance& instance, const Vec& x, const Vec& beta, int k);

struct FpStageResult {
  Vec value;
  std::uint64_t iters = 0;
  double last_residual = 0.0;
};

/// Iterates beta <- I_x(beta) until the Thompson residual drops to res1.
FpStageResult solve_fp_stage1(const NetworkInstance& instance, const Vec& x, const Vec& beta0,
                              double res1, int cap, ExecMode mode = ExecMode::Serial);

/// Iterates p <- J_{beta,x}(p) until the Thompson residual drops to res2.
/// The map is affine in p, so the coupling solve is factorized once.
FpStageResult solve_fp_stage2(const NetworkInstance& instance, const Vec& x,
                              const Vec& beta_tilde, const Vec& p0, double res2, int cap,
                              ExecMode mode = ExecMode::Serial);

/// d~(beta, x) = sum_k beta_k sigma_k^2 - sum_m x_m P_m; equals the dual
/// value d(x) exactly at the fixed point beta^*(x).
double dual_value_tilde(const NetworkInstance& instance, const Vec& beta_tilde, const Vec& x);

/// m-th component: sum_k p_k |u_k^(m)|^2 + Q^(m,m) - P_m.
Vec dual_gradient_tilde(const NetworkInstance& instance, const Vec& beta_tilde,
                        const Vec& p_tilde, const Vec& x, ExecMode mode = ExecMode::Serial);

struct PrimalSolution {
  std::vector<CVec> beamformers;  // v_k = sqrt(p_k) u_k
  Vec realized_powers;            // per antenna
  Vec sinrs;                      // per user
};
PrimalSolution recover_primal(const NetworkInstance& instance, const Vec& beta_tilde,
                              const Vec& p_tilde, const Vec& x,
                              ExecMode mode = ExecMode::Serial);

/// The (beta, p) pair of fixed-point variables with their last residuals.
struct FpState {
  Vec beta;
  Vec p;
  double res_beta = 0.0;
  double res_p = 0.0;
};

/// Dual value and gradient at x from one two-stage fixed-point solve with
/// stage tolerances res/2 each.
struct DualEval {
  double d = 0.0;
  Vec grad;
  FpState state;
  std::uint64_t fp_iters = 0;
};
DualEval evaluate_dual(const NetworkInstance& instance, const Vec& x, double res, int cap,
                       ExecMode mode = ExecMode::Serial,
                       const std::optional<FpState>& warm = std::nullopt);

/// Parameters for the dual solver with fixed-point oracles: the residual
/// schedule (eta~ sequences, b~), the error-constant growth factor, and the
/// initial guess for the unknown error constants.
struct ApigFpConfig {
  ApigConfig base;
  double b_tilde = 0.0;
  ErrorSequence eta_g_tilde;
  ErrorSequence eta_f_tilde;
  double varrho = 1.1;
  double c0 = 100.0;
  int fp_max_iters = 50000;
  double res_floor = 1e-12;
  ExecMode mode = ExecMode::Serial;

  void validate() const;

  /// High-precision settings that emulate the exact proximal gradient method.
  static ApigFpConfig pg_baseline();
  /// Reference-solver settings: residual targets scaled so the termination
  /// certificate can actually reach the requested tolerance.
  static ApigFpConfig reference(double epsilon);
  /// Absolute gradient inexactness: b~ = 0, eta~ decade sequences.
  static ApigFpConfig variant_a(double delta1, double delta2);
  /// Relative gradient inexactness: eta~g = 0, b~ = 10^-delta3.
  static ApigFpConfig variant_r(double delta1, double delta2, double delta3);
};

struct ApigFpResult {
  ApigResult base;
  std::vector<double> c_trace;  // C_i in force when iteration i was accepted
  double final_c = 0.0;
  double max_x_norm = 0.0;
  int abb_clamp_events = 0;
};

/// Maximizes the dual d(x) over x >= 0 with adaptively controlled
/// fixed-point precision per trial stepsize.
ApigFpResult apig_fp_run(const NetworkInstance& instance, const ApigFpConfig& config,
                         const Vec& x0);

struct PsgPoint {
  double dual_value = 0.0;
  std::uint64_t cum_fp_iters = 0;
};

/// Projected subgradient ascent on the dual with diminishing stepsize
/// lambda (i+1)^-delta, using high-precision fixed-point gradients.
std::vector<PsgPoint> psg_run(const NetworkInstance& instance, const Vec& x0,
                              double lambda_base, double delta, int max_iters,
                              double res = 1e-10, int cap = 50000,
                              ExecMode mode = ExecMode::Serial);

}  // namespace apig::bf
