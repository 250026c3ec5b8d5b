#include "apig/beamforming.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "apig/prox.hpp"

namespace apig::bf {

namespace {
constexpr double kPositivityFloor = 1e-300;

Vec floored(Vec v) {
  for (Index i = 0; i < v.size(); ++i) v[i] = std::max(v[i], kPositivityFloor);
  return v;
}
}  // namespace

Vec CapacityHook::lambda_diag(const NetworkInstance& instance, const Vec&, const Vec&) const {
  return Vec::Zero(instance.M);
}

std::vector<CMat> CapacityHook::coupling_matrices(const NetworkInstance& instance, const Vec&,
                                                  const Vec&) const {
  return std::vector<CMat>(instance.K, CMat::Zero(instance.M, instance.M));
}

void NetworkInstance::validate() const {
  require(M >= 1 && K >= 1, "instance needs M >= 1 and K >= 1");
  require(H.rows() == M && H.cols() == K, "channel matrix must be M x K");
  require(H.allFinite(), "channels must be finite");
  require(sigma2.size() == K && (sigma2.array() > 0.0).all(), "sigma2 must be positive, length K");
  require(gamma_bar.size() == K && (gamma_bar.array() > 0.0).all(),
          "gamma_bar must be positive, length K");
  require(p_bar.size() == M && (p_bar.array() > 0.0).all(), "p_bar must be positive, length M");
}

NetworkInstance random_instance(int M, int K, double gamma_bar, double p_bar, double sigma2,
                                std::uint64_t seed) {
  NetworkInstance inst;
  inst.M = M;
  inst.K = K;
  inst.seed = seed;
  inst.H.resize(M, K);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m) inst.H(m, k) = std::complex<double>(normal(rng), normal(rng));
  inst.sigma2 = Vec::Constant(K, sigma2);
  inst.gamma_bar = Vec::Constant(K, gamma_bar);
  inst.p_bar = Vec::Constant(M, p_bar);
  inst.validate();
  return inst;
}

nlohmann::json instance_to_json(const NetworkInstance& instance) {
  nlohmann::json j;
  j["M"] = instance.M;
  j["K"] = instance.K;
  j["seed"] = instance.seed;
  auto channels = nlohmann::json::array();
  for (int k = 0; k < instance.K; ++k) {
    auto h = nlohmann::json::array();
    for (int m = 0; m < instance.M; ++m) {
      h.push_back({{"re", instance.H(m, k).real()}, {"im", instance.H(m, k).imag()}});
    }
    channels.push_back(std::move(h));
  }
  j["channels"] = std::move(channels);
  j["sigma2"] = std::vector<double>(instance.sigma2.data(), instance.sigma2.data() + instance.K);
  j["gamma_bar"] =
      std::vector<double>(instance.gamma_bar.data(), instance.gamma_bar.data() + instance.K);
  j["p_bar"] = std::vector<double>(instance.p_bar.data(), instance.p_bar.data() + instance.M);
  return j;
}

NetworkInstance instance_from_json(const nlohmann::json& j) {
  NetworkInstance inst;
  inst.M = j.at("M").get<int>();
  inst.K = j.at("K").get<int>();
  inst.seed = j.value("seed", std::uint64_t{0});
  const auto& channels = j.at("channels");
  require(static_cast<int>(channels.size()) == inst.K, "channels must hold K vectors");
  inst.H.resize(inst.M, inst.K);
  for (int k = 0; k < inst.K; ++k) {
    const auto& h = channels.at(k);
    require(static_cast<int>(h.size()) == inst.M, "each channel must have length M");
    for (int m = 0; m < inst.M; ++m) {
      inst.H(m, k) = std::complex<double>(h.at(m).at("re").get<double>(),
                                          h.at(m).at("im").get<double>());
    }
  }
  auto load_vec = [&](const char* key) {
    const auto v = j.at(key).get<std::vector<double>>();
    return Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size())).eval();
  };
  inst.sigma2 = load_vec("sigma2");
  inst.gamma_bar = load_vec("gamma_bar");
  inst.p_bar = load_vec("p_bar");
  inst.validate();
  return inst;
}

double thompson_metric(const Vec& p, const Vec& q) {
  require(p.size() == q.size(), "thompson metric requires equal lengths");
  double worst = 0.0;
  for (Index k = 0; k < p.size(); ++k) {
    require(p[k] > 0.0 && q[k] > 0.0, "thompson metric requires strictly positive entries");
    worst = std::max(worst, std::abs(std::log(p[k]) - std::log(q[k])));
  }
  return worst;
}

namespace kernels {

CMat coupling_matrix(const CMat& H, const Vec& beta, const Vec& x, const Vec& extra_diag,
                     ExecMode mode) {
  const Index M = H.rows();
  const Index K = H.cols();
  CMat C(M, M);
  parallel_for(M, mode, [&](Index m) {
    for (Index mp = 0; mp < M; ++mp) {
      std::complex<double> acc(0.0, 0.0);
      for (Index k = 0; k < K; ++k) acc += beta[k] * H(m, k) * std::conj(H(mp, k));
      if (m == mp) acc += 1.0 + x[m] + extra_diag[m];
      C(m, mp) = acc;
    }
  });
  return C;
}

CMat solve_columns(const Eigen::LLT<CMat>& llt, const CMat& H, ExecMode mode) {
  CMat Z(H.rows(), H.cols());
  parallel_for(H.cols(), mode, [&](Index k) { Z.col(k) = llt.solve(H.col(k)); });
  return Z;
}

Mat cross_gains(const CMat& H, const CMat& Z, const Vec& col_norms, ExecMode mode) {
  const Index K = H.cols();
  Mat gains(K, K);
  parallel_for(K, mode, [&](Index k) {
    for (Index j = 0; j < K; ++j) {
      const std::complex<double> inner = H.col(k).dot(Z.col(j));
      gains(k, j) = std::norm(inner) / (col_norms[j] * col_norms[j]);
    }
  });
  return gains;
}

}  // namespace kernels

CouplingSolve solve_coupling(const NetworkInstance& instance, const Vec& x, const Vec& beta,
                             ExecMode mode) {
  require(beta.size() == instance.K, "beta dimension mismatch");
  require(x.size() == instance.M, "x dimension mismatch");
  require((beta.array() > 0.0).all(), "beta must be strictly positive");
  require((x.array() >= 0.0).all(), "multipliers must be nonnegative");

  const Vec extra = instance.capacity ? instance.capacity->lambda_diag(instance, beta, x)
                                      : Vec::Zero(instance.M);
  const CMat C = kernels::coupling_matrix(instance.H, beta, x, extra, mode);
  Eigen::LLT<CMat> llt(C);
  require(llt.info() == Eigen::Success, "coupling matrix factorization failed");

  CouplingSolve out;
  out.Z = kernels::solve_columns(llt, instance.H, mode);
  out.channel_gain.resize(instance.K);
  out.col_norm.resize(instance.K);
  for (int k = 0; k < instance.K; ++k) {
    out.channel_gain[k] = instance.H.col(k).dot(out.Z.col(k)).real();
    out.col_norm[k] = out.Z.col(k).norm();
    if (!(out.channel_gain[k] > 0.0) || !(out.col_norm[k] > 0.0)) {
      throw DegenerateChannelError("channel " + std::to_string(k) + " is degenerate");
    }
  }
  return out;
}

Vec mapping_I(const NetworkInstance& instance, const Vec& x, const Vec& beta, ExecMode mode) {
  const CouplingSolve cs = solve_coupling(instance, x, beta, mode);
  Vec out(instance.K);
  for (int k = 0; k < instance.K; ++k) {
    const double g = instance.gamma_bar[k];
    out[k] = g / (g + 1.0) / cs.channel_gain[k];
  }
  return out;
}

namespace {

// Q(p) contributions to the SINR denominators: qf(k, j) = h_k^dagger A_j h_k.
Mat capacity_quadratic_forms(const NetworkInstance& instance, const Vec& beta, const Vec& x) {
  if (!instance.capacity) return Mat::Zero(instance.K, instance.K);
  const auto mats = instance.capacity->coupling_matrices(instance, beta, x);
  Mat qf(instance.K, instance.K);
  for (int k = 0; k < instance.K; ++k)
    for (int j = 0; j < instance.K; ++j)
      qf(k, j) = (instance.H.col(k).adjoint() * mats[j] * instance.H.col(k)).value().real();
  return qf;
}

// Affine form of the power map at fixed (beta, x): J(p) = (T p + s) with
// T_kj = gamma_k (gains_kj [j != k] + qf_kj) / gains_kk.
struct AffinePowerMap {
  Mat T;
  Vec s;
  Vec apply(const Vec& p) const { return T * p + s; }
};

AffinePowerMap build_power_map(const NetworkInstance& instance, const Vec& x, const Vec& beta,
                               ExecMode mode) {
  const CouplingSolve cs = solve_coupling(instance, x, beta, mode);
  const Mat gains = kernels::cross_gains(instance.H, cs.Z, cs.col_norm, mode);
  const Mat qf = capacity_quadratic_forms(instance, beta, x);
  AffinePowerMap map;
  map.T.resize(instance.K, instance.K);
  map.s.resize(instance.K);
  for (int k = 0; k < instance.K; ++k) {
    const double own = gains(k, k);
    if (!(own > 0.0)) throw DegenerateChannelError("beamformer has no gain toward its user");
    const double g = instance.gamma_bar[k];
    for (int j = 0; j < instance.K; ++j) {
      const double cross = (j == k ? 0.0 : gains(k, j)) + qf(k, j);
      map.T(k, j) = g * cross / own;
    }
    map.s[k] = g * instance.sigma2[k] / own;
  }
  return map;
}

}  // namespace

Vec mapping_J(const NetworkInstance& instance, const Vec& x, const Vec& beta, const Vec& p,
              ExecMode mode) {
  require(p.size() == instance.K, "p dimension mismatch");
  require((p.array() > 0.0).all(), "p must be strictly positive");
  return build_power_map(instance, x, beta, mode).apply(p);
}

CVec beamformer_u(const NetworkInstance& instance, const Vec& x, const Vec& beta, int k) {
  require(k >= 0 && k < instance.K, "user index out of range");
  const CouplingSolve cs = solve_coupling(instance, x, beta, ExecMode::Serial);
  return cs.Z.col(k) / cs.col_norm[k];
}

namespace {
// Residual progress watchdog: a contraction factor this close to one means
// the target is out of reach within any sane budget, so bail out early
// instead of burning the full cap.
class StallGuard {
 public:
  bool stalled(int it, double residual) {
    if (it % kWindow == 0) {
      const bool flat = residual > 0.999 * anchor_;
      anchor_ = residual;
      return it > 0 && flat;
    }
    return false;
  }

 private:
  static constexpr int kWindow = 500;
  double anchor_ = std::numeric_limits<double>::infinity();
};
}  // namespace

FpStageResult solve_fp_stage1(const NetworkInstance& instance, const Vec& x, const Vec& beta0,
                              double res1, int cap, ExecMode mode) {
  require((beta0.array() > 0.0).all(), "beta0 must be strictly positive");
  FpStageResult out;
  Vec beta = beta0;
  StallGuard guard;
  for (int it = 0; it < cap; ++it) {
    Vec next = floored(mapping_I(instance, x, beta, mode));
    ++out.iters;
    if (!next.allFinite() || next.maxCoeff() > 1e120) {
      throw FpDivergenceError("uplink fixed-point iterates blow up; SINR targets look infeasible");
    }
    out.last_residual = thompson_metric(beta, next);
    if (out.last_residual <= res1) {
      out.value = next;
      return out;
    }
    if (guard.stalled(it, out.last_residual)) {
      throw FpDivergenceError("uplink fixed-point iteration stalled above its tolerance");
    }
    beta = next;
  }
  throw FpDivergenceError("uplink fixed-point iteration hit its cap; SINR targets look infeasible");
}

FpStageResult solve_fp_stage2(const NetworkInstance& instance, const Vec& x,
                              const Vec& beta_tilde, const Vec& p0, double res2, int cap,
                              ExecMode mode) {
  require((p0.array() > 0.0).all(), "p0 must be strictly positive");
  const AffinePowerMap map = build_power_map(instance, x, beta_tilde, mode);
  FpStageResult out;
  Vec p = p0;
  StallGuard guard;
  for (int it = 0; it < cap; ++it) {
    Vec next = floored(map.apply(p));
    ++out.iters;
    if (!next.allFinite() || next.maxCoeff() > 1e120) {
      throw FpDivergenceError("power fixed-point iterates blow up");
    }
    out.last_residual = thompson_metric(p, next);
    if (out.last_residual <= res2) {
      out.value = next;
      return out;
    }
    if (guard.stalled(it, out.last_residual)) {
      throw FpDivergenceError("power fixed-point iteration stalled above its tolerance");
    }
    p = next;
  }
  throw FpDivergenceError("power fixed-point iteration hit its cap");
}

double dual_value_tilde(const NetworkInstance& instance, const Vec& beta_tilde, const Vec& x) {
  require(beta_tilde.size() == instance.K && x.size() == instance.M, "dimension mismatch");
  return beta_tilde.dot(instance.sigma2) - x.dot(instance.p_bar);
}

Vec dual_gradient_tilde(const NetworkInstance& instance, const Vec& beta_tilde,
                        const Vec& p_tilde, const Vec& x, ExecMode mode) {
  const CouplingSolve cs = solve_coupling(instance, x, beta_tilde, mode);
  Vec grad = -instance.p_bar;
  for (int k = 0; k < instance.K; ++k) {
    const double scale = p_tilde[k] / (cs.col_norm[k] * cs.col_norm[k]);
    for (int m = 0; m < instance.M; ++m) grad[m] += scale * std::norm(cs.Z(m, k));
  }
  if (instance.capacity) {
    const auto mats = instance.capacity->coupling_matrices(instance, beta_tilde, x);
    for (int k = 0; k < instance.K; ++k)
      for (int m = 0; m < instance.M; ++m) grad[m] += p_tilde[k] * mats[k](m, m).real();
  }
  return grad;
}

PrimalSolution recover_primal(const NetworkInstance& instance, const Vec& beta_tilde,
                              const Vec& p_tilde, const Vec& x, ExecMode mode) {
  const CouplingSolve cs = solve_coupling(instance, x, beta_tilde, mode);
  PrimalSolution sol;
  sol.beamformers.reserve(instance.K);
  for (int k = 0; k < instance.K; ++k) {
    sol.beamformers.push_back(std::sqrt(p_tilde[k]) / cs.col_norm[k] * cs.Z.col(k));
  }
  sol.realized_powers = Vec::Zero(instance.M);
  for (int k = 0; k < instance.K; ++k)
    for (int m = 0; m < instance.M; ++m) sol.realized_powers[m] += std::norm(sol.beamformers[k][m]);

  const Mat qf = capacity_quadratic_forms(instance, beta_tilde, x);
  sol.sinrs.resize(instance.K);
  for (int k = 0; k < instance.K; ++k) {
    double signal = 0.0;
    double interference = instance.sigma2[k];
    for (int j = 0; j < instance.K; ++j) {
      const double power = std::norm(instance.H.col(k).dot(sol.beamformers[j]));
      if (j == k) {
        signal = power;
      } else {
        interference += power;
      }
      interference += p_tilde[j] * qf(k, j);
    }
    sol.sinrs[k] = signal / interference;
  }
  return sol;
}

DualEval evaluate_dual(const NetworkInstance& instance, const Vec& x, double res, int cap,
                       ExecMode mode, const std::optional<FpState>& warm) {
  const Vec beta0 = warm ? floored(warm->beta) : Vec::Ones(instance.K);
  const Vec p0 = warm ? floored(warm->p) : Vec::Ones(instance.K);
  const double stage_res = res / 2.0;

  DualEval out;
  FpStageResult stage1 = solve_fp_stage1(instance, x, beta0, stage_res, cap, mode);
  FpStageResult stage2 = solve_fp_stage2(instance, x, stage1.value, p0, stage_res, cap, mode);
  out.state.beta = stage1.value;
  out.state.p = stage2.value;
  out.state.res_beta = stage1.last_residual;
  out.state.res_p = stage2.last_residual;
  out.fp_iters = stage1.iters + stage2.iters;
  out.d = dual_value_tilde(instance, stage1.value, x);
  out.grad = dual_gradient_tilde(instance, stage1.value, stage2.value, x, mode);
  return out;
}

void ApigFpConfig::validate() const {
  base.validate();
  require(b_tilde >= 0.0, "b_tilde must be nonnegative");
  require(eta_g_tilde.scale >= 0.0 && eta_f_tilde.scale >= 0.0,
          "residual sequences must be nonnegative");
  require(varrho > 1.0, "varrho must exceed 1");
  require(c0 > 0.0, "c0 must be positive");
  require(fp_max_iters > 0, "fp_max_iters must be positive");
  require(res_floor > 0.0, "res_floor must be positive");
}

namespace {
ApigFpConfig make_fp_defaults() {
  ApigFpConfig config;
  config.base.theta = 1e-4;
  config.base.alpha = 0.25;
  config.base.lambda_min = 1e-10;
  config.base.lambda_max = 1e10;
  config.base.lambda0 = 1.0;
  config.base.epsilon = 1e-6;
  config.base.max_outer_iters = 1000000;
  config.base.store_points = false;
  config.varrho = 1.1;
  config.c0 = 100.0;
  return config;
}
}  // namespace

ApigFpConfig ApigFpConfig::pg_baseline() {
  ApigFpConfig config = make_fp_defaults();
  config.b_tilde = 0.0;
  config.eta_g_tilde = ErrorSequence::constant(1e-10);
  config.eta_f_tilde = ErrorSequence::constant(1e-10);
  return config;
}

ApigFpConfig ApigFpConfig::reference(double epsilon) {
  require(epsilon > 0.0, "reference tolerance must be positive");
  ApigFpConfig config = make_fp_defaults();
  config.base.epsilon = epsilon;
  config.b_tilde = 0.0;
  // keep the certified error term two decades under the tolerance
  const double eta = std::max(epsilon * 1e-2 / config.c0, 1e-13);
  config.eta_g_tilde = ErrorSequence::constant(eta);
  config.eta_f_tilde = ErrorSequence::constant(eta);
  return config;
}

ApigFpConfig ApigFpConfig::variant_a(double delta1, double delta2) {
  ApigFpConfig config = make_fp_defaults();
  config.b_tilde = 0.0;
  config.eta_g_tilde = ErrorSequence::decade(delta1, delta2);
  config.eta_f_tilde = ErrorSequence::decade(delta1, delta2);
  return config;
}

ApigFpConfig ApigFpConfig::variant_r(double delta1, double delta2, double delta3) {
  ApigFpConfig config = make_fp_defaults();
  config.b_tilde = std::pow(10.0, -delta3);
  config.eta_g_tilde = ErrorSequence::zero();
  config.eta_f_tilde = ErrorSequence::decade(delta1, delta2);
  return config;
}

ApigFpResult apig_fp_run(const NetworkInstance& instance, const ApigFpConfig& config,
                         const Vec& x0) {
  config.validate();
  instance.validate();
  require(x0.size() == instance.M, "x0 dimension mismatch");

  ApigFpResult result;
  Vec x = x0.cwiseMax(0.0);
  double C = config.c0;
  double Ct = config.c0;
  double trial0 = config.base.lambda0;
  const int ls_cap = config.base.ls_trial_cap();
  const double theta = config.base.theta;

  FpState warm;
  warm.beta = Vec::Ones(instance.K);
  warm.p = Vec::Ones(instance.K);

  // Dual evaluation at the current iterate, refined on demand when a trial
  // asks for a tighter residual target than what has been computed so far.
  DualEval x_eval;
  double res_used_x = std::numeric_limits<double>::infinity();

  Vec x_prev, g_prev;

  for (int i = 0; i < config.base.max_outer_iters; ++i) {
    const double etag = config.eta_g_tilde.at(i);
    const double etaf = config.eta_f_tilde.at(i);
    std::uint64_t inner_cost = 0;

    auto refine_x_side = [&](double res_target) {
      if (res_target >= res_used_x) return;
      const std::optional<FpState> start =
          std::isfinite(res_used_x) ? std::optional<FpState>(x_eval.state)
                                    : std::optional<FpState>(warm);
      x_eval = evaluate_dual(instance, x, res_target, config.fp_max_iters, config.mode, start);
      inner_cost += x_eval.fp_iters;
      res_used_x = res_target;
    };

    double lambda = trial0;
    double res = config.res_floor;
    double displacement = 0.0;
    Vec x_lam;
    Vec g_cur;
    double f_i = 0.0, f_lam = 0.0;
    double nu = 0.0;
    bool accepted = false;
    int ell = 0;

    for (; ell <= ls_cap; ++ell) {
      lambda = trial0 * std::pow(config.base.alpha, ell);

      // The residual target depends on the displacement, which depends on the
      // gradient computed under that target; iterate the selection until it
      // stabilizes (pure tightening, so a few rounds suffice).
      res = std::max(etaf, config.res_floor);
      for (int round = 0; round < 4; ++round) {
        refine_x_side(res);
        g_cur = -x_eval.grad;
        x_lam = (x - lambda * g_cur).cwiseMax(0.0);
        displacement = (x_lam - x).norm();
        const double arm =
            std::sqrt(etag * etag + config.b_tilde * config.b_tilde * displacement * displacement);
        const double res_new = std::max(std::min(arm, etaf), config.res_floor);
        if (res_new >= res) break;
        res = res_new;
      }
      f_i = -x_eval.d;

      // A trial point the fixed-point solver cannot reach within its budget
      // (e.g. a wild long step) is rejected by shrinking the stepsize alone:
      // the error constants grow only on certificate failures, not on
      // solver-budget ones. Divergence at the accepted iterate propagates.
      std::optional<DualEval> lam_eval;
      try {
        lam_eval =
            evaluate_dual(instance, x_lam, res, config.fp_max_iters, config.mode, x_eval.state);
      } catch (const FpDivergenceError&) {
        continue;
      }

      inner_cost += lam_eval->fp_iters;
      f_lam = -lam_eval->d;

      const double ups = upsilon1(lambda, 0.0, C * config.b_tilde);
      nu = ups * (C * etag) * (C * etag) + (C + Ct) * etaf;

      if (f_lam <= f_i - theta / lambda * displacement * displacement + nu) {
        accepted = true;
        // The accepted trial point becomes the next iterate; its solve
        // state seeds the next iteration's evaluations.
        warm = lam_eval->state;
        x_eval = *lam_eval;
        break;
      }
      C *= config.varrho;
      Ct *= config.varrho;
    }

    IterationRecord rec;
    rec.i = i;
    if (config.base.store_points) rec.x = x;
    rec.lambda = lambda;
    rec.ls_trials = ell;
    rec.g_norm_mapped = displacement / lambda;
    rec.nu = nu;
    rec.f_inexact = f_i;
    rec.fp_inner_cost = inner_cost;
    result.max_x_norm = std::max(result.max_x_norm, x.norm());

    if (!accepted) {
      rec.delta_g = std::numeric_limits<double>::quiet_NaN();
      result.base.trace.push_back(std::move(rec));
      result.c_trace.push_back(C);
      result.base.x_final = x;
      result.base.status = SolveStatus::LsFailure;
      result.final_c = C;
      return result;
    }

    rec.delta_g = rec.g_norm_mapped +
                  C * std::sqrt(etag * etag +
                                config.b_tilde * config.b_tilde * displacement * displacement);
    result.base.trace.push_back(rec);
    result.c_trace.push_back(C);

    if (rec.delta_g <= config.base.epsilon) {
      result.base.x_final = x;
      result.base.status = SolveStatus::Converged;
      result.final_c = C;
      return result;
    }

    if (i >= 1) {
      const double raw = abb_stepsize(x - x_prev, g_cur - g_prev, i, config.base.lambda_max);
      const double clamped =
          std::min(std::max(raw, config.base.lambda_min), config.base.lambda_max);
      if (clamped != raw) ++result.abb_clamp_events;
      trial0 = clamped;
    }
    x_prev = x;
    g_prev = g_cur;
    x = x_lam;
    res_used_x = res;
  }

  result.base.x_final = x;
  result.base.status = SolveStatus::MaxIters;
  result.final_c = C;
  return result;
}

std::vector<PsgPoint> psg_run(const NetworkInstance& instance, const Vec& x0, double lambda_base,
                              double delta, int max_iters, double res, int cap, ExecMode mode) {
  require(lambda_base > 0.0 && delta > 0.0, "psg requires positive stepsize parameters");
  Vec x = x0.cwiseMax(0.0);
  std::vector<PsgPoint> trace;
  trace.reserve(max_iters);
  std::uint64_t cum = 0;
  std::optional<FpState> warm;
  for (int i = 0; i < max_iters; ++i) {
    DualEval eval = evaluate_dual(instance, x, res, cap, mode, warm);
    cum += eval.fp_iters;
    warm = eval.state;
    trace.push_back({eval.d, cum});
    const double step = lambda_base * std::pow(i + 1.0, -delta);
    x = (x + step * eval.grad).cwiseMax(0.0);
  }
  return trace;
}

}  // namespace apig::bf
