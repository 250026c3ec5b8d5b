#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "apig/beamforming.hpp"

using namespace apig;
using namespace apig::bf;

namespace {

Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

NetworkInstance scalar_instance(double gamma = 1.0, double p_budget = 2.0) {
  NetworkInstance inst;
  inst.M = inst.K = 1;
  inst.H = CMat::Constant(1, 1, std::complex<double>(1.0, 0.0));
  inst.sigma2 = Vec::Constant(1, 1.0);
  inst.gamma_bar = Vec::Constant(1, gamma);
  inst.p_bar = Vec::Constant(1, p_budget);
  return inst;
}

NetworkInstance orthogonal_instance() {
  NetworkInstance inst;
  inst.M = inst.K = 2;
  inst.H = CMat::Zero(2, 2);
  inst.H(0, 0) = 1.0;
  inst.H(1, 1) = 1.0;
  inst.sigma2 = make_vec({1.0, 2.0});
  inst.gamma_bar = make_vec({1.5, 0.5});
  inst.p_bar = make_vec({10.0, 10.0});
  return inst;
}

NetworkInstance draw_feasible(int M, int K, double gamma, double p_budget, std::uint64_t seed) {
  for (std::uint64_t s = seed; s < seed + 50; ++s) {
    NetworkInstance inst = random_instance(M, K, gamma, p_budget, 1.0, s);
    try {
      solve_fp_stage1(inst, Vec::Zero(M), Vec::Ones(K), 1e-6, 3000);
      return inst;
    } catch (const FpDivergenceError&) {
    }
  }
  throw std::runtime_error("no feasible instance found");
}

}  // namespace

TEST_CASE("thompson metric basics") {
  CHECK(thompson_metric(make_vec({1, 1}), make_vec({1, 1})) == doctest::Approx(0.0));
  CHECK(thompson_metric(make_vec({std::exp(1.0), 1}), make_vec({1, 1})) == doctest::Approx(1.0));
  CHECK(thompson_metric(make_vec({2, 3}), make_vec({1, 6})) == doctest::Approx(std::log(2.0)));

  CHECK_THROWS_AS(thompson_metric(make_vec({0.0, 1}), make_vec({1, 1})), std::invalid_argument);
  CHECK_THROWS_AS(thompson_metric(make_vec({1, 1}), make_vec({1})), std::invalid_argument);
}

TEST_CASE("mapping I scalar closed form") {
  // closed form (gamma/(gamma+1)) (1 + beta + x) at M = K = 1, h = 1
  const auto inst = scalar_instance();
  CHECK(mapping_I(inst, make_vec({0.0}), make_vec({1.0}))[0] == doctest::Approx(1.0));
  CHECK(mapping_I(inst, make_vec({0.0}), make_vec({1e-14}))[0] == doctest::Approx(0.5));
  CHECK(mapping_I(inst, make_vec({1.0}), make_vec({1.0}))[0] == doctest::Approx(1.5));

  CHECK_THROWS_AS(mapping_I(inst, make_vec({0.0}), make_vec({1.0, 2.0})),
                  std::invalid_argument);
}

TEST_CASE("mapping J") {
  SUBCASE("scalar instance") {
    const auto inst = scalar_instance();
    CHECK(mapping_J(inst, make_vec({0.0}), make_vec({1.0}), make_vec({2.0}))[0] ==
          doctest::Approx(1.0));
  }
  SUBCASE("orthogonal channels decouple the users") {
    const auto inst = orthogonal_instance();
    const Vec beta = make_vec({0.7, 0.9});
    const Vec x = Vec::Zero(2);
    const Vec p1 = make_vec({1.0, 5.0});
    const Vec p2 = make_vec({9.0, 0.3});
    const Vec j1 = mapping_J(inst, x, beta, p1);
    const Vec j2 = mapping_J(inst, x, beta, p2);
    CHECK(j1.isApprox(j2));
    CHECK(j1[0] == doctest::Approx(inst.gamma_bar[0] * inst.sigma2[0]));
    CHECK(j1[1] == doctest::Approx(inst.gamma_bar[1] * inst.sigma2[1]));
  }
  SUBCASE("sub-homogeneity") {
    const auto inst = draw_feasible(3, 3, 1.2, 10.0, 11);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(0.1, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
      Vec beta(3), p(3);
      for (int k = 0; k < 3; ++k) {
        beta[k] = unif(rng);
        p[k] = unif(rng);
      }
      const double alpha = 1.0 + unif(rng);
      const Vec lhs = mapping_J(inst, Vec::Zero(3), beta, Vec(alpha * p));
      const Vec rhs = alpha * mapping_J(inst, Vec::Zero(3), beta, p);
      CHECK((lhs.array() <= rhs.array() + 1e-12).all());
    }
  }
  SUBCASE("affine in p") {
    const auto inst = draw_feasible(3, 3, 1.2, 10.0, 12);
    const Vec beta = make_vec({0.5, 1.0, 0.8});
    const Vec p = make_vec({1.0, 2.0, 0.5});
    const Vec q = make_vec({0.4, 0.1, 3.0});
    for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const Vec mix = mapping_J(inst, Vec::Zero(3), beta, Vec(alpha * p + (1 - alpha) * q));
      const Vec expect = alpha * mapping_J(inst, Vec::Zero(3), beta, p) +
                         (1 - alpha) * mapping_J(inst, Vec::Zero(3), beta, q);
      CHECK((mix - expect).norm() <= 1e-10 * (1.0 + expect.norm()));
    }
  }
}

TEST_CASE("beamformer normalization") {
  const auto inst = scalar_instance();
  const CVec u = beamformer_u(inst, make_vec({0.0}), make_vec({1.0}), 0);
  CHECK(std::abs(u[0]) == doctest::Approx(1.0));

  const auto big = draw_feasible(4, 4, 1.5, 10.0, 3);
  // with x = 0 and beta ~ 0 the coupling matrix is the identity
  const Vec tiny = Vec::Constant(4, 1e-14);
  for (int k = 0; k < 4; ++k) {
    const CVec uk = beamformer_u(big, Vec::Zero(4), tiny, k);
    CHECK(std::abs(uk.norm() - 1.0) < 1e-12);
    const CVec expect = big.H.col(k) / big.H.col(k).norm();
    CHECK((uk - expect).norm() < 1e-10);
  }
}

TEST_CASE("fixed-point stage 1") {
  SUBCASE("scalar fixed point") {
    const auto inst = scalar_instance();
    auto out = solve_fp_stage1(inst, make_vec({0.0}), make_vec({0.5}), 1e-12, 10000);
    CHECK(out.value[0] == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("infinite tolerance stops after one application") {
    const auto inst = scalar_instance();
    auto out = solve_fp_stage1(inst, make_vec({0.0}), make_vec({0.5}),
                               std::numeric_limits<double>::infinity(), 10000);
    CHECK(out.iters == 1);
    CHECK(out.value[0] == doctest::Approx(mapping_I(inst, make_vec({0.0}), make_vec({0.5}))[0]));
  }
  SUBCASE("residuals contract monotonically") {
    const auto inst = draw_feasible(4, 4, 1.5, 10.0, 21);
    Vec beta = Vec::Ones(4);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 40; ++it) {
      const Vec next = mapping_I(inst, Vec::Zero(4), beta);
      const double res = thompson_metric(beta, next);
      if (it >= 2) CHECK(res <= prev + 1e-14);
      prev = res;
      beta = next;
    }
  }
  SUBCASE("cap exceeded raises divergence") {
    // one antenna cannot serve two users at these targets
    NetworkInstance inst;
    inst.M = 1;
    inst.K = 2;
    inst.H = CMat::Constant(1, 2, std::complex<double>(1.0, 0.0));
    inst.H(0, 1) = std::complex<double>(0.8, 0.3);
    inst.sigma2 = make_vec({1.0, 1.0});
    inst.gamma_bar = make_vec({3.0, 3.0});
    inst.p_bar = make_vec({10.0});
    CHECK_THROWS_AS(solve_fp_stage1(inst, Vec::Zero(1), Vec::Ones(2), 1e-10, 2000),
                    FpDivergenceError);
  }
}

TEST_CASE("fixed-point stage 2") {
  SUBCASE("scalar instance converges to the primal power") {
    const auto inst = scalar_instance();
    auto beta = solve_fp_stage1(inst, make_vec({0.0}), make_vec({0.5}), 1e-13, 10000);
    auto out = solve_fp_stage2(inst, make_vec({0.0}), beta.value, make_vec({3.0}), 1e-12, 10000);
    CHECK(out.value[0] == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("orthogonal channels converge in two applications") {
    const auto inst = orthogonal_instance();
    const Vec beta = make_vec({0.7, 0.9});
    auto out = solve_fp_stage2(inst, Vec::Zero(2), beta, make_vec({5.0, 5.0}), 1e-12, 10000);
    CHECK(out.iters <= 2);
  }
  SUBCASE("infinite tolerance stops after one application") {
    const auto inst = scalar_instance();
    auto out = solve_fp_stage2(inst, make_vec({0.0}), make_vec({1.0}), make_vec({3.0}),
                               std::numeric_limits<double>::infinity(), 10000);
    CHECK(out.iters == 1);
  }
}

TEST_CASE("dual value") {
  const auto inst = scalar_instance();
  CHECK(dual_value_tilde(inst, make_vec({1.0}), make_vec({0.0})) == doctest::Approx(1.0));
  CHECK(dual_value_tilde(inst, make_vec({1.0}), make_vec({0.5})) == doctest::Approx(0.0));
  CHECK(dual_value_tilde(inst, make_vec({1e-12}), make_vec({1.0})) == doctest::Approx(-2.0));
}

TEST_CASE("dual gradient") {
  SUBCASE("scalar examples") {
    const auto inst = scalar_instance();
    const Vec g = dual_gradient_tilde(inst, make_vec({1.0}), make_vec({1.0}), make_vec({0.0}));
    CHECK(g[0] == doctest::Approx(-1.0));

    auto budget_active = scalar_instance(1.0, 1.0);  // budget equals the realized power
    const Vec g2 =
        dual_gradient_tilde(budget_active, make_vec({1.0}), make_vec({1.0}), make_vec({0.0}));
    CHECK(g2[0] == doctest::Approx(0.0));
  }
  SUBCASE("matches central differences of the dual value") {
    const auto inst = draw_feasible(3, 3, 1.2, 10.0, 31);
    const Vec x = Vec::Constant(3, 0.1);
    const double res = 1e-13;
    auto dual_at = [&](const Vec& point) {
      auto s1 = solve_fp_stage1(inst, point, Vec::Ones(3), res, 200000);
      return dual_value_tilde(inst, s1.value, point);
    };
    auto s1 = solve_fp_stage1(inst, x, Vec::Ones(3), res, 200000);
    auto s2 = solve_fp_stage2(inst, x, s1.value, Vec::Ones(3), res, 200000);
    const Vec g = dual_gradient_tilde(inst, s1.value, s2.value, x);

    const double delta = 1e-5;
    for (int m = 0; m < 3; ++m) {
      Vec hi = x, lo = x;
      hi[m] += delta;
      lo[m] -= delta;
      const double fd = (dual_at(hi) - dual_at(lo)) / (2.0 * delta);
      CHECK(std::abs(fd - g[m]) <= 1e-4 * (1.0 + std::abs(g[m])));
    }
  }
}

TEST_CASE("primal recovery") {
  SUBCASE("scalar optimum") {
    const auto inst = scalar_instance();
    auto sol = recover_primal(inst, make_vec({1.0}), make_vec({1.0}), make_vec({0.0}));
    CHECK(std::abs(sol.beamformers[0][0]) == doctest::Approx(1.0));
    CHECK(sol.realized_powers[0] == doctest::Approx(1.0));
    CHECK(sol.sinrs[0] == doctest::Approx(1.0));
  }
  SUBCASE("SINR targets are met with equality at the fixed point") {
    for (std::uint64_t seed : {41, 42, 43}) {
      const auto inst = draw_feasible(4, 4, 2.0, 20.0, seed);
      const Vec x = Vec::Constant(4, 0.05);
      auto s1 = solve_fp_stage1(inst, x, Vec::Ones(4), 1e-13, 200000);
      auto s2 = solve_fp_stage2(inst, x, s1.value, Vec::Ones(4), 1e-13, 200000);
      auto sol = recover_primal(inst, s1.value, s2.value, x);
      for (int k = 0; k < 4; ++k) {
        CHECK(sol.sinrs[k] == doctest::Approx(inst.gamma_bar[k]).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("dual solver on the scalar instance") {
  // slack budget: the multiplier stays at zero and the run stops immediately
  const auto inst = scalar_instance(1.0, 2.0);
  auto config = ApigFpConfig::pg_baseline();
  auto res = apig_fp_run(inst, config, Vec::Zero(1));
  CHECK(res.base.status == SolveStatus::Converged);
  CHECK(res.base.x_final[0] == doctest::Approx(0.0));
  CHECK(res.base.trace.size() == 1);
}

TEST_CASE("active power constraint satisfies complementarity") {
  const auto base = draw_feasible(2, 2, 1.5, 100.0, 51);
  // find the unconstrained per-antenna powers, then choke one antenna
  auto s1 = solve_fp_stage1(base, Vec::Zero(2), Vec::Ones(2), 1e-12, 200000);
  auto s2 = solve_fp_stage2(base, Vec::Zero(2), s1.value, Vec::Ones(2), 1e-12, 200000);
  auto unconstrained = recover_primal(base, s1.value, s2.value, Vec::Zero(2));

  NetworkInstance inst = base;
  const int hot = unconstrained.realized_powers[0] > unconstrained.realized_powers[1] ? 0 : 1;
  inst.p_bar[hot] = 0.9 * unconstrained.realized_powers[hot];
  inst.p_bar[1 - hot] = 2.0 * unconstrained.realized_powers[1 - hot];

  auto res = apig_fp_run(inst, ApigFpConfig::reference(1e-8), Vec::Zero(2));
  REQUIRE(res.base.status == SolveStatus::Converged);
  const Vec& x = res.base.x_final;
  CHECK(x[hot] > 1e-6);

  auto eval = evaluate_dual(inst, x, 1e-13, 200000);
  auto sol = recover_primal(inst, eval.state.beta, eval.state.p, x);
  CHECK(std::abs(sol.realized_powers[hot] - inst.p_bar[hot]) <= 1e-5 * inst.p_bar[hot]);
  CHECK(sol.realized_powers[1 - hot] <= inst.p_bar[1 - hot] + 1e-6);

  // strong duality: total transmit power equals the dual value
  const double total = sol.realized_powers.sum();
  CHECK(std::abs(total - eval.d) <= 1e-6 * (1.0 + std::abs(eval.d)));
}

TEST_CASE("projected subgradient ascent") {
  SUBCASE("stays at the optimum when the budget is slack") {
    const auto inst = scalar_instance(1.0, 2.0);
    auto trace = psg_run(inst, Vec::Zero(1), 0.1, 0.5, 20, 1e-10, 100000);
    CHECK(trace.size() == 20);
    for (const auto& pt : trace) CHECK(pt.dual_value == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("best-so-far dual value is nondecreasing") {
    const auto inst = draw_feasible(3, 3, 1.5, 4.0, 61);
    auto trace = psg_run(inst, Vec::Zero(3), 0.1, 0.5, 50, 1e-10, 100000);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& pt : trace) {
      const double prev = best;
      best = std::max(best, pt.dual_value);
      CHECK(best >= prev);
    }
    CHECK(trace.back().cum_fp_iters > 0);
  }
}

TEST_CASE("instance JSON round-trip") {
  const auto inst = draw_feasible(3, 2, 1.5, 8.0, 71);
  const nlohmann::json j = instance_to_json(inst);
  const NetworkInstance back = instance_from_json(j);
  CHECK(back.M == inst.M);
  CHECK(back.K == inst.K);
  CHECK((back.H - inst.H).norm() == doctest::Approx(0.0));
  CHECK(back.sigma2.isApprox(inst.sigma2));
  CHECK(back.gamma_bar.isApprox(inst.gamma_bar));
  CHECK(back.p_bar.isApprox(inst.p_bar));
}

TEST_CASE("instance validation") {
  NetworkInstance inst = scalar_instance();
  inst.sigma2[0] = 0.0;
  CHECK_THROWS_AS(inst.validate(), std::invalid_argument);
  inst = scalar_instance();
  inst.gamma_bar[0] = -1.0;
  CHECK_THROWS_AS(inst.validate(), std::invalid_argument);
  inst = scalar_instance();
  inst.H.resize(2, 2);
  CHECK_THROWS_AS(inst.validate(), std::invalid_argument);
}
