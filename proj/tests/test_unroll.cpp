#include <doctest.h>

#include <cstring>

#include "ltt/unroll.hpp"
#include "ltt/verify.hpp"
#include "support.hpp"

using namespace ltt;
using testsupport::rel_gap;
using testsupport::scalar_filter;
using testsupport::scalar_problem;

TEST_SUITE_BEGIN("unroll");

TEST_CASE("zero iterations: empty tape, identity backward") {
  Rng rng(201);
  const InstanceDims dims{.h = 3, .w = 3, .c = 2, .d = 2, .k = 3, .m = 2,
                          .lambda = 0.1};
  const LearnerProblem p = random_problem(rng, dims);
  const FilterWeights tau0(random_tensor(rng, {dims.k, dims.k, dims.c, dims.d}));
  const auto [tau, tape] = solve_sd_traced(p, tau0, 0);
  CHECK(tape.steps.empty());
  CHECK(tau.kernel.data == tau0.kernel.data);

  const FilterWeights upstream(
      random_tensor(rng, {dims.k, dims.k, dims.c, dims.d}));
  const LearnerGradients g = backward(tape, upstream);
  CHECK(g.tau0.kernel.data == upstream.kernel.data);
  CHECK(g.lambda == 0.0);
  for (const auto& t : g.features)
    for (double v : t.data) CHECK(v == 0.0);
  for (const auto& t : g.labels)
    for (double v : t.data) CHECK(v == 0.0);
  for (const auto& t : g.weights)
    for (double v : t.data) CHECK(v == 0.0);
}

TEST_CASE("tracing does not change the arithmetic") {
  Rng rng(203);
  const InstanceDims dims{.h = 4, .w = 5, .c = 2, .d = 3, .k = 3, .m = 2,
                          .lambda = 0.2};
  const LearnerProblem p = random_problem(rng, dims);
  const FilterWeights tau0(random_tensor(rng, {dims.k, dims.k, dims.c, dims.d}, 0.1));

  const FilterWeights plain = solve_sd(p, tau0, 6).first;
  const auto [traced, tape] = solve_sd_traced(p, tau0, 6);
  CHECK(std::memcmp(plain.kernel.data.data(), traced.kernel.data.data(),
                    plain.kernel.data.size() * sizeof(double)) == 0);

  const FilterWeights replayed = replay(tape);
  CHECK(std::memcmp(replayed.kernel.data.data(), traced.kernel.data.data(),
                    plain.kernel.data.size() * sizeof(double)) == 0);
  CHECK(tape.steps.size() == 6);
}

TEST_CASE("scalar unrolled step matches the hand formula") {
  // x = w = e = 1, tau0 = 0, one iteration: tau1 = 1 / (1 + lambda).
  for (double lambda : {0.25, 0.5, 1.0, 2.0}) {
    const LearnerProblem p = scalar_problem(1.0, 1.0, 1.0, lambda);
    const auto [tau, tape] = solve_sd_traced(p, scalar_filter(0.0), 1);
    CHECK(rel_gap(tau.kernel.data[0], 1.0 / (1.0 + lambda)) <= 1e-14);
  }
}

TEST_CASE("scalar derivative with respect to lambda") {
  const LearnerProblem p = scalar_problem(1.0, 1.0, 1.0, 1.0);
  const auto [tau, tape] = solve_sd_traced(p, scalar_filter(0.0), 1);
  const LearnerGradients g = backward(tape, scalar_filter(1.0));
  // d/dlambda of 1/(1+lambda) at lambda = 1.
  CHECK(std::abs(g.lambda - (-0.25)) <= 1e-10);
}

TEST_CASE("all gradient blocks pass the finite-difference suite") {
  const SuiteResult r = run_gradcheck_suite(777, 10);
  CHECK(r.failures == 0);
  CHECK(r.worst_error <= kGradcheckTol);
}

TEST_CASE("backward is linear in the upstream cotangent") {
  Rng rng(207);
  const InstanceDims dims{.h = 4, .w = 4, .c = 2, .d = 2, .k = 3, .m = 2,
                          .lambda = 0.3};
  const LearnerProblem p = random_problem(rng, dims, 0.3);
  const FilterWeights tau0(random_tensor(rng, {dims.k, dims.k, dims.c, dims.d}, 0.1));
  const auto [tau, tape] = solve_sd_traced(p, tau0, 3);

  const FilterWeights u1(random_tensor(rng, tau0.kernel.shape));
  const FilterWeights u2(random_tensor(rng, tau0.kernel.shape));
  const double a = 0.7, b = -1.3;
  FilterWeights mix = u1;
  scale(mix.kernel, a);
  add_scaled(mix.kernel, b, u2.kernel);

  const LearnerGradients gm = backward(tape, mix);
  const LearnerGradients g1 = backward(tape, u1);
  const LearnerGradients g2 = backward(tape, u2);

  const auto check_combo = [&](const Tensor& m, const Tensor& t1, const Tensor& t2) {
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      CHECK(rel_gap(m.data[i], a * t1.data[i] + b * t2.data[i]) <= 1e-12);
    }
  };
  for (std::size_t t = 0; t < p.samples.size(); ++t) {
    check_combo(gm.features[t], g1.features[t], g2.features[t]);
    check_combo(gm.labels[t], g1.labels[t], g2.labels[t]);
    check_combo(gm.weights[t], g1.weights[t], g2.weights[t]);
  }
  check_combo(gm.tau0.kernel, g1.tau0.kernel, g2.tau0.kernel);
  CHECK(rel_gap(gm.lambda, a * g1.lambda + b * g2.lambda) <= 1e-12);
}

TEST_CASE("zero upstream gives exactly zero gradients") {
  Rng rng(211);
  const InstanceDims dims{.h = 3, .w = 3, .c = 1, .d = 2, .k = 1, .m = 1,
                          .lambda = 0.4};
  const LearnerProblem p = random_problem(rng, dims);
  const auto [tau, tape] =
      solve_sd_traced(p, FilterWeights::zeros(dims.k, dims.c, dims.d), 4);
  const LearnerGradients g =
      backward(tape, FilterWeights::zeros(dims.k, dims.c, dims.d));
  CHECK(g.lambda == 0.0);
  for (double v : g.tau0.kernel.data) CHECK(v == 0.0);
  for (const auto& t : g.features)
    for (double v : t.data) CHECK(v == 0.0);
}

TEST_CASE("upstream shape mismatch is rejected") {
  const LearnerProblem p = scalar_problem(1.0, 1.0, 1.0, 1.0);
  const auto [tau, tape] = solve_sd_traced(p, scalar_filter(0.0), 1);
  CHECK_THROWS_AS(backward(tape, FilterWeights::zeros(3, 1, 1)), dim_error);
}

TEST_SUITE_END();
