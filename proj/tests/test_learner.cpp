#include <doctest.h>

#include <cstring>

#include "ltt/exact.hpp"
#include "ltt/learner.hpp"
#include "ltt/unroll.hpp"
#include "ltt/verify.hpp"
#include "support.hpp"

using namespace ltt;
using testsupport::rel_gap;
using testsupport::scalar_filter;
using testsupport::scalar_problem;

TEST_SUITE_BEGIN("learner");

TEST_CASE("loss of the zero filter is half the squared labels") {
  const LearnerProblem p = scalar_problem(1.0, 3.0, 1.0, 0.7);
  CHECK(loss(p, scalar_filter(0.0)) == doctest::Approx(4.5).epsilon(1e-14));
}

TEST_CASE("zero residual leaves only the ridge term") {
  Rng rng(41);
  LearnerProblem p;
  p.lambda = 0.4;
  p.kernel_size = 3;
  TrainingSample s;
  s.features = random_tensor(rng, {5, 5, 2});
  s.weights = testsupport::filled({5, 5, 2}, 1.0);
  FilterWeights tau(random_tensor(rng, {3, 3, 2, 2}));
  s.labels = conv2d(s.features, tau);
  p.samples.push_back(std::move(s));
  const double want = 0.5 * p.lambda * norm_sq(tau);
  CHECK(rel_gap(loss(p, tau), want) <= 1e-12);
}

TEST_CASE("loss matches the matrixized evaluation") {
  Rng rng(43);
  const InstanceDims dims{.h = 4, .w = 4, .c = 2, .d = 3, .k = 3, .m = 2,
                          .lambda = 0.2};
  for (int n = 0; n < 10; ++n) {
    const LearnerProblem p = random_problem(rng, dims, 0.6);
    const MatrixizedProblem mp = matrixize(p);
    const FilterWeights tau(random_tensor(rng, {dims.k, dims.k, dims.c, dims.d}));
    CHECK(rel_gap(loss(p, tau), matrixized_loss(mp, tau)) <= 1e-12);
  }
}

TEST_CASE("scalar gradient") {
  const LearnerProblem p = scalar_problem(2.0, 6.0, 1.0, 0.0);
  const FilterWeights g = gradient(p, scalar_filter(0.0));
  CHECK(g.kernel.data[0] == doctest::Approx(-12.0).epsilon(1e-14));
}

TEST_CASE("gradient vanishes at zero residual with zero filter") {
  LearnerProblem p = scalar_problem(2.0, 0.0, 1.0, 0.0);
  const FilterWeights g = gradient(p, scalar_filter(0.0));
  CHECK(g.kernel.data[0] == 0.0);
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(47);
  const InstanceDims dims{.h = 4, .w = 4, .c = 2, .d = 2, .k = 3, .m = 2,
                          .lambda = 0.15};
  const LearnerProblem p = random_problem(rng, dims, 0.5);
  FilterWeights tau(random_tensor(rng, {dims.k, dims.k, dims.c, dims.d}, 0.4));
  const FilterWeights g = gradient(p, tau);

  double max_abs = 0;
  for (double v : tau.kernel.data) max_abs = std::max(max_abs, std::abs(v));
  const double h = 1e-5 * (1.0 + max_abs);
  for (std::size_t i = 0; i < tau.kernel.data.size(); ++i) {
    FilterWeights plus = tau, minus = tau;
    plus.kernel.data[i] += h;
    minus.kernel.data[i] -= h;
    const double fd = (loss(p, plus) - loss(p, minus)) / (2.0 * h);
    CHECK(rel_gap(g.kernel.data[i], fd) <= 1e-6);
  }
}

TEST_CASE("scalar step lengths") {
  SUBCASE("x=2 e=6") {
    const LearnerProblem p = scalar_problem(2.0, 6.0, 1.0, 0.0);
    const auto alpha = step_length(p, gradient(p, scalar_filter(0.0)));
    REQUIRE(alpha.has_value());
    CHECK(*alpha == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("x=1 e=1 lambda=1") {
    const LearnerProblem p = scalar_problem(1.0, 1.0, 1.0, 1.0);
    const auto alpha = step_length(p, gradient(p, scalar_filter(0.0)));
    REQUIRE(alpha.has_value());
    CHECK(*alpha == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("ridge-only step length is 1/lambda") {
  Rng rng(53);
  const InstanceDims dims{.h = 3, .w = 3, .c = 2, .d = 2, .k = 3, .m = 2,
                          .lambda = 0.8};
  LearnerProblem p = random_problem(rng, dims);
  for (auto& s : p.samples) s.frame_weight = 0.0;
  const FilterWeights g(random_tensor(rng, {dims.k, dims.k, dims.c, dims.d}));
  const auto alpha = step_length(p, g);
  REQUIRE(alpha.has_value());
  CHECK(rel_gap(*alpha, 1.0 / p.lambda) <= 1e-12);
}

TEST_CASE("zero gradient signals convergence") {
  const LearnerProblem p = scalar_problem(1.0, 1.0, 1.0, 1.0);
  CHECK_FALSE(step_length(p, scalar_filter(0.0)).has_value());
}

TEST_CASE("one exact step solves a 1-D quadratic") {
  SUBCASE("lambda = 0") {
    const LearnerProblem p = scalar_problem(2.0, 6.0, 1.0, 0.0);
    const auto [tau, report] = solve_sd(p, scalar_filter(0.0), 1);
    CHECK(std::abs(tau.kernel.data[0] - 3.0) <= 1e-12);
    CHECK(report.iterations_run == 1);
  }
  SUBCASE("lambda = 1") {
    const LearnerProblem p = scalar_problem(1.0, 1.0, 1.0, 1.0);
    const auto [tau, report] = solve_sd(p, scalar_filter(0.0), 1);
    CHECK(std::abs(tau.kernel.data[0] - 0.5) <= 1e-12);
  }
}

TEST_CASE("zero iterations return the start point with an empty trace") {
  Rng rng(59);
  const InstanceDims dims{.h = 3, .w = 4, .c = 2, .d = 2, .k = 3, .m = 1,
                          .lambda = 0.1};
  const LearnerProblem p = random_problem(rng, dims);
  const FilterWeights tau0(random_tensor(rng, {3, 3, 2, 2}));
  const auto [tau, report] = solve_sd(p, tau0, 0);
  CHECK(tau.kernel.data == tau0.kernel.data);
  CHECK(report.iterations.empty());
  CHECK(report.iterations_run == 0);
}

TEST_CASE("early stop at an exact optimum") {
  // Zero labels with lambda > 0 make tau = 0 the optimum; the first
  // iteration sees a zero gradient and must stop.
  LearnerProblem p = scalar_problem(2.0, 0.0, 1.0, 0.5);
  const auto [tau, report] = solve_sd(p, scalar_filter(0.0), 10);
  CHECK(report.converged);
  CHECK(report.iterations_run == 0);
  CHECK(report.iterations.size() == 1);
  CHECK(report.iterations.back().alpha == 0.0);
  CHECK(tau.kernel.data[0] == 0.0);
}

TEST_CASE("loss trace is non-increasing on seeded instances") {
  Rng rng(61);
  const InstanceDims dims;
  for (int n = 0; n < 10; ++n) {
    const LearnerProblem p = random_problem(rng, dims);
    const auto [tau, report] =
        solve_sd(p, FilterWeights::zeros(dims.k, dims.c, dims.d), 30);
    for (std::size_t i = 1; i < report.iterations.size(); ++i) {
      CHECK(report.iterations[i].loss <=
            report.iterations[i - 1].loss + 1e-12 * (1.0 + report.iterations[i - 1].loss));
    }
    CHECK(report.final_loss <=
          report.iterations.back().loss + 1e-12 * (1.0 + report.iterations.back().loss));
    for (const auto& it : report.iterations) CHECK(it.alpha >= 0.0);
  }
}

TEST_CASE("exact line search beats perturbed step lengths") {
  Rng rng(67);
  const InstanceDims dims{.h = 5, .w = 5, .c = 3, .d = 2, .k = 3, .m = 2,
                          .lambda = 0.1};
  const LearnerProblem p = random_problem(rng, dims);
  const auto [tau_final, tape] =
      solve_sd_traced(p, FilterWeights::zeros(dims.k, dims.c, dims.d), 15);
  (void)tau_final;
  for (const TapeStep& step : tape.steps) {
    const double base = loss(p, step.tau);
    FilterWeights stepped = step.tau;
    add_scaled(stepped.kernel, -step.alpha, step.grad.kernel);
    const double at_alpha = loss(p, stepped);
    for (double c : {0.5, 0.9, 1.1, 1.5}) {
      FilterWeights other = step.tau;
      add_scaled(other.kernel, -c * step.alpha, step.grad.kernel);
      const double at_other = loss(p, other);
      CHECK(at_alpha <= at_other + 1e-12 * (1.0 + base));
    }
  }
}

TEST_CASE("warm starting splits exactly") {
  Rng rng(71);
  const InstanceDims dims{.h = 4, .w = 4, .c = 2, .d = 2, .k = 3, .m = 2,
                          .lambda = 0.2};
  const LearnerProblem p = random_problem(rng, dims);
  const FilterWeights tau0(random_tensor(rng, {dims.k, dims.k, dims.c, dims.d}, 0.2));

  const FilterWeights a = solve_sd(p, tau0, 3).first;
  const FilterWeights ab = solve_sd(p, a, 4).first;
  const FilterWeights direct = solve_sd(p, tau0, 7).first;
  REQUIRE(ab.kernel.data.size() == direct.kernel.data.size());
  CHECK(std::memcmp(ab.kernel.data.data(), direct.kernel.data.data(),
                    ab.kernel.data.size() * sizeof(double)) == 0);
}

TEST_CASE("non-finite intermediates are reported with the iteration") {
  const LearnerProblem p = scalar_problem(1e200, 1.0, 1.0, 0.0);
  CHECK_THROWS_WITH_AS(solve_sd(p, scalar_filter(0.0), 2),
                       doctest::Contains("iteration"), numeric_error);
}

TEST_CASE("validation rejects inconsistent problems") {
  LearnerProblem p = scalar_problem(1.0, 1.0, 1.0, 0.5);
  SUBCASE("negative frame weight") {
    p.samples[0].frame_weight = -1.0;
    CHECK_THROWS_AS(validate(p), dim_error);
  }
  SUBCASE("negative lambda") {
    p.lambda = -0.1;
    CHECK_THROWS_AS(validate(p), dim_error);
  }
  SUBCASE("even kernel") {
    p.kernel_size = 2;
    CHECK_THROWS_AS(validate(p), dim_error);
  }
  SUBCASE("weight shape mismatch") {
    p.samples[0].weights = Tensor({1, 1, 2});
    CHECK_THROWS_AS(validate(p), dim_error);
  }
  SUBCASE("filter mismatch") {
    CHECK_THROWS_AS(loss(p, FilterWeights::zeros(3, 1, 1)), dim_error);
  }
}

TEST_SUITE_END();
