#include "ltt/verify.hpp"

#include <algorithm>
#include <cmath>

#include "ltt/exact.hpp"
#include "ltt/unroll.hpp"

namespace ltt {

namespace {

double rel_gap(double value, double reference) {
  return std::abs(value - reference) / (1.0 + std::abs(reference));
}

void note(SuiteResult& r, double err) {
  r.cases += 1;
  r.worst_error = std::max(r.worst_error, err);
  if (!(err <= r.tolerance)) r.failures += 1;
}

}  // namespace

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double scale) {
  Tensor t(std::move(shape));
  for (double& v : t.data) v = scale * rng.gaussian();
  return t;
}

LearnerProblem random_problem(Rng& rng, const InstanceDims& dims,
                              double feature_scale, double weight_spread) {
  LearnerProblem p;
  p.lambda = dims.lambda;
  p.kernel_size = dims.k;
  p.samples.reserve(dims.m);
  for (std::size_t t = 0; t < dims.m; ++t) {
    BasicSample<double> s;
    s.features = random_tensor(rng, {dims.h, dims.w, dims.c}, feature_scale);
    s.labels = random_tensor(rng, {dims.h, dims.w, dims.d}, 1.0);
    s.weights = Tensor({dims.h, dims.w, dims.d});
    for (double& v : s.weights.data) v = 1.0 + weight_spread * rng.gaussian();
    s.frame_weight = 0.5 + rng.uniform();
    p.samples.push_back(std::move(s));
  }
  return p;
}

SuiteResult run_adjoint_suite(std::uint64_t seed, std::size_t cases) {
  SuiteResult result{.name = "adjoint", .tolerance = kAdjointTol};
  Rng rng(mix_seed(seed, 0xad301));
  for (std::size_t n = 0; n < cases; ++n) {
    const std::size_t h = 1 + rng.uniform_index(10);
    const std::size_t w = 1 + rng.uniform_index(10);
    const std::size_t c = 1 + rng.uniform_index(5);
    const std::size_t d = 1 + rng.uniform_index(5);
    const std::size_t k = 1 + 2 * rng.uniform_index(4);

    const Tensor x = random_tensor(rng, {h, w, c});
    const Tensor u = random_tensor(rng, {h, w, d});
    FilterWeights f(random_tensor(rng, {k, k, c, d}));

    const double lhs = dot(conv2d(x, f), u);
    const double kernel_side = dot(f, conv2d_transpose(u, x, k));
    const double feature_side = dot(x, conv2d_input_adjoint(u, f));
    note(result, rel_gap(kernel_side, lhs));
    note(result, rel_gap(feature_side, lhs));
  }
  return result;
}

SuiteResult run_oracle_suite(std::uint64_t seed, std::size_t cases) {
  SuiteResult result{.name = "oracle", .tolerance = kOracleTol};
  Rng rng(mix_seed(seed, 0x04ac1e));
  const InstanceDims dims;
  for (std::size_t n = 0; n < cases; ++n) {
    const LearnerProblem p = random_problem(rng, dims);
    const FilterWeights tau0 = FilterWeights::zeros(dims.k, dims.c, dims.d);
    const auto [tau_sd, report] = solve_sd(p, tau0, kOracleIterations);
    const FilterWeights tau_primal = solve_primal(p);
    note(result, rel_gap(loss(p, tau_sd), loss(p, tau_primal)));
  }
  return result;
}

SuiteResult run_gradcheck_suite(std::uint64_t seed, std::size_t cases) {
  SuiteResult result{.name = "gradcheck", .tolerance = kGradcheckTol};
  Rng rng(mix_seed(seed, 0x96adc));
  const InstanceDims dims{.h = 4, .w = 4, .c = 2, .d = 2, .k = 3, .m = 2,
                          .lambda = 0.3};
  const std::size_t iters = 3;

  for (std::size_t n = 0; n < cases; ++n) {
    const LearnerProblem p = random_problem(rng, dims, 0.3);
    FilterWeights tau0(random_tensor(rng, {dims.k, dims.k, dims.c, dims.d}, 0.1));
    FilterWeights upstream(random_tensor(rng, {dims.k, dims.k, dims.c, dims.d}));

    const auto [tau_n, tape] = solve_sd_traced(p, tau0, iters);
    (void)tau_n;
    const LearnerGradients grads = backward(tape, upstream);

    const auto objective = [&](const LearnerProblem& problem,
                               const FilterWeights& start) {
      return dot(upstream, solve_sd(problem, start, iters).first);
    };

    // Directional derivative of each input block against central differences.
    const auto check_direction = [&](double analytic, auto&& bump) {
      double h = 1e-5;
      LearnerProblem plus = p, minus = p;
      FilterWeights start_plus = tau0, start_minus = tau0;
      bump(plus, start_plus, h);
      bump(minus, start_minus, -h);
      const double fd =
          (objective(plus, start_plus) - objective(minus, start_minus)) /
          (2.0 * h);
      note(result, rel_gap(analytic, fd));
    };

    for (std::size_t t = 0; t < p.samples.size(); ++t) {
      const Tensor vx = random_tensor(rng, p.samples[t].features.shape);
      check_direction(dot(grads.features[t], vx),
                      [&](LearnerProblem& q, FilterWeights&, double h) {
                        add_scaled(q.samples[t].features, h, vx);
                      });
      const Tensor ve = random_tensor(rng, p.samples[t].labels.shape);
      check_direction(dot(grads.labels[t], ve),
                      [&](LearnerProblem& q, FilterWeights&, double h) {
                        add_scaled(q.samples[t].labels, h, ve);
                      });
      const Tensor vw = random_tensor(rng, p.samples[t].weights.shape);
      check_direction(dot(grads.weights[t], vw),
                      [&](LearnerProblem& q, FilterWeights&, double h) {
                        add_scaled(q.samples[t].weights, h, vw);
                      });
    }
    check_direction(grads.lambda,
                    [&](LearnerProblem& q, FilterWeights&, double h) {
                      q.lambda += h;
                    });
    const Tensor vt = random_tensor(rng, tau0.kernel.shape);
    check_direction(dot(grads.tau0.kernel, vt),
                    [&](LearnerProblem&, FilterWeights& start, double h) {
                      add_scaled(start.kernel, h, vt);
                    });
  }
  return result;
}

SuiteResult run_woodbury_suite(std::uint64_t seed, std::size_t cases) {
  SuiteResult result{.name = "woodbury", .tolerance = kWoodburyTol};
  Rng rng(mix_seed(seed, 0x3000b));
  const InstanceDims dims;
  for (std::size_t n = 0; n < cases; ++n) {
    const LearnerProblem p = random_problem(rng, dims);
    const MatrixizedProblem mp = matrixize(p);
    const FilterWeights primal = solve_primal(mp);
    const FilterWeights dual = solve_dual(mp);
    double worst = 0;
    for (std::size_t i = 0; i < primal.kernel.data.size(); ++i) {
      worst = std::max(worst, std::abs(dual.kernel.data[i] - primal.kernel.data[i]) /
                                  (1.0 + std::abs(primal.kernel.data[i])));
    }
    note(result, worst);
  }
  return result;
}

std::vector<SuiteResult> run_all_suites(std::uint64_t seed, std::size_t cases) {
  return {run_adjoint_suite(seed, cases), run_oracle_suite(seed, cases),
          run_gradcheck_suite(seed, cases), run_woodbury_suite(seed, cases)};
}

}  // namespace ltt
