#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltt/learner.hpp"
#include "ltt/rng.hpp"

namespace ltt {

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst_error = 0;
  double tolerance = 0;

  bool passed() const { return failures == 0; }
};

// Dimensions of the seeded verification instances.
struct InstanceDims {
  std::size_t h = 8, w = 8, c = 4, d = 3, k = 3, m = 2;
  double lambda = 0.1;
};

// Seeded random problem. The feature scale keeps the per-channel normal
// matrix within a couple of orders of magnitude of lambda, which bounds the
// condition number seen by fixed-count steepest descent; importance weights
// hover around one with a mild spread and occasional sign flips.
LearnerProblem random_problem(Rng& rng, const InstanceDims& dims,
                              double feature_scale = 0.05,
                              double weight_spread = 0.3);

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape,
                     double scale = 1.0);

inline constexpr double kAdjointTol = 1e-10;
inline constexpr double kMatrixizeTol = 1e-12;
inline constexpr double kOracleTol = 1e-6;
inline constexpr double kGradcheckTol = 1e-5;
inline constexpr double kWoodburyTol = 1e-8;
inline constexpr std::size_t kOracleIterations = 100;

// |<x*f, u> - <f, x *' u>| / (1 + |<x*f, u>|) over random shapes, for both
// the kernel-side and the feature-side adjoint.
SuiteResult run_adjoint_suite(std::uint64_t seed, std::size_t cases);

// Loss gap |L(sd_100) - L(primal)| / (1 + L(primal)) on the seeded suite.
SuiteResult run_oracle_suite(std::uint64_t seed, std::size_t cases);

// Directional finite differences against the unrolled backward pass, all
// five input blocks.
SuiteResult run_gradcheck_suite(std::uint64_t seed, std::size_t cases);

// Coordinate-wise primal/dual agreement on the seeded suite.
SuiteResult run_woodbury_suite(std::uint64_t seed, std::size_t cases);

std::vector<SuiteResult> run_all_suites(std::uint64_t seed, std::size_t cases);

}  // namespace ltt
