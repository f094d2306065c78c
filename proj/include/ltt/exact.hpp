#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "ltt/learner.hpp"
#include "ltt/tensor.hpp"

namespace ltt {

// Dense matrix form of the learner problem. The convolution x_t * f is
// written as X_t vec(f); because every output channel sees the same feature
// patches, one patch matrix X of size (H*W*M) x (K^2*C) serves all D output
// channels. Global frame weights are folded into the diagonal weights as
// sqrt(gamma_t), so W^2 carries gamma exactly once.
//
// Index conventions (row-major throughout):
//   row  = (t*H + i)*W + j
//   col  = (ki*K + kj)*C + c
//   vec(f) per output channel d follows the same (ki, kj, c) order.
struct MatrixizedProblem {
  Eigen::MatrixXd patches;  // (H*W*M) x (K^2*C)
  Eigen::MatrixXd weights;  // (H*W*M) x D, column d = diag of W_d
  Eigen::MatrixXd labels;   // (H*W*M) x D
  double lambda = 0;
  std::size_t h = 0, w = 0, c = 0, d = 0, k = 0, m = 0;
};

// Entry budget for dense materialization, counted on the joint system
// (H*W*D*M) x (K^2*C*D). Exceeding it raises capacity_error.
inline constexpr std::uint64_t kDefaultEntryBudget = 50'000'000;

MatrixizedProblem matrixize(const LearnerProblem& problem,
                            std::uint64_t entry_budget = kDefaultEntryBudget);

// 1/2 |W (X vec(f) - e)|^2 + lambda/2 |vec(f)|^2, summed over output
// channels. Matches loss() on the tensor path.
double matrixized_loss(const MatrixizedProblem& mp, const FilterWeights& tau);

// Normal-equation solution (X' W^2 X + lambda I)^-1 X' W^2 e, one system of
// size K^2*C per output channel. Requires lambda > 0.
FilterWeights solve_primal(const MatrixizedProblem& mp);
FilterWeights solve_primal(const LearnerProblem& problem,
                           std::uint64_t entry_budget = kDefaultEntryBudget);

// Equivalent dual solution X' W (W X X' W + lambda I)^-1 W e, one system of
// size H*W*M per output channel. Requires lambda > 0.
FilterWeights solve_dual(const MatrixizedProblem& mp);
FilterWeights solve_dual(const LearnerProblem& problem,
                         std::uint64_t entry_budget = kDefaultEntryBudget);

// Condition-estimate threshold above which the solvers refuse to answer.
inline constexpr double kConditionLimit = 1e12;

}  // namespace ltt
