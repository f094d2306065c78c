#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ltt/learner.hpp"
#include "ltt/tensor.hpp"

namespace ltt {

// Everything needed to replay one steepest-descent iteration backwards:
// the pre-step iterate, the gradient and step length, the line-search
// numerator/denominator, and per-sample intermediates
//   residual[t]      = x_t * tau - e_t
//   grad_response[t] = x_t * g
struct TapeStep {
  FilterWeights tau;
  FilterWeights grad;
  double alpha = 0;
  double grad_norm_sq = 0;
  double denom = 0;
  std::vector<Tensor> residual;
  std::vector<Tensor> grad_response;
};

struct LearnerTape {
  LearnerProblem problem;
  FilterWeights tau0;
  std::size_t requested_iters = 0;
  std::vector<TapeStep> steps;
  FilterWeights result;
  SolveReport report;
};

// Identical numerics to solve_sd, plus per-iteration recording.
std::pair<FilterWeights, LearnerTape> solve_sd_traced(
    const LearnerProblem& problem, const FilterWeights& tau0,
    std::size_t iters, double grad_tol = 0.0);

// Re-runs the recorded forward solve from the tape inputs.
FilterWeights replay(const LearnerTape& tape);

// Cotangents of the solver output with respect to every input, shaped like
// the inputs themselves.
struct LearnerGradients {
  std::vector<Tensor> features;  // d/dx_t
  std::vector<Tensor> labels;    // d/de_t
  std::vector<Tensor> weights;   // d/dw_t
  double lambda = 0;             // d/dlambda
  FilterWeights tau0;            // d/dtau0
};

// Reverse-mode pass through the unrolled iterations. upstream is the
// cotangent of the final filter weights; the step-length quotient is
// differentiated in full.
LearnerGradients backward(const LearnerTape& tape, const FilterWeights& upstream);

}  // namespace ltt
