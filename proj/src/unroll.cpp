#include "ltt/unroll.hpp"

#include "ltt/errors.hpp"

namespace ltt {

std::pair<FilterWeights, LearnerTape> solve_sd_traced(
    const LearnerProblem& problem, const FilterWeights& tau0,
    std::size_t iters, double grad_tol) {
  LearnerTape tape;
  tape.problem = problem;
  tape.tau0 = tau0;
  tape.requested_iters = iters;

  auto recorder = [&tape](std::size_t, const FilterWeights& tau,
                          const detail::SdScratch<double>& scratch,
                          const detail::SdStepInfo<double>& info) {
    TapeStep step;
    step.tau = tau;
    step.grad = scratch.grad;
    step.alpha = info.alpha;
    step.grad_norm_sq = info.grad_norm_sq;
    step.denom = info.denom;
    step.residual = scratch.residual;
    step.grad_response = scratch.grad_response;
    tape.steps.push_back(std::move(step));
  };

  auto [tau, report] =
      detail::solve_sd_core(problem, tau0, iters, grad_tol, recorder);
  tape.result = tau;
  tape.report = std::move(report);
  return {std::move(tau), std::move(tape)};
}

FilterWeights replay(const LearnerTape& tape) {
  return solve_sd(tape.problem, tape.tau0, tape.requested_iters).first;
}

// Reverses tau' = tau - alpha(tau) g(tau) one iteration at a time. Within an
// iteration the chain is unwound in this order:
//   1. the update itself (contributions to d_tau, d_alpha, d_g)
//   2. alpha = num/den, den = sum_t gamma |w.q_t|^2 + lambda num
//   3. q_t = x_t * g
//   4. num = |g|^2
//   5. g = sum_t gamma x_t *' (w^2 . r_t) + lambda tau, r_t = x_t * tau - e_t
// d_tau doubles as the incoming upstream; every read of the raw upstream
// happens before the first in-place accumulation.
LearnerGradients backward(const LearnerTape& tape, const FilterWeights& upstream) {
  const LearnerProblem& p = tape.problem;
  if (upstream.kernel.shape != tape.tau0.kernel.shape) {
    throw dim_error("upstream cotangent shape does not match the solved filter");
  }

  const std::size_t m = p.samples.size();
  LearnerGradients out;
  out.features.reserve(m);
  out.labels.reserve(m);
  out.weights.reserve(m);
  for (const auto& s : p.samples) {
    out.features.emplace_back(s.features.shape);
    out.labels.emplace_back(s.labels.shape);
    out.weights.emplace_back(s.weights.shape);
  }
  out.lambda = 0.0;

  FilterWeights d_tau = upstream;
  FilterWeights d_grad(Tensor(upstream.kernel.shape));
  FilterWeights kernel_scratch;
  Tensor elem_scratch;     // elementwise staging, H x W x D
  Tensor feature_scratch;  // H x W x C

  for (std::size_t idx = tape.steps.size(); idx-- > 0;) {
    const TapeStep& step = tape.steps[idx];
    const double num = step.grad_norm_sq;
    const double den = step.denom;

    const double d_alpha = -dot(d_tau, step.grad);
    d_grad.kernel.fill(0.0);
    add_scaled(d_grad.kernel, -step.alpha, d_tau.kernel);

    double d_num = d_alpha / den;
    const double d_den = -d_alpha * num / (den * den);

    d_num += p.lambda * d_den;
    out.lambda += d_den * num;

    for (std::size_t t = 0; t < m; ++t) {
      const auto& s = p.samples[t];
      const double g2 = 2.0 * s.frame_weight * d_den;
      if (g2 == 0.0) continue;
      const Tensor& q = step.grad_response[t];
      if (elem_scratch.shape != q.shape) elem_scratch = Tensor(q.shape);
      for (std::size_t i = 0; i < q.data.size(); ++i) {
        const double w = s.weights.data[i];
        const double qv = q.data[i];
        elem_scratch.data[i] = g2 * w * w * qv;        // d q_t
        out.weights[t].data[i] += g2 * w * qv * qv;
      }
      conv2d_transpose_into(elem_scratch, s.features, p.kernel_size,
                            kernel_scratch);
      add_scaled(d_grad.kernel, 1.0, kernel_scratch.kernel);
      conv2d_input_adjoint_into(elem_scratch, step.grad, feature_scratch);
      add_scaled(out.features[t], 1.0, feature_scratch);
    }

    add_scaled(d_grad.kernel, 2.0 * d_num, step.grad.kernel);

    add_scaled(d_tau.kernel, p.lambda, d_grad.kernel);
    out.lambda += dot(step.tau, d_grad);
    for (std::size_t t = 0; t < m; ++t) {
      const auto& s = p.samples[t];
      if (s.frame_weight == 0.0) continue;
      const Tensor& r = step.residual[t];

      // d s_t = gamma (x_t * dg), with s_t = w^2 . r_t
      Tensor& d_s = elem_scratch;
      conv2d_into(s.features, d_grad, d_s);
      scale(d_s, s.frame_weight);

      // x-side adjoint of the transposed convolution needs s_t itself.
      Tensor s_t(r.shape);
      for (std::size_t i = 0; i < r.data.size(); ++i) {
        const double w = s.weights.data[i];
        s_t.data[i] = w * w * r.data[i];
      }
      conv2d_input_adjoint_into(s_t, d_grad, feature_scratch);
      add_scaled(out.features[t], s.frame_weight, feature_scratch);

      // Through the elementwise weighting into the residual.
      Tensor& d_r = s_t;  // reuse, same shape
      for (std::size_t i = 0; i < r.data.size(); ++i) {
        const double w = s.weights.data[i];
        const double ds = d_s.data[i];
        out.weights[t].data[i] += 2.0 * w * r.data[i] * ds;
        d_r.data[i] = w * w * ds;
      }
      add_scaled(out.labels[t], -1.0, d_r);
      conv2d_transpose_into(d_r, s.features, p.kernel_size, kernel_scratch);
      add_scaled(d_tau.kernel, 1.0, kernel_scratch.kernel);
      conv2d_input_adjoint_into(d_r, step.tau, feature_scratch);
      add_scaled(out.features[t], 1.0, feature_scratch);
    }
  }

  out.tau0 = std::move(d_tau);
  return out;
}

}  // namespace ltt
