#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ltt/tensor.hpp"

namespace ltt {

// One element of the few-shot training set: a feature map, the label
// encoding it should map to, per-element importance weights and a global
// per-frame weight. Importance weights are stored unsquared and squared at
// use sites; negative entries are permitted.
template <class T>
struct BasicSample {
  BasicTensor<T> features;  // H x W x C
  BasicTensor<T> labels;    // H x W x D
  BasicTensor<T> weights;   // H x W x D
  T frame_weight = T(1);    // >= 0
};

using TrainingSample = BasicSample<double>;

// The weighted, ridge-regularized least-squares problem
//   L(f) = 1/2 sum_t gamma_t |w_t . (x_t * f - e_t)|^2 + lambda/2 |f|^2
// where * is conv2d and . is elementwise multiplication. All samples must
// share H, W, C and D. lambda >= 0; the closed-form solvers additionally
// require lambda > 0.
template <class T>
struct BasicProblem {
  std::vector<BasicSample<T>> samples;
  T lambda = T(0.05);
  std::size_t kernel_size = 3;
};

using LearnerProblem = BasicProblem<double>;

template <class T>
void validate(const BasicProblem<T>& p) {
  if (p.kernel_size == 0 || p.kernel_size % 2 == 0) {
    throw dim_error("kernel size must be odd and positive, got " +
                    std::to_string(p.kernel_size));
  }
  if (!(p.lambda >= T(0))) {
    throw dim_error("lambda must be nonnegative");
  }
  for (std::size_t t = 0; t < p.samples.size(); ++t) {
    const auto& s = p.samples[t];
    detail::check_feature_map(s.features, "sample features");
    detail::check_feature_map(s.labels, "sample labels");
    detail::check_feature_map(s.weights, "sample weights");
    const std::string at = " (sample " + std::to_string(t) + ")";
    if (s.labels.shape[0] != s.features.shape[0] ||
        s.labels.shape[1] != s.features.shape[1]) {
      throw dim_error("labels and features disagree on H or W" + at);
    }
    if (!s.weights.same_shape(s.labels)) {
      throw dim_error("weights and labels disagree on shape" + at);
    }
    if (!(s.frame_weight >= T(0))) {
      throw dim_error("frame weight must be nonnegative" + at);
    }
    const auto& first = p.samples[0];
    if (s.features.shape != first.features.shape ||
        s.labels.shape != first.labels.shape) {
      throw dim_error("all samples must share feature and label shapes" + at);
    }
  }
}

template <class T>
void check_filter_matches(const BasicProblem<T>& p, const BasicFilter<T>& f) {
  if (f.k() != p.kernel_size) {
    throw dim_error("filter kernel size " + std::to_string(f.k()) +
                    " does not match problem kernel size " +
                    std::to_string(p.kernel_size));
  }
  if (!p.samples.empty()) {
    if (f.in_channels() != p.samples[0].features.shape[2]) {
      throw dim_error("filter input channels " + std::to_string(f.in_channels()) +
                      " do not match feature channels " +
                      std::to_string(p.samples[0].features.shape[2]));
    }
    if (f.out_channels() != p.samples[0].labels.shape[2]) {
      throw dim_error("filter output channels " + std::to_string(f.out_channels()) +
                      " do not match label channels " +
                      std::to_string(p.samples[0].labels.shape[2]));
    }
  }
}

struct IterationRecord {
  double loss = 0;       // objective at the start of the iteration
  double alpha = 0;      // step length taken (0 when converged in place)
  double grad_norm = 0;  // Euclidean norm of the gradient
};

struct SolveReport {
  std::string method = "sd";
  std::vector<IterationRecord> iterations;
  std::size_t iterations_run = 0;
  bool converged = false;
  double final_loss = 0;
  std::uint64_t elapsed_ns = 0;
  std::uint64_t flops = 0;
};

// Dominant-term operation count of iterative solving: H*W*K^2*C*D*M per
// iteration, with unit constant.
template <class T>
std::uint64_t sd_flop_estimate(const BasicProblem<T>& p, std::size_t iters) {
  if (p.samples.empty()) return 0;
  const auto& s0 = p.samples[0];
  const std::uint64_t hw = std::uint64_t(s0.features.shape[0]) * s0.features.shape[1];
  const std::uint64_t k2 = std::uint64_t(p.kernel_size) * p.kernel_size;
  return hw * k2 * s0.features.shape[2] * s0.labels.shape[2] *
         p.samples.size() * iters;
}

template <class T>
T loss(const BasicProblem<T>& p, const BasicFilter<T>& tau) {
  validate(p);
  check_filter_matches(p, tau);
  T acc = T(0.5) * p.lambda * norm_sq(tau);
  BasicTensor<T> response;
  for (const auto& s : p.samples) {
    if (s.frame_weight == T(0)) continue;
    conv2d_into(s.features, tau, response);
    T r = T(0);
    for (std::size_t i = 0; i < response.data.size(); ++i) {
      const T v = s.weights.data[i] * (response.data[i] - s.labels.data[i]);
      r += v * v;
    }
    acc += T(0.5) * s.frame_weight * r;
  }
  return acc;
}

template <class T>
BasicFilter<T> gradient(const BasicProblem<T>& p, const BasicFilter<T>& tau) {
  validate(p);
  check_filter_matches(p, tau);
  BasicFilter<T> g = tau;
  scale(g.kernel, p.lambda);
  BasicTensor<T> response;
  BasicFilter<T> contrib;
  for (const auto& s : p.samples) {
    if (s.frame_weight == T(0)) continue;
    conv2d_into(s.features, tau, response);
    for (std::size_t i = 0; i < response.data.size(); ++i) {
      const T w = s.weights.data[i];
      response.data[i] = w * w * (response.data[i] - s.labels.data[i]);
    }
    conv2d_transpose_into(response, s.features, p.kernel_size, contrib);
    add_scaled(g.kernel, s.frame_weight, contrib.kernel);
  }
  return g;
}

// Exact line-search step length along -g. Returns nullopt when the gradient
// is identically zero (already at the optimum).
template <class T>
std::optional<T> step_length(const BasicProblem<T>& p, const BasicFilter<T>& g) {
  validate(p);
  check_filter_matches(p, g);
  const T num = norm_sq(g);
  if (num == T(0)) return std::nullopt;
  T den = p.lambda * num;
  BasicTensor<T> response;
  for (const auto& s : p.samples) {
    if (s.frame_weight == T(0)) continue;
    conv2d_into(s.features, g, response);
    T r = T(0);
    for (std::size_t i = 0; i < response.data.size(); ++i) {
      const T v = s.weights.data[i] * response.data[i];
      r += v * v;
    }
    den += s.frame_weight * r;
  }
  return num / den;
}

namespace detail {

// Scratch state for one steepest-descent iteration. residual[t] holds the
// raw residual x_t * tau - e_t at the pre-step tau; grad_response[t] holds
// x_t * g. weighted is a shared buffer for w_t^2 . residual.
template <class T>
struct SdScratch {
  BasicFilter<T> grad;
  std::vector<BasicTensor<T>> residual;
  std::vector<BasicTensor<T>> grad_response;
  BasicTensor<T> weighted;
  BasicFilter<T> contrib;
};

template <class T>
struct SdStepInfo {
  T loss_before = T(0);
  T grad_norm_sq = T(0);
  T denom = T(0);
  T alpha = T(0);
  bool converged = false;
};

// Computes the gradient, loss and exact step length at the current iterate,
// without applying the update. Returns false when the gradient vanishes.
template <class T>
bool sd_prepare_step(const BasicProblem<T>& p, const BasicFilter<T>& tau,
                     SdScratch<T>& s, SdStepInfo<T>& info, T grad_tol) {
  const std::size_t m = p.samples.size();
  s.residual.resize(m);
  s.grad_response.resize(m);

  // Loss at the current iterate and the gradient.
  T data_loss = T(0);
  s.grad = tau;
  scale(s.grad.kernel, p.lambda);
  for (std::size_t t = 0; t < m; ++t) {
    const auto& sample = p.samples[t];
    conv2d_into(sample.features, tau, s.residual[t]);
    auto& r = s.residual[t];
    if (s.weighted.shape != r.shape) s.weighted = BasicTensor<T>(r.shape);
    T acc = T(0);
    for (std::size_t i = 0; i < r.data.size(); ++i) {
      const T w = sample.weights.data[i];
      const T res = r.data[i] - sample.labels.data[i];
      const T wres = w * res;
      acc += wres * wres;
      r.data[i] = res;                   // raw residual
      s.weighted.data[i] = w * wres;     // w^2 (x*tau - e)
    }
    data_loss += T(0.5) * sample.frame_weight * acc;
    if (sample.frame_weight != T(0)) {
      conv2d_transpose_into(s.weighted, sample.features, p.kernel_size,
                            s.contrib);
      add_scaled(s.grad.kernel, sample.frame_weight, s.contrib.kernel);
    }
  }
  info.loss_before = data_loss + T(0.5) * p.lambda * norm_sq(tau);

  const T num = norm_sq(s.grad);
  info.grad_norm_sq = num;
  if (num == T(0) || std::sqrt(static_cast<double>(num)) <= grad_tol) {
    info.converged = true;
    info.alpha = T(0);
    return false;
  }

  // Exact line search denominator.
  T den = p.lambda * num;
  for (std::size_t t = 0; t < m; ++t) {
    const auto& sample = p.samples[t];
    conv2d_into(sample.features, s.grad, s.grad_response[t]);
    if (sample.frame_weight == T(0)) continue;
    const auto& q = s.grad_response[t];
    T acc = T(0);
    for (std::size_t i = 0; i < q.data.size(); ++i) {
      const T v = sample.weights.data[i] * q.data[i];
      acc += v * v;
    }
    den += sample.frame_weight * acc;
  }
  info.denom = den;
  info.alpha = num / den;
  return true;
}

template <class T, class Recorder>
std::pair<BasicFilter<T>, SolveReport> solve_sd_core(const BasicProblem<T>& p,
                                                     const BasicFilter<T>& tau0,
                                                     std::size_t iters,
                                                     T grad_tol,
                                                     Recorder&& record) {
  validate(p);
  check_filter_matches(p, tau0);
  const auto t_start = std::chrono::steady_clock::now();

  BasicFilter<T> tau = tau0;
  SolveReport report;
  SdScratch<T> scratch;
  SdStepInfo<T> info;

  for (std::size_t i = 0; i < iters; ++i) {
    const bool stepped = sd_prepare_step(p, tau, scratch, info, grad_tol);
    report.iterations.push_back(
        {static_cast<double>(info.loss_before), static_cast<double>(info.alpha),
         std::sqrt(static_cast<double>(info.grad_norm_sq))});
    if (!stepped) {
      report.converged = true;
      break;
    }
    record(i, tau, scratch, info);  // tau is still the pre-step iterate
    add_scaled(tau.kernel, -info.alpha, scratch.grad.kernel);
    report.iterations_run = i + 1;
    if (!all_finite(tau.kernel) ||
        !std::isfinite(static_cast<double>(info.loss_before))) {
      throw numeric_error("non-finite value at steepest-descent iteration " +
                          std::to_string(i));
    }
  }

  report.final_loss = static_cast<double>(loss(p, tau));
  report.flops = sd_flop_estimate(p, report.iterations_run);
  report.elapsed_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now() - t_start)
          .count());
  return {std::move(tau), std::move(report)};
}

}  // namespace detail

// Fixed-count steepest descent with exact line search, warm-started from
// tau0. grad_tol = 0 keeps all iterations except the exact-zero-gradient
// degenerate case.
template <class T>
std::pair<BasicFilter<T>, SolveReport> solve_sd(const BasicProblem<T>& p,
                                                const BasicFilter<T>& tau0,
                                                std::size_t iters,
                                                T grad_tol = T(0)) {
  return detail::solve_sd_core(p, tau0, iters, grad_tol,
                               [](std::size_t, const BasicFilter<T>&,
                                  const detail::SdScratch<T>&,
                                  const detail::SdStepInfo<T>&) {});
}

}  // namespace ltt
