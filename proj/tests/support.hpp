#pragma once

#include <cmath>
#include <cstdlib>

#include "ltt/learner.hpp"
#include "ltt/rng.hpp"
#include "ltt/tensor.hpp"

namespace testsupport {

inline double rel_gap(double value, double reference) {
  return std::abs(value - reference) / (1.0 + std::abs(reference));
}

// Direct summation straight from the defining formula, one output element at
// a time. Kept deliberately naive and separate from the library kernels.
inline ltt::Tensor conv2d_reference(const ltt::Tensor& x,
                                    const ltt::FilterWeights& f) {
  const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(x.shape[0]);
  const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(x.shape[1]);
  const std::ptrdiff_t c_in = static_cast<std::ptrdiff_t>(x.shape[2]);
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(f.k());
  const std::ptrdiff_t d_out = static_cast<std::ptrdiff_t>(f.out_channels());
  const std::ptrdiff_t pad = (k - 1) / 2;

  ltt::Tensor out({x.shape[0], x.shape[1], f.out_channels()});
  for (std::ptrdiff_t i = 0; i < h; ++i) {
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      for (std::ptrdiff_t d = 0; d < d_out; ++d) {
        double acc = 0.0;
        for (std::ptrdiff_t ki = 0; ki < k; ++ki) {
          for (std::ptrdiff_t kj = 0; kj < k; ++kj) {
            const std::ptrdiff_t ii = i + ki - pad;
            const std::ptrdiff_t jj = j + kj - pad;
            if (ii < 0 || ii >= h || jj < 0 || jj >= w) continue;
            for (std::ptrdiff_t c = 0; c < c_in; ++c) {
              acc += x.data[(ii * w + jj) * c_in + c] *
                     f.kernel.data[((ki * k + kj) * c_in + c) * d_out + d];
            }
          }
        }
        out.data[(i * w + j) * d_out + d] = acc;
      }
    }
  }
  return out;
}

inline ltt::Tensor filled(std::vector<std::size_t> shape, double v) {
  ltt::Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

// Single-sample scalar problem on a 1x1 grid with K = 1.
inline ltt::LearnerProblem scalar_problem(double x, double e, double w,
                                          double lambda, double gamma = 1.0) {
  ltt::LearnerProblem p;
  p.lambda = lambda;
  p.kernel_size = 1;
  ltt::TrainingSample s;
  s.features = ltt::Tensor({1, 1, 1}, {x});
  s.labels = ltt::Tensor({1, 1, 1}, {e});
  s.weights = ltt::Tensor({1, 1, 1}, {w});
  s.frame_weight = gamma;
  p.samples.push_back(std::move(s));
  return p;
}

inline ltt::FilterWeights scalar_filter(double v) {
  return ltt::FilterWeights(ltt::Tensor({1, 1, 1, 1}, {v}));
}

}  // namespace testsupport
