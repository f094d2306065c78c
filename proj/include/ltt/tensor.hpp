#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ltt/errors.hpp"

namespace ltt {

// Dense row-major tensor. Shape is fixed at construction, values are mutable.
// double is the working precision everywhere outside the benchmark module.
template <class T>
struct BasicTensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  BasicTensor() = default;

  explicit BasicTensor(std::vector<std::size_t> dims)
      : shape(std::move(dims)), data(volume(shape), T(0)) {}

  BasicTensor(std::vector<std::size_t> dims, std::vector<T> values)
      : shape(std::move(dims)), data(std::move(values)) {
    if (data.size() != volume(shape)) {
      throw dim_error("tensor data length " + std::to_string(data.size()) +
                      " does not match shape volume " +
                      std::to_string(volume(shape)));
    }
  }

  static std::size_t volume(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) {
      if (d == 0) throw dim_error("zero-sized tensor dimension");
      n *= d;
    }
    return n;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t axis) const { return shape[axis]; }

  // Rank-3 access, layout (row, col, channel) with channel fastest.
  T& at(std::size_t i, std::size_t j, std::size_t c) {
    assert(rank() == 3);
    return data[(i * shape[1] + j) * shape[2] + c];
  }
  T at(std::size_t i, std::size_t j, std::size_t c) const {
    assert(rank() == 3);
    return data[(i * shape[1] + j) * shape[2] + c];
  }

  // Rank-4 access, layout (ki, kj, c, d) with d fastest.
  T& at(std::size_t ki, std::size_t kj, std::size_t c, std::size_t d) {
    assert(rank() == 4);
    return data[((ki * shape[1] + kj) * shape[2] + c) * shape[3] + d];
  }
  T at(std::size_t ki, std::size_t kj, std::size_t c, std::size_t d) const {
    assert(rank() == 4);
    return data[((ki * shape[1] + kj) * shape[2] + c) * shape[3] + d];
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const BasicTensor& other) const {
    return shape == other.shape;
  }
};

using Tensor = BasicTensor<double>;

// Weights of the linear target module: a K x K x C x D kernel with odd K,
// so that zero "same" padding is symmetric.
template <class T>
struct BasicFilter {
  BasicTensor<T> kernel;

  BasicFilter() = default;

  explicit BasicFilter(BasicTensor<T> k) : kernel(std::move(k)) { validate(); }

  static BasicFilter zeros(std::size_t k, std::size_t in_channels,
                           std::size_t out_channels) {
    return BasicFilter(BasicTensor<T>({k, k, in_channels, out_channels}));
  }

  std::size_t k() const { return kernel.shape[0]; }
  std::size_t in_channels() const { return kernel.shape[2]; }
  std::size_t out_channels() const { return kernel.shape[3]; }

  void validate() const {
    if (kernel.rank() != 4) {
      throw dim_error("filter kernel must have rank 4, got rank " +
                      std::to_string(kernel.rank()));
    }
    if (kernel.shape[0] != kernel.shape[1]) {
      throw dim_error("filter kernel must be square, got " +
                      std::to_string(kernel.shape[0]) + "x" +
                      std::to_string(kernel.shape[1]));
    }
    if (kernel.shape[0] % 2 == 0) {
      throw dim_error("filter kernel size must be odd, got " +
                      std::to_string(kernel.shape[0]));
    }
  }
};

using FilterWeights = BasicFilter<double>;

namespace detail {

template <class T>
void check_feature_map(const BasicTensor<T>& x, const char* name) {
  if (x.rank() != 3) {
    throw dim_error(std::string(name) + " must have rank 3 (HxWxC), got rank " +
                    std::to_string(x.rank()));
  }
}

template <class T>
void check_conv_args(const BasicTensor<T>& x, const BasicFilter<T>& f) {
  check_feature_map(x, "conv2d input");
  if (x.shape[2] != f.in_channels()) {
    throw dim_error("conv2d channel mismatch: input axis 2 has " +
                    std::to_string(x.shape[2]) + " channels, kernel axis 2 expects " +
                    std::to_string(f.in_channels()));
  }
}

}  // namespace detail

// 2-D cross-correlation with zero "same" padding and stride 1.
// x: H x W x C, f: K x K x C x D, out: H x W x D.
// out(i,j,d) = sum_{ki,kj,c} x(i+ki-P, j+kj-P, c) * f(ki,kj,c,d), P = (K-1)/2,
// out-of-range feature values read as zero.
template <class T>
void conv2d_into(const BasicTensor<T>& x, const BasicFilter<T>& f,
                 BasicTensor<T>& out) {
  detail::check_conv_args(x, f);
  const std::size_t h = x.shape[0], w = x.shape[1], c_in = x.shape[2];
  const std::size_t k = f.k(), d_out = f.out_channels();
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);

  if (out.shape != std::vector<std::size_t>{h, w, d_out}) {
    out = BasicTensor<T>({h, w, d_out});
  } else {
    out.fill(T(0));
  }

  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t ki = 0; ki < k; ++ki) {
      const std::ptrdiff_t ii =
          static_cast<std::ptrdiff_t>(i + ki) - pad;
      if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(h)) continue;
      for (std::size_t j = 0; j < w; ++j) {
        T* out_px = &out.data[(i * w + j) * d_out];
        for (std::size_t kj = 0; kj < k; ++kj) {
          const std::ptrdiff_t jj =
              static_cast<std::ptrdiff_t>(j + kj) - pad;
          if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(w)) continue;
          const T* x_px =
              &x.data[(static_cast<std::size_t>(ii) * w +
                       static_cast<std::size_t>(jj)) * c_in];
          const T* k_px = &f.kernel.data[(ki * k + kj) * c_in * d_out];
          for (std::size_t c = 0; c < c_in; ++c) {
            const T xv = x_px[c];
            const T* kc = k_px + c * d_out;
            for (std::size_t d = 0; d < d_out; ++d) out_px[d] += xv * kc[d];
          }
        }
      }
    }
  }
}

template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicFilter<T>& f) {
  BasicTensor<T> out;
  conv2d_into(x, f, out);
  return out;
}

// Adjoint of conv2d with respect to the kernel argument.
// u: H x W x D, x: H x W x C, out: K x K x C x D, K supplied by the caller.
// Satisfies <conv2d(x, f), u> = <f, conv2d_transpose(u, x, K)> for all f, u.
template <class T>
void conv2d_transpose_into(const BasicTensor<T>& u, const BasicTensor<T>& x,
                           std::size_t k, BasicFilter<T>& out) {
  detail::check_feature_map(u, "conv2d_transpose response");
  detail::check_feature_map(x, "conv2d_transpose features");
  if (u.shape[0] != x.shape[0] || u.shape[1] != x.shape[1]) {
    throw dim_error("conv2d_transpose spatial mismatch: response is " +
                    std::to_string(u.shape[0]) + "x" + std::to_string(u.shape[1]) +
                    ", features are " + std::to_string(x.shape[0]) + "x" +
                    std::to_string(x.shape[1]));
  }
  if (k % 2 == 0) throw dim_error("kernel size must be odd");

  const std::size_t h = x.shape[0], w = x.shape[1], c_in = x.shape[2];
  const std::size_t d_out = u.shape[2];
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);

  if (out.kernel.shape != std::vector<std::size_t>{k, k, c_in, d_out}) {
    out = BasicFilter<T>::zeros(k, c_in, d_out);
  } else {
    out.kernel.fill(T(0));
  }

  for (std::size_t ki = 0; ki < k; ++ki) {
    for (std::size_t i = 0; i < h; ++i) {
      const std::ptrdiff_t ii = static_cast<std::ptrdiff_t>(i + ki) - pad;
      if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(h)) continue;
      for (std::size_t kj = 0; kj < k; ++kj) {
        T* k_px = &out.kernel.data[(ki * k + kj) * c_in * d_out];
        for (std::size_t j = 0; j < w; ++j) {
          const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(j + kj) - pad;
          if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(w)) continue;
          const T* x_px =
              &x.data[(static_cast<std::size_t>(ii) * w +
                       static_cast<std::size_t>(jj)) * c_in];
          const T* u_px = &u.data[(i * w + j) * d_out];
          for (std::size_t c = 0; c < c_in; ++c) {
            const T xv = x_px[c];
            T* kc = k_px + c * d_out;
            for (std::size_t d = 0; d < d_out; ++d) kc[d] += xv * u_px[d];
          }
        }
      }
    }
  }
}

template <class T>
BasicFilter<T> conv2d_transpose(const BasicTensor<T>& u, const BasicTensor<T>& x,
                                std::size_t k) {
  BasicFilter<T> out;
  conv2d_transpose_into(u, x, k, out);
  return out;
}

// Adjoint of conv2d with respect to the feature argument.
// u: H x W x D, f: K x K x C x D, out: H x W x C.
// Satisfies <conv2d(x, f), u> = <x, conv2d_input_adjoint(u, f)> for all x, u.
template <class T>
void conv2d_input_adjoint_into(const BasicTensor<T>& u, const BasicFilter<T>& f,
                               BasicTensor<T>& out) {
  detail::check_feature_map(u, "conv2d_input_adjoint response");
  if (u.shape[2] != f.out_channels()) {
    throw dim_error("conv2d_input_adjoint channel mismatch: response axis 2 has " +
                    std::to_string(u.shape[2]) + " channels, kernel axis 3 expects " +
                    std::to_string(f.out_channels()));
  }
  const std::size_t h = u.shape[0], w = u.shape[1], d_out = u.shape[2];
  const std::size_t k = f.k(), c_in = f.in_channels();
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);

  if (out.shape != std::vector<std::size_t>{h, w, c_in}) {
    out = BasicTensor<T>({h, w, c_in});
  } else {
    out.fill(T(0));
  }

  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t ki = 0; ki < k; ++ki) {
      const std::ptrdiff_t ii = static_cast<std::ptrdiff_t>(i + ki) - pad;
      if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(h)) continue;
      for (std::size_t j = 0; j < w; ++j) {
        const T* u_px = &u.data[(i * w + j) * d_out];
        for (std::size_t kj = 0; kj < k; ++kj) {
          const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(j + kj) - pad;
          if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(w)) continue;
          T* x_px = &out.data[(static_cast<std::size_t>(ii) * w +
                               static_cast<std::size_t>(jj)) * c_in];
          const T* k_px = &f.kernel.data[(ki * k + kj) * c_in * d_out];
          for (std::size_t c = 0; c < c_in; ++c) {
            const T* kc = k_px + c * d_out;
            T acc = T(0);
            for (std::size_t d = 0; d < d_out; ++d) acc += u_px[d] * kc[d];
            x_px[c] += acc;
          }
        }
      }
    }
  }
}

template <class T>
BasicTensor<T> conv2d_input_adjoint(const BasicTensor<T>& u,
                                    const BasicFilter<T>& f) {
  BasicTensor<T> out;
  conv2d_input_adjoint_into(u, f, out);
  return out;
}

template <class T>
T dot(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (!a.same_shape(b)) {
    throw dim_error("dot shape mismatch");
  }
  T acc = T(0);
  for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
  return acc;
}

template <class T>
T norm_sq(const BasicTensor<T>& a) {
  T acc = T(0);
  for (T v : a.data) acc += v * v;
  return acc;
}

template <class T>
T dot(const BasicFilter<T>& a, const BasicFilter<T>& b) {
  return dot(a.kernel, b.kernel);
}

template <class T>
T norm_sq(const BasicFilter<T>& a) {
  return norm_sq(a.kernel);
}

// y += alpha * x
template <class T>
void add_scaled(BasicTensor<T>& y, T alpha, const BasicTensor<T>& x) {
  if (!y.same_shape(x)) throw dim_error("add_scaled shape mismatch");
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += alpha * x.data[i];
}

template <class T>
void scale(BasicTensor<T>& y, T alpha) {
  for (T& v : y.data) v *= alpha;
}

template <class T>
bool all_finite(const BasicTensor<T>& a) {
  for (T v : a.data) {
    if (!std::isfinite(static_cast<double>(v))) return false;
  }
  return true;
}

}  // namespace ltt
