#pragma once

#include <stdexcept>

namespace ltt {

// Shape or axis mismatch between tensors.
struct dim_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Dense materialization would exceed the configured entry budget.
struct capacity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite intermediate, or a linear system too ill-conditioned to solve.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Frame indices must arrive in strictly increasing order.
struct order_error : std::logic_error {
  using std::logic_error::logic_error;
};

// Malformed or truncated tensor container.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ltt
