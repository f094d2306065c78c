#include "ltt/exact.hpp"

#include <cmath>
#include <string>

#include "ltt/errors.hpp"

namespace ltt {

namespace {

// LDLT with a positive-definiteness and conditioning guard. The diagonal
// ratio of D is a cheap condition estimate, adequate for refusing systems
// near the kConditionLimit cliff.
Eigen::VectorXd guarded_spd_solve(const Eigen::MatrixXd& a,
                                  const Eigen::VectorXd& rhs,
                                  const char* which) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) {
    throw numeric_error(std::string(which) + " factorization failed");
  }
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.maxCoeff();
  const double dmin = d.minCoeff();
  if (!(dmin > 0.0)) {
    throw numeric_error(std::string(which) +
                        " system is not positive definite (min pivot " +
                        std::to_string(dmin) + ")");
  }
  const double cond_estimate = dmax / dmin;
  if (cond_estimate > kConditionLimit) {
    throw numeric_error(std::string(which) + " system too ill-conditioned" +
                        " (condition estimate " + std::to_string(cond_estimate) +
                        ")");
  }
  return ldlt.solve(rhs);
}

void require_positive_lambda(const MatrixizedProblem& mp) {
  if (!(mp.lambda > 0.0)) {
    throw numeric_error("closed-form solvers require lambda > 0");
  }
}

FilterWeights gather_filter(const MatrixizedProblem& mp,
                            const Eigen::MatrixXd& tau_cols) {
  FilterWeights tau = FilterWeights::zeros(mp.k, mp.c, mp.d);
  for (std::size_t d = 0; d < mp.d; ++d) {
    for (std::size_t col = 0; col < static_cast<std::size_t>(tau_cols.rows());
         ++col) {
      // col = (ki*K + kj)*C + c
      const std::size_t c = col % mp.c;
      const std::size_t kk = col / mp.c;
      tau.kernel.at(kk / mp.k, kk % mp.k, c, d) =
          tau_cols(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(d));
    }
  }
  return tau;
}

}  // namespace

MatrixizedProblem matrixize(const LearnerProblem& problem,
                            std::uint64_t entry_budget) {
  validate(problem);
  if (problem.samples.empty()) {
    throw dim_error("matrixize requires at least one sample");
  }
  const auto& s0 = problem.samples[0];
  MatrixizedProblem mp;
  mp.h = s0.features.shape[0];
  mp.w = s0.features.shape[1];
  mp.c = s0.features.shape[2];
  mp.d = s0.labels.shape[2];
  mp.k = problem.kernel_size;
  mp.m = problem.samples.size();
  mp.lambda = problem.lambda;

  const std::uint64_t rows = std::uint64_t(mp.h) * mp.w * mp.m;
  const std::uint64_t cols = std::uint64_t(mp.k) * mp.k * mp.c;
  const std::uint64_t joint_entries = rows * mp.d * cols * mp.d;
  if (joint_entries > entry_budget) {
    throw capacity_error("matrixized system would hold " +
                         std::to_string(joint_entries) +
                         " entries, over the budget of " +
                         std::to_string(entry_budget));
  }

  mp.patches = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                     static_cast<Eigen::Index>(cols));
  mp.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                     static_cast<Eigen::Index>(mp.d));
  mp.labels = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                    static_cast<Eigen::Index>(mp.d));

  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(mp.k / 2);
  for (std::size_t t = 0; t < mp.m; ++t) {
    const auto& s = problem.samples[t];
    const double root_gamma = std::sqrt(s.frame_weight);
    for (std::size_t i = 0; i < mp.h; ++i) {
      for (std::size_t j = 0; j < mp.w; ++j) {
        const Eigen::Index row =
            static_cast<Eigen::Index>((t * mp.h + i) * mp.w + j);
        for (std::size_t ki = 0; ki < mp.k; ++ki) {
          const std::ptrdiff_t ii = static_cast<std::ptrdiff_t>(i + ki) - pad;
          if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(mp.h)) continue;
          for (std::size_t kj = 0; kj < mp.k; ++kj) {
            const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(j + kj) - pad;
            if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(mp.w)) continue;
            for (std::size_t c = 0; c < mp.c; ++c) {
              mp.patches(row, static_cast<Eigen::Index>((ki * mp.k + kj) * mp.c + c)) =
                  s.features.at(static_cast<std::size_t>(ii),
                                static_cast<std::size_t>(jj), c);
            }
          }
        }
        for (std::size_t d = 0; d < mp.d; ++d) {
          mp.weights(row, static_cast<Eigen::Index>(d)) =
              root_gamma * s.weights.at(i, j, d);
          mp.labels(row, static_cast<Eigen::Index>(d)) = s.labels.at(i, j, d);
        }
      }
    }
  }
  return mp;
}

double matrixized_loss(const MatrixizedProblem& mp, const FilterWeights& tau) {
  if (tau.k() != mp.k || tau.in_channels() != mp.c || tau.out_channels() != mp.d) {
    throw dim_error("filter shape does not match matrixized problem");
  }
  double acc = 0;
  Eigen::VectorXd tau_d(mp.patches.cols());
  for (std::size_t d = 0; d < mp.d; ++d) {
    for (std::size_t col = 0; col < static_cast<std::size_t>(tau_d.size());
         ++col) {
      const std::size_t c = col % mp.c;
      const std::size_t kk = col / mp.c;
      tau_d(static_cast<Eigen::Index>(col)) =
          tau.kernel.at(kk / mp.k, kk % mp.k, c, d);
    }
    const Eigen::VectorXd residual =
        mp.patches * tau_d - mp.labels.col(static_cast<Eigen::Index>(d));
    const Eigen::VectorXd weighted =
        mp.weights.col(static_cast<Eigen::Index>(d)).cwiseProduct(residual);
    acc += 0.5 * weighted.squaredNorm() + 0.5 * mp.lambda * tau_d.squaredNorm();
  }
  return acc;
}

FilterWeights solve_primal(const MatrixizedProblem& mp) {
  require_positive_lambda(mp);
  const Eigen::Index n = mp.patches.cols();
  Eigen::MatrixXd tau_cols(n, static_cast<Eigen::Index>(mp.d));
  for (std::size_t d = 0; d < mp.d; ++d) {
    const auto w = mp.weights.col(static_cast<Eigen::Index>(d));
    const Eigen::MatrixXd xw = w.asDiagonal() * mp.patches;  // W X
    Eigen::MatrixXd gram = xw.transpose() * xw;              // X' W^2 X
    gram.diagonal().array() += mp.lambda;
    const Eigen::VectorXd rhs =
        xw.transpose() *
        w.cwiseProduct(mp.labels.col(static_cast<Eigen::Index>(d)));
    tau_cols.col(static_cast<Eigen::Index>(d)) =
        guarded_spd_solve(gram, rhs, "primal");
  }
  return gather_filter(mp, tau_cols);
}

FilterWeights solve_dual(const MatrixizedProblem& mp) {
  require_positive_lambda(mp);
  const Eigen::Index n = mp.patches.cols();
  Eigen::MatrixXd tau_cols(n, static_cast<Eigen::Index>(mp.d));
  for (std::size_t d = 0; d < mp.d; ++d) {
    const auto w = mp.weights.col(static_cast<Eigen::Index>(d));
    const Eigen::MatrixXd xw = w.asDiagonal() * mp.patches;  // W X
    Eigen::MatrixXd gram = xw * xw.transpose();              // W X X' W
    gram.diagonal().array() += mp.lambda;
    const Eigen::VectorXd we =
        w.cwiseProduct(mp.labels.col(static_cast<Eigen::Index>(d)));
    const Eigen::VectorXd z = guarded_spd_solve(gram, we, "dual");
    tau_cols.col(static_cast<Eigen::Index>(d)) = xw.transpose() * z;
  }
  return gather_filter(mp, tau_cols);
}

FilterWeights solve_primal(const LearnerProblem& problem,
                           std::uint64_t entry_budget) {
  return solve_primal(matrixize(problem, entry_budget));
}

FilterWeights solve_dual(const LearnerProblem& problem,
                         std::uint64_t entry_budget) {
  return solve_dual(matrixize(problem, entry_budget));
}

}  // namespace ltt
