#pragma once

#include <Eigen/Dense>

namespace eventlens {

/// Least-squares fit of y on the columns of X.
struct OlsFit {
  /// First entry is the intercept when X carries a leading ones column.
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  /// sqrt(SSR / (n - k)).
  double residual_sd = 0.0;
  double ssr = 0.0;
  double r_squared = 0.0;
  double condition_number = 1.0;
  Eigen::Index n_obs = 0;
  Eigen::Index n_params = 0;
  /// (X'X)^-1, used for coefficient and prediction variances.
  Eigen::MatrixXd xtx_inverse;

  Eigen::Index dof() const { return n_obs - n_params; }
  Eigen::VectorXd standard_errors() const;
};

/// Designs whose condition number exceeds this are rejected as singular.
inline constexpr double kMaxConditionNumber = 1e12;

/// Householder QR solve. Throws SampleSizeError when n <= k, DomainError on
/// non-finite input and SingularDesignError on rank deficiency.
OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

}  // namespace eventlens
