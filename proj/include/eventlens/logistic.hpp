#pragma once

#include <vector>

#include <Eigen/Dense>

namespace eventlens {

struct LogisticOptions {
  double ridge_lambda = 0.0;
  int max_iterations = 100;
  /// Convergence threshold on the max-abs penalized score.
  double tolerance = 1e-8;
  /// Refit with `fallback_lambda` when an unpenalized fit shows separation.
  bool auto_ridge = true;
  double fallback_lambda = 1e-4;
};

struct LogisticFit {
  Eigen::VectorXd coefficients;
  bool converged = false;
  int iterations = 0;
  /// Penalty actually used; differs from the requested one after a fallback.
  double ridge_lambda = 0.0;
  bool ridge_fallback = false;
  double max_abs_score = 0.0;
  double log_likelihood = 0.0;
  /// Penalized log-likelihood after each accepted iteration, starting at beta = 0.
  std::vector<double> loglik_path;
  /// Whether column 0 was treated as an unpenalized intercept.
  bool intercept_unpenalized = false;

  /// Fitted probabilities, clamped strictly inside (0, 1).
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

/// Maximum-likelihood logistic regression by Newton-Raphson (IRLS) with step
/// halving. A leading ones column in X is never penalized.
///
/// Throws DegenerateLabelsError when only one class is present and
/// DomainError on non-finite covariates or non-binary labels.
LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& d, const LogisticOptions& options = {});

inline LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& d, double ridge_lambda) {
  LogisticOptions options;
  options.ridge_lambda = ridge_lambda;
  return fit_logistic(X, d, options);
}

/// Penalized log-likelihood sum(d*eta - log(1 + e^eta)) - lambda/2 * |beta_pen|^2.
double logistic_penalized_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& d, const Eigen::VectorXd& beta,
                                 double ridge_lambda, bool intercept_unpenalized);

}  // namespace eventlens
