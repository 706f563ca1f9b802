#include "eventlens/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eventlens/error.hpp"

namespace eventlens {

namespace {

// Linear predictors beyond this magnitude mean fitted probabilities are
// numerically 0 or 1, the signature of (quasi-)separation.
constexpr double kSeparationEta = 25.0;

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double softplus(double eta) { return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))); }

Eigen::VectorXd penalty_mask(Eigen::Index k, bool intercept_unpenalized) {
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(k);
  if (intercept_unpenalized) mask(0) = 0.0;
  return mask;
}

LogisticFit run_irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& d, double lambda, bool intercept_unpenalized,
                     const LogisticOptions& options) {
  const Eigen::Index k = X.cols();
  const Eigen::VectorXd mask = penalty_mask(k, intercept_unpenalized) * lambda;

  LogisticFit fit;
  fit.ridge_lambda = lambda;
  fit.intercept_unpenalized = intercept_unpenalized;
  fit.coefficients = Eigen::VectorXd::Zero(k);

  Eigen::VectorXd& beta = fit.coefficients;
  double loglik = logistic_penalized_loglik(X, d, beta, lambda, intercept_unpenalized);
  fit.loglik_path.push_back(loglik);

  for (;;) {
    const Eigen::VectorXd eta = X * beta;
    const Eigen::VectorXd p = eta.unaryExpr(&sigmoid);
    const Eigen::VectorXd score = X.transpose() * (d - p) - mask.cwiseProduct(beta);
    fit.max_abs_score = score.cwiseAbs().maxCoeff();
    if (fit.max_abs_score <= options.tolerance) {
      fit.converged = true;
      break;
    }
    if (fit.iterations >= options.max_iterations) break;

    const Eigen::VectorXd w = p.cwiseProduct((1.0 - p.array()).matrix());
    Eigen::MatrixXd hessian = X.transpose() * w.asDiagonal() * X;
    hessian.diagonal() += mask;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    const Eigen::VectorXd step = ldlt.solve(score);
    if (!step.allFinite()) break;

    bool accepted = false;
    double scale = 1.0;
    for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
      const Eigen::VectorXd candidate = beta + scale * step;
      const double cand_ll = logistic_penalized_loglik(X, d, candidate, lambda, intercept_unpenalized);
      if (cand_ll >= loglik - 1e-12 * (1.0 + std::abs(loglik))) {
        beta = candidate;
        loglik = cand_ll;
        fit.loglik_path.push_back(loglik);
        accepted = true;
        break;
      }
    }
    ++fit.iterations;
    if (!accepted) break;
  }
  fit.log_likelihood = loglik;
  return fit;
}

bool looks_separated(const LogisticFit& fit, const Eigen::MatrixXd& X) {
  if (!fit.converged) return true;
  return (X * fit.coefficients).cwiseAbs().maxCoeff() > kSeparationEta;
}

}  // namespace

double logistic_penalized_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& d, const Eigen::VectorXd& beta,
                                 double ridge_lambda, bool intercept_unpenalized) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += d(i) * eta(i) - softplus(eta(i));
  if (ridge_lambda > 0.0) {
    const Eigen::VectorXd mask = penalty_mask(beta.size(), intercept_unpenalized);
    ll -= 0.5 * ridge_lambda * mask.cwiseProduct(beta).squaredNorm();
  }
  return ll;
}

Eigen::VectorXd LogisticFit::predict(const Eigen::MatrixXd& X) const {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return (X * coefficients).unaryExpr([&](double eta) { return std::clamp(sigmoid(eta), lo, hi); });
}

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& d, const LogisticOptions& options) {
  if (X.rows() != d.size()) throw DomainError("fit_logistic: design and label lengths differ");
  if (X.rows() == 0 || X.cols() == 0) throw DomainError("fit_logistic: empty design");
  if (!X.allFinite()) throw DomainError("fit_logistic: non-finite covariate");
  if (!(options.ridge_lambda >= 0.0)) throw DomainError("fit_logistic: ridge_lambda must be >= 0");
  Eigen::Index n_treated = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) != 0.0 && d(i) != 1.0) throw DomainError("fit_logistic: labels must be 0 or 1");
    n_treated += d(i) == 1.0;
  }
  if (n_treated == 0 || n_treated == d.size()) {
    throw DegenerateLabelsError("fit_logistic: labels contain a single class");
  }

  const bool intercept = (X.col(0).array() == 1.0).all();
  LogisticFit fit = run_irls(X, d, options.ridge_lambda, intercept, options);
  if (options.auto_ridge && options.ridge_lambda == 0.0 && looks_separated(fit, X)) {
    fit = run_irls(X, d, options.fallback_lambda, intercept, options);
    fit.ridge_fallback = true;
  }
  return fit;
}

}  // namespace eventlens
