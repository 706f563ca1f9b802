#include "eventlens/ols.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "eventlens/error.hpp"

namespace eventlens {

Eigen::VectorXd OlsFit::standard_errors() const {
  return (residual_sd * residual_sd * xtx_inverse.diagonal().array()).sqrt().matrix();
}

OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (y.size() != n) throw DomainError("fit_ols: X has " + std::to_string(n) + " rows but y has " + std::to_string(y.size()));
  if (k < 1) throw DomainError("fit_ols: design has no columns");
  if (n <= k) {
    throw SampleSizeError("fit_ols: need more observations than parameters (n=" + std::to_string(n) +
                          ", k=" + std::to_string(k) + ")");
  }
  if (!X.allFinite() || !y.allFinite()) throw DomainError("fit_ols: non-finite value in design or response");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

  // R shares X's singular values.
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(R).singularValues();
  const double smax = sv(0);
  const double smin = sv(k - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxConditionNumber)) {
    throw SingularDesignError("fit_ols: design is rank deficient (condition number " + std::to_string(cond) + ")");
  }

  OlsFit fit;
  fit.n_obs = n;
  fit.n_params = k;
  fit.condition_number = cond;
  const Eigen::VectorXd qty = (qr.householderQ().transpose() * y).head(k);
  fit.coefficients = R.triangularView<Eigen::Upper>().solve(qty);
  fit.residuals = y - X * fit.coefficients;
  fit.ssr = fit.residuals.squaredNorm();
  fit.residual_sd = std::sqrt(fit.ssr / static_cast<double>(n - k));

  const Eigen::MatrixXd r_inv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  fit.xtx_inverse = r_inv * r_inv.transpose();

  const double ybar = y.mean();
  const double sst = (y.array() - ybar).square().sum();
  fit.r_squared = sst > 0.0 ? 1.0 - fit.ssr / sst : (fit.ssr == 0.0 ? 1.0 : 0.0);
  return fit;
}

}  // namespace eventlens
