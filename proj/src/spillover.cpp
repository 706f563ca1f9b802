#include "eventlens/spillover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eventlens/descriptive.hpp"
#include "eventlens/distributions.hpp"
#include "eventlens/error.hpp"
#include "eventlens/ols.hpp"

namespace eventlens {

namespace {

void check_inputs(std::span<const double> treat, std::span<const double> control, int p) {
  if (p < 1) throw DomainError("lag order must be >= 1");
  if (treat.size() != control.size()) {
    throw DomainError("treatment and control series differ in length (" + std::to_string(treat.size()) + " vs " +
                      std::to_string(control.size()) + ")");
  }
  for (std::size_t i = 0; i < treat.size(); ++i) {
    if (!std::isfinite(treat[i]) || !std::isfinite(control[i])) {
      throw DomainError("VAR input has a missing or non-finite value at index " + std::to_string(i));
    }
  }
}

void check_sample(std::size_t T, int p) {
  const long long eff = static_cast<long long>(T) - p;
  if (eff < 4LL * p + 4) {
    throw SampleSizeError("VAR(" + std::to_string(p) + ") needs T - p >= " + std::to_string(4 * p + 4) +
                          " observations; have T = " + std::to_string(T));
  }
}

// Rows t = start..T-1; columns [1, treat_{t-1..t-p}, control_{t-1..t-p}].
Eigen::MatrixXd lag_design(std::span<const double> treat, std::span<const double> control, int p, int start) {
  const auto T = static_cast<int>(treat.size());
  Eigen::MatrixXd X(T - start, 1 + 2 * p);
  for (int t = start; t < T; ++t) {
    const int r = t - start;
    X(r, 0) = 1.0;
    for (int i = 1; i <= p; ++i) {
      X(r, i) = treat[static_cast<std::size_t>(t - i)];
      X(r, p + i) = control[static_cast<std::size_t>(t - i)];
    }
  }
  return X;
}

Eigen::VectorXd targets(std::span<const double> series, int start) {
  const auto T = static_cast<int>(series.size());
  Eigen::VectorXd y(T - start);
  for (int t = start; t < T; ++t) y(t - start) = series[static_cast<std::size_t>(t)];
  return y;
}

VarModel fit_var_from(std::span<const double> treat, std::span<const double> control, int p, int start) {
  const Eigen::MatrixXd X = lag_design(treat, control, p, start);
  const OlsFit eq_treat = fit_ols(X, targets(treat, start));
  const OlsFit eq_control = fit_ols(X, targets(control, start));

  VarModel m;
  m.p = p;
  m.n_obs = static_cast<int>(X.rows());
  m.intercepts << eq_treat.coefficients(0), eq_control.coefficients(0);
  m.coeff.resize(static_cast<std::size_t>(p));
  for (int i = 1; i <= p; ++i) {
    Eigen::Matrix2d A;
    A << eq_treat.coefficients(i), eq_treat.coefficients(p + i), eq_control.coefficients(i),
        eq_control.coefficients(p + i);
    m.coeff[static_cast<std::size_t>(i - 1)] = A;
  }
  m.residuals.resize(X.rows(), 2);
  m.residuals.col(0) = eq_treat.residuals;
  m.residuals.col(1) = eq_control.residuals;
  m.ssr << eq_treat.ssr, eq_control.ssr;
  m.resid_cov = m.residuals.transpose() * m.residuals / static_cast<double>(m.n_obs);
  return m;
}

}  // namespace

std::string_view to_string(Direction direction) {
  return direction == Direction::TreatmentToControl ? "treatment->control" : "control->treatment";
}

std::string_view to_string(Ordering ordering) {
  return ordering == Ordering::TreatmentFirst ? "treatment-first" : "control-first";
}

Ordering parse_ordering(std::string_view name) {
  if (name == "treatment-first") return Ordering::TreatmentFirst;
  if (name == "control-first") return Ordering::ControlFirst;
  throw ValidationError("unknown Cholesky ordering '" + std::string(name) + "'");
}

Eigen::MatrixXd VarModel::companion() const {
  const int n = 2 * p;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < p; ++i) C.block(0, 2 * i, 2, 2) = coeff[static_cast<std::size_t>(i)];
  if (p > 1) C.block(2, 0, n - 2, n - 2).setIdentity();
  return C;
}

double VarModel::spectral_radius() const {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion(), /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

VarModel fit_var(std::span<const double> treat, std::span<const double> control, int p) {
  check_inputs(treat, control, p);
  check_sample(treat.size(), p);
  return fit_var_from(treat, control, p, p);
}

LagSelection select_lag(std::span<const double> treat, std::span<const double> control, int p_max) {
  check_inputs(treat, control, p_max);
  check_sample(treat.size(), p_max);

  LagSelection sel;
  sel.n_obs = static_cast<int>(treat.size()) - p_max;
  const double T = sel.n_obs;
  double best_aic = std::numeric_limits<double>::infinity();
  double best_bic = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= p_max; ++p) {
    const VarModel m = fit_var_from(treat, control, p, p_max);
    const double det = m.resid_cov.determinant();
    if (!(det > 0.0)) throw SingularDesignError("select_lag: residual covariance is singular at p = " + std::to_string(p));
    const double m_params = 4.0 * p + 2.0;
    LagCriteria row{p, std::log(det), 0.0, 0.0};
    row.aic = row.log_det_cov + 2.0 * m_params / T;
    row.bic = row.log_det_cov + m_params * std::log(T) / T;
    if (row.aic < best_aic) {
      best_aic = row.aic;
      sel.p_aic = p;
    }
    if (row.bic < best_bic) {
      best_bic = row.bic;
      sel.p_bic = p;
    }
    sel.table.push_back(row);
  }
  return sel;
}

GrangerResult granger_test(std::span<const double> treat, std::span<const double> control, int p,
                           Direction direction) {
  check_inputs(treat, control, p);
  check_sample(treat.size(), p);

  const bool effect_is_control = direction == Direction::TreatmentToControl;
  const Eigen::MatrixXd X = lag_design(treat, control, p, p);
  const Eigen::VectorXd y = targets(effect_is_control ? control : treat, p);

  // Restricted design keeps the intercept and the effect variable's own lags.
  const int own_offset = effect_is_control ? 1 + p : 1;
  Eigen::MatrixXd Xr(X.rows(), 1 + p);
  Xr.col(0) = X.col(0);
  Xr.rightCols(p) = X.middleCols(own_offset, p);

  const OlsFit unrestricted = fit_ols(X, y);
  const OlsFit restricted = fit_ols(Xr, y);

  GrangerResult g;
  g.direction = direction;
  g.lag = p;
  g.n_obs = static_cast<int>(X.rows());
  g.dof_num = p;
  g.dof_den = g.n_obs - 2 * p - 1;
  g.ssr_unrestricted = unrestricted.ssr;
  g.ssr_restricted = restricted.ssr;
  if (!(unrestricted.ssr > 0.0)) {
    throw DegenerateVarianceError("granger_test: unrestricted model fits exactly; F-statistic undefined");
  }
  g.f_stat = std::max(0.0, ((restricted.ssr - unrestricted.ssr) / p) / (unrestricted.ssr / g.dof_den));
  g.p_value = f_cdf_upper(g.f_stat, g.dof_num, g.dof_den);
  return g;
}

std::vector<GrangerScanRow> granger_scan(std::span<const double> treat, std::span<const double> control,
                                         int max_lag) {
  if (max_lag < 1) throw DomainError("granger_scan: max_lag must be >= 1");
  std::vector<GrangerScanRow> rows;
  for (int p = 1; p <= max_lag; ++p) {
    rows.push_back({p, granger_test(treat, control, p, Direction::TreatmentToControl),
                    granger_test(treat, control, p, Direction::ControlToTreatment)});
  }
  return rows;
}

std::vector<Eigen::Matrix2d> ma_coefficients(const VarModel& model, int horizon) {
  if (horizon < 0) throw DomainError("horizon must be >= 0");
  std::vector<Eigen::Matrix2d> psi(static_cast<std::size_t>(horizon) + 1, Eigen::Matrix2d::Zero());
  psi[0].setIdentity();
  for (int h = 1; h <= horizon; ++h) {
    for (int i = 1; i <= std::min(h, model.p); ++i) {
      psi[static_cast<std::size_t>(h)] += psi[static_cast<std::size_t>(h - i)] * model.coeff[static_cast<std::size_t>(i - 1)];
    }
  }
  return psi;
}

IrfResult impulse_responses(const VarModel& model, int horizon, Ordering ordering) {
  if (horizon < 1) throw DomainError("impulse_responses: horizon must be >= 1");
  IrfResult out;
  out.horizon = horizon;
  out.ordering = ordering;
  out.spectral_radius = model.spectral_radius();
  out.stable = out.spectral_radius < 1.0;

  // Cholesky in the declared order, mapped back to variable labels.
  Eigen::Matrix2d perm = Eigen::Matrix2d::Identity();
  if (ordering == Ordering::ControlFirst) perm << 0, 1, 1, 0;
  Eigen::Matrix2d sigma = perm * model.resid_cov * perm.transpose();
  Eigen::LLT<Eigen::Matrix2d> llt(sigma);
  if (llt.info() != Eigen::Success) {
    out.jitter = 1e-12 * sigma.trace();
    sigma.diagonal().array() += out.jitter;
    llt.compute(sigma);
    if (llt.info() != Eigen::Success || out.jitter == 0.0) {
      throw NotPositiveDefiniteError("impulse_responses: residual covariance is not positive definite");
    }
  }
  const Eigen::Matrix2d lower = llt.matrixL();
  out.impact = perm.transpose() * lower * perm;

  out.ma = ma_coefficients(model, horizon);
  out.responses.reserve(out.ma.size());
  for (const auto& psi : out.ma) out.responses.push_back(psi * out.impact);
  return out;
}

CcfResult cross_correlation(std::span<const double> x, std::span<const double> y, int max_lag) {
  if (max_lag < 0) throw DomainError("cross_correlation: max_lag must be >= 0");
  if (x.size() != y.size()) throw DomainError("cross_correlation: series differ in length");
  if (static_cast<long long>(x.size()) <= static_cast<long long>(max_lag) + 2) {
    throw SampleSizeError("cross_correlation: need more than max_lag + 2 = " + std::to_string(max_lag + 2) +
                          " observations, have " + std::to_string(x.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DomainError("cross_correlation: non-finite input");
  }

  CcfResult out;
  out.max_lag = max_lag;
  const auto n = static_cast<long long>(x.size());
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    // Pairs (x_t, y_{t+lag}) with both indices in range.
    const long long t0 = std::max(0LL, -static_cast<long long>(lag));
    const long long t1 = std::min(n, n - lag);
    const auto count = static_cast<std::size_t>(t1 - t0);
    out.lags.push_back(lag);
    out.n_pairs.push_back(static_cast<int>(count));
    out.correlations.push_back(pearson(x.subspan(static_cast<std::size_t>(t0), count),
                                       y.subspan(static_cast<std::size_t>(t0 + lag), count)));
  }
  return out;
}

}  // namespace eventlens
