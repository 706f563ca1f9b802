#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace eventlens {

/// Variable 0 is the treatment series, variable 1 the control series.
enum class Direction { TreatmentToControl, ControlToTreatment };
enum class Ordering { TreatmentFirst, ControlFirst };

std::string_view to_string(Direction direction);
std::string_view to_string(Ordering ordering);
Ordering parse_ordering(std::string_view name);

/// Bivariate VAR(p) fitted equation by equation with OLS:
///   z_t = intercepts + sum_i coeff[i-1] z_{t-i} + e_t,  z = (treatment, control).
/// coeff[i](r, c) is the lag-(i+1) effect of variable c on equation r.
struct VarModel {
  int p = 0;
  std::vector<Eigen::Matrix2d> coeff;
  Eigen::Vector2d intercepts = Eigen::Vector2d::Zero();
  /// Residual covariance with divisor n_obs (maximum-likelihood convention).
  Eigen::Matrix2d resid_cov = Eigen::Matrix2d::Zero();
  /// Per-equation residual sums of squares.
  Eigen::Vector2d ssr = Eigen::Vector2d::Zero();
  /// Rows are time t, columns the two equations.
  Eigen::MatrixX2d residuals;
  /// Observations after dropping the first p.
  int n_obs = 0;

  /// 2p x 2p companion matrix of the lag polynomial.
  Eigen::MatrixXd companion() const;
  double spectral_radius() const;
  bool is_stable() const { return spectral_radius() < 1.0; }
};

/// Throws SampleSizeError unless T - p >= 4p + 4, DomainError on bad input.
VarModel fit_var(std::span<const double> treat, std::span<const double> control, int p);

struct LagCriteria {
  int p = 0;
  double log_det_cov = 0.0;
  double aic = 0.0;
  double bic = 0.0;
};

struct LagSelection {
  int p_aic = 1;
  int p_bic = 1;
  /// Common effective sample T - p_max used for every candidate.
  int n_obs = 0;
  std::vector<LagCriteria> table;
};

/// AIC = ln det S + 2m/T and BIC = ln det S + m ln(T)/T with m = 4p + 2,
/// every p in 1..p_max fitted on the same trimmed sample.
LagSelection select_lag(std::span<const double> treat, std::span<const double> control, int p_max);

struct GrangerResult {
  Direction direction = Direction::TreatmentToControl;
  int lag = 1;
  double f_stat = 0.0;
  double p_value = 1.0;
  int dof_num = 0;
  int dof_den = 0;
  double ssr_restricted = 0.0;
  double ssr_unrestricted = 0.0;
  int n_obs = 0;
};

/// F-test that the p lags of the cause variable can be dropped from the
/// effect variable's VAR equation.
GrangerResult granger_test(std::span<const double> treat, std::span<const double> control, int p, Direction direction);

struct GrangerScanRow {
  int lag = 1;
  GrangerResult treatment_to_control;
  GrangerResult control_to_treatment;
};

/// granger_test for every lag in 1..max_lag and both directions. p-values are
/// not adjusted for multiplicity.
std::vector<GrangerScanRow> granger_scan(std::span<const double> treat, std::span<const double> control, int max_lag);

struct IrfResult {
  int horizon = 0;
  Ordering ordering = Ordering::TreatmentFirst;
  /// responses[h](i, j): response of variable i at step h to a one-SD
  /// orthogonalized shock in variable j.
  std::vector<Eigen::Matrix2d> responses;
  /// Unorthogonalized moving-average coefficients Psi_h.
  std::vector<Eigen::Matrix2d> ma;
  /// Cholesky factor P with P P' = resid_cov (+ jitter), in variable labels.
  Eigen::Matrix2d impact = Eigen::Matrix2d::Zero();
  /// Diagonal loading added to make resid_cov positive definite (usually 0).
  double jitter = 0.0;
  double spectral_radius = 0.0;
  bool stable = true;
};

/// Psi_0 = I, Psi_h = sum_{i=1..min(h,p)} Psi_{h-i} A_i.
std::vector<Eigen::Matrix2d> ma_coefficients(const VarModel& model, int horizon);

IrfResult impulse_responses(const VarModel& model, int horizon = 10, Ordering ordering = Ordering::TreatmentFirst);

struct CcfResult {
  int max_lag = 0;
  /// -max_lag .. max_lag
  std::vector<int> lags;
  /// corr(x_t, y_{t+lag}); NaN where a subsample has zero variance.
  std::vector<double> correlations;
  std::vector<int> n_pairs;
};

CcfResult cross_correlation(std::span<const double> x, std::span<const double> y, int max_lag = 90);

}  // namespace eventlens
