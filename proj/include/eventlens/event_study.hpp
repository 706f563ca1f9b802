#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "eventlens/market_data.hpp"
#include "eventlens/ols.hpp"
#include "eventlens/rng.hpp"

namespace eventlens {

enum class ModelKind { MarketModel, Capm, FamaFrench3 };

std::string_view to_string(ModelKind kind);
/// Accepts "market-model", "capm" and "fama-french-3"; throws ValidationError.
ModelKind parse_model_kind(std::string_view name);

/// How the abnormal-return t-statistic is scaled.
enum class TStatConvention {
  /// Var(CAR) = s^2 (L + 1'X*(X'X)^-1 X*'1): residual variance plus the
  /// sampling error of the fitted normal-return model. Exactly t(n - k)
  /// under homoskedastic normal errors.
  PredictionAdjusted,
  /// Var(CAR) = s^2 L, residual variance only.
  ResidualSd,
};

std::string_view to_string(TStatConvention convention);
TStatConvention parse_t_convention(std::string_view name);

/// Estimation windows with fewer usable observations are rejected.
inline constexpr int kMinEstimationObs = 30;

/// Normal-return model fitted on the estimation window.
///
/// market-model regresses raw returns on the market return. capm and
/// fama-french-3 regress excess returns on the excess market return (plus
/// SMB and HML for the latter).
struct BenchmarkModel {
  ModelKind kind = ModelKind::MarketModel;
  OlsFit fit;
  /// Estimation dates that entered the regression.
  std::vector<Date> estimation_dates;
  /// Factors identically zero over the estimation window; their loadings are
  /// fixed at 0 and excluded from the fit.
  std::vector<std::string> dropped_factors;
};

/// Event-window abnormal returns with the regressors that produced them.
struct AbnormalReturns {
  std::vector<Date> dates;
  std::vector<double> values;
  /// Event-window design rows, same column layout as the benchmark fit.
  Eigen::MatrixXd design;
};

struct EventStudyResult {
  ModelKind model_kind = ModelKind::MarketModel;
  TStatConvention convention = TStatConvention::PredictionAdjusted;
  std::vector<Date> dates;
  std::vector<double> daily_ar;
  /// car_path[j] = sum of daily_ar[0..j].
  std::vector<double> car_path;
  double mean_ar = 0.0;
  double se_mean_ar = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  double final_car = 0.0;
  /// Estimation-window residual degrees of freedom (n - k).
  int dof = 0;
};

BenchmarkModel fit_benchmark(const ReturnSeries& series, const ReturnPanel& panel, const EventSpec& spec,
                             ModelKind kind);

/// AR_t = actual - predicted normal return over the event window; in excess
/// space for capm and fama-french-3.
AbnormalReturns abnormal_returns(const BenchmarkModel& model, const ReturnSeries& series, const ReturnPanel& panel,
                                 const EventSpec& spec);

/// Cumulates the abnormal returns and tests mean AR = 0 against t(n - k).
/// PredictionAdjusted needs `ar.design`; ResidualSd ignores it.
EventStudyResult car_and_test(const AbnormalReturns& ar, const BenchmarkModel& model, const EventSpec& spec,
                              TStatConvention convention = TStatConvention::PredictionAdjusted);

/// fit_benchmark + abnormal_returns + car_and_test.
EventStudyResult run_event_study(const ReturnSeries& series, const ReturnPanel& panel, const EventSpec& spec,
                                 ModelKind kind, TStatConvention convention = TStatConvention::PredictionAdjusted);

/// "***" for p < 0.01, "**" for p < 0.05, "*" for p < 0.10.
std::string significance_stars(double p_value);

struct PlaceboRun {
  Date date;
  EventStudyResult result;
};

struct PlaceboSummary {
  ModelKind model_kind = ModelKind::MarketModel;
  double alpha = 0.05;
  int n_requested = 0;
  std::size_t n_eligible = 0;
  int n_significant = 0;
  double rejection_rate = 0.0;
  std::vector<PlaceboRun> runs;
};

struct PlaceboOptions {
  int n_placebos = 100;
  ModelKind kind = ModelKind::MarketModel;
  TStatConvention convention = TStatConvention::PredictionAdjusted;
  double alpha = 0.05;
};

/// Event studies on random pseudo-event dates drawn without replacement from
/// dates whose full estimation+event span avoids the true event window.
/// Dates whose windows lack usable data are skipped.
PlaceboSummary placebo_study(const ReturnSeries& series, const ReturnPanel& panel, const EventSpec& base_spec,
                             const PlaceboOptions& options, const RngStream& rng);

}  // namespace eventlens
