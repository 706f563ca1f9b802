#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eventlens/bootstrap.hpp"
#include "eventlens/date.hpp"
#include "eventlens/logistic.hpp"
#include "eventlens/market_data.hpp"
#include "eventlens/rng.hpp"

namespace eventlens {

inline constexpr std::size_t kNumCovariates = 3;
inline constexpr std::array<std::string_view, kNumCovariates> kCovariateNames = {"lag_return", "ma_return",
                                                                                 "volatility"};

/// One (series, date) observation for propensity-score matching.
struct ObservationUnit {
  int unit_id = 0;
  std::string source;
  Date date;
  bool treated = false;
  /// Previous-day return, trailing moving average, trailing return SD.
  std::array<double, kNumCovariates> covariates{};
  /// Return on `date`.
  double outcome = 0.0;
};

struct UnitConfig {
  /// First observation date; the window starts at the first trading date on
  /// or after it.
  Date window_begin;
  int window_len = 30;
  int ma_window = 3;
  int vol_window = 5;
};

struct UnitExclusion {
  std::string source;
  Date date;
  std::string reason;
};

struct UnitSet {
  std::vector<ObservationUnit> units;
  std::vector<UnitExclusion> excluded;
};

/// Builds units from trailing data only. Treated series get ids first, in
/// input order, then controls. Dates lacking history or an outcome are
/// excluded with a reason rather than failing the call.
UnitSet build_units(const std::vector<ReturnSeries>& treated, const std::vector<ReturnSeries>& controls,
                    const UnitConfig& config);

struct PropensityFit {
  LogisticFit logistic;
  /// Scores in the order of the units passed to estimate_propensity.
  std::vector<double> scores;
  std::vector<int> unit_ids;
  double mean_treated = 0.0;
  double mean_control = 0.0;
  /// Covariates left out because they were constant across units.
  std::vector<std::string> dropped_covariates;
};

/// Logistic regression of the treated flag on an intercept plus covariates.
PropensityFit estimate_propensity(const std::vector<ObservationUnit>& units, const LogisticOptions& options = {});

struct MatchedPair {
  int treated_id = 0;
  int control_id = 0;
  double treated_score = 0.0;
  double control_score = 0.0;
  /// On the sample's caliper scale.
  double distance = 0.0;
  double treated_outcome = 0.0;
  double control_outcome = 0.0;
};

/// Scale on which score distances and the caliper are measured.
enum class CaliperScale { Logit, Probability };

std::string_view to_string(CaliperScale scale);
CaliperScale parse_caliper_scale(std::string_view name);

struct MatchOptions {
  /// Maximum score distance; default 0.2 * SD(logit(score)) on the logit scale.
  std::optional<double> caliper;
  CaliperScale scale = CaliperScale::Logit;
  bool replacement = false;
};

struct MatchedSample {
  std::vector<MatchedPair> pairs;
  double caliper = 0.0;
  CaliperScale scale = CaliperScale::Logit;
  bool replacement = false;
  int n_treated = 0;
  double match_rate = 0.0;
  std::vector<int> unmatched;
};

double default_caliper(const std::vector<double>& scores);

/// Greedy nearest-score matching. Treated units go in descending score
/// order; ties on score or distance break toward the lower unit_id.
MatchedSample caliper_match(const PropensityFit& fit, const std::vector<ObservationUnit>& units,
                            const MatchOptions& options = {});

struct AttResult {
  double att = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// att / se; NaN when se is zero or undefined.
  double t_stat = 0.0;
  double mean_treated = 0.0;
  double mean_matched_control = 0.0;
  int n_pairs = 0;
  double match_rate = 0.0;
  int n_boot = 0;
};

/// ATT over matched pairs with a pair-resampling bootstrap. With a single
/// pair only the point estimate is defined; se, ci and t_stat are NaN.
AttResult estimate_att(const MatchedSample& sample, int n_boot, const RngStream& rng);

struct BalanceRow {
  std::string covariate;
  double mean_treated_pre = 0.0;
  double mean_control_pre = 0.0;
  double smd_pre = 0.0;
  double mean_treated_post = 0.0;
  double mean_control_post = 0.0;
  double smd_post = 0.0;
  /// Welch two-sample t-test, matched groups.
  double p_value_post = 1.0;
};

struct BalanceReport {
  std::vector<BalanceRow> rows;
  double max_abs_smd_pre = 0.0;
  double max_abs_smd_post = 0.0;
  /// All post-match |SMD| defined and <= kBalanceThreshold.
  bool pass = false;
};

inline constexpr double kBalanceThreshold = 0.1;

/// (mean_t - mean_c) / sqrt((s_t^2 + s_c^2) / 2). 0 when the pooled SD is
/// zero and the means agree, NaN when it is zero and they differ.
double standardized_mean_difference(std::span<const double> treated, std::span<const double> control);

/// Welch two-sample t-test p-value; NaN if either group has fewer than 2 values.
double welch_t_test(std::span<const double> a, std::span<const double> b);

BalanceReport balance_check(const MatchedSample& sample, const std::vector<ObservationUnit>& units);

struct ScoreSummary {
  int n = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  /// 10th..90th percentiles.
  std::array<double, 9> deciles{};
};

struct SupportReport {
  ScoreSummary treated;
  ScoreSummary control;
  /// [max of minima, min of maxima]; empty when low > high.
  double overlap_low = 0.0;
  double overlap_high = 0.0;
  bool overlap_empty = false;
  double match_rate = 0.0;
  bool caution = false;
  std::string message;
};

inline constexpr double kCautionMatchRate = 0.6;

SupportReport common_support_report(const PropensityFit& fit, const std::vector<ObservationUnit>& units,
                                    const MatchedSample& sample);

}  // namespace eventlens
