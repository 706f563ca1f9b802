#include "eventlens/event_study.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eventlens/distributions.hpp"
#include "eventlens/error.hpp"

namespace eventlens {

namespace {

Eigen::Index n_columns(ModelKind kind) { return kind == ModelKind::FamaFrench3 ? 4 : 2; }

void require_factors(const ReturnPanel& panel, ModelKind kind) {
  if (!panel.factors) {
    throw MissingFactorError(std::string(to_string(kind)) + " needs a factor file (columns mkt, rf" +
                             (kind == ModelKind::FamaFrench3 ? ", smb, hml" : "") + ")");
  }
  if (kind == ModelKind::FamaFrench3 && !panel.factors->has_three_factor()) {
    std::string missing;
    if (!panel.factors->smb) missing = "smb";
    if (!panel.factors->hml) missing += missing.empty() ? "hml" : ", hml";
    throw MissingFactorError("fama-french-3 needs factor columns missing from the factor file: " + missing);
  }
}

// Fills the regressors and response for one date; false if any input is missing.
bool design_row(const ReturnPanel& panel, ModelKind kind, Date date, double actual, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> x,
                double& y) {
  if (is_missing(actual)) return false;
  const auto row = panel.row_of(date);
  if (!row) return false;
  const FactorTable& f = *panel.factors;
  const double mkt = f.mkt[*row];
  const double rf = f.rf[*row];
  x(0) = 1.0;
  switch (kind) {
    case ModelKind::MarketModel:
      if (is_missing(mkt)) return false;
      x(1) = mkt;
      y = actual;
      return true;
    case ModelKind::Capm:
      if (is_missing(mkt) || is_missing(rf)) return false;
      x(1) = mkt - rf;
      y = actual - rf;
      return true;
    case ModelKind::FamaFrench3: {
      const double smb = (*f.smb)[*row];
      const double hml = (*f.hml)[*row];
      if (is_missing(mkt) || is_missing(rf) || is_missing(smb) || is_missing(hml)) return false;
      x(1) = mkt - rf;
      x(2) = smb;
      x(3) = hml;
      y = actual - rf;
      return true;
    }
  }
  return false;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::MarketModel: return "market-model";
    case ModelKind::Capm: return "capm";
    case ModelKind::FamaFrench3: return "fama-french-3";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "market-model") return ModelKind::MarketModel;
  if (name == "capm") return ModelKind::Capm;
  if (name == "fama-french-3") return ModelKind::FamaFrench3;
  throw ValidationError("unknown benchmark model '" + std::string(name) +
                        "' (expected market-model, capm or fama-french-3)");
}

std::string_view to_string(TStatConvention convention) {
  return convention == TStatConvention::PredictionAdjusted ? "prediction-adjusted" : "residual-sd";
}

TStatConvention parse_t_convention(std::string_view name) {
  if (name == "prediction-adjusted") return TStatConvention::PredictionAdjusted;
  if (name == "residual-sd") return TStatConvention::ResidualSd;
  throw ValidationError("unknown t-statistic convention '" + std::string(name) + "'");
}

BenchmarkModel fit_benchmark(const ReturnSeries& series, const ReturnPanel& panel, const EventSpec& spec,
                             ModelKind kind) {
  require_factors(panel, kind);
  const WindowSlices windows = slice_windows(series, spec);
  const ReturnSeries& est = windows.estimation;

  const Eigen::Index k = n_columns(kind);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(est.size()), k);
  Eigen::VectorXd y(static_cast<Eigen::Index>(est.size()));
  BenchmarkModel model;
  model.kind = kind;
  Eigen::Index used = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (design_row(panel, kind, est.dates[i], est.values[i], X.row(used), y(used))) {
      model.estimation_dates.push_back(est.dates[i]);
      ++used;
    }
  }
  if (used < kMinEstimationObs) {
    throw CoverageError("estimation window before " + spec.event_date.iso() + " has " + std::to_string(used) +
                        " usable observations for " + std::string(to_string(kind)) + "; need " +
                        std::to_string(kMinEstimationObs));
  }
  // A factor that is exactly zero over the whole estimation window has no
  // identifiable loading; it is fixed at 0 and the fit reduces to the nested model.
  std::vector<Eigen::Index> keep{0, 1};
  for (Eigen::Index c = 2; c < k; ++c) {
    if (X.col(c).head(used).cwiseAbs().maxCoeff() == 0.0) {
      model.dropped_factors.push_back(c == 2 ? "smb" : "hml");
    } else {
      keep.push_back(c);
    }
  }
  if (model.dropped_factors.empty()) {
    model.fit = fit_ols(X.topRows(used), y.head(used));
    return model;
  }
  const Eigen::MatrixXd reduced = X.topRows(used)(Eigen::all, keep);
  OlsFit fit = fit_ols(reduced, y.head(used));
  Eigen::VectorXd coefficients = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd xtx_inverse = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t a = 0; a < keep.size(); ++a) {
    coefficients(keep[a]) = fit.coefficients(static_cast<Eigen::Index>(a));
    for (std::size_t b = 0; b < keep.size(); ++b) {
      xtx_inverse(keep[a], keep[b]) = fit.xtx_inverse(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  fit.coefficients = std::move(coefficients);
  fit.xtx_inverse = std::move(xtx_inverse);
  model.fit = std::move(fit);
  return model;
}

AbnormalReturns abnormal_returns(const BenchmarkModel& model, const ReturnSeries& series, const ReturnPanel& panel,
                                 const EventSpec& spec) {
  require_factors(panel, model.kind);
  const WindowSlices windows = slice_windows(series, spec);
  const ReturnSeries& ev = windows.event;

  AbnormalReturns out;
  out.dates = ev.dates;
  out.values.resize(ev.size());
  out.design.resize(static_cast<Eigen::Index>(ev.size()), n_columns(model.kind));
  std::vector<std::string> gaps;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    double y = 0.0;
    const auto row = static_cast<Eigen::Index>(i);
    if (!design_row(panel, model.kind, ev.dates[i], ev.values[i], out.design.row(row), y)) {
      gaps.push_back(ev.dates[i].iso());
      continue;
    }
    out.values[i] = y - out.design.row(row).dot(model.fit.coefficients);
  }
  if (!gaps.empty()) {
    std::string list;
    for (const auto& g : gaps) list += (list.empty() ? "" : ", ") + g;
    throw CoverageError("event window has missing returns or factors on: " + list);
  }
  return out;
}

EventStudyResult car_and_test(const AbnormalReturns& ar, const BenchmarkModel& model, const EventSpec& spec,
                              TStatConvention convention) {
  const std::size_t L = ar.values.size();
  if (L == 0) throw DomainError("car_and_test: no abnormal returns");
  if (static_cast<int>(L) != spec.event_len) {
    throw DomainError("car_and_test: got " + std::to_string(L) + " abnormal returns for a " +
                      std::to_string(spec.event_len) + "-day event window");
  }

  EventStudyResult r;
  r.model_kind = model.kind;
  r.convention = convention;
  r.dates = ar.dates;
  r.daily_ar = ar.values;
  r.car_path.resize(L);
  double running = 0.0;
  for (std::size_t j = 0; j < L; ++j) {
    running += ar.values[j];
    r.car_path[j] = running;
  }
  r.final_car = r.car_path.back();
  r.mean_ar = r.final_car / static_cast<double>(L);
  r.dof = static_cast<int>(model.fit.dof());

  const double Ld = static_cast<double>(L);
  double var_factor = Ld;  // Var(CAR) / s^2
  if (convention == TStatConvention::PredictionAdjusted) {
    if (ar.design.rows() != static_cast<Eigen::Index>(L) || ar.design.cols() != model.fit.xtx_inverse.cols()) {
      throw DomainError("car_and_test: prediction-adjusted t-statistic needs the event-window design");
    }
    const Eigen::VectorXd col_sums = ar.design.colwise().sum().transpose();
    var_factor += col_sums.dot(model.fit.xtx_inverse * col_sums);
  }
  const double sd = model.fit.residual_sd;
  r.se_mean_ar = sd * std::sqrt(var_factor) / Ld;

  const bool all_zero = std::all_of(ar.values.begin(), ar.values.end(), [](double v) { return v == 0.0; });
  if (r.se_mean_ar == 0.0) {
    if (!all_zero) {
      throw DegenerateVarianceError("estimation residual SD is zero but abnormal returns are not; t-statistic undefined");
    }
    r.t_stat = 0.0;
    r.p_value = 1.0;
    return r;
  }
  r.t_stat = r.mean_ar / r.se_mean_ar;
  r.p_value = t_cdf_two_sided(r.t_stat, r.dof);
  return r;
}

EventStudyResult run_event_study(const ReturnSeries& series, const ReturnPanel& panel, const EventSpec& spec,
                                 ModelKind kind, TStatConvention convention) {
  const BenchmarkModel model = fit_benchmark(series, panel, spec, kind);
  return car_and_test(abnormal_returns(model, series, panel, spec), model, spec, convention);
}

std::string significance_stars(double p_value) {
  if (p_value < 0.01) return "***";
  if (p_value < 0.05) return "**";
  if (p_value < 0.10) return "*";
  return "";
}

PlaceboSummary placebo_study(const ReturnSeries& series, const ReturnPanel& panel, const EventSpec& base_spec,
                             const PlaceboOptions& options, const RngStream& rng) {
  base_spec.validate();
  if (options.n_placebos < 1) throw ValidationError("placebo_study: n_placebos must be >= 1");
  const auto it = std::lower_bound(series.dates.begin(), series.dates.end(), base_spec.event_date);
  if (it == series.dates.end() || *it != base_spec.event_date) {
    throw CoverageError("true event date " + base_spec.event_date.iso() + " is not a trading date of '" +
                        series.name + "'");
  }
  const auto event = static_cast<std::size_t>(it - series.dates.begin());
  const auto est = static_cast<std::size_t>(base_spec.estimation_len);
  const auto len = static_cast<std::size_t>(base_spec.event_len);

  // Placebo span [i - est, i + len) must not meet the true window [event, event + len).
  std::vector<std::size_t> eligible;
  for (std::size_t i = est; i + len <= series.size(); ++i) {
    const bool overlaps = i - est < event + len && event < i + len;
    if (!overlaps) eligible.push_back(i);
  }
  if (eligible.empty()) throw CoverageError("placebo_study: no date admits full windows outside the true event window");

  PlaceboSummary summary;
  summary.model_kind = options.kind;
  summary.alpha = options.alpha;
  summary.n_requested = options.n_placebos;
  summary.n_eligible = eligible.size();

  RngStream shuffle = rng.substream(0);
  for (std::size_t drawn = 0; drawn < eligible.size() && static_cast<int>(summary.runs.size()) < options.n_placebos;
       ++drawn) {
    // Partial Fisher-Yates: position `drawn` receives a uniform pick of the rest.
    const std::size_t pick = drawn + static_cast<std::size_t>(shuffle.uniform_index(eligible.size() - drawn));
    std::swap(eligible[drawn], eligible[pick]);
    EventSpec spec = base_spec;
    spec.event_date = series.dates[eligible[drawn]];
    try {
      summary.runs.push_back({spec.event_date, run_event_study(series, panel, spec, options.kind, options.convention)});
    } catch (const DataError&) {
      continue;  // unusable window; try the next date
    }
  }
  if (summary.runs.empty()) throw CoverageError("placebo_study: no eligible date had usable data");
  for (const auto& run : summary.runs) summary.n_significant += run.result.p_value < options.alpha;
  summary.rejection_rate = static_cast<double>(summary.n_significant) / static_cast<double>(summary.runs.size());
  return summary;
}

}  // namespace eventlens
