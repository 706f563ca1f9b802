#include "eventlens/causal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "eventlens/descriptive.hpp"
#include "eventlens/distributions.hpp"
#include "eventlens/error.hpp"

namespace eventlens {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void add_units_from(const ReturnSeries& s, bool treated, const UnitConfig& cfg, int& next_id, UnitSet& out) {
  const auto history = static_cast<std::size_t>(std::max({1, cfg.ma_window, cfg.vol_window}));
  const auto begin = static_cast<std::size_t>(
      std::lower_bound(s.dates.begin(), s.dates.end(), cfg.window_begin) - s.dates.begin());
  const std::size_t end = std::min(s.size(), begin + static_cast<std::size_t>(cfg.window_len));
  for (std::size_t i = begin; i < end; ++i) {
    if (i < history) {
      out.excluded.push_back({s.name, s.dates[i], "needs " + std::to_string(history) + " trailing returns"});
      continue;
    }
    const std::span<const double> trailing(s.values.data() + (i - history), history);
    if (std::any_of(trailing.begin(), trailing.end(), is_missing)) {
      out.excluded.push_back({s.name, s.dates[i], "missing return in trailing window"});
      continue;
    }
    if (is_missing(s.values[i])) {
      out.excluded.push_back({s.name, s.dates[i], "missing outcome return"});
      continue;
    }
    ObservationUnit u;
    u.unit_id = next_id++;
    u.source = s.name;
    u.date = s.dates[i];
    u.treated = treated;
    u.covariates[0] = s.values[i - 1];
    u.covariates[1] = mean(trailing.last(static_cast<std::size_t>(cfg.ma_window)));
    u.covariates[2] = sample_sd(trailing.last(static_cast<std::size_t>(cfg.vol_window)));
    u.outcome = s.values[i];
    out.units.push_back(std::move(u));
  }
}

ScoreSummary summarize(std::vector<double> scores) {
  ScoreSummary s;
  s.n = static_cast<int>(scores.size());
  if (scores.empty()) return s;
  std::sort(scores.begin(), scores.end());
  s.mean = mean(scores);
  s.min = scores.front();
  s.max = scores.back();
  for (std::size_t d = 0; d < s.deciles.size(); ++d) {
    s.deciles[d] = quantile_sorted(scores, 0.1 * static_cast<double>(d + 1));
  }
  return s;
}

}  // namespace

UnitSet build_units(const std::vector<ReturnSeries>& treated, const std::vector<ReturnSeries>& controls,
                    const UnitConfig& config) {
  if (config.window_len < 1 || config.ma_window < 1 || config.vol_window < 2) {
    throw ValidationError("unit config needs window_len >= 1, ma_window >= 1 and vol_window >= 2");
  }
  UnitSet out;
  int next_id = 0;
  for (const auto& s : treated) add_units_from(s, true, config, next_id, out);
  for (const auto& s : controls) add_units_from(s, false, config, next_id, out);
  return out;
}

PropensityFit estimate_propensity(const std::vector<ObservationUnit>& units, const LogisticOptions& options) {
  if (units.empty()) throw DomainError("estimate_propensity: no units");
  std::vector<std::size_t> kept;
  PropensityFit fit;
  for (std::size_t c = 0; c < kNumCovariates; ++c) {
    const double first = units.front().covariates[c];
    const bool constant =
        std::all_of(units.begin(), units.end(), [&](const ObservationUnit& u) { return u.covariates[c] == first; });
    if (constant) {
      fit.dropped_covariates.emplace_back(kCovariateNames[c]);
    } else {
      kept.push_back(c);
    }
  }

  const auto n = static_cast<Eigen::Index>(units.size());
  Eigen::MatrixXd X(n, 1 + static_cast<Eigen::Index>(kept.size()));
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& u = units[static_cast<std::size_t>(i)];
    X(i, 0) = 1.0;
    for (std::size_t j = 0; j < kept.size(); ++j) X(i, static_cast<Eigen::Index>(j) + 1) = u.covariates[kept[j]];
    d(i) = u.treated ? 1.0 : 0.0;
  }
  fit.logistic = fit_logistic(X, d, options);
  const Eigen::VectorXd p = fit.logistic.predict(X);
  fit.scores.assign(p.data(), p.data() + p.size());

  double sum_t = 0.0, sum_c = 0.0;
  int n_t = 0, n_c = 0;
  for (std::size_t i = 0; i < units.size(); ++i) {
    fit.unit_ids.push_back(units[i].unit_id);
    if (units[i].treated) {
      sum_t += fit.scores[i];
      ++n_t;
    } else {
      sum_c += fit.scores[i];
      ++n_c;
    }
  }
  fit.mean_treated = sum_t / n_t;
  fit.mean_control = sum_c / n_c;
  return fit;
}

std::string_view to_string(CaliperScale scale) {
  return scale == CaliperScale::Logit ? "logit" : "probability";
}

CaliperScale parse_caliper_scale(std::string_view name) {
  if (name == "logit") return CaliperScale::Logit;
  if (name == "probability") return CaliperScale::Probability;
  throw ValidationError("unknown caliper scale '" + std::string(name) + "' (expected logit or probability)");
}

double default_caliper(const std::vector<double>& scores) {
  std::vector<double> logits;
  logits.reserve(scores.size());
  for (double p : scores) logits.push_back(std::log(p / (1.0 - p)));
  return 0.2 * sample_sd(logits);
}

MatchedSample caliper_match(const PropensityFit& fit, const std::vector<ObservationUnit>& units,
                            const MatchOptions& options) {
  if (fit.scores.size() != units.size()) throw DomainError("caliper_match: scores and units differ in length");
  MatchedSample out;
  out.replacement = options.replacement;
  out.scale = options.scale;
  out.caliper = options.caliper ? *options.caliper : default_caliper(fit.scores);
  if (!(out.caliper >= 0.0)) throw ValidationError("caliper must be a non-negative number");

  std::vector<double> key(fit.scores);
  if (options.scale == CaliperScale::Logit) {
    for (double& k : key) k = std::log(k / (1.0 - k));
  }

  std::vector<std::size_t> treated, controls;
  for (std::size_t i = 0; i < units.size(); ++i) (units[i].treated ? treated : controls).push_back(i);
  std::sort(treated.begin(), treated.end(), [&](std::size_t a, std::size_t b) {
    if (fit.scores[a] != fit.scores[b]) return fit.scores[a] > fit.scores[b];
    return units[a].unit_id < units[b].unit_id;
  });
  out.n_treated = static_cast<int>(treated.size());

  std::vector<bool> used(units.size(), false);
  for (std::size_t t : treated) {
    std::size_t best = units.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t c : controls) {
      if (used[c]) continue;
      const double dist = std::abs(key[t] - key[c]);
      if (dist > out.caliper) continue;
      if (dist < best_dist || (dist == best_dist && units[c].unit_id < units[best].unit_id)) {
        best = c;
        best_dist = dist;
      }
    }
    if (best == units.size()) {
      out.unmatched.push_back(units[t].unit_id);
      continue;
    }
    if (!options.replacement) used[best] = true;
    out.pairs.push_back({units[t].unit_id, units[best].unit_id, fit.scores[t], fit.scores[best], best_dist,
                         units[t].outcome, units[best].outcome});
  }
  out.match_rate = treated.empty() ? 0.0 : static_cast<double>(out.pairs.size()) / static_cast<double>(treated.size());
  return out;
}

AttResult estimate_att(const MatchedSample& sample, int n_boot, const RngStream& rng) {
  if (sample.pairs.empty()) {
    throw NoSupportError("no matched pairs: the treated and control propensity scores do not overlap within the "
                         "caliper; see the common-support diagnostics");
  }
  AttResult r;
  r.n_pairs = static_cast<int>(sample.pairs.size());
  r.match_rate = sample.match_rate;
  r.n_boot = n_boot;

  std::vector<double> treated, control, diffs;
  for (const auto& p : sample.pairs) {
    treated.push_back(p.treated_outcome);
    control.push_back(p.control_outcome);
    diffs.push_back(p.treated_outcome - p.control_outcome);
  }
  r.mean_treated = mean(treated);
  r.mean_matched_control = mean(control);
  r.att = r.mean_treated - r.mean_matched_control;

  if (r.n_pairs < 2) {
    r.se = r.ci_low = r.ci_high = r.t_stat = kNaN;
    return r;
  }
  const BootstrapResult boot = bootstrap_se(diffs, n_boot, rng);
  r.se = boot.se;
  r.ci_low = boot.ci_low;
  r.ci_high = boot.ci_high;
  r.t_stat = r.se > 0.0 ? r.att / r.se : kNaN;
  return r;
}

double standardized_mean_difference(std::span<const double> treated, std::span<const double> control) {
  const double diff = mean(treated) - mean(control);
  const double pooled = std::sqrt((sample_variance(treated) + sample_variance(control)) / 2.0);
  if (pooled == 0.0) return diff == 0.0 ? 0.0 : kNaN;
  return diff / pooled;
}

double welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) return kNaN;
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  const double diff = mean(a) - mean(b);
  if (va + vb == 0.0) return diff == 0.0 ? 1.0 : kNaN;
  const double t = diff / std::sqrt(va + vb);
  const double dof = (va + vb) * (va + vb) /
                     (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  return t_cdf_two_sided(t, dof);
}

BalanceReport balance_check(const MatchedSample& sample, const std::vector<ObservationUnit>& units) {
  if (sample.pairs.empty()) throw NoSupportError("balance_check: matched sample is empty");
  std::unordered_map<int, const ObservationUnit*> by_id;
  for (const auto& u : units) by_id[u.unit_id] = &u;
  auto lookup = [&](int id) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw LookupError("balance_check: unit " + std::to_string(id) + " not among the units");
    return it->second;
  };

  BalanceReport report;
  report.pass = true;
  for (std::size_t c = 0; c < kNumCovariates; ++c) {
    std::vector<double> t_pre, c_pre, t_post, c_post;
    for (const auto& u : units) (u.treated ? t_pre : c_pre).push_back(u.covariates[c]);
    for (const auto& p : sample.pairs) {
      t_post.push_back(lookup(p.treated_id)->covariates[c]);
      c_post.push_back(lookup(p.control_id)->covariates[c]);
    }
    if (t_pre.empty() || c_pre.empty()) throw DomainError("balance_check: both groups must be non-empty");
    BalanceRow row;
    row.covariate = std::string(kCovariateNames[c]);
    row.mean_treated_pre = mean(t_pre);
    row.mean_control_pre = mean(c_pre);
    row.smd_pre = standardized_mean_difference(t_pre, c_pre);
    row.mean_treated_post = mean(t_post);
    row.mean_control_post = mean(c_post);
    row.smd_post = standardized_mean_difference(t_post, c_post);
    row.p_value_post = welch_t_test(t_post, c_post);

    if (std::isnan(row.smd_post) || std::abs(row.smd_post) > kBalanceThreshold) report.pass = false;
    if (!std::isnan(row.smd_pre)) report.max_abs_smd_pre = std::max(report.max_abs_smd_pre, std::abs(row.smd_pre));
    if (!std::isnan(row.smd_post)) report.max_abs_smd_post = std::max(report.max_abs_smd_post, std::abs(row.smd_post));
    report.rows.push_back(std::move(row));
  }
  return report;
}

SupportReport common_support_report(const PropensityFit& fit, const std::vector<ObservationUnit>& units,
                                    const MatchedSample& sample) {
  if (fit.scores.size() != units.size()) throw DomainError("common_support_report: scores and units differ in length");
  std::vector<double> t_scores, c_scores;
  for (std::size_t i = 0; i < units.size(); ++i) (units[i].treated ? t_scores : c_scores).push_back(fit.scores[i]);

  SupportReport r;
  r.treated = summarize(t_scores);
  r.control = summarize(c_scores);
  r.overlap_low = std::max(r.treated.min, r.control.min);
  r.overlap_high = std::min(r.treated.max, r.control.max);
  r.overlap_empty = t_scores.empty() || c_scores.empty() || r.overlap_low > r.overlap_high;
  r.match_rate = sample.match_rate;
  r.caution = r.match_rate < kCautionMatchRate;
  if (r.caution) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "match rate %.1f%% is below %.0f%%: weak common support between treated and control units; "
                  "interpret the ATT cautiously, it rests on a non-random subset of treated observations",
                  100.0 * r.match_rate, 100.0 * kCautionMatchRate);
    r.message = buf;
  } else {
    r.message = "common support adequate";
  }
  return r;
}

}  // namespace eventlens
