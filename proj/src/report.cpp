#include "eventlens/report.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <ostream>

#include "eventlens/error.hpp"
#include "eventlens/io.hpp"
#include "eventlens/json_fields.hpp"

namespace eventlens {

namespace {

const char* variable_name(int i) { return i == 0 ? "treatment" : "control"; }

Json dates_json(const std::vector<Date>& dates) {
  Json out = Json::array();
  for (const auto& d : dates) out.push_back(d.iso());
  return out;
}

Json matrix_json(const Eigen::Matrix2d& m) {
  return Json::array({Json::array({m(0, 0), m(0, 1)}), Json::array({m(1, 0), m(1, 1)})});
}

Json loadings_json(const Loadings& b) { return Json{{"mkt", b.mkt}, {"smb", b.smb}, {"hml", b.hml}}; }

Loadings loadings_from(const Json& j, const std::string& where) {
  Loadings b;
  read_object(j, where, {{"mkt", [&](const Json& v) { b.mkt = v.get<double>(); }},
                         {"smb", [&](const Json& v) { b.smb = v.get<double>(); }},
                         {"hml", [&](const Json& v) { b.hml = v.get<double>(); }}});
  return b;
}

}  // namespace

void read_object(const Json& j, const std::string& where, const std::map<std::string, FieldReader>& fields) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ValidationError(where + ": unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + "." + key + ": " + e.what());
    }
  }
}

double round_p(double p) { return std::round(p * 1000.0) / 1000.0; }

Json to_json(const EventStudyResult& r) {
  return Json{{"model", to_string(r.model_kind)},
              {"t_convention", to_string(r.convention)},
              {"mean_ar", r.mean_ar},
              {"se_mean_ar", r.se_mean_ar},
              {"t_stat", r.t_stat},
              {"p_value", r.p_value},
              {"stars", significance_stars(r.p_value)},
              {"dof", r.dof},
              {"car_final", r.final_car},
              {"dates", dates_json(r.dates)},
              {"car_path", r.car_path},
              {"ar_path", r.daily_ar}};
}

Json to_json(const PlaceboSummary& s) {
  Json runs = Json::array();
  for (const auto& run : s.runs) {
    runs.push_back(Json{{"date", run.date.iso()},
                        {"car_final", run.result.final_car},
                        {"mean_ar", run.result.mean_ar},
                        {"t_stat", run.result.t_stat},
                        {"p_value", run.result.p_value}});
  }
  return Json{{"model", to_string(s.model_kind)},
              {"alpha", s.alpha},
              {"n_requested", s.n_requested},
              {"n_eligible", s.n_eligible},
              {"n_run", s.runs.size()},
              {"n_significant", s.n_significant},
              {"rejection_rate", s.rejection_rate},
              {"runs", runs}};
}

Json to_json(const VarModel& m) {
  Json lags = Json::array();
  for (const auto& a : m.coeff) lags.push_back(matrix_json(a));
  return Json{{"p", m.p},
              {"n_obs", m.n_obs},
              {"variables", Json::array({"treatment", "control"})},
              {"intercepts", Json::array({m.intercepts(0), m.intercepts(1)})},
              {"coefficients", lags},
              {"resid_cov", matrix_json(m.resid_cov)},
              {"resid_cov_divisor", "T - p"},
              {"spectral_radius", m.spectral_radius()},
              {"stable", m.is_stable()}};
}

Json to_json(const LagSelection& s) {
  Json table = Json::array();
  for (const auto& row : s.table) {
    table.push_back(Json{{"p", row.p}, {"log_det_cov", row.log_det_cov}, {"aic", row.aic}, {"bic", row.bic}});
  }
  return Json{{"p_aic", s.p_aic}, {"p_bic", s.p_bic}, {"n_obs", s.n_obs}, {"table", table}};
}

Json to_json(const GrangerResult& g) {
  return Json{{"direction", to_string(g.direction)},
              {"lag", g.lag},
              {"f_stat", g.f_stat},
              {"p_value", g.p_value},
              {"p_value_3dp", round_p(g.p_value)},
              {"stars", significance_stars(g.p_value)},
              {"dof", Json::array({g.dof_num, g.dof_den})},
              {"n_obs", g.n_obs}};
}

Json to_json(const std::vector<GrangerScanRow>& scan) {
  Json rows = Json::array();
  for (const auto& row : scan) {
    rows.push_back(Json{{"lags", row.lag},
                        {"treatment_to_control", to_json(row.treatment_to_control)},
                        {"control_to_treatment", to_json(row.control_to_treatment)}});
  }
  return Json{{"columns", Json::array({"Lags", "T->C F", "T->C p", "C->T F", "C->T p"})},
              {"multiplicity_adjustment", "none"},
              {"rows", rows}};
}

Json to_json(const IrfResult& irf) {
  Json theta = Json::array();
  for (const auto& m : irf.responses) theta.push_back(matrix_json(m));
  return Json{{"horizon", irf.horizon},
              {"ordering", to_string(irf.ordering)},
              {"variables", Json::array({"treatment", "control"})},
              {"theta", theta},
              {"jitter", irf.jitter},
              {"spectral_radius", irf.spectral_radius},
              {"stable", irf.stable}};
}

Json to_json(const CcfResult& ccf) {
  return Json{{"max_lag", ccf.max_lag},
              {"definition", "corr(treatment_t, control_{t+lag})"},
              {"lags", ccf.lags},
              {"correlations", ccf.correlations},
              {"n_pairs", ccf.n_pairs}};
}

Json to_json(const AttResult& a) {
  return Json{{"att", a.att},
              {"boot_se", a.se},
              {"t_stat", a.t_stat},
              {"ci", Json::array({a.ci_low, a.ci_high})},
              {"mean_treated", a.mean_treated},
              {"mean_matched_control", a.mean_matched_control},
              {"n_pairs", a.n_pairs},
              {"match_rate", a.match_rate},
              {"n_boot", a.n_boot}};
}

Json to_json(const BalanceReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back(Json{{"covariate", r.covariate},
                        {"smd_pre", r.smd_pre},
                        {"smd_post", r.smd_post},
                        {"p_value_post", r.p_value_post}});
  }
  return Json{{"threshold", kBalanceThreshold},
              {"max_abs_smd_pre", report.max_abs_smd_pre},
              {"max_abs_smd_post", report.max_abs_smd_post},
              {"pass", report.pass},
              {"rows", rows}};
}

Json to_json(const SupportReport& report) {
  auto group = [](const ScoreSummary& s) {
    return Json{{"n", s.n}, {"mean", s.mean}, {"min", s.min}, {"max", s.max}, {"deciles", s.deciles}};
  };
  return Json{{"treated", group(report.treated)},
              {"control", group(report.control)},
              {"overlap", Json::array({report.overlap_low, report.overlap_high})},
              {"overlap_empty", report.overlap_empty},
              {"match_rate", report.match_rate},
              {"caution", report.caution},
              {"message", report.message}};
}

Json to_json(const PropensityFit& fit) {
  const auto& c = fit.logistic.coefficients;
  return Json{{"coefficients", std::vector<double>(c.data(), c.data() + c.size())},
              {"dropped_covariates", fit.dropped_covariates},
              {"converged", fit.logistic.converged},
              {"iterations", fit.logistic.iterations},
              {"ridge_lambda", fit.logistic.ridge_lambda},
              {"ridge_fallback", fit.logistic.ridge_fallback},
              {"max_abs_score", fit.logistic.max_abs_score},
              {"mean_score_treated", fit.mean_treated},
              {"mean_score_control", fit.mean_control}};
}

Json to_json(const GroundTruth& truth) {
  Json loadings = Json::array();
  for (const auto& b : truth.loadings) loadings.push_back(loadings_json(b));
  return Json{{"seed", truth.seed},
              {"event_date", truth.event_date.iso()},
              {"event_len", truth.event_len},
              {"planted_event_alpha", truth.planted_event_alpha},
              {"spillover", Json{{"lag", truth.spillover.lag}, {"coefficient", truth.spillover.coefficient}}},
              {"att_delta", truth.att_delta},
              {"selection_strength", truth.selection_strength},
              {"treated_assets", truth.treated_assets},
              {"control_assets", truth.control_assets},
              {"loadings", loadings}};
}

Json to_json(const DgpSpec& s) {
  Json asset_loadings = Json::array();
  for (const auto& b : s.asset_loadings) asset_loadings.push_back(loadings_json(b));
  const FactorMoments& f = s.factors;
  return Json{{"n_days", s.n_days},
              {"n_treat_assets", s.n_treat_assets},
              {"n_control_assets", s.n_control_assets},
              {"factors", Json{{"mkt_mean", f.mkt_mean}, {"mkt_sd", f.mkt_sd}, {"rf_mean", f.rf_mean},
                               {"rf_sd", f.rf_sd}, {"smb_mean", f.smb_mean}, {"smb_sd", f.smb_sd},
                               {"hml_mean", f.hml_mean}, {"hml_sd", f.hml_sd}}},
              {"emit_smb_hml", s.emit_smb_hml},
              {"default_loadings", loadings_json(s.default_loadings)},
              {"asset_loadings", asset_loadings},
              {"noise_sd", s.noise_sd},
              {"event_day", s.event_day},
              {"event_len", s.event_len},
              {"planted_event_alpha", s.planted_event_alpha},
              {"spillover", Json{{"lag", s.spillover.lag}, {"coefficient", s.spillover.coefficient}}},
              {"att", Json{{"delta", s.att.delta},
                           {"selection_strength", s.att.selection_strength},
                           {"n_units", s.att.n_units},
                           {"base_treated_share", s.att.base_treated_share},
                           {"outcome_noise_sd", s.att.outcome_noise_sd}}},
              {"start_date", s.start_date.iso()},
              {"seed", s.seed}};
}

DgpSpec dgp_spec_from_json(const Json& j) {
  DgpSpec s;
  FactorMoments& f = s.factors;
  const std::string where = "synth";
  read_object(
      j, where,
      {{"n_days", [&](const Json& v) { s.n_days = v.get<int>(); }},
       {"n_treat_assets", [&](const Json& v) { s.n_treat_assets = v.get<int>(); }},
       {"n_control_assets", [&](const Json& v) { s.n_control_assets = v.get<int>(); }},
       {"factors",
        [&](const Json& v) {
          read_object(v, where + ".factors",
                      {{"mkt_mean", [&](const Json& x) { f.mkt_mean = x.get<double>(); }},
                       {"mkt_sd", [&](const Json& x) { f.mkt_sd = x.get<double>(); }},
                       {"rf_mean", [&](const Json& x) { f.rf_mean = x.get<double>(); }},
                       {"rf_sd", [&](const Json& x) { f.rf_sd = x.get<double>(); }},
                       {"smb_mean", [&](const Json& x) { f.smb_mean = x.get<double>(); }},
                       {"smb_sd", [&](const Json& x) { f.smb_sd = x.get<double>(); }},
                       {"hml_mean", [&](const Json& x) { f.hml_mean = x.get<double>(); }},
                       {"hml_sd", [&](const Json& x) { f.hml_sd = x.get<double>(); }}});
        }},
       {"emit_smb_hml", [&](const Json& v) { s.emit_smb_hml = v.get<bool>(); }},
       {"default_loadings", [&](const Json& v) { s.default_loadings = loadings_from(v, where + ".default_loadings"); }},
       {"asset_loadings",
        [&](const Json& v) {
          s.asset_loadings.clear();
          for (const auto& b : v) s.asset_loadings.push_back(loadings_from(b, where + ".asset_loadings[]"));
        }},
       {"noise_sd", [&](const Json& v) { s.noise_sd = v.get<double>(); }},
       {"event_day", [&](const Json& v) { s.event_day = v.get<int>(); }},
       {"event_len", [&](const Json& v) { s.event_len = v.get<int>(); }},
       {"planted_event_alpha", [&](const Json& v) { s.planted_event_alpha = v.get<double>(); }},
       {"spillover",
        [&](const Json& v) {
          read_object(v, where + ".spillover",
                      {{"lag", [&](const Json& x) { s.spillover.lag = x.get<int>(); }},
                       {"coefficient", [&](const Json& x) { s.spillover.coefficient = x.get<double>(); }}});
        }},
       {"att",
        [&](const Json& v) {
          read_object(v, where + ".att",
                      {{"delta", [&](const Json& x) { s.att.delta = x.get<double>(); }},
                       {"selection_strength", [&](const Json& x) { s.att.selection_strength = x.get<double>(); }},
                       {"n_units", [&](const Json& x) { s.att.n_units = x.get<int>(); }},
                       {"base_treated_share", [&](const Json& x) { s.att.base_treated_share = x.get<double>(); }},
                       {"outcome_noise_sd", [&](const Json& x) { s.att.outcome_noise_sd = x.get<double>(); }}});
        }},
       {"start_date", [&](const Json& v) { s.start_date = Date::from_iso(v.get<std::string>()); }},
       {"seed", [&](const Json& v) { s.seed = v.get<std::uint64_t>(); }}});
  s.validate();
  return s;
}

void write_event_paths_csv(std::ostream& out, const std::vector<std::pair<std::string, EventStudyResult>>& results) {
  out << "portfolio,model,day,date,ar,car\n";
  for (const auto& [portfolio, r] : results) {
    for (std::size_t j = 0; j < r.daily_ar.size(); ++j) {
      out << portfolio << ',' << to_string(r.model_kind) << ',' << j << ',' << r.dates[j].iso() << ','
          << format_number(r.daily_ar[j]) << ',' << format_number(r.car_path[j]) << '\n';
    }
  }
}

void write_irf_csv(std::ostream& out, const IrfResult& irf) {
  out << "horizon,response,shock,value\n";
  for (std::size_t h = 0; h < irf.responses.size(); ++h) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        out << h << ',' << variable_name(i) << ',' << variable_name(j) << ',' << format_number(irf.responses[h](i, j))
            << '\n';
      }
    }
  }
}

void write_ccf_csv(std::ostream& out, const CcfResult& ccf) {
  out << "lag,correlation,n_pairs\n";
  for (std::size_t i = 0; i < ccf.lags.size(); ++i) {
    out << ccf.lags[i] << ',' << format_number(ccf.correlations[i]) << ',' << ccf.n_pairs[i] << '\n';
  }
}

void write_balance_csv(std::ostream& out, const BalanceReport& report) {
  out << "covariate,mean_treated_pre,mean_control_pre,smd_pre,mean_treated_post,mean_control_post,smd_post,"
         "p_value_post\n";
  for (const auto& r : report.rows) {
    out << r.covariate << ',' << format_number(r.mean_treated_pre) << ',' << format_number(r.mean_control_pre) << ','
        << format_number(r.smd_pre) << ',' << format_number(r.mean_treated_post) << ','
        << format_number(r.mean_control_post) << ',' << format_number(r.smd_post) << ','
        << format_number(r.p_value_post) << '\n';
  }
}

void write_pairs_csv(std::ostream& out, const MatchedSample& sample) {
  out << "treated_id,control_id,treated_score,control_score,distance,treated_outcome,control_outcome\n";
  for (const auto& p : sample.pairs) {
    out << p.treated_id << ',' << p.control_id << ',' << format_number(p.treated_score) << ','
        << format_number(p.control_score) << ',' << format_number(p.distance) << ','
        << format_number(p.treated_outcome) << ',' << format_number(p.control_outcome) << '\n';
  }
}

}  // namespace eventlens
