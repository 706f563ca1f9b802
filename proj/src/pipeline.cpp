#include "eventlens/pipeline.hpp"

#include <fstream>
#include <set>

#include "eventlens/error.hpp"
#include "eventlens/io.hpp"
#include "eventlens/json_fields.hpp"

namespace eventlens {

namespace {

// Substream ids per subcommand.
constexpr std::uint64_t kPsmStream = 101;
constexpr std::uint64_t kPlaceboStream = 202;

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  return p.is_absolute() ? p : base / p;
}

std::string_view to_string(LagCriterion c) { return c == LagCriterion::Aic ? "aic" : "bic"; }
std::string_view to_string(UnitMode m) { return m == UnitMode::PortfolioDay ? "portfolio-day" : "bank-day"; }
std::string_view to_string(UnitWindow w) { return w == UnitWindow::Pre ? "pre" : "post"; }

std::vector<std::string> members_from(const Json& v) {
  std::vector<std::string> out;
  for (const auto& m : v) out.push_back(m.get<std::string>());
  return out;
}

PortfolioSpec portfolio_from(const Json& v, const std::string& default_name, const std::string& where) {
  PortfolioSpec spec{default_name, {}};
  if (v.is_array()) {
    spec.members = members_from(v);
    return spec;
  }
  read_object(v, where, {{"name", [&](const Json& x) { spec.name = x.get<std::string>(); }},
                         {"members", [&](const Json& x) { spec.members = members_from(x); }}});
  return spec;
}

// Loaded data shared by the subcommands of one run.
class Context {
 public:
  explicit Context(const RunConfig& cfg) : cfg_(cfg) {}

  const RunConfig& config() const { return cfg_; }

  const ReturnPanel& panel() {
    if (!panel_) {
      if (cfg_.prices.empty()) throw ValidationError("config.data.prices is required");
      const PricePanel prices = load_prices(cfg_.prices);
      std::optional<FactorTable> factors;
      if (cfg_.factors) factors = load_factors(*cfg_.factors);
      panel_ = compute_returns(prices, factors, cfg_.returns);
    }
    return *panel_;
  }

  const ReturnSeries& treatment() {
    if (!treatment_) treatment_ = build_portfolio(panel(), cfg_.treatment);
    return *treatment_;
  }

  const ReturnSeries& control() {
    if (!control_) control_ = build_portfolio(panel(), cfg_.control);
    return *control_;
  }

  const AlignedPair& aligned() {
    if (!aligned_) aligned_ = align_pair(treatment(), control());
    return *aligned_;
  }

  const EventSpec& event() const {
    if (!cfg_.has_event) throw ValidationError("config.event.date is required for this subcommand");
    return cfg_.event;
  }

  /// Fixed p, or the information-criterion choice over 1..p_max.
  int var_lag() {
    if (cfg_.var.p) return *cfg_.var.p;
    const LagSelection& sel = lag_selection();
    return cfg_.var.criterion == LagCriterion::Aic ? sel.p_aic : sel.p_bic;
  }

  const LagSelection& lag_selection() {
    if (!selection_) selection_ = select_lag(aligned().first, aligned().second, cfg_.var.p_max);
    return *selection_;
  }

  Json envelope() const { return Json{{"config", resolved_json(cfg_)}, {"seed", cfg_.seed}}; }

  void write_json(const std::string& name, const Json& body) {
    write_file_atomic(cfg_.out_dir / name, [&](std::ostream& out) { out << body.dump(2) << '\n'; });
    written_.push_back(name);
  }

  void write_text(const std::string& name, const std::function<void(std::ostream&)>& writer) {
    write_file_atomic(cfg_.out_dir / name, writer);
    written_.push_back(name);
  }

  void record(const std::string& name) { written_.push_back(name); }
  const std::vector<std::string>& written() const { return written_; }

 private:
  const RunConfig& cfg_;
  std::optional<ReturnPanel> panel_;
  std::optional<ReturnSeries> treatment_, control_;
  std::optional<AlignedPair> aligned_;
  std::optional<LagSelection> selection_;
  std::vector<std::string> written_;
};

void run_synth(Context& ctx) {
  const RunConfig& cfg = ctx.config();
  if (!cfg.synth) throw ValidationError("the synth subcommand needs a 'synth' block in the config");
  const SynthPanel data = generate(*cfg.synth);
  write_synth(data, cfg.out_dir);

  Json run{{"data", Json{{"prices", "prices.csv"}, {"factors", "factors.csv"}}},
           {"portfolios", Json{{"treatment", data.truth.treated_assets}, {"control", data.truth.control_assets}}},
           {"event", Json{{"date", data.truth.event_date.iso()},
                          {"estimation_len", cfg.event.estimation_len},
                          {"event_len", data.truth.event_len}}},
           {"seed", cfg.seed},
           {"out", "results"}};
  ctx.write_text("run.json", [&](std::ostream& out) { out << run.dump(2) << '\n'; });
  for (const char* name : {"prices.csv", "factors.csv", "ground_truth.json"}) {
    ctx.record(name);
  }
}

void run_event_study_cmd(Context& ctx) {
  const RunConfig& cfg = ctx.config();
  Json results = Json::array();
  std::vector<std::pair<std::string, EventStudyResult>> paths;
  for (const ReturnSeries* series : {&ctx.treatment(), &ctx.control()}) {
    for (ModelKind kind : cfg.models) {
      EventStudyResult r = run_event_study(*series, ctx.panel(), ctx.event(), kind, cfg.t_convention);
      Json entry{{"portfolio", series->name}};
      entry.update(to_json(r));
      results.push_back(std::move(entry));
      paths.emplace_back(series->name, std::move(r));
    }
  }
  Json body = ctx.envelope();
  body["results"] = results;
  ctx.write_json("event_study.json", body);
  ctx.write_text("event_paths.csv", [&](std::ostream& out) { write_event_paths_csv(out, paths); });
}

Json lag_block(Context& ctx) {
  Json block{{"selected_p", ctx.var_lag()}, {"fixed", ctx.config().var.p.has_value()},
             {"criterion", to_string(ctx.config().var.criterion)}};
  if (!ctx.config().var.p) block["selection"] = to_json(ctx.lag_selection());
  return block;
}

void run_var_cmd(Context& ctx) {
  const auto& a = ctx.aligned();
  const VarModel model = fit_var(a.first, a.second, ctx.var_lag());
  Json body = ctx.envelope();
  body["lag"] = lag_block(ctx);
  body["model"] = to_json(model);
  ctx.write_json("var.json", body);
}

void run_granger_cmd(Context& ctx) {
  const auto& a = ctx.aligned();
  Json body = ctx.envelope();
  body["lag"] = lag_block(ctx);
  body["scan"] = to_json(granger_scan(a.first, a.second, ctx.config().var.scan_max_lag));
  ctx.write_json("granger_scan.json", body);
}

void run_irf_cmd(Context& ctx) {
  const auto& a = ctx.aligned();
  const VarModel model = fit_var(a.first, a.second, ctx.var_lag());
  const IrfResult irf = impulse_responses(model, ctx.config().var.horizon, ctx.config().var.ordering);
  Json body = ctx.envelope();
  body["lag"] = lag_block(ctx);
  body["irf"] = to_json(irf);
  ctx.write_json("irf.json", body);
  ctx.write_text("irf.csv", [&](std::ostream& out) { write_irf_csv(out, irf); });
}

void run_ccf_cmd(Context& ctx) {
  const auto& a = ctx.aligned();
  const CcfResult ccf = cross_correlation(a.first, a.second, ctx.config().var.ccf_max_lag);
  Json body = ctx.envelope();
  body["ccf"] = to_json(ccf);
  ctx.write_json("ccf.json", body);
  ctx.write_text("ccf.csv", [&](std::ostream& out) { write_ccf_csv(out, ccf); });
}

void run_psm_cmd(Context& ctx) {
  const RunConfig& cfg = ctx.config();
  const PsmSettings& psm = cfg.psm;
  const EventSpec& event = ctx.event();
  const ReturnSeries& treat = ctx.treatment();

  std::vector<ReturnSeries> treated, controls;
  if (psm.mode == UnitMode::PortfolioDay) {
    treated.push_back(treat);
  } else {
    for (const auto& m : cfg.treatment.members) treated.push_back(ctx.panel().series(m));
  }
  for (const auto& m : cfg.control.members) controls.push_back(ctx.panel().series(m));

  UnitConfig units_cfg;
  units_cfg.ma_window = psm.ma_window;
  units_cfg.vol_window = psm.vol_window;
  if (psm.window == UnitWindow::Post) {
    units_cfg.window_len = psm.window_len.value_or(event.event_len);
    units_cfg.window_begin = event.event_date;
  } else {
    units_cfg.window_len = psm.window_len.value_or(event.estimation_len);
    const auto row = ctx.panel().row_of(event.event_date);
    if (!row) throw CoverageError("event date " + event.event_date.iso() + " is not a trading date");
    if (*row < static_cast<std::size_t>(units_cfg.window_len)) {
      throw CoverageError("pre-event PSM window needs " + std::to_string(units_cfg.window_len) +
                          " trading days before the event date");
    }
    units_cfg.window_begin = ctx.panel().dates[*row - static_cast<std::size_t>(units_cfg.window_len)];
  }
  const UnitSet units = build_units(treated, controls, units_cfg);

  LogisticOptions logit;
  logit.ridge_lambda = psm.ridge_lambda;
  const PropensityFit fit = estimate_propensity(units.units, logit);
  MatchOptions match;
  match.caliper = psm.caliper;
  match.scale = psm.caliper_scale;
  match.replacement = psm.replacement;
  const MatchedSample sample = caliper_match(fit, units.units, match);
  const SupportReport support = common_support_report(fit, units.units, sample);
  const AttResult att = estimate_att(sample, psm.n_boot, RngStream(cfg.seed).substream(kPsmStream));
  const BalanceReport balance = balance_check(sample, units.units);

  Json body = ctx.envelope();
  body["att"] = to_json(att);
  body["matching"] = Json{{"caliper", sample.caliper},
                          {"caliper_scale", to_string(sample.scale)},
                          {"replacement", sample.replacement},
                          {"n_treated", sample.n_treated},
                          {"n_units", units.units.size()},
                          {"n_excluded", units.excluded.size()},
                          {"unmatched", sample.unmatched}};
  body["propensity"] = to_json(fit);
  body["common_support"] = to_json(support);
  body["balance"] = to_json(balance);
  ctx.write_json("att.json", body);
  ctx.write_text("balance.csv", [&](std::ostream& out) { write_balance_csv(out, balance); });
  ctx.write_text("matched_pairs.csv", [&](std::ostream& out) { write_pairs_csv(out, sample); });
}

void run_placebo_cmd(Context& ctx) {
  const RunConfig& cfg = ctx.config();
  PlaceboOptions opts;
  opts.n_placebos = cfg.placebo.n;
  opts.kind = cfg.placebo.model;
  opts.convention = cfg.t_convention;
  opts.alpha = cfg.placebo.alpha;
  const RngStream rng = RngStream(cfg.placebo.seed.value_or(cfg.seed)).substream(kPlaceboStream);
  const PlaceboSummary summary = placebo_study(ctx.treatment(), ctx.panel(), ctx.event(), opts, rng);
  Json body = ctx.envelope();
  body["portfolio"] = ctx.treatment().name;
  body["placebo"] = to_json(summary);
  ctx.write_json("placebo.json", body);
}

}  // namespace

RunConfig parse_config(const Json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  bool synth_seed_from_run = false;
  read_object(
      j, "config",
      {{"data",
        [&](const Json& v) {
          read_object(v, "config.data",
                      {{"prices", [&](const Json& x) { c.prices = resolve(base_dir, x.get<std::string>()); }},
                       {"factors", [&](const Json& x) {
                          if (!x.is_null()) c.factors = resolve(base_dir, x.get<std::string>());
                        }}});
        }},
       {"portfolios",
        [&](const Json& v) {
          read_object(v, "config.portfolios",
                      {{"treatment", [&](const Json& x) { c.treatment = portfolio_from(x, "treatment", "config.portfolios.treatment"); }},
                       {"control", [&](const Json& x) { c.control = portfolio_from(x, "control", "config.portfolios.control"); }}});
        }},
       {"event",
        [&](const Json& v) {
          read_object(v, "config.event",
                      {{"date", [&](const Json& x) {
                          c.event.event_date = Date::from_iso(x.get<std::string>());
                          c.has_event = true;
                        }},
                       {"estimation_len", [&](const Json& x) { c.event.estimation_len = x.get<int>(); }},
                       {"event_len", [&](const Json& x) { c.event.event_len = x.get<int>(); }}});
        }},
       {"models",
        [&](const Json& v) {
          c.models.clear();
          for (const auto& m : v) c.models.push_back(parse_model_kind(m.get<std::string>()));
        }},
       {"returns",
        [&](const Json& v) {
          const auto s = v.get<std::string>();
          if (s == "simple") c.returns = ReturnKind::Simple;
          else if (s == "log") c.returns = ReturnKind::Log;
          else throw ValidationError("config.returns must be 'simple' or 'log'");
        }},
       {"t_convention", [&](const Json& v) { c.t_convention = parse_t_convention(v.get<std::string>()); }},
       {"var",
        [&](const Json& v) {
          VarSettings& s = c.var;
          read_object(
              v, "config.var",
              {{"p", [&](const Json& x) {
                  if (x.is_string() && x.get<std::string>() == "auto") s.p.reset();
                  else s.p = x.get<int>();
                }},
               {"criterion", [&](const Json& x) {
                  const auto name = x.get<std::string>();
                  if (name == "aic") s.criterion = LagCriterion::Aic;
                  else if (name == "bic") s.criterion = LagCriterion::Bic;
                  else throw ValidationError("config.var.criterion must be 'aic' or 'bic'");
                }},
               {"p_max", [&](const Json& x) { s.p_max = x.get<int>(); }},
               {"horizon", [&](const Json& x) { s.horizon = x.get<int>(); }},
               {"ordering", [&](const Json& x) { s.ordering = parse_ordering(x.get<std::string>()); }},
               {"scan_max_lag", [&](const Json& x) { s.scan_max_lag = x.get<int>(); }},
               {"ccf_max_lag", [&](const Json& x) { s.ccf_max_lag = x.get<int>(); }}});
        }},
       {"psm",
        [&](const Json& v) {
          PsmSettings& s = c.psm;
          read_object(
              v, "config.psm",
              {{"caliper", [&](const Json& x) {
                  if (x.is_null()) s.caliper.reset();
                  else s.caliper = x.get<double>();
                }},
               {"caliper_scale", [&](const Json& x) { s.caliper_scale = parse_caliper_scale(x.get<std::string>()); }},
               {"replacement", [&](const Json& x) { s.replacement = x.get<bool>(); }},
               {"mode", [&](const Json& x) {
                  const auto m = x.get<std::string>();
                  if (m == "portfolio-day") s.mode = UnitMode::PortfolioDay;
                  else if (m == "bank-day") s.mode = UnitMode::BankDay;
                  else throw ValidationError("config.psm.mode must be 'portfolio-day' or 'bank-day'");
                }},
               {"window", [&](const Json& x) {
                  const auto w = x.get<std::string>();
                  if (w == "pre") s.window = UnitWindow::Pre;
                  else if (w == "post") s.window = UnitWindow::Post;
                  else throw ValidationError("config.psm.window must be 'pre' or 'post'");
                }},
               {"window_len", [&](const Json& x) {
                  if (x.is_null()) s.window_len.reset();
                  else s.window_len = x.get<int>();
                }},
               {"ma_window", [&](const Json& x) { s.ma_window = x.get<int>(); }},
               {"vol_window", [&](const Json& x) { s.vol_window = x.get<int>(); }},
               {"n_boot", [&](const Json& x) { s.n_boot = x.get<int>(); }},
               {"ridge_lambda", [&](const Json& x) { s.ridge_lambda = x.get<double>(); }}});
        }},
       {"placebo",
        [&](const Json& v) {
          PlaceboSettings& s = c.placebo;
          read_object(v, "config.placebo",
                      {{"n", [&](const Json& x) { s.n = x.get<int>(); }},
                       {"seed", [&](const Json& x) {
                          if (x.is_null()) s.seed.reset();
                          else s.seed = x.get<std::uint64_t>();
                        }},
                       {"model", [&](const Json& x) { s.model = parse_model_kind(x.get<std::string>()); }},
                       {"alpha", [&](const Json& x) { s.alpha = x.get<double>(); }}});
        }},
       {"seed", [&](const Json& v) { c.seed = v.get<std::uint64_t>(); }},
       {"out", [&](const Json& v) { c.out_dir = resolve(base_dir, v.get<std::string>()); }},
       {"synth", [&](const Json& v) {
          c.synth = dgp_spec_from_json(v);
          if (!v.contains("seed")) synth_seed_from_run = true;
        }}});

  if (synth_seed_from_run) c.synth->seed = c.seed;

  if (c.models.empty()) throw ValidationError("config.models must name at least one model");
  if (c.var.p && *c.var.p < 1) throw ValidationError("config.var.p must be >= 1");
  if (c.var.p_max < 1 || c.var.scan_max_lag < 1) throw ValidationError("config.var lag limits must be >= 1");
  if (c.var.horizon < 1) throw ValidationError("config.var.horizon must be >= 1");
  if (c.var.ccf_max_lag < 0) throw ValidationError("config.var.ccf_max_lag must be >= 0");
  if (c.psm.n_boot < 2) throw ValidationError("config.psm.n_boot must be >= 2");
  if (c.psm.window_len && *c.psm.window_len < 1) throw ValidationError("config.psm.window_len must be >= 1");
  if (c.placebo.n < 1) throw ValidationError("config.placebo.n must be >= 1");
  if (!(c.placebo.alpha > 0.0 && c.placebo.alpha < 1.0)) throw ValidationError("config.placebo.alpha must be in (0, 1)");
  if (c.has_event) c.event.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

Json resolved_json(const RunConfig& c) {
  auto opt_int = [](const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); };
  Json models = Json::array();
  for (ModelKind m : c.models) models.push_back(to_string(m));
  Json j{{"data", Json{{"prices", c.prices.filename().string()},
                       {"factors", c.factors ? Json(c.factors->filename().string()) : Json(nullptr)}}},
         {"portfolios", Json{{"treatment", Json{{"name", c.treatment.name}, {"members", c.treatment.members}}},
                             {"control", Json{{"name", c.control.name}, {"members", c.control.members}}}}},
         {"event", Json{{"date", c.has_event ? Json(c.event.event_date.iso()) : Json(nullptr)},
                        {"estimation_len", c.event.estimation_len},
                        {"event_len", c.event.event_len}}},
         {"models", models},
         {"returns", c.returns == ReturnKind::Simple ? "simple" : "log"},
         {"t_convention", to_string(c.t_convention)},
         {"var", Json{{"p", c.var.p ? Json(*c.var.p) : Json("auto")},
                      {"criterion", to_string(c.var.criterion)},
                      {"p_max", c.var.p_max},
                      {"horizon", c.var.horizon},
                      {"ordering", to_string(c.var.ordering)},
                      {"scan_max_lag", c.var.scan_max_lag},
                      {"ccf_max_lag", c.var.ccf_max_lag}}},
         {"psm", Json{{"caliper", c.psm.caliper ? Json(*c.psm.caliper) : Json("0.2*sd(logit(score))")},
                      {"caliper_scale", to_string(c.psm.caliper_scale)},
                      {"replacement", c.psm.replacement},
                      {"mode", to_string(c.psm.mode)},
                      {"window", to_string(c.psm.window)},
                      {"window_len", opt_int(c.psm.window_len)},
                      {"ma_window", c.psm.ma_window},
                      {"vol_window", c.psm.vol_window},
                      {"n_boot", c.psm.n_boot},
                      {"ridge_lambda", c.psm.ridge_lambda}}},
         {"placebo", Json{{"n", c.placebo.n},
                          {"seed", c.placebo.seed.value_or(c.seed)},
                          {"model", to_string(c.placebo.model)},
                          {"alpha", c.placebo.alpha}}},
         {"seed", c.seed}};
  if (c.synth) j["synth"] = to_json(*c.synth);
  return j;
}

std::vector<std::string> run_subcommand(const std::string& subcommand, const RunConfig& config) {
  const std::set<std::string> known(kSubcommands.begin(), kSubcommands.end());
  if (!known.count(subcommand)) throw ValidationError("unknown subcommand '" + subcommand + "'");
  std::filesystem::create_directories(config.out_dir);

  Context ctx(config);
  if (subcommand == "synth") run_synth(ctx);
  if (subcommand == "event-study" || subcommand == "all") run_event_study_cmd(ctx);
  if (subcommand == "var" || subcommand == "all") run_var_cmd(ctx);
  if (subcommand == "granger" || subcommand == "all") run_granger_cmd(ctx);
  if (subcommand == "irf" || subcommand == "all") run_irf_cmd(ctx);
  if (subcommand == "ccf" || subcommand == "all") run_ccf_cmd(ctx);
  if (subcommand == "psm" || subcommand == "all") run_psm_cmd(ctx);
  if (subcommand == "placebo" || subcommand == "all") run_placebo_cmd(ctx);

  std::vector<std::string> outputs = ctx.written();
  Json manifest{{"subcommand", subcommand}, {"seed", config.seed}, {"config", resolved_json(config)},
                {"outputs", outputs}};
  write_file_atomic(config.out_dir / "run_manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
  outputs.push_back("run_manifest.json");
  return outputs;
}

}  // namespace eventlens
