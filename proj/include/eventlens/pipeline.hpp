#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eventlens/causal.hpp"
#include "eventlens/event_study.hpp"
#include "eventlens/market_data.hpp"
#include "eventlens/report.hpp"
#include "eventlens/spillover.hpp"
#include "eventlens/synth.hpp"

namespace eventlens {

enum class LagCriterion { Aic, Bic };

struct VarSettings {
  /// Fixed lag order; chosen by `criterion` over 1..p_max when absent.
  std::optional<int> p;
  LagCriterion criterion = LagCriterion::Bic;
  int p_max = 6;
  int horizon = 10;
  Ordering ordering = Ordering::TreatmentFirst;
  int scan_max_lag = 5;
  int ccf_max_lag = 90;
};

enum class UnitMode { PortfolioDay, BankDay };
enum class UnitWindow { Pre, Post };

struct PsmSettings {
  std::optional<double> caliper;
  CaliperScale caliper_scale = CaliperScale::Logit;
  bool replacement = false;
  UnitMode mode = UnitMode::PortfolioDay;
  UnitWindow window = UnitWindow::Post;
  /// Defaults to event_len for the post window, estimation_len for pre.
  std::optional<int> window_len;
  int ma_window = 3;
  int vol_window = 5;
  int n_boot = 1000;
  double ridge_lambda = 0.0;
};

struct PlaceboSettings {
  int n = 100;
  /// Defaults to the run seed.
  std::optional<std::uint64_t> seed;
  ModelKind model = ModelKind::MarketModel;
  double alpha = 0.05;
};

struct RunConfig {
  std::filesystem::path prices;
  std::optional<std::filesystem::path> factors;
  PortfolioSpec treatment{"treatment", {}};
  PortfolioSpec control{"control", {}};
  EventSpec event;
  std::vector<ModelKind> models{ModelKind::MarketModel, ModelKind::Capm, ModelKind::FamaFrench3};
  ReturnKind returns = ReturnKind::Simple;
  TStatConvention t_convention = TStatConvention::PredictionAdjusted;
  VarSettings var;
  PsmSettings psm;
  PlaceboSettings placebo;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
  std::optional<DgpSpec> synth;
  bool has_event = false;
};

/// Relative paths resolve against `base_dir`. Unknown keys are rejected.
RunConfig parse_config(const Json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
/// Every field, defaults included.
Json resolved_json(const RunConfig& config);

inline const std::vector<std::string> kSubcommands = {"synth", "event-study", "var",     "granger", "irf",
                                                      "ccf",   "psm",         "placebo", "all"};

/// Runs one subcommand, writing its artifacts into config.out_dir.
/// Returns the file names written.
std::vector<std::string> run_subcommand(const std::string& subcommand, const RunConfig& config);

}  // namespace eventlens
