#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eventlens/causal.hpp"
#include "eventlens/date.hpp"
#include "eventlens/market_data.hpp"

namespace eventlens {

struct FactorMoments {
  double mkt_mean = 0.0003;
  double mkt_sd = 0.01;
  double rf_mean = 0.00002;
  double rf_sd = 0.0;
  double smb_mean = 0.0;
  double smb_sd = 0.005;
  double hml_mean = 0.0;
  double hml_sd = 0.005;
};

struct Loadings {
  double mkt = 1.0;
  double smb = 0.0;
  double hml = 0.0;
};

/// control_t += coefficient * treated_mean_{t - lag}
struct SpilloverPlant {
  int lag = 2;
  double coefficient = 0.0;
};

/// Cross-sectional unit sample for propensity-score matching checks.
struct AttPlant {
  double delta = 0.0;
  /// Slope of the treatment log-odds on the latent covariate factor.
  double selection_strength = 1.0;
  int n_units = 600;
  /// Treated share at a zero latent factor.
  double base_treated_share = 0.15;
  double outcome_noise_sd = 0.004;
};

/// Synthetic market with planted effects. Asset returns follow
///   r = rf + b_mkt (mkt - rf) + b_smb smb + b_hml hml + noise
/// plus the event alpha (treated assets, event window) and the spillover
/// (control assets).
struct DgpSpec {
  int n_days = 500;
  int n_treat_assets = 3;
  int n_control_assets = 5;
  FactorMoments factors;
  bool emit_smb_hml = true;
  Loadings default_loadings;
  /// Treated assets first, then controls; empty means default_loadings.
  std::vector<Loadings> asset_loadings;
  double noise_sd = 0.01;
  /// Index of the event day among the n_days returns.
  int event_day = 400;
  int event_len = 30;
  double planted_event_alpha = 0.0;
  SpilloverPlant spillover;
  AttPlant att;
  Date start_date = Date::from_iso("2015-01-05");
  std::uint64_t seed = 1;

  void validate() const;
  Loadings loadings_for(int asset) const;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  Date event_date;
  int event_len = 0;
  double planted_event_alpha = 0.0;
  SpilloverPlant spillover;
  double att_delta = 0.0;
  double selection_strength = 0.0;
  std::vector<std::string> treated_assets;
  std::vector<std::string> control_assets;
  std::vector<Loadings> loadings;
};

struct SynthPanel {
  PricePanel prices;
  FactorTable factors;
  GroundTruth truth;
};

/// Deterministic in the spec; prices start at 100 on the first weekday on or
/// after start_date.
SynthPanel generate(const DgpSpec& spec);

/// Units whose covariates share a latent factor f; treatment log-odds are
/// logit(base_treated_share) + selection_strength * f and the outcome is
/// linear in the covariates plus delta for treated units.
std::vector<ObservationUnit> generate_units(const DgpSpec& spec);

/// Writes prices.csv, factors.csv and ground_truth.json into `dir`.
void write_synth(const SynthPanel& data, const std::filesystem::path& dir);

}  // namespace eventlens
