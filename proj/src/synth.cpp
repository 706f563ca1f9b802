#include "eventlens/synth.hpp"

#include <cmath>
#include <fstream>

#include "eventlens/error.hpp"
#include "eventlens/io.hpp"
#include "eventlens/report.hpp"
#include "eventlens/rng.hpp"

namespace eventlens {

namespace {

// Substream ids, fixed so each component's draws are independent of the rest.
constexpr std::uint64_t kFactorStream = 1;
constexpr std::uint64_t kAssetStreamBase = 1000;
constexpr std::uint64_t kUnitStream = 7;

std::vector<Date> business_days(Date start, int count) {
  std::vector<Date> dates;
  Date d = start;
  while (static_cast<int>(dates.size()) < count) {
    if (!d.is_weekend()) dates.push_back(d);
    d = d.plus_days(1);
  }
  return dates;
}

}  // namespace

void DgpSpec::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("synth: " + what); };
  if (n_days < 2) fail("n_days must be >= 2");
  if (n_treat_assets < 1 || n_control_assets < 1) fail("need at least one treated and one control asset");
  const FactorMoments& f = factors;
  if (f.mkt_sd < 0 || f.rf_sd < 0 || f.smb_sd < 0 || f.hml_sd < 0 || noise_sd < 0 || att.outcome_noise_sd < 0) {
    fail("standard deviations must be >= 0");
  }
  if (spillover.lag < 1) fail("spillover lag must be >= 1");
  if (event_day < 0 || event_len < 1 || event_day + event_len > n_days) fail("event window must lie inside n_days");
  if (!asset_loadings.empty() && static_cast<int>(asset_loadings.size()) != n_treat_assets + n_control_assets) {
    fail("asset_loadings must list every asset or be empty");
  }
  if (att.n_units < 4) fail("att.n_units must be >= 4");
  if (!(att.base_treated_share > 0.0 && att.base_treated_share < 1.0)) fail("att.base_treated_share must be in (0, 1)");
}

Loadings DgpSpec::loadings_for(int asset) const {
  return asset_loadings.empty() ? default_loadings : asset_loadings[static_cast<std::size_t>(asset)];
}

SynthPanel generate(const DgpSpec& spec) {
  spec.validate();
  const RngStream root(spec.seed);
  const auto n = static_cast<std::size_t>(spec.n_days);
  const int n_assets = spec.n_treat_assets + spec.n_control_assets;

  SynthPanel out;
  const std::vector<Date> dates = business_days(spec.start_date, spec.n_days + 1);

  FactorTable& f = out.factors;
  f.dates.assign(dates.begin() + 1, dates.end());
  f.mkt.resize(n);
  f.rf.resize(n);
  std::vector<double> smb(n), hml(n);
  RngStream fs = root.substream(kFactorStream);
  for (std::size_t t = 0; t < n; ++t) {
    f.mkt[t] = fs.normal(spec.factors.mkt_mean, spec.factors.mkt_sd);
    f.rf[t] = fs.normal(spec.factors.rf_mean, spec.factors.rf_sd);
    smb[t] = fs.normal(spec.factors.smb_mean, spec.factors.smb_sd);
    hml[t] = fs.normal(spec.factors.hml_mean, spec.factors.hml_sd);
  }
  if (spec.emit_smb_hml) {
    f.smb = smb;
    f.hml = hml;
  }

  std::vector<std::vector<double>> returns(static_cast<std::size_t>(n_assets), std::vector<double>(n));
  for (int a = 0; a < n_assets; ++a) {
    const Loadings b = spec.loadings_for(a);
    RngStream noise = root.substream(kAssetStreamBase + static_cast<std::uint64_t>(a));
    auto& r = returns[static_cast<std::size_t>(a)];
    for (std::size_t t = 0; t < n; ++t) {
      r[t] = f.rf[t] + b.mkt * (f.mkt[t] - f.rf[t]) + b.smb * smb[t] + b.hml * hml[t] + noise.normal(0.0, spec.noise_sd);
    }
    if (a < spec.n_treat_assets) {
      for (int t = spec.event_day; t < spec.event_day + spec.event_len; ++t) {
        r[static_cast<std::size_t>(t)] += spec.planted_event_alpha;
      }
    }
  }

  if (spec.spillover.coefficient != 0.0) {
    std::vector<double> treated_mean(n, 0.0);
    for (int a = 0; a < spec.n_treat_assets; ++a) {
      for (std::size_t t = 0; t < n; ++t) treated_mean[t] += returns[static_cast<std::size_t>(a)][t];
    }
    for (double& v : treated_mean) v /= spec.n_treat_assets;
    const auto lag = static_cast<std::size_t>(spec.spillover.lag);
    for (int a = spec.n_treat_assets; a < n_assets; ++a) {
      auto& r = returns[static_cast<std::size_t>(a)];
      for (std::size_t t = lag; t < n; ++t) r[t] += spec.spillover.coefficient * treated_mean[t - lag];
    }
  }

  PricePanel& p = out.prices;
  p.dates = dates;
  for (int a = 0; a < n_assets; ++a) {
    const bool treated = a < spec.n_treat_assets;
    p.assets.push_back((treated ? "T" : "C") + std::to_string(treated ? a + 1 : a - spec.n_treat_assets + 1));
    std::vector<double> prices(n + 1);
    prices[0] = 100.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double gross = 1.0 + returns[static_cast<std::size_t>(a)][t];
      if (!(gross > 0.0)) throw ValidationError("synth: simulated return <= -100%; reduce volatilities");
      prices[t + 1] = prices[t] * gross;
    }
    p.prices.push_back(std::move(prices));
  }

  GroundTruth& g = out.truth;
  g.seed = spec.seed;
  g.event_date = f.dates[static_cast<std::size_t>(spec.event_day)];
  g.event_len = spec.event_len;
  g.planted_event_alpha = spec.planted_event_alpha;
  g.spillover = spec.spillover;
  g.att_delta = spec.att.delta;
  g.selection_strength = spec.att.selection_strength;
  for (int a = 0; a < n_assets; ++a) {
    (a < spec.n_treat_assets ? g.treated_assets : g.control_assets).push_back(p.assets[static_cast<std::size_t>(a)]);
    g.loadings.push_back(spec.loadings_for(a));
  }
  return out;
}

std::vector<ObservationUnit> generate_units(const DgpSpec& spec) {
  spec.validate();
  const AttPlant& plant = spec.att;
  RngStream rng = RngStream(spec.seed).substream(kUnitStream);
  const double intercept = std::log(plant.base_treated_share / (1.0 - plant.base_treated_share));
  const std::vector<Date> dates = business_days(spec.start_date, plant.n_units);

  std::vector<ObservationUnit> units;
  units.reserve(static_cast<std::size_t>(plant.n_units));
  for (int i = 0; i < plant.n_units; ++i) {
    const double latent = rng.normal();
    ObservationUnit u;
    u.unit_id = i;
    u.date = dates[static_cast<std::size_t>(i)];
    u.covariates[0] = 0.01 * (latent + 0.3 * rng.normal());
    u.covariates[1] = 0.006 * (latent + 0.3 * rng.normal());
    u.covariates[2] = 0.01 * std::exp(0.3 * (latent + 0.3 * rng.normal()));
    const double odds = intercept + plant.selection_strength * latent;
    u.treated = rng.uniform() < 1.0 / (1.0 + std::exp(-odds));
    u.source = u.treated ? "synth-treated" : "synth-control";
    u.outcome = 0.3 * u.covariates[0] + 0.2 * u.covariates[1] + 0.5 * (u.covariates[2] - 0.01) +
                rng.normal(0.0, plant.outcome_noise_sd) + (u.treated ? plant.delta : 0.0);
    units.push_back(std::move(u));
  }
  return units;
}

void write_synth(const SynthPanel& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "prices.csv", [&](std::ostream& out) { write_prices_csv(out, data.prices); });
  write_file_atomic(dir / "factors.csv", [&](std::ostream& out) { write_factors_csv(out, data.factors); });
  write_file_atomic(dir / "ground_truth.json", [&](std::ostream& out) { out << to_json(data.truth).dump(2) << '\n'; });
}

}  // namespace eventlens
