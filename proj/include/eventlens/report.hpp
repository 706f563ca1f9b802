#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "eventlens/causal.hpp"
#include "eventlens/event_study.hpp"
#include "eventlens/spillover.hpp"
#include "eventlens/synth.hpp"

namespace eventlens {

using Json = nlohmann::ordered_json;

Json to_json(const EventStudyResult& r);
Json to_json(const PlaceboSummary& s);
Json to_json(const VarModel& m);
Json to_json(const LagSelection& s);
Json to_json(const GrangerResult& g);
/// Rows mirror a "Lags | T->C F, p | C->T F, p" table.
Json to_json(const std::vector<GrangerScanRow>& scan);
Json to_json(const IrfResult& irf);
Json to_json(const CcfResult& ccf);
Json to_json(const AttResult& att);
Json to_json(const BalanceReport& report);
Json to_json(const SupportReport& report);
Json to_json(const PropensityFit& fit);
Json to_json(const GroundTruth& truth);
Json to_json(const DgpSpec& spec);

/// Missing keys keep their defaults; unknown keys are rejected.
DgpSpec dgp_spec_from_json(const Json& j);

/// p rounded to three decimals, as printed in summary tables.
double round_p(double p);

/// portfolio,model,day,date,ar,car
void write_event_paths_csv(std::ostream& out, const std::vector<std::pair<std::string, EventStudyResult>>& results);
/// horizon,response,shock,value with variables named treatment/control.
void write_irf_csv(std::ostream& out, const IrfResult& irf);
void write_ccf_csv(std::ostream& out, const CcfResult& ccf);
void write_balance_csv(std::ostream& out, const BalanceReport& report);
void write_pairs_csv(std::ostream& out, const MatchedSample& sample);

}  // namespace eventlens
