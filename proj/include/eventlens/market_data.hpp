#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "eventlens/date.hpp"

namespace eventlens {

/// Missing observations are stored as quiet NaN, never as zero.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

/// Close prices, one column per asset, on strictly increasing dates.
struct PricePanel {
  std::vector<Date> dates;
  std::vector<std::string> assets;
  /// prices[asset][row]
  std::vector<std::vector<double>> prices;

  std::size_t n_dates() const { return dates.size(); }
  /// Throws LookupError for unknown names.
  std::size_t asset_index(const std::string& name) const;
  /// Checks the panel invariants, throwing ValidationError.
  void validate() const;
};

/// Daily factor returns. smb/hml are absent when the file lacks the columns.
struct FactorTable {
  std::vector<Date> dates;
  std::vector<double> mkt;
  std::vector<double> rf;
  std::optional<std::vector<double>> smb;
  std::optional<std::vector<double>> hml;

  bool has_three_factor() const { return smb.has_value() && hml.has_value(); }
  std::size_t size() const { return dates.size(); }
};

enum class ReturnKind { Simple, Log };

/// A dated return series; missing entries are NaN.
struct ReturnSeries {
  std::string name;
  std::vector<Date> dates;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

struct ReturnPanel {
  std::vector<Date> dates;
  std::vector<std::string> assets;
  /// returns[asset][row]
  std::vector<std::vector<double>> returns;
  /// Row-aligned with `dates` when present.
  std::optional<FactorTable> factors;
  ReturnKind kind = ReturnKind::Simple;

  std::size_t n_dates() const { return dates.size(); }
  std::size_t asset_index(const std::string& name) const;
  ReturnSeries series(const std::string& asset) const;
  /// Row holding `date`, if it is a trading date of the panel.
  std::optional<std::size_t> row_of(Date date) const;
};

/// Equal-weighted basket of assets.
struct PortfolioSpec {
  std::string name;
  std::vector<std::string> members;
};

struct EventSpec {
  Date event_date;
  int estimation_len = 60;
  int event_len = 30;

  /// Both windows must be at least this long.
  static constexpr int kMinWindow = 10;
  void validate() const;
};

/// Estimation window (the estimation_len days strictly before the event
/// date) and event window (event date plus event_len - 1 following days).
struct WindowSlices {
  ReturnSeries estimation;
  ReturnSeries event;
  std::size_t estimation_begin = 0;
  std::size_t event_begin = 0;
};

PricePanel read_prices_csv(std::istream& in, const std::string& source = "<stream>");
PricePanel load_prices(const std::filesystem::path& path);
FactorTable read_factors_csv(std::istream& in, const std::string& source = "<stream>");
FactorTable load_factors(const std::filesystem::path& path);

void write_prices_csv(std::ostream& out, const PricePanel& panel);
void write_factors_csv(std::ostream& out, const FactorTable& factors);

/// Per-asset returns; with factors, rows are inner-joined on date.
ReturnPanel compute_returns(const PricePanel& panel, const std::optional<FactorTable>& factors = std::nullopt,
                            ReturnKind kind = ReturnKind::Simple);

/// Per-date mean of member returns, skipping missing members.
ReturnSeries build_portfolio(const ReturnPanel& panel, const PortfolioSpec& spec);

WindowSlices slice_windows(const ReturnSeries& series, const EventSpec& spec);

/// Dates on which both series are present, with their values.
struct AlignedPair {
  std::vector<Date> dates;
  std::vector<double> first;
  std::vector<double> second;
};
AlignedPair align_pair(const ReturnSeries& a, const ReturnSeries& b);

}  // namespace eventlens
