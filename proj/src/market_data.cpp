#include "eventlens/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>

#include "eventlens/error.hpp"
#include "eventlens/io.hpp"

namespace eventlens {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> parse_number(std::string_view cell) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

// One parsed data row: date, cell values (NaN = missing) and source line.
struct RawRow {
  Date date;
  std::vector<double> values;
  std::size_t line = 0;
};

struct RawTable {
  std::vector<std::string> columns;  // excluding the date column
  std::vector<RawRow> rows;
};

bool same_cell(double a, double b) { return (is_missing(a) && is_missing(b)) || a == b; }

// Reads a `date,<col>...` CSV. Rows come back sorted by date with exact
// duplicates removed; conflicting duplicates throw.
RawTable read_table(std::istream& in, const std::string& source, bool reject_non_positive) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw ParseError(source + ": missing header row");
  const auto header = split_csv_line(line);
  if (lower(header[0]) != "date") throw ParseError(source + ": first header column must be 'date'");
  if (header.size() < 2) throw ParseError(source + ": header names no data columns");

  RawTable table;
  std::set<std::string> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string name(header[c]);
    if (name.empty()) throw ParseError(source + ": empty column name in header");
    if (!seen.insert(name).second) throw ParseError(source + ": duplicate column '" + name + "'");
    table.columns.push_back(std::move(name));
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string where = source + " row " + std::to_string(line_no);
    if (cells.size() != header.size()) {
      throw ParseError(where + ": expected " + std::to_string(header.size()) + " cells, found " +
                       std::to_string(cells.size()));
    }
    const auto date = Date::parse(cells[0]);
    if (!date) throw ParseError(where + ": malformed date '" + std::string(cells[0]) + "'");
    RawRow row{*date, {}, line_no};
    row.values.reserve(cells.size() - 1);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        row.values.push_back(kMissing);
        continue;
      }
      const auto v = parse_number(cells[c]);
      if (!v) {
        row.values.push_back(kMissing);  // unparseable cells are flagged missing
        continue;
      }
      if (reject_non_positive && *v <= 0.0) {
        throw ValidationError(where + ", column '" + table.columns[c - 1] + "': price must be positive, got " +
                              std::string(cells[c]));
      }
      row.values.push_back(*v);
    }
    table.rows.push_back(std::move(row));
  }

  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const RawRow& a, const RawRow& b) { return a.date < b.date; });
  std::vector<RawRow> unique;
  unique.reserve(table.rows.size());
  for (auto& row : table.rows) {
    if (!unique.empty() && unique.back().date == row.date) {
      const auto& prev = unique.back();
      for (std::size_t c = 0; c < row.values.size(); ++c) {
        if (!same_cell(prev.values[c], row.values[c])) {
          throw ConflictError(source + ": date " + row.date.iso() + " appears on rows " + std::to_string(prev.line) +
                              " and " + std::to_string(row.line) + " with different values");
        }
      }
      continue;
    }
    unique.push_back(std::move(row));
  }
  table.rows = std::move(unique);
  return table;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

void write_number(std::ostream& out, double v) { out << format_number(v); }

}  // namespace

std::size_t PricePanel::asset_index(const std::string& name) const {
  const auto it = std::find(assets.begin(), assets.end(), name);
  if (it == assets.end()) throw LookupError("unknown asset '" + name + "'");
  return static_cast<std::size_t>(it - assets.begin());
}

void PricePanel::validate() const {
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) throw ValidationError("price panel dates are not strictly increasing at " + dates[i].iso());
  }
  if (prices.size() != assets.size()) throw ValidationError("price panel has mismatched asset columns");
  for (std::size_t a = 0; a < assets.size(); ++a) {
    if (prices[a].size() != dates.size()) throw ValidationError("price column '" + assets[a] + "' has wrong length");
    for (std::size_t r = 0; r < dates.size(); ++r) {
      const double p = prices[a][r];
      if (!is_missing(p) && !(p > 0.0)) {
        throw ValidationError("price for '" + assets[a] + "' on " + dates[r].iso() + " must be positive");
      }
    }
  }
}

PricePanel read_prices_csv(std::istream& in, const std::string& source) {
  RawTable table = read_table(in, source, /*reject_non_positive=*/true);
  PricePanel panel;
  panel.assets = table.columns;
  panel.prices.assign(panel.assets.size(), {});
  for (auto& col : panel.prices) col.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    panel.dates.push_back(row.date);
    for (std::size_t a = 0; a < row.values.size(); ++a) panel.prices[a].push_back(row.values[a]);
  }
  return panel;
}

PricePanel load_prices(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_prices_csv(in, path.string());
}

FactorTable read_factors_csv(std::istream& in, const std::string& source) {
  RawTable table = read_table(in, source, /*reject_non_positive=*/false);
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < table.columns.size(); ++c) index[lower(table.columns[c])] = c;
  for (const char* required : {"mkt", "rf"}) {
    if (!index.count(required)) {
      throw MissingFactorError(source + ": factor file lacks required column '" + std::string(required) + "'");
    }
  }
  const bool has_smb = index.count("smb") > 0;
  const bool has_hml = index.count("hml") > 0;

  FactorTable factors;
  if (has_smb) factors.smb.emplace();
  if (has_hml) factors.hml.emplace();
  for (const auto& row : table.rows) {
    factors.dates.push_back(row.date);
    factors.mkt.push_back(row.values[index["mkt"]]);
    factors.rf.push_back(row.values[index["rf"]]);
    if (has_smb) factors.smb->push_back(row.values[index["smb"]]);
    if (has_hml) factors.hml->push_back(row.values[index["hml"]]);
  }
  return factors;
}

FactorTable load_factors(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_factors_csv(in, path.string());
}

void write_prices_csv(std::ostream& out, const PricePanel& panel) {
  out << "date";
  for (const auto& a : panel.assets) out << ',' << a;
  out << '\n';
  for (std::size_t r = 0; r < panel.dates.size(); ++r) {
    out << panel.dates[r].iso();
    for (const auto& col : panel.prices) {
      out << ',';
      write_number(out, col[r]);
    }
    out << '\n';
  }
}

void write_factors_csv(std::ostream& out, const FactorTable& factors) {
  out << "date,mkt,rf";
  if (factors.smb) out << ",smb";
  if (factors.hml) out << ",hml";
  out << '\n';
  for (std::size_t r = 0; r < factors.dates.size(); ++r) {
    out << factors.dates[r].iso() << ',';
    write_number(out, factors.mkt[r]);
    out << ',';
    write_number(out, factors.rf[r]);
    if (factors.smb) {
      out << ',';
      write_number(out, (*factors.smb)[r]);
    }
    if (factors.hml) {
      out << ',';
      write_number(out, (*factors.hml)[r]);
    }
    out << '\n';
  }
}

std::size_t ReturnPanel::asset_index(const std::string& name) const {
  const auto it = std::find(assets.begin(), assets.end(), name);
  if (it == assets.end()) throw LookupError("unknown asset '" + name + "'");
  return static_cast<std::size_t>(it - assets.begin());
}

ReturnSeries ReturnPanel::series(const std::string& asset) const {
  return ReturnSeries{asset, dates, returns[asset_index(asset)]};
}

std::optional<std::size_t> ReturnPanel::row_of(Date date) const {
  const auto it = std::lower_bound(dates.begin(), dates.end(), date);
  if (it == dates.end() || *it != date) return std::nullopt;
  return static_cast<std::size_t>(it - dates.begin());
}

ReturnPanel compute_returns(const PricePanel& panel, const std::optional<FactorTable>& factors, ReturnKind kind) {
  panel.validate();
  if (panel.n_dates() < 2) throw CoverageError("compute_returns: need at least 2 price dates");

  ReturnPanel out;
  out.assets = panel.assets;
  out.kind = kind;
  out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  out.returns.reserve(panel.assets.size());
  for (std::size_t a = 0; a < panel.assets.size(); ++a) {
    const auto& p = panel.prices[a];
    std::vector<double> r(p.size() - 1);
    bool any = false;
    for (std::size_t t = 1; t < p.size(); ++t) {
      if (is_missing(p[t]) || is_missing(p[t - 1])) {
        r[t - 1] = kMissing;
        continue;
      }
      r[t - 1] = kind == ReturnKind::Simple ? (p[t] - p[t - 1]) / p[t - 1] : std::log(p[t] / p[t - 1]);
      any = true;
    }
    if (!any) throw CoverageError("compute_returns: asset '" + panel.assets[a] + "' has no two consecutive prices");
    out.returns.push_back(std::move(r));
  }

  if (!factors) return out;

  // Inner join on date.
  const FactorTable& f = *factors;
  FactorTable joined;
  if (f.smb) joined.smb.emplace();
  if (f.hml) joined.hml.emplace();
  std::vector<std::size_t> keep;
  std::size_t j = 0;
  for (std::size_t r = 0; r < out.dates.size(); ++r) {
    while (j < f.dates.size() && f.dates[j] < out.dates[r]) ++j;
    if (j == f.dates.size() || f.dates[j] != out.dates[r]) continue;
    keep.push_back(r);
    joined.dates.push_back(f.dates[j]);
    joined.mkt.push_back(f.mkt[j]);
    joined.rf.push_back(f.rf[j]);
    if (f.smb) joined.smb->push_back((*f.smb)[j]);
    if (f.hml) joined.hml->push_back((*f.hml)[j]);
  }
  if (keep.empty()) throw EmptyJoinError("compute_returns: price and factor files share no dates");
  if (keep.size() != out.dates.size()) {
    std::vector<Date> dates;
    for (std::size_t r : keep) dates.push_back(out.dates[r]);
    for (auto& col : out.returns) {
      std::vector<double> kept;
      kept.reserve(keep.size());
      for (std::size_t r : keep) kept.push_back(col[r]);
      col = std::move(kept);
    }
    out.dates = std::move(dates);
  }
  out.factors = std::move(joined);
  return out;
}

ReturnSeries build_portfolio(const ReturnPanel& panel, const PortfolioSpec& spec) {
  if (spec.members.empty()) throw ValidationError("portfolio '" + spec.name + "' has no members");
  std::set<std::string> unique(spec.members.begin(), spec.members.end());
  if (unique.size() != spec.members.size()) throw ValidationError("portfolio '" + spec.name + "' lists a member twice");

  std::vector<const std::vector<double>*> cols;
  for (const auto& m : spec.members) cols.push_back(&panel.returns[panel.asset_index(m)]);

  ReturnSeries out{spec.name, panel.dates, std::vector<double>(panel.n_dates(), kMissing)};
  for (std::size_t r = 0; r < panel.n_dates(); ++r) {
    // Running mean.
    double avg = 0.0;
    int count = 0;
    for (const auto* col : cols) {
      const double v = (*col)[r];
      if (is_missing(v)) continue;
      ++count;
      avg += (v - avg) / count;
    }
    if (count > 0) out.values[r] = avg;
  }
  return out;
}

void EventSpec::validate() const {
  if (estimation_len < kMinWindow || event_len < kMinWindow) {
    throw ValidationError("event windows must each span at least " + std::to_string(kMinWindow) +
                          " trading days (estimation=" + std::to_string(estimation_len) +
                          ", event=" + std::to_string(event_len) + ")");
  }
}

WindowSlices slice_windows(const ReturnSeries& series, const EventSpec& spec) {
  spec.validate();
  const auto it = std::lower_bound(series.dates.begin(), series.dates.end(), spec.event_date);
  if (it == series.dates.end() || *it != spec.event_date) {
    throw CoverageError("event date " + spec.event_date.iso() + " is not a trading date of series '" + series.name + "'");
  }
  const auto e = static_cast<std::size_t>(it - series.dates.begin());
  const auto est = static_cast<std::size_t>(spec.estimation_len);
  const auto len = static_cast<std::size_t>(spec.event_len);
  if (e < est) {
    throw CoverageError("series '" + series.name + "' has " + std::to_string(e) + " days before " +
                        spec.event_date.iso() + "; estimation window needs " + std::to_string(est) + " (short by " +
                        std::to_string(est - e) + " days)");
  }
  if (e + len > series.size()) {
    throw CoverageError("series '" + series.name + "' has " + std::to_string(series.size() - e) + " days from " +
                        spec.event_date.iso() + "; event window needs " + std::to_string(len) + " (short by " +
                        std::to_string(e + len - series.size()) + " days)");
  }

  auto slice = [&](std::size_t begin, std::size_t count) {
    ReturnSeries s;
    s.name = series.name;
    s.dates.assign(series.dates.begin() + static_cast<std::ptrdiff_t>(begin),
                   series.dates.begin() + static_cast<std::ptrdiff_t>(begin + count));
    s.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(begin),
                    series.values.begin() + static_cast<std::ptrdiff_t>(begin + count));
    return s;
  };
  return WindowSlices{slice(e - est, est), slice(e, len), e - est, e};
}

AlignedPair align_pair(const ReturnSeries& a, const ReturnSeries& b) {
  AlignedPair out;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    while (j < b.size() && b.dates[j] < a.dates[i]) ++j;
    if (j == b.size()) break;
    if (b.dates[j] != a.dates[i] || is_missing(a.values[i]) || is_missing(b.values[j])) continue;
    out.dates.push_back(a.dates[i]);
    out.first.push_back(a.values[i]);
    out.second.push_back(b.values[j]);
  }
  return out;
}

}  // namespace eventlens
