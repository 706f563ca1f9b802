#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "eventlens/error.hpp"
#include "eventlens/market_data.hpp"
#include "helpers.hpp"

using namespace eventlens;

namespace {

PricePanel panel_of(const std::vector<Date>& dates, std::vector<std::vector<double>> prices) {
  PricePanel p;
  p.dates = dates;
  for (std::size_t a = 0; a < prices.size(); ++a) p.assets.push_back("A" + std::to_string(a + 1));
  p.prices = std::move(prices);
  return p;
}

ReturnSeries series_of(const std::vector<double>& values, Date start = Date::from_iso("2020-01-01")) {
  ReturnSeries s{"s", testutil::business_days(start, values.size()), values};
  return s;
}

}  // namespace

TEST(ReadPrices, ThreeRowCsv) {
  std::istringstream in("date,BANK\n2018-03-01,100\n2018-03-02,101\n2018-03-05,102\n");
  const PricePanel p = read_prices_csv(in);
  ASSERT_EQ(p.n_dates(), 3u);
  EXPECT_EQ(p.dates.front().iso(), "2018-03-01");
  EXPECT_EQ(p.dates.back().iso(), "2018-03-05");
  EXPECT_EQ(p.prices[0], (std::vector<double>{100, 101, 102}));
}

TEST(ReadPrices, NegativePriceCitesRow) {
  std::istringstream in("date,BANK\n2018-03-01,-5\n2018-03-02,101\n");
  try {
    read_prices_csv(in, "prices.csv");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("BANK"), std::string::npos) << e.what();
  }
}

TEST(ReadPrices, ShuffledDatesAreSorted) {
  const auto dates = testutil::business_days(Date::from_iso("2019-06-03"), 12);
  std::mt19937 gen(11);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::size_t> order(dates.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), gen);
    std::ostringstream csv;
    csv << "date,X\n";
    for (auto i : order) csv << dates[i].iso() << ',' << 100.0 + static_cast<double>(i) << '\n';
    std::istringstream in(csv.str());
    const PricePanel p = read_prices_csv(in);
    ASSERT_EQ(p.dates, dates);
    for (std::size_t i = 0; i < dates.size(); ++i) EXPECT_EQ(p.prices[0][i], 100.0 + static_cast<double>(i));
  }
}

TEST(ReadPrices, DuplicateDates) {
  std::istringstream same("date,X\n2020-01-02,10\n2020-01-02,10\n2020-01-03,11\n");
  EXPECT_EQ(read_prices_csv(same).n_dates(), 2u);
  std::istringstream conflict("date,X\n2020-01-02,10\n2020-01-02,12\n");
  EXPECT_THROW(read_prices_csv(conflict), ConflictError);
}

TEST(ReadPrices, BlankCellIsMissing) {
  std::istringstream in("date,X,Y\n2020-01-02,10,\n2020-01-03,11,5\n");
  const PricePanel p = read_prices_csv(in);
  EXPECT_TRUE(is_missing(p.prices[1][0]));
  EXPECT_EQ(p.prices[1][1], 5.0);
}

TEST(ReadFactors, RequiresMktAndRf) {
  std::istringstream in("date,mkt\n2020-01-02,0.01\n");
  EXPECT_THROW(read_factors_csv(in), MissingFactorError);
  std::istringstream ok("date,mkt,rf,smb\n2020-01-02,0.01,0.0001,0.002\n");
  const FactorTable f = read_factors_csv(ok);
  EXPECT_FALSE(f.has_three_factor());
  EXPECT_TRUE(f.smb.has_value());
}

TEST(ComputeReturns, TwoPrices) {
  const auto dates = testutil::business_days(Date::from_iso("2020-01-01"), 2);
  const ReturnPanel r = compute_returns(panel_of(dates, {{100, 110}}));
  ASSERT_EQ(r.n_dates(), 1u);
  EXPECT_DOUBLE_EQ(r.returns[0][0], 0.10);
  EXPECT_EQ(r.dates[0], dates[1]);
}

TEST(ComputeReturns, ConstantPrices) {
  const auto dates = testutil::business_days(Date::from_iso("2020-01-01"), 3);
  const ReturnPanel r = compute_returns(panel_of(dates, {{50, 50, 50}}));
  EXPECT_EQ(r.returns[0], (std::vector<double>{0.0, 0.0}));
}

TEST(ComputeReturns, BruteForceLoop) {
  eventlens::RngStream rng(3);
  std::vector<double> prices(30);
  for (auto& p : prices) p = 1.0 + 99.0 * rng.uniform();
  const auto dates = testutil::business_days(Date::from_iso("2020-01-01"), prices.size());
  const ReturnPanel r = compute_returns(panel_of(dates, {prices}));
  ASSERT_EQ(r.n_dates(), prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) {
    EXPECT_EQ(r.returns[0][t - 1], (prices[t] - prices[t - 1]) / prices[t - 1]);
  }
}

TEST(ComputeReturns, RoundTripReconstructsPrices) {
  eventlens::RngStream rng(19);
  std::vector<double> prices{100.0};
  for (int t = 0; t < 250; ++t) prices.push_back(prices.back() * (1.0 + rng.normal(0.0, 0.02)));
  const auto dates = testutil::business_days(Date::from_iso("2021-01-04"), prices.size());
  const ReturnPanel r = compute_returns(panel_of(dates, {prices}));
  double level = prices[0];
  for (std::size_t t = 0; t < r.n_dates(); ++t) {
    level *= 1.0 + r.returns[0][t];
    EXPECT_NEAR(level / prices[t + 1], 1.0, 1e-12);
  }
}

TEST(ComputeReturns, MissingPriceGivesMissingReturns) {
  const auto dates = testutil::business_days(Date::from_iso("2020-01-01"), 4);
  const ReturnPanel r = compute_returns(panel_of(dates, {{100, kMissing, 102, 103}}));
  EXPECT_TRUE(is_missing(r.returns[0][0]));
  EXPECT_TRUE(is_missing(r.returns[0][1]));
  EXPECT_DOUBLE_EQ(r.returns[0][2], 1.0 / 102.0);
}

TEST(ComputeReturns, FactorJoin) {
  const auto dates = testutil::business_days(Date::from_iso("2020-01-01"), 5);
  FactorTable f;
  f.dates = {dates[2], dates[3], dates[4]};
  f.mkt = {0.01, 0.02, 0.03};
  f.rf = {0.0, 0.0, 0.0};
  const ReturnPanel r = compute_returns(panel_of(dates, {{100, 101, 102, 103, 104}}), f);
  EXPECT_EQ(r.dates, f.dates);
  EXPECT_EQ(r.factors->mkt, f.mkt);

  FactorTable far = f;
  for (auto& d : far.dates) d = d.plus_days(3650);
  EXPECT_THROW(compute_returns(panel_of(dates, {{100, 101, 102, 103, 104}}), far), EmptyJoinError);
}

TEST(BuildPortfolio, MeanOfMembers) {
  ReturnPanel p;
  p.dates = testutil::business_days(Date::from_iso("2020-01-01"), 1);
  p.assets = {"A", "B"};
  p.returns = {{0.02}, {0.04}};
  const ReturnSeries s = build_portfolio(p, {"pf", {"A", "B"}});
  EXPECT_DOUBLE_EQ(s.values[0], 0.03);
  EXPECT_EQ(s.name, "pf");
}

TEST(BuildPortfolio, SingleMemberIsIdentity) {
  ReturnPanel p;
  p.dates = testutil::business_days(Date::from_iso("2020-01-01"), 20);
  p.assets = {"A", "B"};
  p.returns = {testutil::normals(RngStream(1), 20, 0.01), testutil::normals(RngStream(2), 20, 0.01)};
  EXPECT_EQ(build_portfolio(p, {"pf", {"B"}}).values, p.returns[1]);
}

TEST(BuildPortfolio, IdenticalMembersEqualTheSeries) {
  ReturnPanel p;
  p.dates = testutil::business_days(Date::from_iso("2020-01-01"), 50);
  const auto x = testutil::normals(RngStream(5), 50, 0.013);
  p.assets = {"A", "B", "C"};
  p.returns = {x, x, x};
  EXPECT_EQ(build_portfolio(p, {"pf", {"A", "B", "C"}}).values, x);
}

TEST(BuildPortfolio, ScatteredMissingMatchesRowMeanWithSkips) {
  RngStream rng(23);
  ReturnPanel p;
  p.dates = testutil::business_days(Date::from_iso("2020-01-01"), 20);
  for (int a = 0; a < 5; ++a) {
    p.assets.push_back("A" + std::to_string(a));
    std::vector<double> col(20);
    for (auto& v : col) v = rng.uniform() < 0.25 ? kMissing : rng.normal(0.0, 0.01);
    p.returns.push_back(col);
  }
  for (auto& col : p.returns) col[7] = kMissing;
  const ReturnSeries s = build_portfolio(p, {"pf", p.assets});
  for (std::size_t t = 0; t < 20; ++t) {
    double sum = 0.0;
    int n = 0;
    for (const auto& col : p.returns) {
      if (!std::isnan(col[t])) {
        sum += col[t];
        ++n;
      }
    }
    if (n == 0) {
      EXPECT_TRUE(is_missing(s.values[t]));
    } else {
      EXPECT_NEAR(s.values[t], sum / n, 1e-15);
    }
  }
}

TEST(BuildPortfolio, UnknownMember) {
  ReturnPanel p;
  p.dates = testutil::business_days(Date::from_iso("2020-01-01"), 1);
  p.assets = {"A"};
  p.returns = {{0.0}};
  EXPECT_THROW(build_portfolio(p, {"pf", {"Z"}}), LookupError);
}

TEST(SliceWindows, IndexArithmetic) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 0.0);
  const ReturnSeries s = series_of(v);
  EventSpec spec{s.dates[70], 60, 30};
  const WindowSlices w = slice_windows(s, spec);
  EXPECT_EQ(w.estimation_begin, 10u);
  EXPECT_EQ(w.event_begin, 70u);
  EXPECT_EQ(w.estimation.values.front(), 10.0);
  EXPECT_EQ(w.estimation.values.back(), 69.0);
  EXPECT_EQ(w.event.values.front(), 70.0);
  EXPECT_EQ(w.event.values.back(), 99.0);
}

TEST(SliceWindows, NonTradingEventDate) {
  const ReturnSeries s = series_of(std::vector<double>(100, 0.0), Date::from_iso("2020-01-06"));
  Date saturday = Date::from_iso("2020-03-07");
  ASSERT_TRUE(saturday.is_weekend());
  EXPECT_THROW(slice_windows(s, EventSpec{saturday, 60, 30}), CoverageError);
}

TEST(SliceWindows, RandomSpecsDisjointAndSized) {
  RngStream rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 20 + rng.uniform_index(200);
    const ReturnSeries s = series_of(std::vector<double>(n, 0.0));
    EventSpec spec;
    spec.estimation_len = 10 + static_cast<int>(rng.uniform_index(80));
    spec.event_len = 10 + static_cast<int>(rng.uniform_index(40));
    const std::size_t e = rng.uniform_index(n);
    spec.event_date = s.dates[e];
    const bool fits = e >= static_cast<std::size_t>(spec.estimation_len) &&
                      e + static_cast<std::size_t>(spec.event_len) <= n;
    if (!fits) {
      EXPECT_THROW(slice_windows(s, spec), CoverageError);
      continue;
    }
    const WindowSlices w = slice_windows(s, spec);
    ASSERT_EQ(w.estimation.size(), static_cast<std::size_t>(spec.estimation_len));
    ASSERT_EQ(w.event.size(), static_cast<std::size_t>(spec.event_len));
    EXPECT_LT(w.estimation.dates.back(), w.event.dates.front());
    EXPECT_EQ(w.event.dates.front(), spec.event_date);
    EXPECT_EQ(w.estimation.dates.front(), s.dates[e - spec.estimation_len]);
  }
}

TEST(EventSpec, ShortWindowsRejected) {
  EventSpec spec{Date::from_iso("2020-01-06"), 5, 30};
  EXPECT_THROW(spec.validate(), ValidationError);
}

TEST(Csv, WriteReadRoundTrip) {
  const auto dates = testutil::business_days(Date::from_iso("2020-01-01"), 6);
  PricePanel p = panel_of(dates, {{100, 100.1, 99.123456789012345, kMissing, 101, 1e-3}, {1, 2, 3, 4, 5, 6}});
  std::ostringstream out;
  write_prices_csv(out, p);
  std::istringstream in(out.str());
  const PricePanel back = read_prices_csv(in);
  ASSERT_EQ(back.dates, p.dates);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t t = 0; t < dates.size(); ++t) {
      if (is_missing(p.prices[a][t])) {
        EXPECT_TRUE(is_missing(back.prices[a][t]));
      } else {
        EXPECT_EQ(back.prices[a][t], p.prices[a][t]);
      }
    }
  }
}
