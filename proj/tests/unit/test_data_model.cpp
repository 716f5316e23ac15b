#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "msacm/data_model.hpp"
#include "msacm/errors.hpp"

using namespace msacm;

namespace {

MarketSeries parse(const std::string& text) {
  std::istringstream in(text);
  return parse_market_csv(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Date, ParsesAndFormatsIso) {
  const auto d = Date::parse("2011-08-04");
  EXPECT_EQ(d.iso(), "2011-08-04");
  EXPECT_FALSE(d.is_weekend());
  EXPECT_EQ(Date::parse("2011-08-05").next_weekday().iso(), "2011-08-08");
  EXPECT_TRUE(Date::parse("2011-08-06").is_weekend());
}

TEST(Date, RejectsMalformedText) {
  EXPECT_THROW(Date::parse("2019-02-30"), InputError);
  EXPECT_THROW(Date::parse("2019-1-01"), InputError);
  EXPECT_THROW(Date::parse("20190101"), InputError);
  EXPECT_THROW(Date::parse(""), InputError);
}

TEST(MarketCsv, NegativeReturnSetsDummy) {
  const auto s = parse("date,rv,ret\n2009-06-01,12.4,-0.003\n2009-06-02,11.0,0.01\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.d[0], 1);
  EXPECT_EQ(s.d[1], 0);
  EXPECT_FALSE(s.has_proxy());
}

TEST(MarketCsv, ExplicitDummyWinsOverReturn) {
  const auto s = parse("date,rv,ret,d\n2009-06-01,12.4,-0.003,0\n2009-06-02,11.0,0.01,1\n");
  EXPECT_EQ(s.d[0], 0);
  EXPECT_EQ(s.d[1], 1);
}

TEST(MarketCsv, ZeroRvIsRejectedWithRow) {
  const auto msg = error_of("date,rv,ret\n2009-06-01,12.4,-0.003\n2009-06-02,0,0.01\n");
  EXPECT_NE(msg.find("rv"), std::string::npos);
  EXPECT_NE(msg.find("1"), std::string::npos);
}

TEST(MarketCsv, OutOfOrderRowsAreSorted) {
  const auto s = parse("date,rv,ret\n2009-06-03,3,1\n2009-06-01,1,-1\n2009-06-02,2,-1\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.dates[0].iso(), "2009-06-01");
  EXPECT_EQ(s.dates[2].iso(), "2009-06-03");
  EXPECT_DOUBLE_EQ(s.rv[0], 1.0);
  EXPECT_EQ(s.d[0], 1);
  EXPECT_EQ(s.d[2], 0);
}

TEST(MarketCsv, MissingColumnsAreNamed) {
  EXPECT_NE(error_of("date,ret\n2009-06-01,1\n").find("'rv'"), std::string::npos);
  EXPECT_NE(error_of("day,rv,ret\n2009-06-01,1,1\n").find("'date'"), std::string::npos);
  EXPECT_NE(error_of("date,rv\n2009-06-01,1\n2009-06-02,1\n").find("'ret'"), std::string::npos);
}

TEST(MarketCsv, BadDateAndDuplicatesAreRejected) {
  EXPECT_NE(error_of("date,rv,ret\n2009-06-01,1,1\n2009-13-01,1,1\n").find("row 1"), std::string::npos);
  EXPECT_THROW(parse("date,rv,ret\n2009-06-01,1,1\n2009-06-01,2,1\n"), InputError);
  EXPECT_THROW(parse("date,rv,ret\n2009-06-01,abc,1\n2009-06-02,2,1\n"), InputError);
}

TEST(MarketCsv, CommentLinesAreSkipped) {
  const auto s = parse("# provenance\ndate,rv,d\n2009-06-01,1.5,0\n# mid\n2009-06-02,2.5,1\n");
  EXPECT_EQ(s.size(), 2u);
}

TEST(MarketCsv, WriteReadRoundTripIsBitExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 40.0);
  MarketSeries s;
  Date d{2009, 6, 1};
  for (int t = 0; t < 200; ++t) {
    s.dates.push_back(d);
    d = d.next_weekday();
    s.rv.push_back(u(rng));
    s.d.push_back(static_cast<std::uint8_t>(t % 3 == 0));
    s.x.push_back(u(rng) - 20.0);
    s.x_hat.push_back(u(rng) / 3.0);
  }
  s.lambda.assign(s.size(), 0);
  std::stringstream io;
  write_market_csv(io, s);
  const auto back = parse_market_csv(io);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t t = 0; t < s.size(); ++t) {
    EXPECT_EQ(back.rv[t], s.rv[t]);
    EXPECT_EQ(back.x[t], s.x[t]);
    EXPECT_EQ(back.x_hat[t], s.x_hat[t]);
    EXPECT_EQ(back.d[t], s.d[t]);
    EXPECT_EQ(back.dates[t], s.dates[t]);
  }
}

TEST(MarketCsv, DecimalTextRoundTripsExactly) {
  const std::string text = "date,rv,d\n2009-06-01,12.4,1\n2009-06-02,0.1,0\n2009-06-03,33.333,0\n";
  std::stringstream out;
  write_market_csv(out, parse(text));
  EXPECT_EQ(out.str(), text);
}

TEST(Calendar, CommentsAndAlignment) {
  std::istringstream in("# ECB\n2011-08-04\n\n2011-08-06  # a Saturday\n2011-08-08\n");
  const auto cal = parse_calendar(in);
  EXPECT_EQ(cal.size(), 3u);
  const auto s = parse("date,rv,d\n2011-08-03,1,0\n2011-08-04,1,0\n2011-08-05,1,0\n");
  const auto aligned = align_announcements(s, cal);
  EXPECT_EQ(aligned.series.lambda, (std::vector<std::uint8_t>{0, 1, 0}));
  ASSERT_EQ(aligned.missing.size(), 2u);
  EXPECT_EQ(aligned.missing[0].iso(), "2011-08-06");
}

TEST(Calendar, EmptyCalendarGivesZeroMask) {
  const auto s = parse("date,rv,d\n2011-08-03,1,0\n2011-08-04,1,0\n");
  const auto aligned = align_announcements(s, {});
  EXPECT_EQ(aligned.series.lambda, (std::vector<std::uint8_t>{0, 0}));
  EXPECT_TRUE(aligned.missing.empty());
}

TEST(Calendar, BadLineIsRejected) {
  std::istringstream in("2011-08-04\nnot-a-date\n");
  EXPECT_THROW(parse_calendar(in), InputError);
}

TEST(Proxy, ConstantSeriesForecastsItself) {
  const std::vector<double> x(30, 2.5);
  const auto f = forecast_policy_proxy(x, 4);
  for (double v : f.x_hat) EXPECT_DOUBLE_EQ(v, 2.5);
}

TEST(Proxy, LinearTrendIsForecastExactly) {
  std::vector<double> x(40);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = static_cast<double>(t);
  const auto f = forecast_policy_proxy(x, 1);
  for (std::size_t t = 2; t < x.size(); ++t) EXPECT_NEAR(f.x_hat[t], static_cast<double>(t), 1e-10) << t;
}

TEST(Proxy, LeadingEntriesUseRandomWalk) {
  std::vector<double> x{1, 4, 2, 8, 5, 7, 3, 9, 6, 10, 2, 5};
  const auto f = forecast_policy_proxy(x, 4);
  EXPECT_EQ(f.x_hat[0], x[0]);
  for (std::size_t t = 1; t <= 4; ++t) EXPECT_EQ(f.x_hat[t], x[t - 1]);
}

TEST(Proxy, NoiselessArInDifferencesIsReproduced) {
  std::vector<double> y{0.0, 1.7, 1.2};
  for (int t = 3; t < 80; ++t) {
    const std::size_t n = y.size();
    y.push_back(y[n - 1] + 0.3 + 0.5 * (y[n - 1] - y[n - 2]) - 0.2 * (y[n - 2] - y[n - 3]));
  }
  const auto f = forecast_policy_proxy(y, 2);
  for (std::size_t t = 4; t < y.size(); ++t) EXPECT_NEAR(f.x_hat[t], y[t], 1e-10) << t;
}

TEST(Proxy, RecoversArCoefficientInDifferences) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x{0.0};
  double dprev = 0.0;
  for (int t = 1; t < 5000; ++t) {
    const double d = 0.5 * dprev + z(rng);
    x.push_back(x.back() + d);
    dprev = d;
  }
  const auto f = forecast_policy_proxy(x, 1);
  EXPECT_NEAR(f.coefficients[0], 0.5, 0.05);
}

TEST(Proxy, ShortSeriesAndBadLagAreRejected) {
  EXPECT_THROW(forecast_policy_proxy(std::vector<double>{1, 2, 3, 4, 5}, 4), InputError);
  EXPECT_THROW(forecast_policy_proxy(std::vector<double>{1, 2, 3, 4, 5}, 0), InputError);
  EXPECT_NO_THROW(forecast_policy_proxy(std::vector<double>{1, 2, 3, 4, 5, 6}, 4));
}

TEST(Proxy, DemeanUsesSampleMeanOfX) {
  MarketSeries s = parse("date,rv,d,x\n2009-06-01,1,0,1\n2009-06-02,1,0,2\n2009-06-03,1,0,3\n");
  s.x_hat = s.x;
  const auto m = demean_proxy(s);
  EXPECT_DOUBLE_EQ(m.x_bar, 2.0);

  MarketSeries flat = parse("date,rv,d,x\n2009-06-01,1,0,4\n2009-06-02,1,0,4\n");
  flat.x_hat = flat.x;
  const auto f = demean_proxy(flat);
  for (std::size_t t = 0; t < f.size(); ++t) EXPECT_EQ(f.proxy_deviation(t), 0.0);
}

TEST(Proxy, PrepareFillsMissingForecast) {
  std::ostringstream text;
  text << "date,rv,d,x\n";
  Date d{2010, 1, 4};
  for (int t = 0; t < 30; ++t, d = d.next_weekday()) text << d.iso() << ",1," << (t % 2) << ',' << t * 0.5 << '\n';
  const auto s = prepare_proxy(parse(text.str()), 4);
  ASSERT_TRUE(s.has_proxy());
  EXPECT_EQ(s.x_hat.size(), s.size());
  EXPECT_NEAR(s.x_bar, 7.25, 1e-12);
}

TEST(MarketSeries, ValidateCatchesBrokenInvariants) {
  MarketSeries s = parse("date,rv,d\n2009-06-01,1,0\n2009-06-02,1,0\n");
  s.lambda[1] = 2;
  EXPECT_THROW(s.validate(), InputError);
  s.lambda[1] = 1;
  s.x_hat = {1.0};
  EXPECT_THROW(s.validate(), InputError);
}
