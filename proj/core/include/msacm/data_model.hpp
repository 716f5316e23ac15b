#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace msacm {

/// Calendar date at day resolution, printed and parsed as ISO-8601 (YYYY-MM-DD).
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Throws InputError on anything other than a valid YYYY-MM-DD string.
  static Date parse(std::string_view text);

  std::string iso() const;
  std::chrono::sys_days days() const { return days_; }
  bool is_weekend() const;
  Date next_weekday() const;

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

/// Aligned daily observations consumed by every model variant.
///
/// `x` and `x_hat` are either both empty (no policy proxy available) or have
/// the same length as `rv`. The models consume `x_hat[t] - x_bar`.
struct MarketSeries {
  std::vector<Date> dates;
  std::vector<double> rv;
  std::vector<std::uint8_t> d;
  std::vector<double> x;
  std::vector<double> x_hat;
  double x_bar = 0.0;
  std::vector<std::uint8_t> lambda;

  std::size_t size() const { return rv.size(); }
  bool has_proxy() const { return !x_hat.empty(); }

  /// x_hat[t] - x_bar, or zero when no proxy is present.
  double proxy_deviation(std::size_t t) const { return has_proxy() ? x_hat[t] - x_bar : 0.0; }

  /// Checks the structural invariants; throws InputError describing the first violation.
  void validate() const;
};

struct AnnouncementCalendar {
  std::set<Date> dates;

  std::size_t size() const { return dates.size(); }
  bool empty() const { return dates.empty(); }
};

/// Header names for each logical column of the market CSV.
struct ColumnMap {
  std::string date = "date";
  std::string rv = "rv";
  std::string ret = "ret";
  std::string d = "d";
  std::string x = "x";
  std::string x_hat = "x_hat";
};

/// Shortest decimal text that parses back to exactly `value`.
std::string to_shortest(double value);

/// Strict full-string parse of a decimal number; nullopt on any junk.
std::optional<double> parse_number(std::string_view text);

/// Splits a CSV line on commas and trims surrounding whitespace from each field.
std::vector<std::string_view> split_csv_line(std::string_view line);

MarketSeries parse_market_csv(std::istream& in, const ColumnMap& schema = {});
MarketSeries load_market_csv(const std::filesystem::path& path, const ColumnMap& schema = {});

/// Writes `date,rv,d[,x,x_hat]` with shortest round-trip formatting, so
/// reading the file back reproduces every numeric field exactly.
void write_market_csv(std::ostream& out, const MarketSeries& series);
void write_market_csv(const std::filesystem::path& path, const MarketSeries& series);

/// One ISO date per line; blank lines and `#` comments are ignored.
AnnouncementCalendar parse_calendar(std::istream& in);
AnnouncementCalendar load_calendar(const std::filesystem::path& path);
void write_calendar(const std::filesystem::path& path, const AnnouncementCalendar& cal);

struct AlignedSeries {
  MarketSeries series;
  /// Calendar dates that do not appear in the series (holidays, weekends, out of sample).
  std::vector<Date> missing;
};

AlignedSeries align_announcements(MarketSeries series, const AnnouncementCalendar& cal);

struct ProxyForecast {
  /// AR coefficients on lagged first differences, lag 1 first.
  std::vector<double> coefficients;
  double drift = 0.0;
  std::vector<double> x_hat;
};

/// One-step forecasts of `x` from an AR(`lag`) fitted by least squares on its
/// first differences. Entries 0..lag fall back to the random-walk forecast.
ProxyForecast forecast_policy_proxy(std::span<const double> x, int lag = 4);

/// Sets `x_bar` to the sample mean of `x`.
MarketSeries demean_proxy(MarketSeries series);

/// Fills `x_hat` from `x` when the file did not carry it, then demeans.
/// A series without any proxy column is returned unchanged.
MarketSeries prepare_proxy(MarketSeries series, int lag = 4);

}  // namespace msacm
