#include "msacm/data_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "msacm/errors.hpp"

namespace msacm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string row_context(std::size_t row) { return "row " + std::to_string(row); }

}  // namespace

std::string to_shortest(double value) { return format_double(value); }

std::optional<double> parse_number(std::string_view text) { return parse_double(trim(text)); }

std::vector<std::string_view> split_csv_line(std::string_view line) { return split_commas(line); }

Date::Date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) throw InputError("invalid calendar date");
  days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view text) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw InputError("unparseable date '" + std::string(text) + "'");
  }
  auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
    if (ec != std::errc{} || ptr != text.data() + pos + len) {
      throw InputError("unparseable date '" + std::string(text) + "'");
    }
    return v;
  };
  const std::chrono::year_month_day ymd{std::chrono::year{field(0, 4)},
                                        std::chrono::month{static_cast<unsigned>(field(5, 2))},
                                        std::chrono::day{static_cast<unsigned>(field(8, 2))}};
  if (!ymd.ok()) throw InputError("invalid date '" + std::string(text) + "'");
  return Date{std::chrono::sys_days{ymd}};
}

std::string Date::iso() const {
  const std::chrono::year_month_day ymd{days_};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

bool Date::is_weekend() const {
  const std::chrono::weekday wd{days_};
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

Date Date::next_weekday() const {
  Date next{days_ + std::chrono::days{1}};
  while (next.is_weekend()) next = Date{next.days_ + std::chrono::days{1}};
  return next;
}

void MarketSeries::validate() const {
  const auto n = rv.size();
  if (n < 2) throw InputError("series needs at least 2 observations, got " + std::to_string(n));
  if (dates.size() != n || d.size() != n || lambda.size() != n) {
    throw InputError("parallel arrays have unequal lengths");
  }
  if (!x.empty() && x.size() != n) throw InputError("x has wrong length");
  if (!x_hat.empty() && x_hat.size() != n) throw InputError("x_hat has wrong length");
  for (std::size_t t = 0; t < n; ++t) {
    if (!(rv[t] > 0.0) || !std::isfinite(rv[t])) {
      throw InputError("rv must be positive and finite at " + row_context(t));
    }
    if (d[t] > 1) throw InputError("d must be 0 or 1 at " + row_context(t));
    if (lambda[t] > 1) throw InputError("lambda must be 0 or 1 at " + row_context(t));
    if (!x_hat.empty() && !std::isfinite(x_hat[t])) {
      throw InputError("x_hat missing or non-finite at " + row_context(t));
    }
    if (t > 0 && !(dates[t - 1] < dates[t])) {
      throw InputError("dates must be strictly increasing at " + row_context(t));
    }
  }
}

MarketSeries parse_market_csv(std::istream& in, const ColumnMap& schema) {
  std::string line;
  // Leading `#` lines carry provenance (config hash, seed) and are skipped.
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
    if (!line.empty() && line[0] == '#') continue;
    have_header = true;
    break;
  }
  if (!have_header) throw InputError("empty CSV: missing header row");

  const auto header = split_commas(line);
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < header.size(); ++i) index.emplace(std::string(header[i]), i);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return it->second;
  };

  const auto c_date = column(schema.date);
  if (!c_date) throw InputError("missing required column '" + schema.date + "'");
  const auto c_rv = column(schema.rv);
  if (!c_rv) throw InputError("missing required column '" + schema.rv + "'");
  const auto c_ret = column(schema.ret);
  const auto c_d = column(schema.d);
  if (!c_ret && !c_d) {
    throw InputError("missing column '" + schema.ret + "' (or '" + schema.d + "')");
  }
  const auto c_x = column(schema.x);
  const auto c_xhat = column(schema.x_hat);

  struct Row {
    Date date;
    double rv;
    std::uint8_t d;
    double x;
    double x_hat;
  };
  std::vector<Row> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line[0] == '#') continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw InputError(row_context(row) + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(cells.size()));
    }
    auto number = [&](std::size_t col, const std::string& name) {
      const auto v = parse_double(cells[col]);
      if (!v) throw InputError(row_context(row) + ": cannot parse " + name + " '" +
                               std::string(cells[col]) + "'");
      return *v;
    };

    Row r{};
    try {
      r.date = Date::parse(cells[*c_date]);
    } catch (const InputError& e) {
      throw InputError(row_context(row) + ": " + e.what());
    }
    r.rv = number(*c_rv, schema.rv);
    if (!(r.rv > 0.0) || !std::isfinite(r.rv)) {
      throw InputError(row_context(row) + ": rv must be positive, got " + format_double(r.rv));
    }
    // An explicit dummy column wins over the sign of the return.
    if (c_d) {
      const double dv = number(*c_d, schema.d);
      if (dv != 0.0 && dv != 1.0) throw InputError(row_context(row) + ": d must be 0 or 1");
      r.d = static_cast<std::uint8_t>(dv);
    } else {
      r.d = number(*c_ret, schema.ret) < 0.0 ? 1 : 0;
    }
    if (c_x) r.x = number(*c_x, schema.x);
    if (c_xhat) r.x_hat = number(*c_xhat, schema.x_hat);
    rows.push_back(r);
    ++row;
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].date == rows[i - 1].date) {
      throw InputError("duplicate date " + rows[i].date.iso());
    }
  }

  MarketSeries s;
  for (const auto& r : rows) {
    s.dates.push_back(r.date);
    s.rv.push_back(r.rv);
    s.d.push_back(r.d);
    if (c_x) s.x.push_back(r.x);
    if (c_xhat) s.x_hat.push_back(r.x_hat);
  }
  s.lambda.assign(s.size(), 0);
  s.validate();
  return s;
}

MarketSeries load_market_csv(const std::filesystem::path& path, const ColumnMap& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_market_csv(in, schema);
}

void write_market_csv(std::ostream& out, const MarketSeries& series) {
  const bool proxy = !series.x.empty() || !series.x_hat.empty();
  out << "date,rv,d";
  if (proxy) out << ",x,x_hat";
  out << '\n';
  for (std::size_t t = 0; t < series.size(); ++t) {
    out << series.dates[t].iso() << ',' << format_double(series.rv[t]) << ','
        << static_cast<int>(series.d[t]);
    if (proxy) {
      const double x = series.x.empty() ? series.x_hat[t] : series.x[t];
      const double xh = series.x_hat.empty() ? series.x[t] : series.x_hat[t];
      out << ',' << format_double(x) << ',' << format_double(xh);
    }
    out << '\n';
  }
}

void write_market_csv(const std::filesystem::path& path, const MarketSeries& series) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_market_csv(out, series);
}

AnnouncementCalendar parse_calendar(std::istream& in) {
  AnnouncementCalendar cal;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto text = std::string_view(line);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    try {
      cal.dates.insert(Date::parse(text));
    } catch (const InputError& e) {
      throw InputError("calendar line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cal;
}

AnnouncementCalendar load_calendar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_calendar(in);
}

void write_calendar(const std::filesystem::path& path, const AnnouncementCalendar& cal) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& d : cal.dates) out << d.iso() << '\n';
}

AlignedSeries align_announcements(MarketSeries series, const AnnouncementCalendar& cal) {
  AlignedSeries out;
  series.lambda.assign(series.size(), 0);
  for (const auto& date : cal.dates) {
    const auto it = std::lower_bound(series.dates.begin(), series.dates.end(), date);
    if (it != series.dates.end() && *it == date) {
      series.lambda[static_cast<std::size_t>(it - series.dates.begin())] = 1;
    } else {
      out.missing.push_back(date);
    }
  }
  out.series = std::move(series);
  return out;
}

ProxyForecast forecast_policy_proxy(std::span<const double> x, int lag) {
  if (lag < 1) throw InputError("lag order must be at least 1");
  const auto p = static_cast<std::size_t>(lag);
  const auto n = x.size();
  if (n < p + 2) {
    throw InputError("proxy series too short: need at least " + std::to_string(p + 2) +
                     " values, got " + std::to_string(n));
  }

  // Differences dx[t] = x[t] - x[t-1] for t >= 1; rows t = p+1 .. n-1.
  std::vector<double> dx(n, 0.0);
  for (std::size_t t = 1; t < n; ++t) dx[t] = x[t] - x[t - 1];

  const auto rows = static_cast<Eigen::Index>(n - p - 1);
  Eigen::MatrixXd design(rows, static_cast<Eigen::Index>(p + 1));
  Eigen::VectorXd target(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto t = static_cast<std::size_t>(r) + p + 1;
    design(r, 0) = 1.0;
    for (std::size_t l = 1; l <= p; ++l) design(r, static_cast<Eigen::Index>(l)) = dx[t - l];
    target(r) = dx[t];
  }
  // Minimum-norm solution so that degenerate inputs (constant or linear x) stay well defined.
  const Eigen::VectorXd coef = design.completeOrthogonalDecomposition().solve(target);

  ProxyForecast out;
  out.drift = coef(0);
  for (std::size_t l = 1; l <= p; ++l) out.coefficients.push_back(coef(static_cast<Eigen::Index>(l)));
  out.x_hat.resize(n);
  out.x_hat[0] = x[0];
  for (std::size_t t = 1; t <= p; ++t) out.x_hat[t] = x[t - 1];
  for (std::size_t t = p + 1; t < n; ++t) {
    double step = out.drift;
    for (std::size_t l = 1; l <= p; ++l) step += out.coefficients[l - 1] * dx[t - l];
    out.x_hat[t] = x[t - 1] + step;
  }
  return out;
}

MarketSeries demean_proxy(MarketSeries series) {
  const auto& src = series.x.empty() ? series.x_hat : series.x;
  if (src.empty()) return series;
  series.x_bar = std::accumulate(src.begin(), src.end(), 0.0) / static_cast<double>(src.size());
  return series;
}

MarketSeries prepare_proxy(MarketSeries series, int lag) {
  if (series.x.empty() && series.x_hat.empty()) return series;
  if (series.x_hat.empty()) series.x_hat = forecast_policy_proxy(series.x, lag).x_hat;
  return demean_proxy(std::move(series));
}

}  // namespace msacm
