#include "msacm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msacm/errors.hpp"
#include "msacm/special_functions.hpp"

namespace msacm {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double lag1_corr(std::span<const double> lead, std::span<const double> lagged) {
  const std::size_t n = lead.size();
  const auto a = lead.subspan(1);
  const auto b = lagged.first(n - 1);
  const double ma = mean_of(a), mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

std::vector<double> residuals(const MsAcmParams& params, const FilterOutput& filter, const MarketSeries& series,
                              ResidualBase base) {
  const std::size_t n = series.size();
  if (filter.mu_onestep.size() != n) throw InputError("filter output does not match the series length");
  std::vector<double> out(n);
  if (base == ResidualBase::OneStep) {
    for (std::size_t t = 0; t < n; ++t) out[t] = series.rv[t] / filter.mu_onestep[t];
    return out;
  }
  if (filter.smoothed.rows() != static_cast<Eigen::Index>(n)) {
    throw InputError("smoothed probabilities were not stored");
  }
  const auto sigma = base_recursion(params.base, series.rv, series.d, default_base_init(series.rv));
  for (std::size_t t = 0; t < n; ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    out[t] = series.rv[t] / (sigma[t] + filter.smoothed.row(row).dot(filter.xi_collapsed.row(row)));
  }
  return out;
}

std::map<int, LjungBox> ljung_box(std::span<const double> x, const std::vector<int>& lags) {
  const std::size_t n = x.size();
  const int max_lag = lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end());
  if (max_lag >= static_cast<int>(n)) throw InputError("Ljung-Box lag must be smaller than the sample size");
  for (int l : lags) {
    if (l < 1) throw InputError("Ljung-Box lags must be positive");
  }
  const double m = mean_of(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);

  const double T = static_cast<double>(n);
  std::vector<double> cumulative(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int l = 1; l <= max_lag; ++l) {
    double cl = 0.0;
    for (std::size_t t = static_cast<std::size_t>(l); t < n; ++t) cl += (x[t] - m) * (x[t - static_cast<std::size_t>(l)] - m);
    const double rho = c0 > 0.0 ? cl / c0 : 0.0;
    cumulative[static_cast<std::size_t>(l)] = cumulative[static_cast<std::size_t>(l) - 1] + rho * rho / (T - l);
  }
  std::map<int, LjungBox> out;
  for (int l : lags) {
    const double q = T * (T + 2.0) * cumulative[static_cast<std::size_t>(l)];
    out[l] = {q, special::chi_square_sf(q, l)};
  }
  return out;
}

double gamma_mixture_cdf(double x, std::span<const double> theta, std::span<const double> pi) {
  if (theta.size() != pi.size()) throw InputError("mixture shapes and weights differ in length");
  if (x <= 0.0) return 0.0;
  double f = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (pi[j] != 0.0) f += pi[j] * special::gamma_cdf(x, theta[j], 1.0);
  }
  return f;
}

std::map<double, double> ks_critical_values(std::size_t n) {
  const double root = std::sqrt(static_cast<double>(n));
  return {{0.10, 1.22 / root}, {0.05, 1.36 / root}, {0.01, 1.63 / root}};
}

KsResult ks_mixture_gamma(std::span<const double> resid, std::span<const double> theta,
                          std::span<const double> pi) {
  if (resid.empty()) throw InputError("KS test on an empty sample");
  const double wsum = std::accumulate(pi.begin(), pi.end(), 0.0);
  if (std::abs(wsum - 1.0) > 1e-8) throw InputError("mixture weights do not sum to one");
  std::vector<double> x(resid.begin(), resid.end());
  for (double v : x) {
    if (!(v > 0.0)) throw DomainError("KS test needs positive residuals");
  }
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = gamma_mixture_cdf(x[i], theta, pi);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, ks_critical_values(x.size())};
}

ResidualReport residual_report(const MsAcmParams& params, const FilterOutput& filter, const MarketSeries& series,
                               const std::vector<int>& lags, ResidualBase base) {
  ResidualReport r;
  r.residuals = residuals(params, filter, series, base);
  r.mean = mean_of(r.residuals);
  double ss = 0.0;
  for (double v : r.residuals) ss += (v - r.mean) * (v - r.mean);
  r.sd = std::sqrt(ss / static_cast<double>(r.residuals.size() - 1));
  r.ljung_box = ljung_box(r.residuals, lags);
  const Eigen::VectorXd pi = params.regimes() > 1 ? ergodic_distribution(params.trans) : Eigen::VectorXd::Ones(1);
  r.ergodic.assign(pi.data(), pi.data() + pi.size());
  r.ks = ks_mixture_gamma(r.residuals, params.theta, r.ergodic);
  return r;
}

Eigen::MatrixXd cross_correlation_lag1(const std::map<std::string, ResidualSet>& sets) {
  if (sets.size() < 1) throw TaskError("no residual sets to correlate");
  const auto& ref = sets.begin()->second;
  for (const auto& [name, s] : sets) {
    if (s.dates.size() != s.values.size()) throw InputError("residual set '" + name + "' is inconsistent");
    if (s.dates == ref.dates) continue;
    std::vector<Date> diff;
    std::set_symmetric_difference(ref.dates.begin(), ref.dates.end(), s.dates.begin(), s.dates.end(),
                                  std::back_inserter(diff));
    std::string msg = "residual dates of '" + name + "' and '" + sets.begin()->first + "' differ:";
    for (std::size_t i = 0; i < std::min<std::size_t>(diff.size(), 20); ++i) msg += " " + diff[i].iso();
    if (diff.size() > 20) msg += " ... (" + std::to_string(diff.size()) + " dates)";
    throw TaskError(msg);
  }
  if (ref.values.size() < 3) throw InputError("cross-correlation needs at least three observations");

  const auto k = static_cast<Eigen::Index>(sets.size());
  Eigen::MatrixXd out(k, k);
  Eigen::Index i = 0;
  for (const auto& [na, a] : sets) {
    Eigen::Index j = 0;
    for (const auto& [nb, b] : sets) {
      out(i, j) = lag1_corr(a.values, b.values);
      ++j;
    }
    ++i;
  }
  return out;
}

}  // namespace msacm
