#pragma once

#include <Eigen/Core>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "msacm/data_model.hpp"
#include "msacm/mem_core.hpp"
#include "msacm/ms_engine.hpp"

namespace msacm {

enum class ResidualBase { OneStep, Smoothed };

/// rv_t / E[mu_t | I_{t-1}], or rv_t over the smoothed conditional mean.
std::vector<double> residuals(const MsAcmParams& params, const FilterOutput& filter, const MarketSeries& series,
                              ResidualBase base = ResidualBase::OneStep);

struct LjungBox {
  double statistic = 0.0;
  double p_value = 1.0;
};

std::map<int, LjungBox> ljung_box(std::span<const double> x, const std::vector<int>& lags);

/// Mixture of unit-mean Gamma laws with shapes theta and weights pi.
double gamma_mixture_cdf(double x, std::span<const double> theta, std::span<const double> pi);

/// Asymptotic Kolmogorov critical values keyed by significance level (0.10, 0.05, 0.01).
std::map<double, double> ks_critical_values(std::size_t n);

struct KsResult {
  double statistic = 0.0;
  std::map<double, double> critical;
};

KsResult ks_mixture_gamma(std::span<const double> resid, std::span<const double> theta,
                          std::span<const double> pi);

struct ResidualReport {
  std::vector<double> residuals;
  double mean = 0.0;
  double sd = 0.0;
  std::map<int, LjungBox> ljung_box;
  KsResult ks;
  std::vector<double> ergodic;
};

ResidualReport residual_report(const MsAcmParams& params, const FilterOutput& filter, const MarketSeries& series,
                               const std::vector<int>& lags = {1, 5, 10},
                               ResidualBase base = ResidualBase::OneStep);

struct ResidualSet {
  std::vector<Date> dates;
  std::vector<double> values;
};

/// Entry (a, b) is corr(e^a_t, e^b_{t-1}); the diagonal holds each series' own
/// lag-1 autocorrelation. Throws TaskError when the date grids differ.
Eigen::MatrixXd cross_correlation_lag1(const std::map<std::string, ResidualSet>& sets);

}  // namespace msacm
