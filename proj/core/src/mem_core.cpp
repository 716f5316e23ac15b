#include "msacm/mem_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "msacm/errors.hpp"
#include "gamma_kernel.hpp"
#include "msacm/special_functions.hpp"

namespace msacm {

void BaseParams::validate() const {
  if (!(omega > 0.0)) throw ParameterError("omega must be positive");
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0)) {
    throw ParameterError("alpha, beta and gamma must be non-negative");
  }
  if (!(alpha + beta + 0.5 * gamma < 1.0)) {
    throw ParameterError("stationarity requires alpha + beta + gamma/2 < 1");
  }
}

void PolicyParams::validate() const {
  if (!std::isfinite(delta) || !std::isfinite(announce)) {
    throw ParameterError("delta and announcement coefficient must be finite");
  }
  if (!(phi0 >= 0.0)) throw ParameterError("phi0 must be non-negative");
  for (double p : phi) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ParameterError("phi increments must be non-negative");
  }
  if (!(std::abs(psi) < 1.0)) throw ParameterError("|psi| must be below 1");
}

double MsAcmParams::intercept(int regime) const {
  double c = policy.phi0;
  for (int j = 0; j < regime; ++j) c += policy.phi[static_cast<std::size_t>(j)];
  return c;
}

double MsAcmParams::steady_state_xi(int regime) const {
  return intercept(regime) / (1.0 - policy.psi);
}

void MsAcmParams::validate() const {
  base.validate();
  policy.validate();
  const int k = regimes();
  if (k < 1) throw ParameterError("need at least one regime");
  if (static_cast<int>(policy.phi.size()) != k - 1) {
    throw ParameterError("expected " + std::to_string(k - 1) + " phi increments");
  }
  if (trans.rows() != k || trans.cols() != k) throw ParameterError("transition matrix must be KxK");
  for (int i = 0; i < k; ++i) {
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      const double p = trans(i, j);
      if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("transition entries must lie in [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw ParameterError("transition row " + std::to_string(i) + " does not sum to 1");
    }
  }
  for (double th : theta) {
    if (!(th > 0.0) || !std::isfinite(th)) throw ParameterError("gamma shapes must be positive");
  }
}

MsAcmParams single_regime(const BaseParams& base, const PolicyParams& policy, double theta) {
  MsAcmParams p;
  p.base = base;
  p.policy = policy;
  p.policy.phi.clear();
  p.trans = Eigen::MatrixXd::Ones(1, 1);
  p.theta = {theta};
  return p;
}

double gamma_log_density(double y, double mu, double theta) {
  if (!(y > 0.0) || !(mu > 0.0) || !(theta > 0.0)) {
    throw DomainError("gamma_log_density requires y, mu, theta > 0");
  }
  return detail::gamma_log_density_terms(detail::gamma_shape_const(theta), theta, y, std::log(y),
                                         mu);
}

std::vector<double> base_recursion(const BaseParams& params, std::span<const double> rv,
                                   std::span<const std::uint8_t> d, double init) {
  if (rv.size() != d.size()) throw InputError("rv and d lengths differ");
  if (!(init > 0.0)) throw DomainError("base recursion needs a positive initial value");
  std::vector<double> out(rv.size());
  if (out.empty()) return out;
  out[0] = init;
  for (std::size_t t = 1; t < rv.size(); ++t) {
    out[t] = params.omega + params.alpha * rv[t - 1] + params.beta * out[t - 1] +
             params.gamma * d[t - 1] * rv[t - 1];
  }
  return out;
}

double default_base_init(std::span<const double> rv) {
  const std::size_t n = std::min<std::size_t>(rv.size(), 50);
  if (n == 0) throw InputError("empty rv series");
  return std::accumulate(rv.begin(), rv.begin() + static_cast<std::ptrdiff_t>(n), 0.0) /
         static_cast<double>(n);
}

AcmOutput acm_filter(const MsAcmParams& params, const MarketSeries& series,
                     std::optional<double> announce_coef) {
  if (params.regimes() != 1) throw ParameterError("acm_filter expects a single-regime model");
  const auto n = series.size();
  const auto& pol = params.policy;
  const double theta = params.theta[0];
  const double shape_const = detail::gamma_shape_const(theta);

  double lambda_bar = 0.0;
  if (announce_coef) {
    lambda_bar = std::accumulate(series.lambda.begin(), series.lambda.end(), 0.0) /
                 static_cast<double>(n);
  }

  const auto base = base_recursion(params.base, series.rv, series.d, default_base_init(series.rv));

  AcmOutput out;
  out.mu.resize(n);
  out.xi.resize(n);
  out.contributions.resize(n);
  double xi_prev = params.steady_state_xi(0);
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double xi = xi_prev;
    if (t > 0) {
      xi = pol.phi0 + pol.delta * series.proxy_deviation(t) + pol.psi * xi_prev;
      if (announce_coef) xi += *announce_coef * (series.lambda[t] - lambda_bar);
    }
    const double mu = base[t] + xi;
    out.xi[t] = xi;
    out.mu[t] = mu;
    if (!(mu > 0.0)) {
      out.failure_index = t;
      out.loglik = -std::numeric_limits<double>::infinity();
      return out;
    }
    const double y = series.rv[t];
    const double c = detail::gamma_log_density_terms(shape_const, theta, y, std::log(y), mu);
    out.contributions[t] = c;
    total += c;
    xi_prev = xi;
  }
  out.loglik = total;
  return out;
}

}  // namespace msacm
