#pragma once

#include <random>

#include "msacm/data_model.hpp"
#include "msacm/mem_core.hpp"

namespace fixture {

/// Plausible positive series with a demeaned proxy; not drawn from any model.
inline msacm::MarketSeries random_series(std::size_t n, std::uint64_t seed, bool proxy = true) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> g(6.0, 2.0);
  std::bernoulli_distribution b(0.5);
  std::normal_distribution<double> z(0.0, 1.0);
  msacm::MarketSeries s;
  msacm::Date d{2012, 3, 1};
  d = d.is_weekend() ? d.next_weekday() : d;
  for (std::size_t t = 0; t < n; ++t, d = d.next_weekday()) {
    s.dates.push_back(d);
    s.rv.push_back(g(rng));
    s.d.push_back(b(rng));
    if (proxy) s.x.push_back(z(rng));
  }
  if (proxy) {
    s.x_hat = s.x;
    double m = 0.0;
    for (double v : s.x) m += v;
    s.x_bar = m / static_cast<double>(n);
  }
  s.lambda.assign(n, 0);
  return s;
}

/// Random admissible parameters with regime-specific shapes.
inline msacm::MsAcmParams random_params(int k, std::mt19937_64& rng, double psi = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  msacm::MsAcmParams p;
  do {
    p.base = {0.5 + 1.5 * u(rng), 0.02 + 0.3 * u(rng), 0.3 + 0.55 * u(rng), 0.2 * u(rng)};
  } while (p.base.alpha + p.base.beta + 0.5 * p.base.gamma >= 0.97);
  p.policy.delta = -1.0 + 2.0 * u(rng);
  p.policy.phi0 = 0.0;
  p.policy.phi.clear();
  for (int j = 1; j < k; ++j) p.policy.phi.push_back(1.0 + 6.0 * u(rng));
  p.policy.psi = psi;
  p.trans = Eigen::MatrixXd(k, k);
  for (int i = 0; i < k; ++i) {
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      p.trans(i, j) = (i == j ? 3.0 : 0.0) + u(rng) + 0.05;
      sum += p.trans(i, j);
    }
    p.trans.row(i) /= sum;
  }
  p.theta.clear();
  for (int j = 0; j < k; ++j) p.theta.push_back(1.5 + 12.0 * u(rng));
  return p;
}

}  // namespace fixture
