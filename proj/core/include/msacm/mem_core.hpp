#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msacm/data_model.hpp"

namespace msacm {

/// GARCH-like base component: omega + alpha*RV[t-1] + beta*base[t-1] + gamma*D[t-1]*RV[t-1].
struct BaseParams {
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  /// Positivity and alpha + beta + gamma/2 < 1; throws ParameterError.
  void validate() const;
};

/// Policy component. `phi` holds the nonnegative intercept increments of
/// regimes 1..K-1 over regime 0, so the intercept of regime j is
/// phi0 + phi[0] + ... + phi[j-1]. `announce` is the coefficient of the
/// demeaned announcement dummy used only by the single-regime ACM.
struct PolicyParams {
  double delta = 0.0;
  double phi0 = 0.0;
  std::vector<double> phi;
  double psi = 0.0;
  double announce = 0.0;

  void validate() const;
};

struct MsAcmParams {
  BaseParams base;
  PolicyParams policy;
  Eigen::MatrixXd trans = Eigen::MatrixXd::Ones(1, 1);
  std::vector<double> theta{1.0};

  int regimes() const { return static_cast<int>(theta.size()); }

  /// Intercept of the policy component in regime j.
  double intercept(int regime) const;

  /// Unconditional mean of the policy component in regime j with zero proxy
  /// deviation; used as the initial value of the policy component.
  double steady_state_xi(int regime) const;

  /// Checks every invariant (row-stochastic trans, positive shapes, ...).
  void validate() const;
};

/// Single-regime parameter set (AMEM / AMEMX / ACM).
MsAcmParams single_regime(const BaseParams& base, const PolicyParams& policy, double theta);

/// Log density of a Gamma variable with mean `mu` and shape `theta` at `y`.
double gamma_log_density(double y, double mu, double theta);

/// Base component recursion; out[0] = init.
std::vector<double> base_recursion(const BaseParams& params, std::span<const double> rv,
                                   std::span<const std::uint8_t> d, double init);

/// Mean of rv over the first (up to) 50 observations.
double default_base_init(std::span<const double> rv);

struct AcmOutput {
  std::vector<double> mu;
  std::vector<double> xi;
  /// Per-observation log-likelihood contributions.
  std::vector<double> contributions;
  /// -infinity when some mu[t] <= 0; see `failure_index`.
  double loglik = 0.0;
  std::optional<std::size_t> failure_index;
};

/// Single-regime composite model filter. Without `announce_coef` the
/// announcement term is omitted; delta = psi = 0 with phi0 = 0 reduces it to AMEM.
AcmOutput acm_filter(const MsAcmParams& params, const MarketSeries& series,
                     std::optional<double> announce_coef = std::nullopt);

}  // namespace msacm
