#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msacm/data_model.hpp"
#include "msacm/mem_core.hpp"
#include "msacm/transforms.hpp"

namespace msacm {

/// Total log-likelihood of any variant; -inf where the conditional mean turns non-positive.
double log_likelihood(const ModelSpec& spec, const MsAcmParams& params, const MarketSeries& series);

/// Per-observation contributions, or nullopt when the likelihood is not finite.
std::optional<std::vector<double>> loglik_contributions(const ModelSpec& spec,
                                                        const MsAcmParams& params,
                                                        const MarketSeries& series);

struct FitSettings {
  int starts = 11;
  std::uint64_t seed = 1;
  int max_evaluations = 4000;  ///< per Nelder-Mead pass
  double tolerance = 1e-10;    ///< relative simplex value spread
  int polish_iterations = 200;
  int threads = 0;             ///< 0: one per hardware thread
  bool compute_se = true;
};

/// Range [lo, hi] on the natural scale from which each start draws a parameter.
using StartBox = std::map<std::string, std::pair<double, double>>;

/// Box for random starts, scaled to the data (mean rv, proxy deviation spread).
StartBox default_start_box(const ParameterLayout& layout, const MarketSeries& series);

/// Draws an admissible parameter set uniformly from `box`.
MsAcmParams draw_start(const ParameterLayout& layout, const StartBox& box, std::uint64_t seed,
                       int start_index);

struct StartRecord {
  int index = 0;
  double initial_loglik = 0.0;
  double simplex_loglik = 0.0;
  double final_loglik = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
  bool finite = false;
};

struct SandwichResult {
  std::vector<double> se;       ///< natural scale, same order as the layout names
  Eigen::MatrixXd covariance;   ///< natural scale
  Eigen::MatrixXd hessian;      ///< unconstrained scale, total log-likelihood
  double hessian_asymmetry = 0.0;
  bool singular = false;        ///< pseudo-inverse used
};

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

struct FitResult {
  ModelSpec spec;
  std::vector<std::string> names;
  MsAcmParams params;
  Eigen::VectorXd estimates;
  std::vector<double> se;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  int k_params = 0;
  std::size_t n_obs = 0;
  bool converged = false;
  int n_starts = 0;
  int best_start = 0;
  int iterations = 0;
  bool se_warning = false;
  double hessian_asymmetry = 0.0;
  std::uint64_t seed = 0;
  StartBox box;
  std::vector<StartRecord> starts;
};

InformationCriteria information_criteria(double loglik, int k_params, double n_obs);

/// Quasi-maximum likelihood over the unconstrained space: Nelder-Mead (run
/// twice, the second pass restarted at the first optimum) then a BFGS polish,
/// from `settings.starts` random starts. The best start wins; ties go to the
/// lowest index. Deterministic for a given seed.
FitResult fit_qml(const ModelSpec& spec, const MarketSeries& series, const FitSettings& settings = {});

/// Robust H^-1 G H^-1 standard errors mapped to the natural scale through the
/// transform Jacobian.
SandwichResult sandwich_se(const ParameterLayout& layout, const MsAcmParams& params,
                           const MarketSeries& series);

}  // namespace msacm
