#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "msacm/data_model.hpp"
#include "msacm/mem_core.hpp"

namespace msacm {

/// Output of the Hamilton filter with Kim collapsing and of the Kim smoother.
/// All matrices are T x K.
struct FilterOutput {
  double loglik = 0.0;
  Eigen::MatrixXd predicted;     ///< Pr[s_t = j | I_{t-1}]
  Eigen::MatrixXd filtered;      ///< Pr[s_t = j | I_t]
  Eigen::MatrixXd smoothed;      ///< Pr[s_t = j | I_T]
  Eigen::MatrixXd xi_collapsed;  ///< policy component collapsed onto s_t = j
  std::vector<double> mu_onestep;     ///< E[mu_t | I_{t-1}]
  std::vector<double> contributions;  ///< log of each step's normalizing constant

  /// First t with a non-positive conditional mean; loglik is -inf then.
  std::optional<std::size_t> failure_index;
  /// Steps where a collapse denominator was exactly zero.
  std::size_t collapse_fallbacks = 0;

  bool ok() const { return !failure_index.has_value(); }
};

struct FilterOptions {
  /// Keep the T x K matrices and run the smoother. Likelihood-only callers
  /// (the optimizer) switch this off.
  bool store_paths = true;
};

FilterOutput hamilton_kim_filter(const MsAcmParams& params, const MarketSeries& series,
                                 FilterOptions options = {});

/// Log-likelihood summed over every regime path without collapsing.
/// Only feasible for short series: K^T must not exceed 2^20.
double exact_path_loglik(const MsAcmParams& params, const MarketSeries& series);

/// Stationary distribution pi of a row-stochastic matrix (pi P = pi).
Eigen::VectorXd ergodic_distribution(const Eigen::MatrixXd& trans);

/// Expected regime durations 1/(1 - p_ii) in days; +inf for absorbing regimes.
std::vector<double> expected_durations(const Eigen::MatrixXd& trans);

struct ExoSpec {
  enum class Kind { Zero, Ar1 };
  Kind kind = Kind::Zero;
  double coefficient = 0.0;
  double scale = 0.0;
};

struct SimulationOptions {
  ExoSpec exo;
  /// Probability of a negative-return day (asymmetry dummy).
  double asym_prob = 0.5;
  /// Start the chain in this regime instead of drawing from the ergodic distribution.
  std::optional<int> initial_state;
  std::size_t burn_in = 500;
  Date start_date{2009, 6, 1};
};

struct SimulatedPath {
  MarketSeries series;
  std::vector<int> states;
  std::vector<double> xi_true;
  std::vector<double> mu_true;
};

/// Draws a path of the full (uncollapsed) model. Reproducible for a fixed seed.
SimulatedPath simulate(const MsAcmParams& params, std::size_t length, std::uint64_t seed,
                       const SimulationOptions& options = {});

/// One row per day: date, rv, predicted_j, filtered_j, smoothed_j, mu_onestep.
void write_filter_csv(std::ostream& out, const MarketSeries& series, const FilterOutput& filter);

struct FilterTable {
  std::vector<Date> dates;
  std::vector<double> rv;
  Eigen::MatrixXd predicted;
  Eigen::MatrixXd filtered;
  Eigen::MatrixXd smoothed;
  std::vector<double> mu_onestep;
};

/// Reads back a file produced by write_filter_csv (leading `#` lines are skipped).
FilterTable read_filter_csv(const std::filesystem::path& path);

}  // namespace msacm
