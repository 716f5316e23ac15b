#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "msacm/mem_core.hpp"

namespace msacm {

enum class ModelVariant { Amem, Amemx, Acm, MsAcm };

std::string_view to_string(ModelVariant v);
ModelVariant parse_variant(std::string_view name);

/// Which parameters a fit estimates.
struct ModelSpec {
  ModelVariant variant = ModelVariant::MsAcm;
  int regimes = 2;               ///< MS-ACM only; the nested models have one regime
  bool estimate_phi0 = false;    ///< regime-0 intercept of the policy component
  bool estimate_psi = false;     ///< AR coefficient of the policy component
  bool announcement_term = false;///< ACM only: coefficient on the demeaned announcement dummy
  bool use_proxy = true;         ///< estimate delta (off when the series has no proxy)
  bool shared_shape = false;     ///< MS-ACM only: one Gamma shape for every regime
  /// Natural-scale values for parameters held fixed instead of estimated.
  /// Only scalar-transform parameters may be fixed (delta, phi*, psi, announce, theta*).
  std::map<std::string, double> fixed;

  int effective_regimes() const { return variant == ModelVariant::MsAcm ? regimes : 1; }
};

/// Default ModelSpec for a variant (ACM estimates psi; MS-ACM does not).
ModelSpec default_spec(ModelVariant variant, int regimes = 2);

/// Bijection between admissible parameter sets of a ModelSpec and R^n.
///
/// Natural-scale layout (free parameters only, in this order): omega, alpha,
/// beta, gamma, delta, phi0, phi1..phi{K-1}, psi, announce, transition entries
/// (row by row, each row omitting its reference column), theta0..theta{K-1}.
///
/// Maps: log for omega, phi0, phi increments and shapes; tanh for psi;
/// identity for delta and announce; (alpha, beta, gamma/2, slack) as a softmax
/// against the slack so alpha + beta + gamma/2 < 1; each transition row as a
/// softmax against its reference column (for K = 2 this is the logit of p_ii).
class ParameterLayout {
 public:
  explicit ParameterLayout(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  /// Free parameters on the natural scale.
  Eigen::VectorXd pack(const MsAcmParams& params) const;
  MsAcmParams unpack(const Eigen::VectorXd& natural) const;

  /// Throws ParameterError for inadmissible or boundary parameters.
  Eigen::VectorXd to_unconstrained(const MsAcmParams& params) const;
  MsAcmParams from_unconstrained(const Eigen::VectorXd& z) const;

  /// d natural / d z at z (central differences, square matrix).
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& z) const;

  /// Reference column of transition row i (not a free parameter).
  int reference_column(int row) const;

 private:
  bool is_free(const std::string& name) const;
  double fixed_or(const std::string& name, double fallback) const;

  ModelSpec spec_;
  std::vector<std::string> names_;
  int k_;
};

}  // namespace msacm
