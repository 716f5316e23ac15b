#include "msacm/transforms.hpp"

#include <cmath>
#include <set>

#include "msacm/errors.hpp"

namespace msacm {

namespace {

const std::set<std::string, std::less<>> kFixable = {"delta", "phi0", "psi", "announce"};

bool fixable(const std::string& name) {
  return kFixable.contains(name) || name.starts_with("phi") || name.starts_with("theta");
}

double checked_log(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string("parameter on the boundary: ") + what);
  }
  return std::log(v);
}

}  // namespace

std::string_view to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::Amem: return "amem";
    case ModelVariant::Amemx: return "amemx";
    case ModelVariant::Acm: return "acm";
    case ModelVariant::MsAcm: return "msacm";
  }
  return "unknown";
}

ModelVariant parse_variant(std::string_view name) {
  if (name == "amem") return ModelVariant::Amem;
  if (name == "amemx") return ModelVariant::Amemx;
  if (name == "acm") return ModelVariant::Acm;
  if (name == "msacm") return ModelVariant::MsAcm;
  throw InputError("unknown model '" + std::string(name) + "' (expected amem|amemx|acm|msacm)");
}

ModelSpec default_spec(ModelVariant variant, int regimes) {
  ModelSpec spec;
  spec.variant = variant;
  spec.regimes = variant == ModelVariant::MsAcm ? regimes : 1;
  spec.estimate_psi = variant == ModelVariant::Acm;
  return spec;
}

ParameterLayout::ParameterLayout(ModelSpec spec) : spec_(std::move(spec)), k_(spec_.effective_regimes()) {
  if (k_ < 1) throw InputError("number of regimes must be at least 1");
  if (spec_.variant == ModelVariant::MsAcm && k_ < 2) {
    throw InputError("MS-ACM needs at least 2 regimes");
  }
  for (const auto& [name, value] : spec_.fixed) {
    if (!fixable(name)) throw InputError("parameter '" + name + "' cannot be held fixed");
    if (!std::isfinite(value)) throw InputError("fixed value for '" + name + "' is not finite");
  }

  const bool ms = spec_.variant == ModelVariant::MsAcm;
  auto add = [&](std::string name) {
    if (is_free(name)) names_.push_back(std::move(name));
  };
  for (const char* n : {"omega", "alpha", "beta", "gamma"}) names_.emplace_back(n);
  if (spec_.variant != ModelVariant::Amem && spec_.use_proxy) add("delta");
  if (ms && spec_.estimate_phi0) add("phi0");
  if (ms) {
    for (int j = 1; j < k_; ++j) add("phi" + std::to_string(j));
  }
  if ((ms || spec_.variant == ModelVariant::Acm) && spec_.estimate_psi) add("psi");
  if (spec_.variant == ModelVariant::Acm && spec_.announcement_term) add("announce");
  if (ms) {
    for (int i = 0; i < k_; ++i) {
      for (int j = 0; j < k_; ++j) {
        if (j != reference_column(i)) names_.push_back("p" + std::to_string(i) + std::to_string(j));
      }
    }
  }
  if (ms && !spec_.shared_shape) {
    for (int j = 0; j < k_; ++j) add("theta" + std::to_string(j));
  } else {
    add("theta");
  }
}

bool ParameterLayout::is_free(const std::string& name) const { return !spec_.fixed.contains(name); }

double ParameterLayout::fixed_or(const std::string& name, double fallback) const {
  const auto it = spec_.fixed.find(name);
  return it == spec_.fixed.end() ? fallback : it->second;
}

int ParameterLayout::reference_column(int row) const { return (row + 1) % k_; }

Eigen::VectorXd ParameterLayout::pack(const MsAcmParams& p) const {
  if (p.regimes() != k_) throw ParameterError("parameter set has the wrong number of regimes");
  Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
  Eigen::Index i = 0;
  for (const auto& name : names_) {
    double value = 0.0;
    if (name == "omega") value = p.base.omega;
    else if (name == "alpha") value = p.base.alpha;
    else if (name == "beta") value = p.base.beta;
    else if (name == "gamma") value = p.base.gamma;
    else if (name == "delta") value = p.policy.delta;
    else if (name == "phi0") value = p.policy.phi0;
    else if (name == "psi") value = p.policy.psi;
    else if (name == "announce") value = p.policy.announce;
    else if (name == "theta") value = p.theta[0];
    else if (name.starts_with("theta")) value = p.theta[std::stoul(name.substr(5))];
    else if (name.starts_with("phi")) value = p.policy.phi[std::stoul(name.substr(3)) - 1];
    else if (name.starts_with("p")) value = p.trans(name[1] - '0', name[2] - '0');
    v(i++) = value;
  }
  return v;
}

MsAcmParams ParameterLayout::unpack(const Eigen::VectorXd& natural) const {
  if (natural.size() != static_cast<Eigen::Index>(size())) {
    throw ParameterError("natural parameter vector has the wrong length");
  }
  MsAcmParams p;
  p.policy.delta = fixed_or("delta", 0.0);
  p.policy.phi0 = fixed_or("phi0", 0.0);
  p.policy.psi = fixed_or("psi", 0.0);
  p.policy.announce = fixed_or("announce", 0.0);
  p.policy.phi.assign(static_cast<std::size_t>(k_ - 1), 0.0);
  for (int j = 1; j < k_; ++j) {
    p.policy.phi[static_cast<std::size_t>(j - 1)] = fixed_or("phi" + std::to_string(j), 0.0);
  }
  p.theta.assign(static_cast<std::size_t>(k_), fixed_or("theta", 1.0));
  for (int j = 0; j < k_; ++j) {
    p.theta[static_cast<std::size_t>(j)] = fixed_or("theta" + std::to_string(j), p.theta[static_cast<std::size_t>(j)]);
  }
  p.trans = Eigen::MatrixXd::Zero(k_, k_);

  for (std::size_t i = 0; i < names_.size(); ++i) {
    const auto& name = names_[i];
    const double value = natural(static_cast<Eigen::Index>(i));
    if (name == "omega") p.base.omega = value;
    else if (name == "alpha") p.base.alpha = value;
    else if (name == "beta") p.base.beta = value;
    else if (name == "gamma") p.base.gamma = value;
    else if (name == "delta") p.policy.delta = value;
    else if (name == "phi0") p.policy.phi0 = value;
    else if (name == "psi") p.policy.psi = value;
    else if (name == "announce") p.policy.announce = value;
    else if (name == "theta") std::fill(p.theta.begin(), p.theta.end(), value);
    else if (name.starts_with("theta")) p.theta[std::stoul(name.substr(5))] = value;
    else if (name.starts_with("phi")) p.policy.phi[std::stoul(name.substr(3)) - 1] = value;
    else if (name.starts_with("p")) p.trans(name[1] - '0', name[2] - '0') = value;
  }
  for (int r = 0; r < k_; ++r) {
    double rest = 1.0;
    for (int c = 0; c < k_; ++c) {
      if (c != reference_column(r) || k_ == 1) rest -= p.trans(r, c);
    }
    if (k_ == 1) p.trans(0, 0) = 1.0;
    else p.trans(r, reference_column(r)) = rest;
  }
  return p;
}

Eigen::VectorXd ParameterLayout::to_unconstrained(const MsAcmParams& p) const {
  p.validate();
  const Eigen::VectorXd nat = pack(p);
  const double c = 0.5 * p.base.gamma;
  const double slack = 1.0 - p.base.alpha - p.base.beta - c;
  const double log_slack = checked_log(slack, "alpha + beta + gamma/2 = 1");
  Eigen::VectorXd z(nat.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const auto& name = names_[i];
    const auto ii = static_cast<Eigen::Index>(i);
    const double v = nat(ii);
    if (name == "alpha") z(ii) = checked_log(v, "alpha") - log_slack;
    else if (name == "beta") z(ii) = checked_log(v, "beta") - log_slack;
    else if (name == "gamma") z(ii) = checked_log(0.5 * v, "gamma") - log_slack;
    else if (name == "delta" || name == "announce") z(ii) = v;
    else if (name == "psi") z(ii) = std::atanh(v);
    else if (name.starts_with("p") && !name.starts_with("phi") && !name.starts_with("psi")) {
      const int r = name[1] - '0';
      const double ref = p.trans(r, reference_column(r));
      z(ii) = checked_log(v, "transition probability") - checked_log(ref, "transition probability");
    } else {
      z(ii) = checked_log(v, name.c_str());  // omega, phi*, theta*
    }
  }
  return z;
}

MsAcmParams ParameterLayout::from_unconstrained(const Eigen::VectorXd& z) const {
  if (z.size() != static_cast<Eigen::Index>(size())) {
    throw ParameterError("unconstrained vector has the wrong length");
  }
  Eigen::VectorXd nat(z.size());
  // Softmax blocks: (alpha, beta, gamma/2) against the slack; transition rows against the reference.
  double simplex_den = 1.0;
  std::vector<double> row_den(static_cast<std::size_t>(k_), 1.0);
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const auto& name = names_[i];
    const double e = std::exp(z(static_cast<Eigen::Index>(i)));
    if (name == "alpha" || name == "beta" || name == "gamma") simplex_den += e;
    else if (name.size() == 3 && name[0] == 'p' && std::isdigit(static_cast<unsigned char>(name[1]))) {
      row_den[static_cast<std::size_t>(name[1] - '0')] += e;
    }
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const auto& name = names_[i];
    const auto ii = static_cast<Eigen::Index>(i);
    const double zi = z(ii);
    if (name == "alpha" || name == "beta") nat(ii) = std::exp(zi) / simplex_den;
    else if (name == "gamma") nat(ii) = 2.0 * std::exp(zi) / simplex_den;
    else if (name == "delta" || name == "announce") nat(ii) = zi;
    else if (name == "psi") nat(ii) = std::tanh(zi);
    else if (name.size() == 3 && name[0] == 'p' && std::isdigit(static_cast<unsigned char>(name[1]))) {
      nat(ii) = std::exp(zi) / row_den[static_cast<std::size_t>(name[1] - '0')];
    } else {
      nat(ii) = std::exp(zi);
    }
  }
  MsAcmParams p = unpack(nat);
  // Reference entries straight from the softmax keep rows stochastic to rounding.
  for (int r = 0; r < k_ && k_ > 1; ++r) {
    p.trans(r, reference_column(r)) = 1.0 / row_den[static_cast<std::size_t>(r)];
  }
  return p;
}

Eigen::MatrixXd ParameterLayout::jacobian(const Eigen::VectorXd& z) const {
  const auto n = z.size();
  Eigen::MatrixXd J(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(z(j)));
    Eigen::VectorXd up = z, dn = z;
    up(j) += h;
    dn(j) -= h;
    J.col(j) = (pack(from_unconstrained(up)) - pack(from_unconstrained(dn))) / (2.0 * h);
  }
  return J;
}

}  // namespace msacm
