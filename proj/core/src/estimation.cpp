#include "msacm/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "msacm/errors.hpp"
#include "msacm/ms_engine.hpp"
#include "msacm/optimizer.hpp"

namespace msacm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::optional<double> announce_coefficient(const ModelSpec& spec, const MsAcmParams& params) {
  if (spec.variant == ModelVariant::Acm && spec.announcement_term) return params.policy.announce;
  return std::nullopt;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double proxy_spread(const MarketSeries& s) {
  if (!s.has_proxy()) return 1.0;
  double acc = 0.0;
  for (std::size_t t = 0; t < s.size(); ++t) acc += s.proxy_deviation(t) * s.proxy_deviation(t);
  const double sd = std::sqrt(acc / static_cast<double>(s.size()));
  return sd > 0.0 ? sd : 1.0;
}

bool is_transition(const std::string& name) {
  return name.size() == 3 && name[0] == 'p' && std::isdigit(static_cast<unsigned char>(name[1]));
}

struct StartOutcome {
  StartRecord record;
  Eigen::VectorXd z;
};

}  // namespace

double log_likelihood(const ModelSpec& spec, const MsAcmParams& params, const MarketSeries& series) {
  if (spec.variant == ModelVariant::MsAcm) {
    return hamilton_kim_filter(params, series, {.store_paths = false}).loglik;
  }
  return acm_filter(params, series, announce_coefficient(spec, params)).loglik;
}

std::optional<std::vector<double>> loglik_contributions(const ModelSpec& spec,
                                                        const MsAcmParams& params,
                                                        const MarketSeries& series) {
  if (spec.variant == ModelVariant::MsAcm) {
    auto out = hamilton_kim_filter(params, series, {.store_paths = false});
    if (!out.ok()) return std::nullopt;
    return std::move(out.contributions);
  }
  auto out = acm_filter(params, series, announce_coefficient(spec, params));
  if (out.failure_index) return std::nullopt;
  return std::move(out.contributions);
}

InformationCriteria information_criteria(double loglik, int k_params, double n_obs) {
  if (!(n_obs > 0.0)) throw InputError("information criteria need a positive sample size");
  return {.aic = -2.0 * loglik + 2.0 * k_params,
          .bic = -2.0 * loglik + k_params * std::log(n_obs)};
}

StartBox default_start_box(const ParameterLayout& layout, const MarketSeries& series) {
  const double m = mean_of(series.rv);
  const double sd = proxy_spread(series);
  StartBox box;
  for (const auto& name : layout.names()) {
    if (name == "omega") box[name] = {0.01 * m, 0.2 * m};
    else if (name == "alpha") box[name] = {0.02, 0.35};
    else if (name == "beta") box[name] = {0.4, 0.9};
    else if (name == "gamma") box[name] = {0.01, 0.25};
    else if (name == "delta") box[name] = {-0.2 * m / sd, 0.2 * m / sd};
    else if (name == "phi0") box[name] = {0.01 * m, 0.2 * m};
    else if (name == "psi") box[name] = {-0.5, 0.9};
    else if (name == "announce") box[name] = {-0.2 * m, 0.2 * m};
    else if (name.starts_with("theta")) box[name] = {1.0, 20.0};
    else if (name.starts_with("phi")) box[name] = {0.1 * m, 1.0 * m};
    else if (is_transition(name)) {
      box[name] = name[1] == name[2] ? std::pair{0.5, 0.99} : std::pair{0.0, 0.5};
    }
  }
  return box;
}

MsAcmParams draw_start(const ParameterLayout& layout, const StartBox& box, std::uint64_t seed,
                       int start_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(start_index), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto draw = [&](const std::string& name) {
    const auto& [lo, hi] = box.at(name);
    return lo + (hi - lo) * unif(rng);
  };

  const int k = layout.spec().effective_regimes();
  // Persistence block first, redrawn until comfortably stationary.
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  do {
    alpha = draw("alpha");
    beta = draw("beta");
    gamma = draw("gamma");
  } while (alpha + beta + 0.5 * gamma >= 0.98);

  Eigen::MatrixXd trans = Eigen::MatrixXd::Ones(k, k);
  if (k > 1) {
    for (int i = 0; i < k; ++i) {
      const auto diag_name = "p" + std::to_string(i) + std::to_string(i);
      const auto& [lo, hi] = box.count(diag_name) ? box.at(diag_name) : std::pair{0.5, 0.99};
      const double stay = lo + (hi - lo) * unif(rng);
      std::vector<double> w(static_cast<std::size_t>(k), 0.0);
      double wsum = 0.0;
      for (int j = 0; j < k; ++j) {
        if (j == i) continue;
        w[static_cast<std::size_t>(j)] = 0.5 + unif(rng);
        wsum += w[static_cast<std::size_t>(j)];
      }
      for (int j = 0; j < k; ++j) {
        trans(i, j) = j == i ? stay : (1.0 - stay) * w[static_cast<std::size_t>(j)] / wsum;
      }
    }
  }

  Eigen::VectorXd nat(static_cast<Eigen::Index>(layout.size()));
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& name = layout.names()[i];
    double v;
    if (name == "alpha") v = alpha;
    else if (name == "beta") v = beta;
    else if (name == "gamma") v = gamma;
    else if (is_transition(name)) v = trans(name[1] - '0', name[2] - '0');
    else v = draw(name);
    nat(static_cast<Eigen::Index>(i)) = v;
  }
  return layout.unpack(nat);
}

SandwichResult sandwich_se(const ParameterLayout& layout, const MsAcmParams& params,
                           const MarketSeries& series) {
  const auto& spec = layout.spec();
  const Eigen::VectorXd z = layout.to_unconstrained(params);
  const auto n = z.size();
  const auto T = series.size();
  static const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
  static const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());

  auto total = [&](const Eigen::VectorXd& at) {
    try {
      return log_likelihood(spec, layout.from_unconstrained(at), series);
    } catch (const std::exception&) {
      return kNegInf;
    }
  };
  auto contributions = [&](const Eigen::VectorXd& at) {
    try {
      return loglik_contributions(spec, layout.from_unconstrained(at), series);
    } catch (const std::exception&) {
      return std::optional<std::vector<double>>{};
    }
  };

  SandwichResult out;
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h(i) = cbrt_eps * std::max(1.0, std::abs(z(i)));

  const double f0 = total(z);
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd up = z, dn = z;
    up(i) += h(i);
    dn(i) -= h(i);
    H(i, i) = (total(up) - 2.0 * f0 + total(dn)) / (h(i) * h(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      Eigen::VectorXd pp = z, pm = z, mp = z, mm = z;
      pp(i) += h(i); pp(j) += h(j);
      pm(i) += h(i); pm(j) -= h(j);
      mp(i) -= h(i); mp(j) += h(j);
      mm(i) -= h(i); mm(j) -= h(j);
      H(i, j) = (total(pp) - total(pm) - total(mp) + total(mm)) / (4.0 * h(i) * h(j));
      H(j, i) = H(i, j);
    }
  }
  out.hessian = H;
  const double hmax = H.cwiseAbs().maxCoeff();
  out.hessian_asymmetry = hmax > 0.0 ? (H - H.transpose()).cwiseAbs().maxCoeff() / hmax : 0.0;

  // Per-observation scores.
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(T), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = sqrt_eps * std::max(1.0, std::abs(z(i)));
    Eigen::VectorXd up = z, dn = z;
    up(i) += step;
    dn(i) -= step;
    const auto cu = contributions(up);
    const auto cd = contributions(dn);
    if (!cu || !cd) {
      scores.col(i).setConstant(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    for (std::size_t t = 0; t < T; ++t) {
      scores(static_cast<Eigen::Index>(t), i) = ((*cu)[t] - (*cd)[t]) / (2.0 * step);
    }
  }
  const Eigen::MatrixXd G = scores.transpose() * scores;

  Eigen::MatrixXd Hinv;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
  if (H.allFinite() && lu.isInvertible() && lu.rcond() > 1e-14) {
    Hinv = lu.inverse();
  } else {
    out.singular = true;
    Hinv = H.allFinite() ? Eigen::MatrixXd(H.completeOrthogonalDecomposition().pseudoInverse())
                         : Eigen::MatrixXd::Zero(n, n);
  }
  const Eigen::MatrixXd cov_z = Hinv * G * Hinv;
  const Eigen::MatrixXd J = layout.jacobian(z);
  out.covariance = J * cov_z * J.transpose();
  out.se.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = out.covariance(i, i);
    out.se[static_cast<std::size_t>(i)] = std::isfinite(v) ? std::sqrt(std::max(v, 0.0))
                                                           : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(v)) out.singular = true;
  }
  return out;
}

FitResult fit_qml(const ModelSpec& spec_in, const MarketSeries& series, const FitSettings& settings) {
  series.validate();
  ModelSpec spec = spec_in;
  if (!series.has_proxy()) spec.use_proxy = false;
  if (spec.variant == ModelVariant::Amemx && !spec.use_proxy) {
    throw InputError("AMEMX needs a policy proxy column (x or x_hat)");
  }
  if (settings.starts < 1) throw InputError("need at least one start");
  const ParameterLayout layout(spec);
  const StartBox box = default_start_box(layout, series);

  auto objective = [&](const Eigen::VectorXd& z) {
    try {
      const double ll = log_likelihood(spec, layout.from_unconstrained(z), series);
      return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const int n_starts = settings.starts;
  std::vector<StartOutcome> outcomes(static_cast<std::size_t>(n_starts));
  auto run_start = [&](int index) {
    StartOutcome& o = outcomes[static_cast<std::size_t>(index)];
    o.record.index = index;
    o.record.initial_loglik = -std::numeric_limits<double>::infinity();
    o.record.simplex_loglik = o.record.final_loglik = o.record.initial_loglik;
    Eigen::VectorXd z0;
    try {
      z0 = layout.to_unconstrained(draw_start(layout, box, settings.seed, index));
    } catch (const std::exception&) {
      return;  // the data admit no start at all (e.g. an overflowing sample mean)
    }
    o.record.initial_loglik = -objective(z0);

    optim::NelderMeadSettings nm;
    nm.max_evaluations = settings.max_evaluations;
    nm.f_tol = settings.tolerance;
    auto first = optim::nelder_mead(objective, z0, nm);
    nm.initial_step = 0.1;
    auto second = optim::nelder_mead(objective, first.x, nm);
    if (second.value > first.value) second.x = first.x, second.value = first.value;
    o.record.simplex_loglik = -second.value;

    optim::QuasiNewtonSettings qn;
    qn.max_iterations = settings.polish_iterations;
    const auto polished = optim::bfgs(objective, second.x, qn);

    o.z = polished.value <= second.value ? polished.x : second.x;
    o.record.final_loglik = -std::min(polished.value, second.value);
    o.record.evaluations = first.evaluations + second.evaluations + polished.evaluations;
    o.record.iterations = first.iterations + second.iterations + polished.iterations;
    o.record.converged = second.converged || polished.converged;
    o.record.finite = std::isfinite(o.record.final_loglik);
  };

  unsigned workers = settings.threads > 0 ? static_cast<unsigned>(settings.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n_starts));
  if (workers <= 1) {
    for (int i = 0; i < n_starts; ++i) run_start(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n_starts; i = next++) run_start(i);
      });
    }
  }

  int best = -1;
  for (int i = 0; i < n_starts; ++i) {
    const auto& r = outcomes[static_cast<std::size_t>(i)].record;
    if (!r.finite) continue;
    if (best < 0 || r.final_loglik > outcomes[static_cast<std::size_t>(best)].record.final_loglik) best = i;
  }
  if (best < 0) {
    std::string log = "all " + std::to_string(n_starts) + " starts failed:";
    for (const auto& o : outcomes) {
      log += " [start " + std::to_string(o.record.index) +
             " initial loglik " + std::to_string(o.record.initial_loglik) + "]";
    }
    throw EstimationError(log);
  }

  const auto& winner = outcomes[static_cast<std::size_t>(best)];
  FitResult fit;
  fit.spec = spec;
  fit.names = layout.names();
  fit.params = layout.from_unconstrained(winner.z);
  fit.estimates = layout.pack(fit.params);
  fit.loglik = log_likelihood(spec, fit.params, series);
  fit.k_params = static_cast<int>(layout.size());
  fit.n_obs = series.size();
  const auto ic = information_criteria(fit.loglik, fit.k_params, static_cast<double>(fit.n_obs));
  fit.aic = ic.aic;
  fit.bic = ic.bic;
  fit.converged = winner.record.converged;
  fit.n_starts = n_starts;
  fit.best_start = best;
  fit.iterations = winner.record.iterations;
  fit.seed = settings.seed;
  fit.box = box;
  for (const auto& o : outcomes) fit.starts.push_back(o.record);

  if (settings.compute_se) {
    try {
      const auto sw = sandwich_se(layout, fit.params, series);
      fit.se = sw.se;
      fit.se_warning = sw.singular;
      fit.hessian_asymmetry = sw.hessian_asymmetry;
    } catch (const ParameterError&) {
      // Optimum on the boundary of the transform: no standard errors.
      fit.se.assign(layout.size(), std::numeric_limits<double>::quiet_NaN());
      fit.se_warning = true;
    }
  }
  return fit;
}

}  // namespace msacm
