#include "msacm/ms_engine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "msacm/errors.hpp"
#include "gamma_kernel.hpp"

namespace msacm {

namespace {

using detail::ShapeTerms;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

FilterOutput hamilton_kim_filter(const MsAcmParams& params, const MarketSeries& series,
                                 FilterOptions options) {
  const int k = params.regimes();
  const auto ku = static_cast<std::size_t>(k);
  const auto n = series.size();
  const ShapeTerms shapes(params.theta);
  const auto& pol = params.policy;
  const Eigen::MatrixXd& P = params.trans;
  const Eigen::VectorXd pi = k == 1 ? Eigen::VectorXd::Ones(1) : ergodic_distribution(P);

  std::vector<double> intercept(ku);
  for (int j = 0; j < k; ++j) intercept[static_cast<std::size_t>(j)] = params.intercept(j);

  const auto base = base_recursion(params.base, series.rv, series.d, default_base_init(series.rv));

  FilterOutput out;
  out.contributions.assign(n, 0.0);
  if (options.store_paths) {
    out.predicted.resize(static_cast<Eigen::Index>(n), k);
    out.filtered.resize(static_cast<Eigen::Index>(n), k);
    out.xi_collapsed.resize(static_cast<Eigen::Index>(n), k);
    out.mu_onestep.assign(n, 0.0);
  }

  std::vector<double> filt_prev(ku), xi_prev(ku), filt(ku), xi_now(ku), pred(ku);
  std::vector<double> w(ku * ku), logf(ku * ku), xi_pair(ku * ku), joint(ku * ku);

  auto fail = [&](std::size_t t) {
    out.failure_index = t;
    out.loglik = kNegInf;
    return out;
  };

  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double y = series.rv[t];
    const double log_y = std::log(y);
    double mu_expect = 0.0;
    double m = kNegInf;

    if (t == 0) {
      // Pre-sample: ergodic regime weights, steady-state policy component per regime.
      for (std::size_t j = 0; j < ku; ++j) {
        const double xi = params.steady_state_xi(static_cast<int>(j));
        const double mu = base[0] + xi;
        if (!(mu > 0.0)) return fail(t);
        pred[j] = pi(static_cast<Eigen::Index>(j));
        xi_now[j] = xi;
        logf[j] = shapes.log_density(static_cast<int>(j), y, log_y, mu);
        mu_expect += pred[j] * mu;
        if (pred[j] > 0.0) m = std::max(m, logf[j]);
      }
      double c = 0.0;
      for (std::size_t j = 0; j < ku; ++j) {
        filt[j] = pred[j] > 0.0 ? pred[j] * std::exp(logf[j] - m) : 0.0;
        c += filt[j];
      }
      if (!(c > 0.0) || !std::isfinite(m)) return fail(t);
      for (auto& f : filt) f /= c;
      out.contributions[t] = m + std::log(c);
    } else {
      const double dev = series.proxy_deviation(t);
      for (std::size_t j = 0; j < ku; ++j) pred[j] = 0.0;
      for (std::size_t i = 0; i < ku; ++i) {
        for (std::size_t j = 0; j < ku; ++j) {
          const std::size_t ij = i * ku + j;
          const double xi = intercept[j] + pol.delta * dev + pol.psi * xi_prev[i];
          const double mu = base[t] + xi;
          if (!(mu > 0.0)) return fail(t);
          xi_pair[ij] = xi;
          w[ij] = filt_prev[i] * P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          pred[j] += w[ij];
          logf[ij] = shapes.log_density(static_cast<int>(j), y, log_y, mu);
          mu_expect += w[ij] * mu;
          if (w[ij] > 0.0) m = std::max(m, logf[ij]);
        }
      }
      double c = 0.0;
      for (std::size_t ij = 0; ij < ku * ku; ++ij) {
        joint[ij] = w[ij] > 0.0 ? w[ij] * std::exp(logf[ij] - m) : 0.0;
        c += joint[ij];
      }
      if (!(c > 0.0) || !std::isfinite(m)) return fail(t);
      for (std::size_t j = 0; j < ku; ++j) {
        double mass = 0.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < ku; ++i) {
          mass += joint[i * ku + j];
          acc += joint[i * ku + j] * xi_pair[i * ku + j];
        }
        filt[j] = mass / c;
        if (mass > 0.0) {
          xi_now[j] = acc / mass;
        } else {
          // Regime j has zero posterior mass: average with the predictive weights instead.
          ++out.collapse_fallbacks;
          double wm = 0.0;
          double wacc = 0.0;
          for (std::size_t i = 0; i < ku; ++i) {
            wm += w[i * ku + j];
            wacc += w[i * ku + j] * xi_pair[i * ku + j];
          }
          if (wm > 0.0) {
            xi_now[j] = wacc / wm;
          } else {
            double plain = 0.0;
            for (std::size_t i = 0; i < ku; ++i) plain += xi_pair[i * ku + j];
            xi_now[j] = plain / static_cast<double>(ku);
          }
        }
      }
      out.contributions[t] = m + std::log(c);
    }

    total += out.contributions[t];
    if (options.store_paths) {
      const auto row = static_cast<Eigen::Index>(t);
      for (std::size_t j = 0; j < ku; ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        out.predicted(row, col) = pred[j];
        out.filtered(row, col) = filt[j];
        out.xi_collapsed(row, col) = xi_now[j];
      }
      out.mu_onestep[t] = mu_expect;
    }
    std::swap(filt_prev, filt);
    std::swap(xi_prev, xi_now);
  }
  out.loglik = total;

  if (options.store_paths && n > 0) {
    out.smoothed.resize(static_cast<Eigen::Index>(n), k);
    const auto last = static_cast<Eigen::Index>(n - 1);
    out.smoothed.row(last) = out.filtered.row(last);
    for (Eigen::Index t = last - 1; t >= 0; --t) {
      double norm = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        double s = 0.0;
        for (Eigen::Index l = 0; l < k; ++l) {
          const double p = out.predicted(t + 1, l);
          if (p > 0.0) s += P(j, l) * out.smoothed(t + 1, l) / p;
        }
        out.smoothed(t, j) = out.filtered(t, j) * s;
        norm += out.smoothed(t, j);
      }
      if (norm > 0.0) out.smoothed.row(t) /= norm;
    }
  }
  return out;
}

double exact_path_loglik(const MsAcmParams& params, const MarketSeries& series) {
  const int k = params.regimes();
  const auto n = series.size();
  const double paths = std::pow(static_cast<double>(k), static_cast<double>(n));
  if (paths > static_cast<double>(1 << 20)) {
    throw InputError("exact path enumeration limited to K^T <= 2^20 paths");
  }
  const ShapeTerms shapes(params.theta);
  const Eigen::VectorXd pi = k == 1 ? Eigen::VectorXd::Ones(1) : ergodic_distribution(params.trans);
  const auto base = base_recursion(params.base, series.rv, series.d, default_base_init(series.rv));
  const auto& pol = params.policy;

  std::vector<double> log_y(n);
  for (std::size_t t = 0; t < n; ++t) log_y[t] = std::log(series.rv[t]);

  // Streaming log-sum-exp over path log-likelihoods.
  double acc_max = kNegInf;
  double acc_sum = 0.0;
  auto add_leaf = [&](double v) {
    if (v == kNegInf) return;
    if (v > acc_max) {
      acc_sum = acc_sum * std::exp(acc_max - v) + 1.0;
      acc_max = v;
    } else {
      acc_sum += std::exp(v - acc_max);
    }
  };

  bool infeasible = false;
  auto visit = [&](auto&& self, std::size_t t, int prev, double xi_prev, double logw) -> void {
    if (t == n) {
      add_leaf(logw);
      return;
    }
    for (int j = 0; j < k; ++j) {
      double prob;
      double xi;
      if (t == 0) {
        prob = pi(j);
        xi = params.steady_state_xi(j);
      } else {
        prob = params.trans(prev, j);
        xi = params.intercept(j) + pol.delta * series.proxy_deviation(t) + pol.psi * xi_prev;
      }
      const double mu = base[t] + xi;
      if (!(mu > 0.0)) {
        infeasible = true;
        continue;
      }
      if (!(prob > 0.0)) continue;
      const double lf = shapes.log_density(j, series.rv[t], log_y[t], mu);
      self(self, t + 1, j, xi, logw + std::log(prob) + lf);
    }
  };
  visit(visit, 0, 0, 0.0, 0.0);
  if (infeasible || acc_max == kNegInf) return kNegInf;
  return acc_max + std::log(acc_sum);
}

Eigen::VectorXd ergodic_distribution(const Eigen::MatrixXd& trans) {
  const auto k = trans.rows();
  if (k != trans.cols() || k == 0) throw ParameterError("transition matrix must be square");
  if (k == 1) return Eigen::VectorXd::Ones(1);
  const Eigen::MatrixXd A = trans.transpose() - Eigen::MatrixXd::Identity(k, k);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();  // descending
  const double scale = std::max(1.0, sv(0));
  if (sv(k - 2) <= 1e-10 * scale) {
    throw ParameterError("transition matrix has no unique stationary distribution (numerical rank)");
  }
  Eigen::VectorXd pi = svd.matrixV().col(k - 1);
  pi /= pi.sum();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (pi(j) < 0.0) {
      if (pi(j) < -1e-12) throw ParameterError("stationary vector has negative entries");
      pi(j) = 0.0;
    }
  }
  pi /= pi.sum();
  return pi;
}

std::vector<double> expected_durations(const Eigen::MatrixXd& trans) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < trans.rows(); ++i) {
    const double stay = trans(i, i);
    out.push_back(stay >= 1.0 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - stay));
  }
  return out;
}

SimulatedPath simulate(const MsAcmParams& params, std::size_t length, std::uint64_t seed,
                       const SimulationOptions& options) {
  if (length < 2) throw InputError("simulation length must be at least 2");
  params.validate();
  const int k = params.regimes();
  if (options.initial_state && (*options.initial_state < 0 || *options.initial_state >= k)) {
    throw ParameterError("initial state out of range");
  }
  if (!(options.asym_prob >= 0.0 && options.asym_prob <= 1.0)) {
    throw ParameterError("asymmetry probability must lie in [0,1]");
  }
  const auto& exo = options.exo;
  if (exo.kind == ExoSpec::Kind::Ar1 && !(std::abs(exo.coefficient) < 1.0 && exo.scale >= 0.0)) {
    throw ParameterError("AR(1) exogenous process needs |coefficient| < 1 and scale >= 0");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution asym(options.asym_prob);
  std::vector<std::gamma_distribution<double>> shocks;
  for (double th : params.theta) shocks.emplace_back(th, 1.0 / th);

  auto draw_regime = [&](auto&& weight) {
    const double u = unif(rng);
    double cum = 0.0;
    for (int j = 0; j < k - 1; ++j) {
      cum += weight(j);
      if (u < cum) return j;
    }
    return k - 1;
  };

  SimulatedPath path;
  auto& s = path.series;
  // Exogenous proxy: the model sees its deviation from the sample mean.
  if (exo.kind == ExoSpec::Kind::Ar1) {
    s.x.resize(length);
    const double sd0 = exo.scale / std::sqrt(1.0 - exo.coefficient * exo.coefficient);
    s.x[0] = sd0 * normal(rng);
    for (std::size_t t = 1; t < length; ++t) {
      s.x[t] = exo.coefficient * s.x[t - 1] + exo.scale * normal(rng);
    }
    s.x_hat = s.x;
    s.x_bar = std::accumulate(s.x.begin(), s.x.end(), 0.0) / static_cast<double>(length);
  }

  const std::size_t total = options.burn_in + length;
  const auto& b = params.base;
  const auto& pol = params.policy;
  const double persistence = b.alpha + b.beta + b.gamma * options.asym_prob;
  double base = b.omega / std::max(1e-6, 1.0 - persistence);
  double xi = 0.0;
  double rv_prev = base;
  std::uint8_t d_prev = 0;
  int state = 0;
  Eigen::VectorXd pi;
  if (!options.initial_state) pi = ergodic_distribution(params.trans);

  Date date = options.start_date.is_weekend() ? options.start_date.next_weekday()
                                              : options.start_date;
  for (std::size_t t = 0; t < total; ++t) {
    if (t == 0) {
      state = options.initial_state ? *options.initial_state
                                    : draw_regime([&](int j) { return pi(j); });
      xi = params.steady_state_xi(state);
    } else {
      const int from = state;
      state = draw_regime([&](int j) { return params.trans(from, j); });
      base = b.omega + b.alpha * rv_prev + b.beta * base + b.gamma * d_prev * rv_prev;
      const double dev = t >= options.burn_in ? s.proxy_deviation(t - options.burn_in) : 0.0;
      xi = params.intercept(state) + pol.delta * dev + pol.psi * xi;
    }
    const double mu = base + xi;
    if (!(mu > 0.0)) {
      throw ParameterError("simulated conditional mean became non-positive at step " +
                           std::to_string(t));
    }
    const double eps = shocks[static_cast<std::size_t>(state)](rng);
    const double rv = std::max(mu * eps, std::numeric_limits<double>::min());
    const std::uint8_t d = asym(rng) ? 1 : 0;
    if (t >= options.burn_in) {
      s.dates.push_back(date);
      s.rv.push_back(rv);
      s.d.push_back(d);
      path.states.push_back(state);
      path.xi_true.push_back(xi);
      path.mu_true.push_back(mu);
      date = date.next_weekday();
    }
    rv_prev = rv;
    d_prev = d;
  }
  s.lambda.assign(length, 0);
  return path;
}

void write_filter_csv(std::ostream& out, const MarketSeries& series, const FilterOutput& filter) {
  const auto k = filter.filtered.cols();
  out << "date,rv";
  for (const char* name : {"predicted", "filtered", "smoothed"}) {
    for (Eigen::Index j = 0; j < k; ++j) out << ',' << name << '_' << j;
  }
  out << ",mu_onestep\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    const auto r = static_cast<Eigen::Index>(t);
    out << series.dates[t].iso() << ',' << to_shortest(series.rv[t]);
    for (const auto* m : {&filter.predicted, &filter.filtered, &filter.smoothed}) {
      for (Eigen::Index j = 0; j < k; ++j) out << ',' << to_shortest((*m)(r, j));
    }
    out << ',' << to_shortest(filter.mu_onestep[t]) << '\n';
  }
}

FilterTable read_filter_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  do {
    if (!std::getline(in, line)) throw InputError(path.string() + ": missing header");
  } while (!line.empty() && line.front() == '#');

  const auto header = split_csv_line(line);
  Eigen::Index k = 0;
  for (const auto& h : header) {
    if (h.starts_with("predicted_")) ++k;
  }
  const auto expected = static_cast<std::size_t>(3 + 3 * k);
  if (k < 1 || header.size() != expected || header[0] != "date" || header[1] != "rv" ||
      header.back() != "mu_onestep") {
    throw InputError(path.string() + ": not a filter output file");
  }

  FilterTable table;
  std::vector<std::vector<double>> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != expected) {
      throw InputError(path.string() + ": row " + std::to_string(row) + " has wrong field count");
    }
    table.dates.push_back(Date::parse(cells[0]));
    std::vector<double> values;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto v = parse_number(cells[c]);
      if (!v) throw InputError(path.string() + ": row " + std::to_string(row) + " bad number");
      values.push_back(*v);
    }
    rows.push_back(std::move(values));
    ++row;
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  table.predicted.resize(n, k);
  table.filtered.resize(n, k);
  table.smoothed.resize(n, k);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& v = rows[static_cast<std::size_t>(t)];
    table.rv.push_back(v[0]);
    for (Eigen::Index j = 0; j < k; ++j) {
      table.predicted(t, j) = v[static_cast<std::size_t>(1 + j)];
      table.filtered(t, j) = v[static_cast<std::size_t>(1 + k + j)];
      table.smoothed(t, j) = v[static_cast<std::size_t>(1 + 2 * k + j)];
    }
    table.mu_onestep.push_back(v.back());
  }
  return table;
}

}  // namespace msacm
