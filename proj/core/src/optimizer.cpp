#include "msacm/optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace msacm::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sanitize(double v) { return std::isnan(v) ? kInf : v; }

}  // namespace

Result nelder_mead(const Objective& f, const Eigen::VectorXd& start, const NelderMeadSettings& s) {
  const auto n = start.size();
  const double dim = static_cast<double>(n);
  const double c_reflect = 1.0;
  const double c_expand = 1.0 + 2.0 / dim;
  const double c_contract = 0.75 - 1.0 / (2.0 * dim);
  const double c_shrink = 1.0 - 1.0 / dim;

  Result r;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++r.evaluations;
    return sanitize(f(x));
  };

  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), start);
  std::vector<double> vals(static_cast<std::size_t>(n + 1));
  for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i + 1)](i) += s.initial_step;
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(pts.size());
  while (r.evaluations < s.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const auto best = order.front();
    const auto worst = order.back();
    const auto second = order[order.size() - 2];

    double diameter = 0.0;
    for (const auto& p : pts) diameter = std::max(diameter, (p - pts[best]).lpNorm<Eigen::Infinity>());
    const double spread = vals[worst] - vals[best];
    if (std::isfinite(vals[worst]) && spread <= s.f_tol * (std::abs(vals[best]) + 1e-8) &&
        diameter <= s.x_tol) {
      r.converged = true;
      break;
    }
    ++r.iterations;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= dim;

    const Eigen::VectorXd xr = centroid + c_reflect * (centroid - pts[worst]);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      const Eigen::VectorXd xe = centroid + c_expand * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + c_contract * (xr - centroid))
                                       : Eigen::VectorXd(centroid + c_contract * (pts[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + c_shrink * (pts[i] - pts[best]);
      vals[i] = eval(pts[i]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  r.x = pts[best];
  r.value = vals[best];
  return r;
}

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, int* evaluations) {
  static const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = root_eps * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + h;
    const double up = sanitize(f(probe));
    probe(i) = x(i) - h;
    const double dn = sanitize(f(probe));
    probe(i) = x(i);
    g(i) = (up - dn) / (2.0 * h);
  }
  if (evaluations) *evaluations += static_cast<int>(2 * x.size());
  return g;
}

Result bfgs(const Objective& f, const Eigen::VectorXd& start, const QuasiNewtonSettings& s) {
  const auto n = start.size();
  Result r;
  r.x = start;
  r.value = sanitize(f(start));
  ++r.evaluations;
  if (!std::isfinite(r.value)) return r;

  Eigen::VectorXd g = numeric_gradient(f, r.x, &r.evaluations);
  if (!g.allFinite()) return r;
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);

  for (int it = 0; it < s.max_iterations; ++it) {
    r.iterations = it + 1;
    if (g.lpNorm<Eigen::Infinity>() < s.gradient_tol) {
      r.converged = true;
      break;
    }
    Eigen::VectorXd dir = -Hinv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      Hinv.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }

    // Backtracking line search (Armijo).
    double step = 1.0;
    Eigen::VectorXd x_new;
    double f_new = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = r.x + step * dir;
      f_new = sanitize(f(x_new));
      ++r.evaluations;
      if (f_new <= r.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (Hinv.isIdentity()) break;
      Hinv.setIdentity();
      continue;
    }

    const Eigen::VectorXd g_new = numeric_gradient(f, x_new, &r.evaluations);
    if (!g_new.allFinite()) break;
    const Eigen::VectorXd sk = x_new - r.x;
    const Eigen::VectorXd yk = g_new - g;
    const double improvement = r.value - f_new;
    r.x = x_new;
    r.value = f_new;
    g = g_new;

    const double sy = sk.dot(yk);
    if (sy > 1e-12 * sk.norm() * yk.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      Hinv = (I - rho * sk * yk.transpose()) * Hinv * (I - rho * yk * sk.transpose()) +
             rho * sk * sk.transpose();
    }
    if (improvement <= s.f_tol * (std::abs(r.value) + 1.0)) {
      r.converged = true;
      break;
    }
  }
  return r;
}

}  // namespace msacm::optim
