#pragma once

#include <Eigen/Core>
#include <functional>

namespace msacm::optim {

/// Objective to minimize. May return +inf for infeasible points.
using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

struct NelderMeadSettings {
  int max_evaluations = 4000;
  double initial_step = 0.5;
  /// Stop when the spread of simplex values falls below f_tol * (|f_best| + 1e-8)
  /// and the simplex diameter below x_tol.
  double f_tol = 1e-10;
  double x_tol = 1e-7;
};

/// Nelder-Mead with dimension-adaptive coefficients (Gao & Han), which behaves
/// much better than the textbook constants above ~5 parameters.
Result nelder_mead(const Objective& f, const Eigen::VectorXd& start,
                   const NelderMeadSettings& settings = {});

struct QuasiNewtonSettings {
  int max_iterations = 200;
  double gradient_tol = 1e-5;
  double f_tol = 1e-12;
};

/// BFGS on central finite-difference gradients with a backtracking line search.
/// Never returns a point worse than `start`.
Result bfgs(const Objective& f, const Eigen::VectorXd& start, const QuasiNewtonSettings& settings = {});

/// Central-difference gradient with step sqrt(eps) * max(1, |x_i|).
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, int* evaluations = nullptr);

}  // namespace msacm::optim
