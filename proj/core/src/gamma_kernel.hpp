#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "msacm/special_functions.hpp"

namespace msacm::detail {

// Gamma log density with mean mu and shape theta, grouped as
// [theta*log(theta) - lgamma(theta)] - theta*log(mu) + (theta-1)*log(y) - theta*y/mu
// so the bracket can be hoisted out of the time loop. Every filter goes through
// this one expression, which keeps nested models bit-identical.
inline double gamma_log_density_terms(double shape_const, double theta, double y, double log_y,
                                      double mu) {
  return shape_const - theta * std::log(mu) + (theta - 1.0) * log_y - theta * y / mu;
}

inline double gamma_shape_const(double theta) {
  return theta * std::log(theta) - special::log_gamma(theta);
}

struct ShapeTerms {
  std::vector<double> theta;
  std::vector<double> constant;

  explicit ShapeTerms(const std::vector<double>& shapes) : theta(shapes) {
    constant.reserve(shapes.size());
    for (double th : shapes) constant.push_back(gamma_shape_const(th));
  }

  double log_density(int j, double y, double log_y, double mu) const {
    const auto u = static_cast<std::size_t>(j);
    return gamma_log_density_terms(constant[u], theta[u], y, log_y, mu);
  }
};

}  // namespace msacm::detail
