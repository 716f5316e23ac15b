#include <gtest/gtest.h>

#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "fixtures.hpp"
#include "msacm/errors.hpp"
#include "msacm/estimation.hpp"
#include "msacm/ms_engine.hpp"
#include "oracles.hpp"

using namespace msacm;

namespace {

SimulatedPath cac40_path(std::size_t n, std::uint64_t seed) {
  SimulationOptions so;
  so.exo = {ExoSpec::Kind::Ar1, 0.99, 0.1};
  return simulate(oracle::cac40(), n, seed, so);
}

FitSettings quick(int starts, int threads = 1) {
  FitSettings fs;
  fs.starts = starts;
  fs.threads = threads;
  fs.compute_se = false;
  fs.max_evaluations = 2500;
  return fs;
}

}  // namespace

TEST(InformationCriteria, WorkedExamples) {
  const auto zero = information_criteria(0.0, 0, 100.0);
  EXPECT_EQ(zero.aic, 0.0);
  EXPECT_EQ(zero.bic, 0.0);
  const auto ic = information_criteria(-100.0, 10, 1000.0);
  EXPECT_EQ(ic.aic, 220.0);
  EXPECT_NEAR(ic.bic, 200.0 + 10.0 * std::log(1000.0), 1e-12);
  EXPECT_THROW(information_criteria(-1.0, 1, 0.0), InputError);
}

TEST(Likelihood, ContributionsSumToTotal) {
  const auto path = cac40_path(400, 1);
  const auto spec = default_spec(ModelVariant::MsAcm);
  const auto c = loglik_contributions(spec, oracle::cac40(), path.series);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(std::accumulate(c->begin(), c->end(), 0.0), log_likelihood(spec, oracle::cac40(), path.series), 1e-8);

  auto s = path.series;
  s.x_hat[100] = s.x_bar + 1e5;
  EXPECT_FALSE(loglik_contributions(spec, oracle::cac40(), s).has_value());
}

TEST(Likelihood, MsWithoutRegimeDifferenceNestsAcm) {
  const auto s = fixture::random_series(500, 3);
  auto p = oracle::cac40();
  p.policy.phi = {0.0};
  p.theta = {5.0, 5.0};
  auto acm = single_regime(p.base, p.policy, 5.0);
  auto ms_spec = default_spec(ModelVariant::MsAcm);
  ms_spec.shared_shape = true;
  EXPECT_NEAR(log_likelihood(ms_spec, p, s), log_likelihood(default_spec(ModelVariant::Acm), acm, s), 1e-6);
}

TEST(StartBox, DrawsAreAdmissibleAndReproducible) {
  const auto path = cac40_path(300, 2);
  for (int k : {2, 3}) {
    const ParameterLayout layout(default_spec(ModelVariant::MsAcm, k));
    const auto box = default_start_box(layout, path.series);
    for (const auto& n : layout.names()) EXPECT_TRUE(box.contains(n)) << n;
    for (int i = 0; i < 200; ++i) {
      const auto p = draw_start(layout, box, 9, i);
      EXPECT_NO_THROW(p.validate());
      EXPECT_LT(p.base.alpha + p.base.beta + 0.5 * p.base.gamma, 0.98);
      const auto nat = layout.pack(p);
      for (std::size_t j = 0; j < layout.size(); ++j) {
        const auto& name = layout.names()[j];
        if (name.size() == 3 && name[0] == 'p' && std::isdigit(static_cast<unsigned char>(name[1]))) continue;  // transition rows are renormalized
        const auto [lo, hi] = box.at(name);
        EXPECT_GE(nat(static_cast<Eigen::Index>(j)), lo - 1e-12) << name;
        EXPECT_LE(nat(static_cast<Eigen::Index>(j)), hi + 1e-12) << name;
      }
    }
    EXPECT_EQ(layout.pack(draw_start(layout, box, 9, 4)), layout.pack(draw_start(layout, box, 9, 4)));
    EXPECT_NE(layout.pack(draw_start(layout, box, 9, 4)), layout.pack(draw_start(layout, box, 10, 4)));
  }
}

TEST(Fit, AmemRecoversSimulatedParameters) {
  const BaseParams base{0.8, 0.15, 0.7, 0.1};
  const auto path = simulate(single_regime(base, {}, 6.0), 3000, 4);
  const auto fit = fit_qml(default_spec(ModelVariant::Amem), path.series, quick(3));
  EXPECT_NEAR(fit.params.base.alpha, 0.15, 0.05);
  EXPECT_NEAR(fit.params.base.beta, 0.7, 0.08);
  EXPECT_NEAR(fit.params.theta[0], 6.0, 0.6);
  EXPECT_EQ(fit.k_params, 5);
}

TEST(Fit, AmemxNeedsProxy) {
  auto s = fixture::random_series(200, 5, false);
  EXPECT_THROW(fit_qml(default_spec(ModelVariant::Amemx), s, quick(1)), InputError);
  // Other variants drop delta instead.
  const auto fit = fit_qml(default_spec(ModelVariant::Acm), s, quick(1));
  EXPECT_FALSE(fit.spec.use_proxy);
  EXPECT_EQ(fit.params.policy.delta, 0.0);
}

TEST(Fit, DeterministicAcrossThreadCounts) {
  const auto path = cac40_path(600, 6);
  const auto spec = default_spec(ModelVariant::MsAcm);
  const auto a = fit_qml(spec, path.series, quick(3, 1));
  const auto b = fit_qml(spec, path.series, quick(3, 3));
  EXPECT_EQ(a.loglik, b.loglik);
  EXPECT_EQ(a.estimates, b.estimates);
  EXPECT_EQ(a.best_start, b.best_start);
}

TEST(Fit, PolishNeverLosesGroundAndBestStartWins) {
  const auto path = cac40_path(600, 7);
  const auto fit = fit_qml(default_spec(ModelVariant::MsAcm), path.series, quick(4, 0));
  ASSERT_EQ(fit.starts.size(), 4u);
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& s : fit.starts) {
    if (!s.finite) continue;
    EXPECT_GE(s.final_loglik, s.simplex_loglik - 1e-9);
    EXPECT_GE(s.simplex_loglik, s.initial_loglik - 1e-9);
    top = std::max(top, s.final_loglik);
  }
  EXPECT_EQ(fit.starts[static_cast<std::size_t>(fit.best_start)].final_loglik, top);
  for (int i = 0; i < fit.best_start; ++i) EXPECT_LT(fit.starts[static_cast<std::size_t>(i)].final_loglik, top);
  EXPECT_NEAR(fit.loglik, top, 1e-9);
}

TEST(Fit, AllStartsFailingIsAnEstimationError) {
  auto s = fixture::random_series(60, 8, false);
  for (auto& v : s.rv) v = 1e308;  // the base component overflows for any parameters
  EXPECT_THROW(fit_qml(default_spec(ModelVariant::Amem), s, quick(2)), EstimationError);
}

TEST(StandardErrors, SymmetricHessianAndPositiveErrors) {
  const auto path = cac40_path(1500, 9);
  FitSettings fs = quick(2, 0);
  fs.compute_se = true;
  const auto fit = fit_qml(default_spec(ModelVariant::MsAcm), path.series, fs);
  ASSERT_EQ(fit.se.size(), fit.names.size());
  EXPECT_LT(fit.hessian_asymmetry, 1e-4);
  for (std::size_t i = 0; i < fit.se.size(); ++i) {
    EXPECT_TRUE(std::isfinite(fit.se[i])) << fit.names[i];
    EXPECT_GT(fit.se[i], 0.0) << fit.names[i];
  }
}

TEST(StandardErrors, ShrinkWithSampleSize) {
  const ParameterLayout layout(default_spec(ModelVariant::Amem));
  const BaseParams base{0.8, 0.15, 0.7, 0.1};
  const auto truth = single_regime(base, {}, 6.0);
  const auto small = sandwich_se(layout, truth, simulate(truth, 1000, 10).series);
  const auto large = sandwich_se(layout, truth, simulate(truth, 8000, 10).series);
  // Roughly 1/sqrt(8) for the shape parameter, which is estimated precisely.
  EXPECT_LT(large.se.back(), 0.6 * small.se.back());
  EXPECT_GT(large.se.back(), 0.2 * small.se.back());
}
