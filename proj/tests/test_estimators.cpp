#include <gtest/gtest.h>

#include <cmath>

#include "vsplan/estimators.hpp"
#include "vsplan/mc_oracle.hpp"

using namespace vsplan;

namespace {
const SpecLimits kLimits{1.0, 9.0};
}

TEST(FractionDefective, KnownValuesAndSymmetry) {
  // Centered: two equal tails of Phi(-4/sigma).
  EXPECT_NEAR(fraction_defective(5.0, 2.0, kLimits), 2.0 * numerics::std_normal_cdf(-2.0), 1e-16);
  for (double d : {0.0, 0.3, 1.7, 3.9}) {
    EXPECT_NEAR(fraction_defective(5.0 + d, 1.3, kLimits), fraction_defective(5.0 - d, 1.3, kLimits), 4e-16);
  }
  // Moving off center raises p for a fixed sigma.
  EXPECT_GT(fraction_defective(6.0, 1.5, kLimits), fraction_defective(5.5, 1.5, kLimits));
  EXPECT_THROW(fraction_defective(5.0, 0.0, kLimits), DomainError);
}

TEST(Estimators, InputValidation) {
  EXPECT_THROW(ml_estimate({3, 5.0, 1.0}, kLimits), DomainError);
  EXPECT_THROW(mvu_estimate({10, 5.0, 0.0}, kLimits), DomainError);
  EXPECT_THROW(mvu_estimate({10, 5.0, 1.0}, {2.0, 1.0}), DomainError);
  EXPECT_NO_THROW(mvu_estimate({4, 5.0, 1.0}, kLimits));
}

TEST(Estimators, MlIsPlugIn) {
  const SampleStats s{20, 6.2, 1.4};
  EXPECT_DOUBLE_EQ(ml_estimate(s, kLimits), fraction_defective(6.2, 1.4, kLimits));
}

TEST(Estimators, MvuRangeAndLimits) {
  // Far inside the limits with tiny S the estimate is exactly zero.
  EXPECT_EQ(mvu_estimate({30, 5.0, 0.1}, kLimits), 0.0);
  // Mean outside the limits: one beta term saturates at 1.
  EXPECT_NEAR(mvu_estimate({30, 10.0, 0.2}, kLimits), 1.0, 1e-12);
  for (double m : {1.5, 3.0, 5.0, 8.2}) {
    for (double sd : {0.5, 1.5, 3.0}) {
      const double e = mvu_estimate({12, m, sd}, kLimits);
      EXPECT_GE(e, 0.0);
      EXPECT_LE(e, 1.0 + 1e-15);
      EXPECT_NEAR(e, mvu_estimate({12, 10.0 - m, sd}, kLimits), 1e-15);
    }
  }
}

TEST(Estimators, MvuApproachesMlForLargeSamples) {
  const SampleStats s{20000, 6.0, 1.5};
  EXPECT_NEAR(mvu_estimate(s, kLimits), ml_estimate(s, kLimits), 2e-5);
}

// E[p^] = p, checked by simulation at several process states.
TEST(Estimators, MvuIsUnbiased) {
  struct State {
    int n;
    double mu, sigma;
  };
  for (const State st : {State{5, 5.0, 2.0}, State{10, 6.0, 1.5}, State{34, 7.0, 1.0}, State{20, 2.5, 1.2},
                         State{8, 5.0, 3.0}}) {
    mc::SimConfig cfg;
    cfg.mu = st.mu;
    cfg.sigma = st.sigma;
    const auto m = mc::simulate_estimator_mean(Procedure::MVU, st.n, cfg, kLimits);
    const double p = fraction_defective(st.mu, st.sigma, kLimits);
    EXPECT_LE(std::abs(m.mean - p), 4.0 * m.std_error) << st.n << ' ' << st.mu << ' ' << st.sigma;
  }
}

// The plug-in estimator is visibly biased for small n, which is what the
// unbiased test above could not detect if the MVU path were the plug-in.
TEST(Estimators, MlIsBiasedForSmallSamples) {
  mc::SimConfig cfg;
  cfg.mu = 5.0;
  cfg.sigma = 2.0;
  const auto m = mc::simulate_estimator_mean(Procedure::ML, 5, cfg, kLimits);
  const double p = fraction_defective(5.0, 2.0, kLimits);
  EXPECT_GT(std::abs(m.mean - p), 6.0 * m.std_error);
}
