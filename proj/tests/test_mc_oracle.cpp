#include <gtest/gtest.h>

#include <cmath>

#include "vsplan/mc_oracle.hpp"

using namespace vsplan;

namespace {
const SpecLimits kLimits{1.0, 9.0};
}

TEST(Stream, DeterministicAndSeedSensitive) {
  const mc::NormalStream a(7, 3), b(7, 3), c(8, 3), d(7, 4);
  for (std::uint64_t i = 0; i < 50; ++i) {
    EXPECT_EQ(a.uniform(i), b.uniform(i));
    EXPECT_NE(a.uniform(i), c.uniform(i));
    EXPECT_NE(a.uniform(i), d.uniform(i));
  }
}

TEST(Stream, UniformAndNormalMoments) {
  const mc::NormalStream s(20240601, 0);
  constexpr int kN = 200000;
  double su = 0.0, sz = 0.0, sz2 = 0.0, sz4 = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double u = s.uniform(i);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = s.normal(i);
    sz += z;
    sz2 += z * z;
    sz4 += z * z * z * z;
  }
  EXPECT_NEAR(su / kN, 0.5, 4.0 * std::sqrt(1.0 / 12 / kN));
  EXPECT_NEAR(sz / kN, 0.0, 4.0 / std::sqrt(kN));
  EXPECT_NEAR(sz2 / kN, 1.0, 4.0 * std::sqrt(2.0 / kN));
  EXPECT_NEAR(sz4 / kN, 3.0, 4.0 * std::sqrt(96.0 / kN));
}

TEST(DrawSample, StatisticsOfTheDraws) {
  const mc::NormalStream s(1, 2);
  const SampleStats st = mc::draw_sample(s, 5, 4, 10.0, 2.0);
  double x[4], m = 0.0;
  for (int i = 0; i < 4; ++i) m += (x[i] = 10.0 + 2.0 * s.normal(5 + i));
  m /= 4;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  EXPECT_EQ(st.n, 4);
  EXPECT_NEAR(st.mean, m, 1e-13);
  EXPECT_NEAR(st.sd, std::sqrt(ss / 3), 1e-13);
}

TEST(Simulation, SameSeedSameResult) {
  const SinglePlan plan{20, 0.03, Procedure::MVU};
  mc::SimConfig cfg;
  cfg.replications = 5000;
  cfg.mu = 6.0;
  cfg.sigma = 1.3;
  const auto a = mc::simulate_single(plan, cfg, kLimits);
  const auto b = mc::simulate_single(plan, cfg, kLimits);
  EXPECT_EQ(a.accept_rate, b.accept_rate);
  cfg.seed += 1;
  const auto c = mc::simulate_single(plan, cfg, kLimits);
  EXPECT_NE(a.accept_rate, c.accept_rate);
}

TEST(Simulation, SampleNumbers) {
  mc::SimConfig cfg;
  cfg.replications = 4000;
  cfg.mu = 6.2;
  cfg.sigma = 1.2;
  const auto single = mc::simulate_single({30, 0.03, Procedure::ML}, cfg, kLimits);
  EXPECT_EQ(single.mean_sample_number, 30.0);
  EXPECT_EQ(single.std_error_asn, 0.0);
  EXPECT_EQ(single.replications, 4000);

  const DoublePlan d{20, 0.01, 0.05, 15, 0.03, Procedure::ML};
  const auto dbl = mc::simulate_double(d, cfg, kLimits);
  EXPECT_GT(dbl.mean_sample_number, 20.0);
  EXPECT_LT(dbl.mean_sample_number, 35.0);
  // Every replication used either n1 or n1 + n2 items, so the mean fixes
  // the fraction that continued.
  const double cont = (dbl.mean_sample_number - 20.0) / 15.0;
  EXPECT_NEAR(cont * 4000, std::round(cont * 4000), 1e-6);

  const DoublePlan flat{20, 0.03, 0.03, 15, 0.03, Procedure::ML};
  const auto f = mc::simulate_double(flat, cfg, kLimits);
  EXPECT_EQ(f.mean_sample_number, 20.0);
  // The first stage of a collapsed double plan is the single plan on the
  // same draws.
  EXPECT_EQ(f.accept_rate, mc::simulate_single({20, 0.03, Procedure::ML}, cfg, kLimits).accept_rate);
}

TEST(Simulation, ConfigValidation) {
  mc::SimConfig cfg;
  cfg.replications = 0;
  EXPECT_THROW(mc::simulate_single({20, 0.03, Procedure::ML}, cfg, kLimits), DomainError);
  cfg.replications = 10;
  cfg.sigma = 0.0;
  EXPECT_THROW(mc::simulate_single({20, 0.03, Procedure::ML}, cfg, kLimits), DomainError);
  cfg.sigma = 1.0;
  EXPECT_THROW(mc::simulate_estimator_mean(Procedure::MVU, 3, cfg, kLimits), DomainError);
}

TEST(Simulation, StandardErrorsFollowBinomialFormula) {
  mc::SimConfig cfg;
  cfg.replications = 20000;
  cfg.mu = 6.5;
  cfg.sigma = 1.2;
  const auto r = mc::simulate_single({25, 0.04, Procedure::ML}, cfg, kLimits);
  EXPECT_NEAR(r.std_error_accept, std::sqrt(r.accept_rate * (1.0 - r.accept_rate) / 20000), 1e-15);
}
