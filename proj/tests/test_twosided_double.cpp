#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "vsplan/mc_oracle.hpp"
#include "vsplan/twosided_double.hpp"

using namespace vsplan;

namespace {

const SpecLimits kLimits{1.0, 9.0};

// Final plans of the worked examples, rounded as published.
const DoublePlan kMl1{26, 0.017577, 0.035291, 20, 0.029275, Procedure::ML};
const DoublePlan kMvu1{24, 0.012148, 0.029093, 19, 0.023424, Procedure::MVU};
const DoublePlan kMl2{81, 0.014029, 0.021742, 66, 0.018537, Procedure::ML};
const DoublePlan kMvu2{78, 0.012406, 0.020069, 64, 0.016981, Procedure::MVU};

struct Config {
  DoublePlan plan;
  double p, s;
};

std::vector<Config> configs() {
  return {{kMl1, 0.01, 1.0},   {kMl1, 0.02, 0.6},   {kMl1, 0.06, 0.95}, {kMl1, 0.035, 0.3},  {kMvu1, 0.01, 0.8},
          {kMvu1, 0.025, 1.0}, {kMvu1, 0.06, 0.5},  {kMl2, 0.018, 0.9}, {kMl2, 0.03, 0.99},  {kMvu2, 0.016, 0.7},
          {kMvu2, 0.01, 0.2},  {kMvu2, 0.03, 0.95}};
}

}  // namespace

TEST(Mapping, RoundTripsAndMonotone) {
  for (Procedure proc : {Procedure::ML, Procedure::MVU}) {
    for (int n : {4, 19, 36, 115}) {
      double prev = 0.0;
      for (double l : {-20.0, -12.0, -8.0, -5.0, -2.0}) {
        if (proc == Procedure::MVU && std::abs(l) >= n - 1) continue;
        const double k = map_constant(l, n, proc);
        EXPECT_GT(k, prev);
        prev = k;
        EXPECT_NEAR(unmap_constant(k, n, proc), l, 1e-9 * std::abs(l)) << to_string(proc) << ' ' << n << ' ' << l;
      }
    }
  }
  EXPECT_THROW(map_constant(-10.0, 4, Procedure::MVU), DomainError);
  EXPECT_THROW(unmap_constant(0.0, 10, Procedure::ML), DomainError);
}

TEST(Mapping, PlanFieldsMapIndividually) {
  const OneSidedDoublePlan phi{25, -11.0, -9.0, 19, -10.0};
  for (Procedure proc : {Procedure::ML, Procedure::MVU}) {
    const DoublePlan d = map_plan(phi, proc);
    EXPECT_EQ(d.n1, 25);
    EXPECT_EQ(d.n2, 19);
    EXPECT_DOUBLE_EQ(d.k1, map_constant(-11.0, 25, proc));
    EXPECT_DOUBLE_EQ(d.k2, map_constant(-9.0, 25, proc));
    EXPECT_DOUBLE_EQ(d.k3, map_constant(-10.0, 19, proc));
    EXPECT_EQ(d.procedure, proc);
  }
}

TEST(DoublePlan, Validation) {
  EXPECT_NO_THROW(kMl1.validate());
  EXPECT_THROW((DoublePlan{26, 0.04, 0.03, 20, 0.03, Procedure::ML}.validate()), DomainError);
  EXPECT_THROW((DoublePlan{3, 0.01, 0.03, 20, 0.03, Procedure::MVU}.validate()), DomainError);
  EXPECT_THROW((DoublePlan{26, 0.01, 0.03, 20, 1.5, Procedure::ML}.validate()), DomainError);
}

TEST(DoubleOc, CollapsesWhenAcceptAndRejectValuesMeet) {
  for (Procedure proc : {Procedure::ML, Procedure::MVU}) {
    const DoublePlan d{30, 0.02, 0.02, 25, 0.03, proc};
    for (double p : {0.01, 0.05}) {
      const BandPoint bp = band_point(p, 0.7, kLimits);
      EXPECT_NEAR(oc_double(d, bp.mu, bp.sigma, kLimits), oc_single(d.first(0.02), bp.mu, bp.sigma, kLimits), 1e-15);
      EXPECT_EQ(asn_double(d, bp.mu, bp.sigma, kLimits), 30.0);
    }
    EXPECT_EQ(n_max_double(d, kLimits).value, 30.0);
  }
}

TEST(DoubleOc, BoundedBySingleStageRules) {
  // Accepting on k1 alone is the least generous rule, on k2 alone with a
  // certain second-stage acceptance the most.
  for (const DoublePlan& d : {kMl1, kMvu1}) {
    for (double p : {0.01, 0.03, 0.06}) {
      const BandPoint bp = band_point(p, 0.8, kLimits);
      const double oc = oc_double(d, bp.mu, bp.sigma, kLimits);
      EXPECT_GE(oc, oc_single(d.first(d.k1), bp.mu, bp.sigma, kLimits) - 1e-15);
      EXPECT_LE(oc, oc_single(d.first(d.k2), bp.mu, bp.sigma, kLimits) + 1e-15);
      const double asn = asn_double(d, bp.mu, bp.sigma, kLimits);
      EXPECT_GE(asn, d.n1);
      EXPECT_LE(asn, d.n1 + d.n2);
    }
  }
}

TEST(DoubleOc, MatchesSimulation) {
  int seed = 500;
  for (const auto& c : configs()) {
    const BandPoint bp = band_point(c.p, c.s, kLimits);
    const double oc = oc_double(c.plan, bp.mu, bp.sigma, kLimits);
    mc::SimConfig sc;
    sc.mu = bp.mu;
    sc.sigma = bp.sigma;
    sc.seed = seed++;
    const auto sim = mc::simulate_double(c.plan, sc, kLimits);
    const double se = std::sqrt(std::max(oc * (1.0 - oc), 1e-12) / sc.replications);
    EXPECT_LE(std::abs(sim.accept_rate - oc), 4.0 * se)
        << to_string(c.plan.procedure) << " n1=" << c.plan.n1 << " p=" << c.p << " s=" << c.s;
  }
  EXPECT_GE(configs().size(), 10u);
}

TEST(DoubleAsn, MatchesSimulation) {
  int seed = 900;
  for (const auto& c : configs()) {
    const BandPoint bp = band_point(c.p, c.s, kLimits);
    const double asn = asn_double(c.plan, bp.mu, bp.sigma, kLimits);
    mc::SimConfig sc;
    sc.mu = bp.mu;
    sc.sigma = bp.sigma;
    sc.seed = seed++;
    const auto sim = mc::simulate_double(c.plan, sc, kLimits);
    // N = n1 + n2 * Bernoulli(continue).
    const double q = (asn - c.plan.n1) / c.plan.n2;
    const double se = c.plan.n2 * std::sqrt(std::max(q * (1.0 - q), 1e-12) / sc.replications);
    EXPECT_LE(std::abs(sim.mean_sample_number - asn), 4.0 * se)
        << to_string(c.plan.procedure) << " n1=" << c.plan.n1 << " p=" << c.p << " s=" << c.s;
  }
}

TEST(Band, ExtremesBracketEveryBandValue) {
  const BandEval e = band_eval(kMl1, 0.03, kLimits);
  for (double s : {0.01, 0.3, 0.6, 0.9, 1.0}) {
    const BandPoint bp = band_point(0.03, s, kLimits);
    const double oc = oc_double(kMl1, bp.mu, bp.sigma, kLimits);
    EXPECT_GE(oc, e.min_oc.value - 1e-12);
    EXPECT_LE(oc, e.max_oc.value + 1e-12);
    EXPECT_LE(asn_double(kMl1, bp.mu, bp.sigma, kLimits), e.max_asn.value + 1e-12);
  }
}

TEST(Band, NMaxDominatesTheBandAtCoarsePoints) {
  NMaxOptions opt;
  opt.p_grid = 41;
  const NMaxResult r = n_max_double(kMl1, kLimits, opt);
  EXPECT_NEAR(asn_double(kMl1, r.mu, r.sigma, kLimits), r.value, 1e-12);
  EXPECT_NEAR(fraction_defective(r.mu, r.sigma, kLimits), r.p, 1e-12);
  for (double p : {0.005, 0.01, 0.02, 0.04, 0.08})
    EXPECT_LE(asn_double_band_max(kMl1, p, kLimits, 41).value, r.value + 1e-9);
  EXPECT_LT(r.value, kMl1.n1 + kMl1.n2);
}

TEST(Calibration, LevelStepping) {
  EXPECT_DOUBLE_EQ(detail::stepped_level(0.1, 3), 0.097);
  EXPECT_DOUBLE_EQ(detail::stepped_level(0.082, 10), 0.072);
  int da = 0, db = 0;
  detail::advance({0.0, 0.0, false, false}, StepRule::Both, da, db);
  EXPECT_EQ(da, 1);
  EXPECT_EQ(db, 1);
  detail::advance({0.0, 0.0, false, false}, StepRule::AqlFirst, da, db);
  EXPECT_EQ(da, 2);
  EXPECT_EQ(db, 1);
  detail::advance({0.0, 0.0, true, false}, StepRule::AqlFirst, da, db);
  EXPECT_EQ(da, 2);
  EXPECT_EQ(db, 2);
  detail::advance({0.0, 0.0, true, true}, StepRule::Both, da, db);
  EXPECT_EQ(da, 2);
  EXPECT_EQ(db, 2);
}

TEST(Calibration, BandCheckUsesTolerance) {
  TwoSidedContext ctx;
  ctx.risk = {0.01, 0.06, 0.1, 0.1};
  const auto c = check_band([](double, double) { return 0.1 + 0.5 * kBandTolerance; }, ctx, 5);
  EXPECT_TRUE(c.rql_ok);
  EXPECT_FALSE(c.aql_ok);
  const auto d = check_band([](double, double) { return 0.9 - 2.0 * kBandTolerance; }, ctx, 5);
  EXPECT_FALSE(d.aql_ok);
}

TEST(Calibration, TableKeepsFirstSizeChangesAndFinal) {
  CalibrationTrace t;
  for (int n1 : {25, 25, 25, 26, 26, 26, 27, 27}) {
    TraceRow r;
    r.plan.n1 = n1;
    r.alpha_ss = 0.1 - 0.001 * t.rows.size();
    t.rows.push_back(r);
  }
  const auto rows = t.table();
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].plan.n1, 25);
  EXPECT_EQ(rows[1].plan.n1, 26);
  EXPECT_EQ(rows[2].plan.n1, 27);
  EXPECT_DOUBLE_EQ(rows[3].alpha_ss, t.rows.back().alpha_ss);
}

TEST(Calibration, SinglePlanOfFirstWorkedExample) {
  TwoSidedContext ctx;
  ctx.risk = {0.01, 0.06, 0.1, 0.1};
  const auto c = calibrate_single(ctx, Procedure::ML);
  EXPECT_EQ(c.plan.n, 36);
  EXPECT_NEAR(c.plan.k, 0.02645943143, 1e-8);
  EXPECT_NEAR(c.alpha_star, 0.082, 1e-12);
  EXPECT_NEAR(c.beta_star, 0.1, 1e-12);
  EXPECT_TRUE(c.band.ok());
  EXPECT_EQ(c.steps, 18);
}
