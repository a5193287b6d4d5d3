#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "delaynet.hpp"
#include "oracles.hpp"

using namespace delaynet;

namespace {

XuWuModel alternating(double b) {
  auto m = oracles::scalar_xu_wu(1.0, 1.0, b, 0.0);
  m.input = {Sequence::periodic({1.0, 2.0})};
  return m;
}

Certificate strict_certificate(const XuWuModel& m) { return certify_best(m); }

// N = 2, tau = 2, every coefficient with period dividing 6.
XuWuModel periodic_pair(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return oracles::random_xu_wu(rng, 2, 2, 0.15);
}

}  // namespace

TEST(Periodicity, Examples) {
  EXPECT_TRUE(check_periodicity(oracles::scalar_xu_wu(1.0, 1.0, 0.3, 0.5), 1).periodic);
  EXPECT_TRUE(check_periodicity(alternating(0.0), 2).periodic);
  EXPECT_TRUE(check_periodicity(alternating(0.0), 4).periodic);
  const auto rep = check_periodicity(alternating(0.0), 3);
  ASSERT_FALSE(rep.periodic);
  EXPECT_EQ(rep.mismatch->field, "I[1]");
  EXPECT_EQ(rep.mismatch->m, 0);
  EXPECT_EQ(rep.mismatch->value, 1.0);
  EXPECT_EQ(rep.mismatch->shifted_value, 2.0);
  EXPECT_THROW(check_periodicity(alternating(0.0), 0), InputError);
}

TEST(Periodicity, DelayTableCounts) {
  auto m = oracles::scalar_xu_wu(1.0, 1.0, 0.3, 0.5, 2);
  m.delay = Sequence::periodic({0, 1, 2});
  EXPECT_FALSE(check_periodicity(m, 2).periodic);
  EXPECT_EQ(check_periodicity(m, 2).mismatch->field, "tau");
  EXPECT_TRUE(check_periodicity(m, 3).periodic);
}

TEST(Poincare, Equilibrium) {
  // I = 0.7 makes x* = 1 a fixed point of x -> e^-1 x + (1 - e^-1)(0.3 x + I).
  const auto m = oracles::scalar_xu_wu(1.0, 1.0, 0.3, 0.7);
  const auto p = poincare(m, 0, 1, HistorySegment::filled(1, 0, 1.0));
  EXPECT_NEAR(p(0, 0), 1.0, 1e-15);
}

TEST(Poincare, ZeroInputKeepsZero) {
  auto m = periodic_pair(3);
  for (auto& in : m.input) in = Sequence::constant(0.0);
  EXPECT_EQ(sup_norm(poincare(m, 0, 6, HistorySegment(2, 2))), 0.0);
}

TEST(Poincare, Semigroup) {
  const auto m = periodic_pair(5);
  std::mt19937_64 rng(5);
  const auto alpha = oracles::random_segment(rng, 2, 2, 1.0);
  auto iterated = alpha;
  for (int k = 0; k < 3; ++k) iterated = poincare(m, 0, 6, iterated);
  const auto direct = solve(m, 0, alpha, 18).history_at(18);
  EXPECT_LE(sup_norm(iterated - direct), 1e-14);
  EXPECT_LE(sup_norm(poincare(m, 0, 6, poincare(m, 0, 6, alpha)) - poincare(m, 0, 12, alpha)), 1e-14);
}

TEST(Poincare, RejectsWrongPeriod) {
  EXPECT_THROW(poincare(alternating(0.0), 0, 3, HistorySegment(1, 0)), InputError);
}

TEST(ChooseK, Examples) {
  EXPECT_EQ(choose_k(1.0, 0.1, 1), 1);
  EXPECT_EQ(choose_k(2.0, 0.5, 1), 2);
  EXPECT_EQ(choose_k(2.03455245794117425, 0.3, 1), 3);
  EXPECT_EQ(choose_k(2.03455245794117425, 0.3, 3), 1);
  EXPECT_THROW(choose_k(0.5, 0.3, 1), InputError);
  EXPECT_THROW(choose_k(2.0, 0.0, 1), InputError);
  EXPECT_THROW(choose_k(2.0, 0.3, 0), InputError);
}

TEST(ChooseK, SmallestContractingPower) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const double C = std::exp(oracles::uniform(rng, 0.0, 5.0));
    const double mu = oracles::uniform(rng, 0.01, 1.0);
    const Index omega = std::uniform_int_distribution<Index>(1, 12)(rng);
    const Index k = choose_k(C, mu, omega);
    EXPECT_LT(C * std::exp(-mu * static_cast<double>(k * omega)), 1.0);
    if (k > 1) {
      EXPECT_GE(C * std::exp(-mu * static_cast<double>((k - 1) * omega)), 1.0);
    }
  }
}

TEST(FindPeriodic, Equilibrium) {
  const auto m = oracles::scalar_xu_wu(1.0, 1.0, 0.3, 0.7);
  const auto res = find_periodic(m, 1, strict_certificate(m));
  EXPECT_NEAR(res.phi(0, 0), 1.0, 1e-11);
  EXPECT_LE(res.residual, 1e-12);
  EXPECT_TRUE(res.orbit_ok);
}

TEST(FindPeriodic, AlternatingMatchesLinearSolve) {
  for (double b : {0.0, 0.3}) {
    const auto m = alternating(b);
    const double th = theta(1.0, 1.0), p = std::exp(-1.0) + th * b;
    // x1 = p x0 + th I0, x0 = p x1 + th I1
    const double x0 = (p * th * 1.0 + th * 2.0) / (1.0 - p * p);
    const double x1 = p * x0 + th * 1.0;
    const auto res = find_periodic(m, 2, strict_certificate(m));
    EXPECT_NEAR(res.phi(0, 0), x0, 1e-11);
    const auto orbit = solve(m, 0, res.phi, 4);
    EXPECT_NEAR(orbit(1, 0), x1, 1e-11);
    EXPECT_NEAR(orbit(2, 0), x0, 1e-11);
  }
}

TEST(FindPeriodic, ZeroInputGivesZeroOrbit) {
  auto m = periodic_pair(7);
  for (auto& in : m.input) in = Sequence::constant(0.0);
  const auto res = find_periodic(m, 6, strict_certificate(m));
  EXPECT_EQ(sup_norm(res.phi), 0.0);
  EXPECT_EQ(res.iterations, 0u);
}

TEST(FindPeriodic, UniqueFromAnyStart) {
  const auto m = periodic_pair(9);
  const auto cert = strict_certificate(m);
  const auto base = find_periodic(m, 6, cert);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    PeriodicOptions opts;
    opts.initial = oracles::random_segment(rng, 2, 2, 3.0);
    const auto other = find_periodic(m, 6, cert, opts);
    EXPECT_LE(sup_norm(other.phi - base.phi), 1e-10);
  }
}

TEST(FindPeriodic, OrbitIsPeriodic) {
  const auto m = periodic_pair(11);
  const auto res = find_periodic(m, 6, strict_certificate(m));
  EXPECT_TRUE(res.orbit_ok);
  const auto orbit = solve(m, 0, res.phi, 60);
  for (Index t = 0; t + 6 <= 60; ++t)
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(orbit(t + 6, i), orbit(t, i), 1e-11);
  EXPECT_LE(sup_norm(poincare(m, 0, 6, res.phi) - res.phi), 1e-12);
}

TEST(FindPeriodic, BudgetExhaustion) {
  const auto m = periodic_pair(13);
  PeriodicOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-15;
  EXPECT_THROW(find_periodic(m, 6, strict_certificate(m), opts), NotConverged);
}

TEST(FindPeriodic, RejectsNonPeriodicModel) {
  const auto m = alternating(0.0);
  EXPECT_THROW(find_periodic(m, 3, strict_certificate(m)), InputError);
}

TEST(Attraction, OrbitItselfStaysPut) {
  const auto m = periodic_pair(15);
  const auto cert = strict_certificate(m);
  const auto res = find_periodic(m, 6, cert);
  const auto traj = solve(m, 0, res.phi, 120);
  const auto ref = solve(m, 0, res.phi, 120);
  EXPECT_EQ(sup_norm(traj.history_at(120) - ref.history_at(120)), 0.0);
}

TEST(Attraction, RandomStartsStayInsideEnvelope) {
  for (std::uint64_t seed : {17u, 19u}) {
    const auto m = periodic_pair(seed);
    const auto cert = strict_certificate(m);
    const auto res = find_periodic(m, 6, cert);
    AttractionOptions opts;
    opts.trials = 100;
    opts.horizon = 300;
    const auto rep = verify_attraction(m, res, &cert, opts);
    EXPECT_TRUE(rep.asserted);
    EXPECT_TRUE(rep.envelope_ok) << rep.worst_ratio;
    EXPECT_LE(rep.worst_ratio, 1.0);
    EXPECT_LE(rep.asymptotic_step_ratio, std::exp(-cert.mu) + 0.02);
    EXPECT_GT(rep.asymptotic_step_ratio, 0.0);
  }
}

TEST(Attraction, ScalarRateMatchesLinearization) {
  // The orbit is attracting at exactly e^-1 + theta b per step for the linear scalar model.
  const auto m = alternating(0.3);
  const auto cert = strict_certificate(m);
  const auto res = find_periodic(m, 2, cert);
  AttractionOptions opts;
  opts.trials = 20;
  const auto rep = verify_attraction(m, res, &cert, opts);
  EXPECT_NEAR(rep.asymptotic_step_ratio, std::exp(-1.0) + theta(1.0, 1.0) * 0.3, 1e-6);
  EXPECT_TRUE(rep.envelope_ok);
}

TEST(Attraction, MeasurementOnly) {
  const auto m = periodic_pair(21);
  const auto cert = strict_certificate(m);
  const auto res = find_periodic(m, 6, cert);
  AttractionOptions opts;
  opts.trials = 10;
  const auto rep = verify_attraction(m, res, nullptr, opts);
  EXPECT_FALSE(rep.asserted);
  EXPECT_TRUE(rep.envelope_ok);
  EXPECT_EQ(rep.worst_ratio, 0.0);
  EXPECT_GT(rep.asymptotic_step_ratio, 0.0);
}

TEST(Attraction, Deterministic) {
  const auto m = periodic_pair(23);
  const auto cert = strict_certificate(m);
  const auto res = find_periodic(m, 6, cert);
  AttractionOptions opts;
  opts.trials = 16;
  const auto a = verify_attraction(m, res, &cert, opts), b = verify_attraction(m, res, &cert, opts);
  EXPECT_EQ(a.per_trial_worst, b.per_trial_worst);
  EXPECT_EQ(a.per_trial_step_ratio, b.per_trial_step_ratio);
}

TEST(Attraction, InflatedRateIsCaught) {
  const auto m = alternating(0.3);
  auto cert = strict_certificate(m);
  const auto res = find_periodic(m, 2, cert);
  cert.mu = 1.2 * cert.supremal_mu;
  cert.C = 1.0;
  const auto rep = verify_attraction(m, res, &cert, {});
  EXPECT_FALSE(rep.envelope_ok);
  ASSERT_TRUE(rep.violation.has_value());
  EXPECT_GT(rep.violation->ratio, 1.0);
}

TEST(Attraction, RefusesPaperCertificate) {
  const auto m = alternating(0.0);
  CertifyOptions opts;
  opts.mode = NormMode::Paper;
  const auto cert = corollary22_certificate(m, opts);
  const auto res = find_periodic(m, 2, cert);
  EXPECT_THROW(verify_attraction(m, res, &cert, {}), InputError);
}
