#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "ctap/rect.hpp"

using namespace ctap;

TEST(RectSiteMap, FactorIndicesRoundTrip) {
  for (int site = 1; site <= 9; ++site) {
    const int a = RectSiteMap::alpha[site - 1];
    const int b = RectSiteMap::beta[site - 1];
    EXPECT_EQ(RectSiteMap::site(a, b), site);
    EXPECT_EQ(a - 1, RectSiteMap::row(site));
  }
  EXPECT_THROW(RectSiteMap::check(0), ValidationError);
  EXPECT_THROW(RectSiteMap::check(10), ValidationError);
}

TEST(RectHamiltonian, BondsMatchGrid) {
  // Horizontal bonds left to right alternate omega4, omega2; vertical bonds
  // top to bottom alternate omega1, omega3.
  const auto h = build_rect_hamiltonian(1.0, 2.0, 3.0, 4.0);
  RMatrix expect = RMatrix::Zero(9, 9);
  for (int r = 0; r < 3; ++r) {
    expect(3 * r, 3 * r + 1) = 4.0;
    expect(3 * r + 1, 3 * r + 2) = 2.0;
  }
  for (int c = 0; c < 3; ++c) {
    expect(c, c + 3) = 1.0;
    expect(c + 3, c + 6) = 3.0;
  }
  expect += RMatrix(expect.transpose());
  EXPECT_EQ((h - expect).cwiseAbs().maxCoeff(), 0.0);
}

TEST(RectDarkState, ZeroEnergyOnCorners) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 20.0);
  for (int k = 0; k < 100; ++k) {
    const RectRates r{u(rng), u(rng), u(rng), u(rng)};
    const auto d = rect_dark_state(r);
    const CVector hd = build_rect_hamiltonian(r).cast<Complex>() * d.amplitudes();
    EXPECT_LT(hd.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(d.norm_squared(), 1.0, 1e-12);
    for (int s : kRectBrightSites) EXPECT_EQ(d.amplitudes()(s - 1), Complex(0.0));
  }
  EXPECT_THROW(rect_dark_state({0.0, 1.0, 0.0, 1.0}), ValidationError);
}

TEST(RectDarkState, LimitsSelectStartAndTarget) {
  // Early: omega3 = omega4 dominate, dark state on site 3. Late: on site 7.
  const auto early = rect_dark_state({1e-6, 1e-6, 1.0, 1.0});
  const auto late = rect_dark_state({1.0, 1.0, 1e-6, 1e-6});
  EXPECT_GT(early.population(2), 1.0 - 1e-10);
  EXPECT_GT(late.population(6), 1.0 - 1e-10);
}

TEST(RectFactorization, MatchesDirectPropagator) {
  std::mt19937_64 rng(5);
  const std::vector<std::string_view> labels{label::kOmega1, label::kOmega2, label::kOmega3, label::kOmega4};
  for (int k = 0; k < 3; ++k) {
    const auto schedule = random_gaussian_schedule(rng, labels);
    const auto w = schedule.window();
    const auto gen = rect_generator(schedule);
    const double dt = default_dt(gen, w);
    const CMatrix direct = propagator_matrix(gen, w, dt);
    const auto [ssys, tsys] = rect_subsystems(schedule);
    const auto f = rect_factorized_transfer(stirap_propagator(ssys, w, dt), stirap_propagator(tsys, w, dt));
    EXPECT_LT((f - direct).cwiseAbs().maxCoeff(), 1e-6) << k;
  }
}

TEST(RectFactorization, IdentityFactorsGiveIdentity) {
  const StirapMatrix id;
  EXPECT_LT((rect_factorized_transfer(id, id) - CMatrix::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RectCtap, CornerToCornerTransfer) {
  const auto schedule = rect_counterintuitive_schedule(30.0, 1.0, 1.0);
  const auto run = run_rect_ctap(schedule, 3);
  EXPECT_GE(run.fidelity(7), 0.99);
  EXPECT_LE(run.dark_leakage_max, 0.05);
  EXPECT_LT(run.trajectory.max_norm_drift, 1e-8);
  const auto reverse = run_rect_ctap(schedule, 7);
  EXPECT_LT(reverse.fidelity(3), 0.5);
  EXPECT_THROW(run_rect_ctap(schedule, 12), ValidationError);
}
