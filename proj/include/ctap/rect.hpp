#pragma once

// 3x3 rectangular lattice. Sites are labeled 1..9 row-major:
//
//      1 --Ω4-- 2 --Ω2-- 3
//      |Ω1      |Ω1      |Ω1
//      4 --Ω4-- 5 --Ω2-- 6
//      |Ω3      |Ω3      |Ω3
//      7 --Ω4-- 8 --Ω2-- 9
//
// Each site is a two-boson Fock state built from one mode of the (a, b, e)
// triple (row, alpha) and one of the (d, c, f) triple (beta, column read
// right to left). Vertical hops act on alpha through the S system
// (Ω1 on a-b, Ω3 on b-e); horizontal hops act on beta through the T system
// (Ω2 on d-c, Ω4 on c-f).

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "ctap/error.hpp"
#include "ctap/propagate.hpp"
#include "ctap/pulse.hpp"
#include "ctap/stirap3.hpp"

namespace ctap {

inline constexpr int kRectSites = 9;

/// Fixed labeling of the 3x3 sites with their two factor indices (1-based).
struct RectSiteMap {
  static constexpr std::array<int, kRectSites> alpha{1, 1, 1, 2, 2, 2, 3, 3, 3};
  static constexpr std::array<int, kRectSites> beta{3, 2, 1, 3, 2, 1, 3, 2, 1};

  static void check(int site) {
    if (site < 1 || site > kRectSites) throw ValidationError("rect site must be in 1..9");
  }
  static int index(int site) {
    check(site);
    return site - 1;
  }
  static int row(int site) { return (index(site)) / 3; }
  static int col(int site) { return (index(site)) % 3; }
  /// Inverse of (alpha, beta).
  static int site(int a, int b) { return 3 * (a - 1) + (3 - b) + 1; }
};

struct RectRates {
  double omega1 = 0.0, omega2 = 0.0, omega3 = 0.0, omega4 = 0.0;
};

inline RectRates rect_rates(const PulseSchedule& s, double t) {
  return {s.rate(label::kOmega1, t), s.rate(label::kOmega2, t), s.rate(label::kOmega3, t),
          s.rate(label::kOmega4, t)};
}

inline RMatrix build_rect_hamiltonian(const RectRates& r) {
  RMatrix h = RMatrix::Zero(kRectSites, kRectSites);
  auto bond = [&](int i, int j, double w) { h(i - 1, j - 1) = h(j - 1, i - 1) = w; };
  bond(1, 2, r.omega4); bond(2, 3, r.omega2);
  bond(4, 5, r.omega4); bond(5, 6, r.omega2);
  bond(7, 8, r.omega4); bond(8, 9, r.omega2);
  bond(1, 4, r.omega1); bond(2, 5, r.omega1); bond(3, 6, r.omega1);
  bond(4, 7, r.omega3); bond(5, 8, r.omega3); bond(6, 9, r.omega3);
  return h;
}

inline RMatrix build_rect_hamiltonian(double o1, double o2, double o3, double o4) {
  return build_rect_hamiltonian(RectRates{o1, o2, o3, o4});
}

inline HamiltonianGenerator rect_generator(const PulseSchedule& schedule) {
  std::vector<RMatrix> basis{build_rect_hamiltonian(1, 0, 0, 0), build_rect_hamiltonian(0, 1, 0, 0),
                             build_rect_hamiltonian(0, 0, 1, 0), build_rect_hamiltonian(0, 0, 0, 1)};
  std::vector<std::function<double(double)>> rates;
  for (auto l : {label::kOmega1, label::kOmega2, label::kOmega3, label::kOmega4})
    rates.emplace_back([schedule, l](double t) { return schedule.rate(l, t); });
  return linear_generator(std::move(basis), std::move(rates));
}

/// Zero-energy state supported on the four corners 1, 3, 7, 9.
inline StateVector rect_dark_state(const RectRates& r) {
  const double d2 = (r.omega2 * r.omega2 + r.omega4 * r.omega4) * (r.omega1 * r.omega1 + r.omega3 * r.omega3);
  if (!(d2 > 0.0) || !std::isfinite(d2)) throw ValidationError("rect dark state undefined for these rates");
  const double d = std::sqrt(d2);
  CVector c = CVector::Zero(kRectSites);
  c(0) = -r.omega2 * r.omega3 / d;
  c(2) = r.omega3 * r.omega4 / d;
  c(6) = r.omega1 * r.omega2 / d;
  c(8) = -r.omega1 * r.omega4 / d;
  return StateVector(std::move(c), 1e-12);
}

/// The two decoupled STIRAP subsystems (S: Ω1, Ω3; T: Ω2, Ω4).
inline std::pair<ThreeLevelSystem, ThreeLevelSystem> rect_subsystems(const PulseSchedule& s) {
  auto get = [&](std::string_view l) { return s.has(l) ? s.pulse(l) : GaussianPulse{0.0, 0.0, 1.0}; };
  const GaussianPulse none{0.0, 0.0, 1.0};
  return {ThreeLevelSystem{get(label::kOmega1), get(label::kOmega3), none},
          ThreeLevelSystem{get(label::kOmega2), get(label::kOmega4), none}};
}

/// c(t_f) = F c(t_i) with F[l, m] = conj(S[alpha(l), alpha(m)] T[beta(l), beta(m)]).
inline CMatrix rect_factorized_transfer(const StirapMatrix& s, const StirapMatrix& t) {
  CMatrix f(kRectSites, kRectSites);
  for (int l = 0; l < kRectSites; ++l)
    for (int m = 0; m < kRectSites; ++m)
      f(l, m) = std::conj(s(RectSiteMap::alpha[l] - 1, RectSiteMap::alpha[m] - 1) *
                          t(RectSiteMap::beta[l] - 1, RectSiteMap::beta[m] - 1));
  return f;
}

/// Sites off the dark-state support.
inline constexpr std::array<int, 5> kRectBrightSites{2, 4, 5, 6, 8};

struct RectRun {
  Trajectory trajectory;
  std::array<double, kRectSites> final_populations{};
  double dark_leakage_max = 0.0;  ///< max over samples of population on {2,4,5,6,8}

  double fidelity(int site) const { return final_populations[RectSiteMap::index(site)]; }
};

inline RectRun run_rect_ctap(const PulseSchedule& schedule, int initial_site, double dt = 0.0,
                             const PropagationOptions& opt = {}) {
  const auto gen = rect_generator(schedule);
  if (dt <= 0.0) dt = default_dt(gen, schedule.window());
  RectRun run;
  run.trajectory = propagate(gen, StateVector::basis(kRectSites, RectSiteMap::index(initial_site)),
                             schedule.window(), dt, opt);
  for (int i = 0; i < kRectSites; ++i) run.final_populations[i] = std::norm(run.trajectory.final_state()(i));
  for (const auto& c : run.trajectory.states) {
    double leak = 0.0;
    for (int s : kRectBrightSites) leak += std::norm(c(s - 1));
    run.dark_leakage_max = std::max(run.dark_leakage_max, leak);
  }
  return run;
}

}  // namespace ctap
