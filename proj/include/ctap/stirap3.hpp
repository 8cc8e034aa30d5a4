#pragma once

// Resonant three-level STIRAP engine.
//
// Basis order is (1, 2, 3) = (L, C, R) for the triple well and (a, b, e) or
// (d, c, f) for the two rectangular-lattice subsystems. The instantaneous
// coupling matrix M(t) has Omega_a on (1,2), Omega_b on (2,3), Omega_c on
// (1,3) and zero diagonal. The bosonic creation operators obey the
// Heisenberg equations i dA/dt = -M(t) A, so every StirapMatrix below is the
// propagator of i dx/dt = -M(t) x. With this convention the single-particle
// Schroedinger propagator of M is conj(S), which is what the lattice
// factorizations consume.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ctap/error.hpp"
#include "ctap/propagate.hpp"
#include "ctap/pulse.hpp"

namespace ctap {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;
using CMatrix3 = Eigen::Matrix3cd;
using CVector3 = Eigen::Vector3cd;

inline constexpr double kAdiabaticTolerance = 1e-2;
/// Closed-form eigenvectors are used only for |Omega_a| above this fraction
/// of the instantaneous rate scale sqrt(Omega_a^2 + Omega_b^2 + Omega_c^2).
inline constexpr double kOmegaGuard = 1e-6;

struct ThreeLevelSystem {
  GaussianPulse coupling_12;  ///< Omega_a
  GaussianPulse coupling_23;  ///< Omega_b
  GaussianPulse coupling_13;  ///< Omega_c; amplitude 0 means identically zero
};

inline Matrix3 coupling_matrix(double a, double b, double c) {
  Matrix3 m;
  m << 0.0, a, c,
       a, 0.0, b,
       c, b, 0.0;
  return m;
}

inline Matrix3 instantaneous_matrix(const ThreeLevelSystem& sys, double t) {
  return coupling_matrix(sys.coupling_12(t), sys.coupling_23(t), sys.coupling_13(t));
}

/// Generator -M(t) of the Heisenberg-picture propagator.
inline HamiltonianGenerator three_level_generator(const ThreeLevelSystem& sys) {
  return {3, [sys](double t) { return CMatrix((-instantaneous_matrix(sys, t)).cast<Complex>()); }};
}

struct StirapMatrix {
  CMatrix3 entries = CMatrix3::Identity();

  Complex operator()(int row, int col) const { return entries(row, col); }
  double unitarity_error() const { return ctap::unitarity_error(CMatrix(entries)); }
};

inline StirapMatrix stirap_propagator(const ThreeLevelSystem& sys, TimeWindow window, double dt = 0.0,
                                      const PropagatorOptions& opt = {}) {
  const auto gen = three_level_generator(sys);
  if (dt <= 0.0) dt = default_dt(gen, window);
  return {CMatrix3(propagator_matrix(gen, window, dt, opt))};
}

// ---------------------------------------------------------------------------
// Closed-form adiabatic eigensystem.

struct AdiabaticEigensystem {
  std::array<double, 3> lambda{};  ///< ascending; eigenvalues of M
  std::array<Vector3, 3> v{};      ///< unit eigenvectors, M v_k = lambda_k v_k
  double p = 0.0;                  ///< -(Omega_a^2 + Omega_b^2 + Omega_c^2)
  double q = 0.0;                  ///< 2 Omega_a Omega_b Omega_c
  bool closed_form_vectors = true; ///< false when the numeric fallback ran

  double scale() const { return std::sqrt(-p); }
};

namespace detail {

/// Roots of mu^3 + p mu - q = 0 (the characteristic polynomial of M) by the
/// trigonometric formula, ascending in k = 1, 2, 3.
inline std::array<double, 3> trig_roots(double p, double q) {
  const double r = std::sqrt(-p);
  if (q == 0.0) return {-r, 0.0, r};
  const double arg = std::clamp((3.0 * (-q) / (2.0 * p)) * std::sqrt(-3.0 / p), -1.0, 1.0);
  const double theta = std::acos(arg) / 3.0;
  const double amp = 2.0 * std::sqrt(-p / 3.0);
  std::array<double, 3> mu{};
  for (int k = 1; k <= 3; ++k) {
    double x = amp * std::cos(theta + 2.0 * std::numbers::pi * k / 3.0);
    // The cosine form carries an absolute error ~ eps * amp, so a root near
    // zero loses its relative accuracy; two Newton steps restore it.
    // Steps are accepted only as small corrections that reduce the residual,
    // which leaves near-double roots to the cosine form.
    for (int it = 0; it < 2; ++it) {
      const double f = x * x * x + p * x - q;
      const double d = 3.0 * x * x + p;
      if (d == 0.0) break;
      const double step = f / d;
      const double y = x - step;
      if (std::abs(step) > 1e-8 * amp || std::abs(y * y * y + p * y - q) >= std::abs(f)) break;
      x = y;
    }
    mu[k - 1] = x;
  }
  return mu;
}

}  // namespace detail

inline AdiabaticEigensystem adiabatic_eigensystem(double omega_a, double omega_b, double omega_c) {
  AdiabaticEigensystem es;
  es.p = -(omega_a * omega_a + omega_b * omega_b + omega_c * omega_c);
  es.q = 2.0 * omega_a * omega_b * omega_c;
  if (!(es.p < 0.0)) throw ValidationError("adiabatic eigensystem undefined for all-zero rates");
  es.lambda = detail::trig_roots(es.p, es.q);
  const double scale = es.scale();

  std::array<bool, 3> ok{};
  if (std::abs(omega_a) > kOmegaGuard * scale) {
    for (int k = 0; k < 3; ++k) {
      const double mu = es.lambda[k];
      const double a = omega_b + mu * omega_c / omega_a;
      const double b = omega_c + mu * omega_b / omega_a;
      const double c = omega_a - mu * mu / omega_a;
      const double n = std::sqrt(a * a + b * b + c * c);
      // a,b,c all vanish on branches decoupled from site 1 and 2.
      if (n > kOmegaGuard * scale) {
        es.v[k] = Vector3(a, b, -c) / n;
        ok[k] = true;
      }
    }
  }
  if (ok[0] && ok[1] && ok[2]) return es;

  es.closed_form_vectors = false;
  const Eigen::SelfAdjointEigenSolver<Matrix3> solver(coupling_matrix(omega_a, omega_b, omega_c));
  for (int k = 0; k < 3; ++k) {
    if (ok[k]) continue;
    Vector3 u = solver.eigenvectors().col(k);
    // Sign reference: the closed form rescaled by omega_a has no division.
    const double mu = es.lambda[k];
    const Vector3 w(omega_a * omega_b + mu * omega_c, omega_a * omega_c + mu * omega_b,
                    mu * mu - omega_a * omega_a);
    double ref = u.dot(w);
    if (std::abs(ref) <= 1e-3 * scale * scale) {
      Eigen::Index i = 0;
      u.cwiseAbs().maxCoeff(&i);
      ref = u(i);
    }
    es.v[k] = ref < 0.0 ? Vector3(-u) : u;
  }
  return es;
}

inline AdiabaticEigensystem adiabatic_eigensystem(const ThreeLevelSystem& sys, double t) {
  return adiabatic_eigensystem(sys.coupling_12(t), sys.coupling_23(t), sys.coupling_13(t));
}

// ---------------------------------------------------------------------------
// Continuity-tracked spectrum along a schedule.

struct SpectrumTrack {
  std::vector<double> times;
  /// branch[b][s]: eigenvalue of tracked branch b at sample s. Branch 1 is
  /// the transfer branch (connected to (1,0,0) at the window start); 0 and 2
  /// are the remaining branches, lower and upper at the start.
  std::array<std::vector<double>, 3> lambda;
  std::array<std::vector<Vector3>, 3> vectors;
  double min_gap_12 = 0.0;  ///< min_t |lambda_transfer - lambda_0|
  double min_gap_23 = 0.0;  ///< min_t |lambda_transfer - lambda_2|
  double min_relative_gap = 0.0;  ///< min over t of both gaps / rate scale
  std::size_t ambiguous_samples = 0;
  bool ordering_changed = false;
  bool crossing = false;
};

/// Relative gap below which two branches count as crossing.
inline constexpr double kGapFloor = 1e-9;

inline SpectrumTrack track_spectrum(const ThreeLevelSystem& sys, TimeWindow window, std::size_t n_samples,
                                    double gap_floor = kGapFloor) {
  if (n_samples < 2) throw ValidationError("track_spectrum needs at least two samples");
  if (!(window.end > window.start)) throw ValidationError("invalid window");

  SpectrumTrack tr;
  tr.times.resize(n_samples);
  for (auto& l : tr.lambda) l.resize(n_samples);
  for (auto& v : tr.vectors) v.resize(n_samples);

  // pos[b] is the ascending index occupied by branch b at the current sample.
  std::array<int, 3> pos{};
  std::array<int, 3> initial_pos{};
  double min12 = std::numeric_limits<double>::infinity();
  double min23 = min12;
  double min_rel = min12;
  static constexpr std::array<std::array<int, 3>, 6> kPerms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  for (std::size_t s = 0; s < n_samples; ++s) {
    const double t = window.start + window.length() * static_cast<double>(s) / static_cast<double>(n_samples - 1);
    const auto es = adiabatic_eigensystem(sys, t);
    tr.times[s] = t;

    if (s == 0) {
      Eigen::Index transfer = 0;
      Vector3(std::abs(es.v[0](0)), std::abs(es.v[1](0)), std::abs(es.v[2](0))).maxCoeff(&transfer);
      std::array<int, 3> others{};
      int o = 0;
      for (int k = 0; k < 3; ++k)
        if (k != transfer) others[o++] = k;
      pos = {others[0], static_cast<int>(transfer), others[1]};
      initial_pos = pos;
    } else {
      double best = -1.0;
      std::size_t best_i = 0;
      for (std::size_t i = 0; i < kPerms.size(); ++i) {
        double score = 0.0;
        for (int b = 0; b < 3; ++b) score += std::abs(tr.vectors[b][s - 1].dot(es.v[kPerms[i][b]]));
        if (score > best) {
          best = score;
          best_i = i;
        }
      }
      double worst = 1.0;
      for (int b = 0; b < 3; ++b)
        worst = std::min(worst, std::abs(tr.vectors[b][s - 1].dot(es.v[kPerms[best_i][b]])));
      if (worst < std::numbers::sqrt2 / 2.0) {
        ++tr.ambiguous_samples;  // keep previous ordering
      } else {
        pos = kPerms[best_i];
      }
    }

    for (int b = 0; b < 3; ++b) {
      Vector3 v = es.v[pos[b]];
      if (s > 0 && v.dot(tr.vectors[b][s - 1]) < 0.0) v = -v;
      if (s == 0 && b == 1 && v(0) < 0.0) v = -v;
      tr.vectors[b][s] = v;
      tr.lambda[b][s] = es.lambda[pos[b]];
    }
    if (pos != initial_pos) tr.ordering_changed = true;

    const double g12 = std::abs(tr.lambda[1][s] - tr.lambda[0][s]);
    const double g23 = std::abs(tr.lambda[1][s] - tr.lambda[2][s]);
    min12 = std::min(min12, g12);
    min23 = std::min(min23, g23);
    min_rel = std::min(min_rel, std::min(g12, g23) / es.scale());
  }
  tr.min_gap_12 = min12;
  tr.min_gap_23 = min23;
  tr.min_relative_gap = min_rel;
  tr.crossing = tr.ordering_changed || tr.ambiguous_samples > 0 || min_rel < gap_floor;
  return tr;
}

namespace detail {

/// Composite Simpson on uniform samples; a trailing odd interval is closed
/// with the 3/8 rule.
inline double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size() - 1;  // intervals
  if (n == 0) return 0.0;
  if (n == 1) return 0.5 * h * (f[0] + f[1]);
  std::size_t even = (n % 2 == 0) ? n : n - 3;
  double sum = 0.0;
  if (even > 0) {
    double acc = f[0] + f[even];
    for (std::size_t i = 1; i < even; ++i) acc += (i % 2 ? 4.0 : 2.0) * f[i];
    sum = acc * h / 3.0;
  }
  if (even != n) sum += 3.0 * h / 8.0 * (f[even] + 3.0 * f[even + 1] + 3.0 * f[even + 2] + f[even + 3]);
  return sum;
}

}  // namespace detail

/// First column (S11, S21, S31) in the adiabatic limit: the transfer
/// eigenvector at the window end times its dynamical phase. The propagated
/// generator is -M, so the branch energy is -lambda and the phase factor is
/// exp(+i int lambda dt).
inline CVector3 adiabatic_column(const ThreeLevelSystem& sys, TimeWindow window, std::size_t n_samples) {
  const auto tr = track_spectrum(sys, window, n_samples);
  if (tr.crossing) throw NumericalError("eigenvalue crossing on the transfer branch; adiabatic column undefined");
  const double h = window.length() / static_cast<double>(n_samples - 1);
  const double phase = detail::simpson(tr.lambda[1], h);
  return tr.vectors[1].back().cast<Complex>() * std::exp(Complex(0.0, phase));
}

/// int sqrt(Omega_a^2 + Omega_b^2) dt over the window.
inline double bright_pulse_area(const ThreeLevelSystem& sys, TimeWindow window, std::size_t intervals = 20000) {
  std::vector<double> f(intervals + 1);
  const double h = window.length() / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double t = window.start + h * static_cast<double>(i);
    f[i] = std::hypot(sys.coupling_12(t), sys.coupling_23(t));
  }
  return detail::simpson(f, h);
}

/// Closed-form adiabatic STIRAP matrix for a counter-intuitive pulse pair
/// (coupling_23 peaks first) without the 1-3 coupling.
inline StirapMatrix analytic_adiabatic_matrix(const ThreeLevelSystem& sys, TimeWindow window) {
  if (!sys.coupling_13.identically_zero())
    throw ValidationError("analytic adiabatic matrix requires Omega_c identically zero");
  if (!(sys.coupling_23.center < sys.coupling_12.center))
    throw ValidationError("analytic adiabatic matrix requires the counter-intuitive ordering");
  const double area = bright_pulse_area(sys, window);
  const Complex is(0.0, std::sin(area));
  const double c = std::cos(area);
  StirapMatrix s;
  s.entries << 0.0, is, c,
               0.0, c, is,
               -1.0, 0.0, 0.0;
  return s;
}

}  // namespace ctap
