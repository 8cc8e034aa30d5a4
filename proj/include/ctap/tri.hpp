#pragma once

// Triangular lattice of (N+1)(N+2)/2 sites (n, m), n + m <= N. A site is the
// Fock state of N bosons in a triple well with n in L, m in R and N - n - m
// in C. Ω1 hops L-C, Ω2 hops R-C, Ω3 hops L-R; Ω3 = 0 is the half-square
// lattice.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ctap/error.hpp"
#include "ctap/propagate.hpp"
#include "ctap/pulse.hpp"
#include "ctap/stirap3.hpp"

namespace ctap {

inline constexpr int kMaxTriN = 12;

struct FockSite {
  int n = 0;  ///< bosons in L
  int m = 0;  ///< bosons in R

  friend bool operator==(const FockSite&, const FockSite&) = default;
};

/// Degree-major ordering: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
class TriLattice {
 public:
  explicit TriLattice(int n_bosons, int max_n = kMaxTriN) : n_(n_bosons) {
    if (n_bosons < 0) throw ValidationError("lattice size N must be >= 0");
    if (n_bosons > max_n) throw ValidationError("lattice size N exceeds the cap of " + std::to_string(max_n));
    sites_.reserve(static_cast<std::size_t>(site_count()));
    for (int d = 0; d <= n_; ++d)
      for (int n = d; n >= 0; --n) sites_.push_back({n, d - n});
  }

  int size_n() const { return n_; }
  int site_count() const { return (n_ + 1) * (n_ + 2) / 2; }
  const std::vector<FockSite>& sites() const { return sites_; }
  const FockSite& site(int i) const { return sites_.at(static_cast<std::size_t>(i)); }

  bool contains(FockSite s) const { return s.n >= 0 && s.m >= 0 && s.n + s.m <= n_; }

  int index(FockSite s) const {
    if (!contains(s))
      throw ValidationError("site (" + std::to_string(s.n) + "," + std::to_string(s.m) + ") is not on the lattice");
    const int d = s.n + s.m;
    return d * (d + 1) / 2 + (d - s.n);
  }
  int index(int n, int m) const { return index(FockSite{n, m}); }

 private:
  int n_;
  std::vector<FockSite> sites_;
};

struct TriBond {
  int i = 0;             ///< canonical index of the site with more L (or R) bosons
  int j = 0;             ///< canonical index of the neighbor
  int rate = 0;          ///< 1, 2 or 3
  int coef_squared = 0;  ///< hopping strength is rate * sqrt(coef_squared)
};

/// Every nearest-neighbor bond, listed once.
inline std::vector<TriBond> tri_bonds(const TriLattice& lat) {
  const int big_n = lat.size_n();
  std::vector<TriBond> bonds;
  for (const auto& s : lat.sites()) {
    const int i = lat.index(s);
    const int central = big_n + 1 - s.n - s.m;
    if (s.n >= 1) bonds.push_back({i, lat.index(s.n - 1, s.m), 1, s.n * central});
    if (s.m >= 1) bonds.push_back({i, lat.index(s.n, s.m - 1), 2, s.m * central});
    if (s.n >= 1) bonds.push_back({i, lat.index(s.n - 1, s.m + 1), 3, s.n * (s.m + 1)});
  }
  return bonds;
}

inline RMatrix build_tri_hamiltonian(const TriLattice& lat, double o1, double o2, double o3) {
  const std::array<double, 3> rates{o1, o2, o3};
  RMatrix h = RMatrix::Zero(lat.site_count(), lat.site_count());
  for (const auto& b : tri_bonds(lat))
    h(b.i, b.j) = h(b.j, b.i) = rates[b.rate - 1] * std::sqrt(static_cast<double>(b.coef_squared));
  return h;
}

inline RMatrix build_tri_hamiltonian(int n_bosons, double o1, double o2, double o3) {
  return build_tri_hamiltonian(TriLattice(n_bosons), o1, o2, o3);
}

inline HamiltonianGenerator tri_generator(const TriLattice& lat, const PulseSchedule& schedule) {
  std::vector<RMatrix> basis{build_tri_hamiltonian(lat, 1, 0, 0), build_tri_hamiltonian(lat, 0, 1, 0),
                             build_tri_hamiltonian(lat, 0, 0, 1)};
  std::vector<std::function<double(double)>> rates;
  for (auto l : {label::kOmega1, label::kOmega2, label::kOmega3})
    rates.emplace_back([schedule, l](double t) { return schedule.rate(l, t); });
  return linear_generator(std::move(basis), std::move(rates));
}

/// Three-level system of the triple well (L, C, R).
inline ThreeLevelSystem tri_three_level(const PulseSchedule& s) {
  auto get = [&](std::string_view l) { return s.has(l) ? s.pulse(l) : GaussianPulse{0.0, 0.0, 1.0}; };
  return {get(label::kOmega1), get(label::kOmega2), get(label::kOmega3)};
}

namespace detail {

inline std::vector<double> factorials(int n) {
  std::vector<double> f(static_cast<std::size_t>(n) + 1, 1.0);
  for (int i = 1; i <= n; ++i) f[i] = f[i - 1] * i;
  return f;
}

inline Complex ipow(Complex z, int k) {
  Complex r(1.0, 0.0);
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}

struct Term {
  int l, c, r;  // powers of the L, C, R creation operators
  Complex value;
};

/// (S(row,0) x_L + S(row,1) x_C + S(row,2) x_R)^power, expanded.
inline std::vector<Term> expand_row(const StirapMatrix& s, int row, int power, const std::vector<double>& fact) {
  std::vector<Term> out;
  for (int l = 0; l <= power; ++l)
    for (int c = 0; c + l <= power; ++c) {
      const int r = power - l - c;
      const double multinomial = fact[power] / (fact[l] * fact[c] * fact[r]);
      out.push_back({l, c, r, multinomial * ipow(s(row, 0), l) * ipow(s(row, 1), c) * ipow(s(row, 2), r)});
    }
  return out;
}

inline void require_unitary(const StirapMatrix& s) {
  if (s.unitarity_error() > kUnitarityTolerance) throw ValidationError("STIRAP matrix is not unitary");
}

}  // namespace detail

/// Lattice transfer matrix built from one STIRAP matrix: c(t_f) = F c(t_i),
/// F[(n,m), (p,q)] = conj(Theta_{p,q; n,m}), where Theta is the vacuum
/// expectation of the Heisenberg-evolved Fock creation polynomial.
inline CMatrix theta_fock(const TriLattice& lat, const StirapMatrix& s, bool check_unitary = true) {
  if (check_unitary) detail::require_unitary(s);
  const int big_n = lat.size_n();
  const auto fact = detail::factorials(big_n);
  const int dim = lat.site_count();
  CMatrix f = CMatrix::Zero(dim, dim);
  Eigen::MatrixXcd coef(big_n + 1, big_n + 1);

  for (const auto& src : lat.sites()) {
    const int k = big_n - src.n - src.m;
    const auto left = detail::expand_row(s, 0, src.n, fact);
    const auto right = detail::expand_row(s, 2, src.m, fact);
    const auto centre = detail::expand_row(s, 1, k, fact);
    coef.setZero();
    for (const auto& a : left)
      for (const auto& b : right)
        for (const auto& c : centre) coef(a.l + b.l + c.l, a.r + b.r + c.r) += a.value * b.value * c.value;

    const int row = lat.index(src);
    const double norm_src = fact[src.n] * fact[src.m] * fact[k];
    for (const auto& dst : lat.sites()) {
      const int r = big_n - dst.n - dst.m;
      const double weight = std::sqrt(fact[dst.n] * fact[dst.m] * fact[r] / norm_src);
      // Theta_{dst; src} lands in row src, column dst of the transfer.
      f(row, lat.index(dst)) = std::conj(weight * coef(dst.n, dst.m));
    }
  }
  return f;
}

inline CMatrix theta_fock(int n_bosons, const StirapMatrix& s, bool check_unitary = true) {
  return theta_fock(TriLattice(n_bosons), s, check_unitary);
}

/// Final amplitudes for the particle starting on the vertex (N, 0).
inline CVector vertex_final_amplitudes(const TriLattice& lat, const StirapMatrix& s) {
  detail::require_unitary(s);
  const int big_n = lat.size_n();
  const auto fact = detail::factorials(big_n);
  const Complex s11 = std::conj(s(0, 0)), s21 = std::conj(s(1, 0)), s31 = std::conj(s(2, 0));
  CVector c(lat.site_count());
  for (const auto& site : lat.sites()) {
    const int k = big_n - site.n - site.m;
    c(lat.index(site)) = std::sqrt(fact[big_n] / (fact[site.n] * fact[site.m] * fact[k])) *
                         detail::ipow(s11, site.n) * detail::ipow(s31, site.m) * detail::ipow(s21, k);
  }
  return c;
}

inline CVector vertex_final_amplitudes(int n_bosons, const StirapMatrix& s) {
  return vertex_final_amplitudes(TriLattice(n_bosons), s);
}

/// Zero-energy state of the half-square lattice (Ω3 = 0) for ratio Ω1/Ω2,
/// supported on the row n + m = N.
inline StateVector halfsquare_dark_state(const TriLattice& lat, double ratio) {
  if (!std::isfinite(ratio) || ratio < 0.0) throw ValidationError("dark-state ratio must be finite and >= 0");
  const int big_n = lat.size_n();
  const auto fact = detail::factorials(big_n);
  const double norm = std::pow(1.0 + ratio * ratio, -0.5 * big_n);
  CVector c = CVector::Zero(lat.site_count());
  for (int l = 0; l <= big_n; ++l) {
    const double sign = (l % 2 == 0) ? 1.0 : -1.0;
    c(lat.index(big_n - l, l)) =
        sign * norm * std::pow(ratio, l) * std::sqrt(fact[big_n] / (fact[l] * fact[big_n - l]));
  }
  return StateVector(std::move(c), 1e-10);
}

inline StateVector halfsquare_dark_state(int n_bosons, double ratio) {
  return halfsquare_dark_state(TriLattice(n_bosons), ratio);
}

struct TriRun {
  TriLattice lattice;
  Trajectory trajectory;
  std::vector<double> final_populations;
  double off_row_max = 0.0;  ///< max over samples of population with n + m < N

  double population(FockSite s) const { return final_populations[static_cast<std::size_t>(lattice.index(s))]; }
};

inline TriRun run_tri_ctap(int n_bosons, const PulseSchedule& schedule, FockSite initial, double dt = 0.0,
                           const PropagationOptions& opt = {}) {
  TriRun run{TriLattice(n_bosons), {}, {}, 0.0};
  const auto& lat = run.lattice;
  const auto gen = tri_generator(lat, schedule);
  if (dt <= 0.0) dt = default_dt(gen, schedule.window());
  run.trajectory = propagate(gen, StateVector::basis(lat.site_count(), lat.index(initial)), schedule.window(), dt, opt);
  const auto& fin = run.trajectory.final_state();
  for (int i = 0; i < lat.site_count(); ++i) run.final_populations.push_back(std::norm(fin(i)));
  for (const auto& c : run.trajectory.states) {
    double off = 0.0;
    for (int i = 0; i < lat.site_count(); ++i)
      if (lat.site(i).n + lat.site(i).m < n_bosons) off += std::norm(c(i));
    run.off_row_max = std::max(run.off_row_max, off);
  }
  return run;
}

/// [{t, grid: [{n, m, p}]}] at the stored samples nearest to each requested time.
inline nlohmann::json tri_snapshots(const TriLattice& lat, const Trajectory& traj, const std::vector<double>& times) {
  auto out = nlohmann::json::array();
  for (double t : times) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < traj.times.size(); ++s)
      if (std::abs(traj.times[s] - t) < std::abs(traj.times[best] - t)) best = s;
    auto grid = nlohmann::json::array();
    for (const auto& site : lat.sites())
      grid.push_back({{"n", site.n}, {"m", site.m}, {"p", std::norm(traj.states[best](lat.index(site)))}});
    out.push_back({{"t", traj.times[best]}, {"grid", std::move(grid)}});
  }
  return out;
}

}  // namespace ctap
