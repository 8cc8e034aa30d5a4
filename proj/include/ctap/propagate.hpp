#pragma once

// Fixed-step RK4 integration of i d(psi)/dt = H(t) psi for small dense
// Hermitian generators. No renormalization is applied during a run; the
// norm drift is tracked and reported instead.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ctap/error.hpp"
#include "ctap/pulse.hpp"

namespace ctap {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kNormTolerance = 1e-8;
inline constexpr double kUnitarityTolerance = 1e-8;
inline constexpr double kHermiticityTolerance = 1e-10;

/// Fraction of the inverse spectral bound used as the default step.
inline constexpr double kDefaultStepScale = 0.02;

struct HamiltonianGenerator {
  Eigen::Index dim = 0;
  std::function<CMatrix(double)> at;

  CMatrix operator()(double t) const { return at(t); }
};

/// Generator H(t) = sum_k rate_k(t) * B_k for fixed real symmetric B_k.
inline HamiltonianGenerator linear_generator(std::vector<RMatrix> basis,
                                             std::vector<std::function<double(double)>> rates,
                                             double sign = 1.0) {
  if (basis.empty() || basis.size() != rates.size())
    throw ValidationError("linear_generator needs one rate per basis matrix");
  const Eigen::Index dim = basis.front().rows();
  return {dim, [basis = std::move(basis), rates = std::move(rates), sign, dim](double t) {
            RMatrix h = RMatrix::Zero(dim, dim);
            for (std::size_t k = 0; k < basis.size(); ++k) h += rates[k](t) * basis[k];
            return CMatrix((sign * h).cast<Complex>());
          }};
}

/// Normalized complex amplitude vector over lattice sites.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(CVector amplitudes, double tolerance = kNormTolerance)
      : amps_(std::move(amplitudes)) {
    if (amps_.size() == 0) throw ValidationError("state vector must have positive dimension");
    if (std::abs(amps_.squaredNorm() - 1.0) > tolerance)
      throw ValidationError("state vector is not normalized");
  }

  static StateVector basis(Eigen::Index dim, Eigen::Index k) {
    if (dim <= 0 || k < 0 || k >= dim) throw ValidationError("basis index out of range");
    CVector v = CVector::Zero(dim);
    v(k) = 1.0;
    return StateVector(std::move(v));
  }

  const CVector& amplitudes() const { return amps_; }
  Eigen::Index dim() const { return amps_.size(); }
  double norm_squared() const { return amps_.squaredNorm(); }

  double population(Eigen::Index k) const {
    if (k < 0 || k >= dim()) throw ValidationError("site index out of range");
    return std::norm(amps_(k));
  }

 private:
  CVector amps_;
};

/// |c_target|^2.
inline double fidelity(const StateVector& psi, Eigen::Index target_site) {
  return psi.population(target_site);
}

struct Trajectory {
  std::vector<double> times;
  std::vector<CVector> states;
  double max_norm_drift = 0.0;
  double step = 0.0;
  std::size_t steps = 0;

  Eigen::Index dim() const { return states.empty() ? 0 : states.front().size(); }
  const CVector& final_state() const { return states.back(); }

  /// |c_i|^2 per sample, one row per stored time.
  RMatrix populations() const {
    RMatrix p(static_cast<Eigen::Index>(states.size()), dim());
    for (std::size_t s = 0; s < states.size(); ++s)
      p.row(static_cast<Eigen::Index>(s)) = states[s].cwiseAbs2().transpose();
    return p;
  }
};

struct PropagationOptions {
  /// Keep every n-th step; 0 picks a stride giving roughly kTargetSamples.
  std::size_t sample_stride = 0;
  bool enforce_norm = true;
  double norm_tolerance = kNormTolerance;
  std::size_t hermiticity_stride = 1000;
  double hermiticity_tolerance = kHermiticityTolerance;

  static constexpr std::size_t kTargetSamples = 4000;
};

namespace detail {

inline std::size_t step_count(double t0, double t1, double dt) {
  if (!(t1 > t0)) throw ValidationError("propagation requires t1 > t0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("propagation requires dt > 0");
  const double n = std::ceil((t1 - t0) / dt - 1e-9);
  return static_cast<std::size_t>(std::max(1.0, n));
}

inline void check_hermitian(const CMatrix& h, double t, double tol) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  const double err = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (err > tol * scale) {
    std::ostringstream os;
    os << "Hamiltonian is not Hermitian at t=" << t << " (deviation " << err << ")";
    throw ValidationError(os.str());
  }
}

/// Classical RK4 on a dense state (vector or matrix of column states).
/// `observe(step_index, t, state)` is invoked after every step.
template <typename State, typename Observer>
State rk4_integrate(const HamiltonianGenerator& h, State y, double t0, double t1, double dt,
                    const PropagationOptions& opt, Observer&& observe) {
  const std::size_t n = step_count(t0, t1, dt);
  const double step = (t1 - t0) / static_cast<double>(n);
  const Complex mi(0.0, -1.0);
  CMatrix h_start = h(t0);
  check_hermitian(h_start, t0, opt.hermiticity_tolerance);
  for (std::size_t s = 0; s < n; ++s) {
    const double t = t0 + step * static_cast<double>(s);
    const double t_end = (s + 1 == n) ? t1 : t + step;
    const CMatrix h_mid = h(t + 0.5 * step);
    CMatrix h_end = h(t_end);
    if (opt.hermiticity_stride > 0 && (s + 1) % opt.hermiticity_stride == 0)
      check_hermitian(h_end, t_end, opt.hermiticity_tolerance);
    const State k1 = mi * (h_start * y);
    const State k2 = mi * (h_mid * (y + (0.5 * step) * k1));
    const State k3 = mi * (h_mid * (y + (0.5 * step) * k2));
    const State k4 = mi * (h_end * (y + step * k3));
    y += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    h_start = std::move(h_end);
    observe(s + 1, t_end, y);
  }
  return y;
}

}  // namespace detail

/// Upper bound on the spectral radius of H over the window, from the
/// Gershgorin row sums at uniformly spaced samples.
inline double spectral_bound(const HamiltonianGenerator& h, TimeWindow window,
                             std::size_t samples = 512) {
  double bound = 0.0;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double t = window.start + window.length() * static_cast<double>(i) / static_cast<double>(samples);
    bound = std::max(bound, h(t).cwiseAbs().rowwise().sum().maxCoeff());
  }
  return bound;
}

/// min(1e-3 T_p, kDefaultStepScale / |H|_max).
inline double default_dt(const HamiltonianGenerator& h, TimeWindow window, double time_unit = 1.0) {
  const double coarse = 1e-3 * time_unit;
  const double bound = spectral_bound(h, window);
  return bound > 0.0 ? std::min(coarse, kDefaultStepScale / bound) : coarse;
}

inline Trajectory propagate(const HamiltonianGenerator& h, const StateVector& psi0, double t0, double t1,
                            double dt, const PropagationOptions& opt = {}) {
  if (psi0.dim() != h.dim) throw ValidationError("initial state dimension does not match Hamiltonian");
  const std::size_t n = detail::step_count(t0, t1, dt);
  const std::size_t stride =
      opt.sample_stride > 0 ? opt.sample_stride : std::max<std::size_t>(1, n / PropagationOptions::kTargetSamples);

  Trajectory traj;
  traj.steps = n;
  traj.step = (t1 - t0) / static_cast<double>(n);
  traj.times.push_back(t0);
  traj.states.push_back(psi0.amplitudes());
  double drift = std::abs(psi0.norm_squared() - 1.0);

  detail::rk4_integrate(h, psi0.amplitudes(), t0, t1, dt, opt,
                        [&](std::size_t s, double t, const CVector& y) {
                          drift = std::max(drift, std::abs(y.squaredNorm() - 1.0));
                          if (s % stride == 0 || s == n) {
                            traj.times.push_back(t);
                            traj.states.push_back(y);
                          }
                        });
  traj.max_norm_drift = drift;
  if (opt.enforce_norm && drift > opt.norm_tolerance) {
    std::ostringstream os;
    os << "norm drift " << drift << " exceeds tolerance " << opt.norm_tolerance << "; reduce dt";
    throw NumericalError(os.str());
  }
  return traj;
}

inline Trajectory propagate(const HamiltonianGenerator& h, const StateVector& psi0, TimeWindow window,
                            double dt, const PropagationOptions& opt = {}) {
  return propagate(h, psi0, window.start, window.end, dt, opt);
}

/// max |U^dagger U - I|.
inline double unitarity_error(const CMatrix& u) {
  return (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

struct PropagatorOptions {
  bool enforce_unitarity = true;
  double unitarity_tolerance = kUnitarityTolerance;
  std::size_t hermiticity_stride = 1000;
  double hermiticity_tolerance = kHermiticityTolerance;
};

/// Column j is the propagated j-th basis vector.
inline CMatrix propagator_matrix(const HamiltonianGenerator& h, double t0, double t1, double dt,
                                 const PropagatorOptions& opt = {}) {
  PropagationOptions popt;
  popt.hermiticity_stride = opt.hermiticity_stride;
  popt.hermiticity_tolerance = opt.hermiticity_tolerance;
  CMatrix u = detail::rk4_integrate(h, CMatrix(CMatrix::Identity(h.dim, h.dim)), t0, t1, dt, popt,
                                    [](std::size_t, double, const CMatrix&) {});
  if (opt.enforce_unitarity) {
    const double err = unitarity_error(u);
    if (err > opt.unitarity_tolerance) {
      std::ostringstream os;
      os << "propagator unitarity error " << err << " exceeds tolerance " << opt.unitarity_tolerance;
      throw NumericalError(os.str());
    }
  }
  return u;
}

inline CMatrix propagator_matrix(const HamiltonianGenerator& h, TimeWindow window, double dt,
                                 const PropagatorOptions& opt = {}) {
  return propagator_matrix(h, window.start, window.end, dt, opt);
}

/// Generator of the backward evolution from t1 to t0, re-parametrized so
/// that it runs forward over [t0, t1]: H'(s) = -H(t0 + t1 - s).
inline HamiltonianGenerator time_reversed(HamiltonianGenerator h, double t0, double t1) {
  const Eigen::Index dim = h.dim;
  return {dim, [h = std::move(h), t0, t1](double s) { return CMatrix(-h(t0 + t1 - s)); }};
}

/// CSV `t,p_1,...,p_dim`.
inline void write_populations_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (Eigen::Index i = 1; i <= traj.dim(); ++i) os << ",p_" << i;
  os << '\n';
  os.precision(17);
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    os << traj.times[s];
    for (Eigen::Index i = 0; i < traj.dim(); ++i) os << ',' << std::norm(traj.states[s](i));
    os << '\n';
  }
}

/// CSV `t,re_1,im_1,...`.
inline void write_amplitudes_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (Eigen::Index i = 1; i <= traj.dim(); ++i) os << ",re_" << i << ",im_" << i;
  os << '\n';
  os.precision(17);
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    os << traj.times[s];
    for (Eigen::Index i = 0; i < traj.dim(); ++i)
      os << ',' << traj.states[s](i).real() << ',' << traj.states[s](i).imag();
    os << '\n';
  }
}

}  // namespace ctap
