#pragma once

// Gaussian hopping-rate envelopes and the protocol presets built from them.
// Units: hbar = 1, times in T_p, rates in Omega_0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ctap/error.hpp"

namespace ctap {

/// Window-edge pulse values must stay below this fraction of the peak.
inline constexpr double kTailTolerance = 1e-6;

/// Half-widths (in units of the pulse width) added on each side of the
/// pulse centers when building a default window; exp(-16) at the edge.
inline constexpr double kWindowHalfWidths = 4.0;

struct GaussianPulse {
  double amplitude = 0.0;
  double center = 0.0;
  double width = 1.0;

  double operator()(double t) const {
    const double x = (t - center) / width;
    return amplitude * std::exp(-x * x);
  }

  bool identically_zero() const { return amplitude == 0.0; }
};

inline double eval_pulse(const GaussianPulse& p, double t) { return p(t); }

inline void validate(const GaussianPulse& p) {
  if (!std::isfinite(p.amplitude) || p.amplitude < 0.0)
    throw ValidationError("pulse amplitude must be finite and >= 0");
  if (!std::isfinite(p.width) || p.width <= 0.0)
    throw ValidationError("pulse width must be finite and > 0");
  if (!std::isfinite(p.center)) throw ValidationError("pulse center must be finite");
}

struct TimeWindow {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
};

struct LabeledPulse {
  std::string label;
  GaussianPulse pulse;
};

/// Window covering every pulse center +/- kWindowHalfWidths widths.
inline TimeWindow default_window(const std::vector<LabeledPulse>& pulses) {
  if (pulses.empty()) throw ValidationError("schedule needs at least one pulse");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [label, p] : pulses) {
    lo = std::min(lo, p.center - kWindowHalfWidths * p.width);
    hi = std::max(hi, p.center + kWindowHalfWidths * p.width);
  }
  return {lo, hi};
}

/// Immutable named set of Gaussian hopping rates over a finite time window.
class PulseSchedule {
 public:
  PulseSchedule(std::vector<LabeledPulse> pulses, TimeWindow window)
      : pulses_(std::move(pulses)), window_(window) {
    check();
  }

  explicit PulseSchedule(std::vector<LabeledPulse> pulses)
      : PulseSchedule(pulses, default_window(pulses)) {}

  const std::vector<LabeledPulse>& pulses() const { return pulses_; }
  const TimeWindow& window() const { return window_; }

  bool has(std::string_view label) const { return find(label) != nullptr; }

  const GaussianPulse& pulse(std::string_view label) const {
    if (const auto* p = find(label)) return *p;
    throw ValidationError("schedule has no pulse labeled '" + std::string(label) + "'");
  }

  /// Rate of the labeled pulse; absent labels evaluate to zero.
  double rate(std::string_view label, double t) const {
    const auto* p = find(label);
    return p ? (*p)(t) : 0.0;
  }

  double max_amplitude() const {
    double m = 0.0;
    for (const auto& lp : pulses_) m = std::max(m, lp.pulse.amplitude);
    return m;
  }

 private:
  const GaussianPulse* find(std::string_view label) const {
    for (const auto& lp : pulses_)
      if (lp.label == label) return &lp.pulse;
    return nullptr;
  }

  void check() const {
    if (pulses_.empty()) throw ValidationError("schedule needs at least one pulse");
    if (!(window_.end > window_.start))
      throw ValidationError("schedule window must satisfy t_start < t_end");
    for (std::size_t i = 0; i < pulses_.size(); ++i) {
      validate(pulses_[i].pulse);
      for (std::size_t j = 0; j < i; ++j)
        if (pulses_[i].label == pulses_[j].label)
          throw ValidationError("duplicate pulse label '" + pulses_[i].label + "'");
    }
    const double peak = max_amplitude();
    for (const auto& [label, p] : pulses_) {
      const double edge = std::max(p(window_.start), p(window_.end));
      if (edge > kTailTolerance * peak)
        throw ValidationError("pulse '" + label + "' is not negligible at the window boundary");
    }
  }

  std::vector<LabeledPulse> pulses_;
  TimeWindow window_;
};

namespace label {
inline constexpr std::string_view kOmega1 = "omega1";
inline constexpr std::string_view kOmega2 = "omega2";
inline constexpr std::string_view kOmega3 = "omega3";
inline constexpr std::string_view kOmega4 = "omega4";
}  // namespace label

namespace detail {
inline void require_positive(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0) throw ValidationError(std::string(what) + " must be > 0");
}
}  // namespace detail

/// Rectangular-lattice protocol: omega3 = omega4 peak at -tau/2, before
/// omega1 = omega2 at +tau/2.
inline PulseSchedule rect_counterintuitive_schedule(double omega0, double tau, double tp) {
  detail::require_positive(omega0, "omega0");
  detail::require_positive(tp, "T_p");
  if (!std::isfinite(tau)) throw ValidationError("tau must be finite");
  const GaussianPulse late{omega0, +tau / 2.0, tp};
  const GaussianPulse early{omega0, -tau / 2.0, tp};
  std::vector<LabeledPulse> pulses{{std::string(label::kOmega1), late},
                                   {std::string(label::kOmega2), late},
                                   {std::string(label::kOmega3), early},
                                   {std::string(label::kOmega4), early}};
  const double half = std::abs(tau) / 2.0 + kWindowHalfWidths * tp;
  return PulseSchedule(std::move(pulses), {-half, half});
}

/// Triangular-lattice protocol; sigma = 0 gives the half-square case.
inline PulseSchedule tri_schedule(double omega0, double tau, double tp, double sigma) {
  detail::require_positive(omega0, "omega0");
  detail::require_positive(tp, "T_p");
  if (!std::isfinite(tau)) throw ValidationError("tau must be finite");
  if (!std::isfinite(sigma) || sigma < 0.0) throw ValidationError("sigma must be >= 0");
  std::vector<LabeledPulse> pulses{
      {std::string(label::kOmega1), {omega0, +tau / 2.0, tp}},
      {std::string(label::kOmega2), {omega0, -tau / 2.0, tp}},
      {std::string(label::kOmega3), {sigma * omega0, 0.0, tp}}};
  const double half = std::abs(tau) / 2.0 + kWindowHalfWidths * tp;
  return PulseSchedule(std::move(pulses), {-half, half});
}

struct RandomPulseRanges {
  double amplitude_min = 1.0, amplitude_max = 15.0;
  double center_min = -1.5, center_max = 1.5;
  double width_min = 0.5, width_max = 1.5;
};

/// Independent uniform draws per label, on the default window. Low
/// amplitudes make many of these schedules strongly non-adiabatic.
inline PulseSchedule random_gaussian_schedule(std::mt19937_64& rng, const std::vector<std::string_view>& labels,
                                              const RandomPulseRanges& r = {}) {
  std::uniform_real_distribution<double> amp(r.amplitude_min, r.amplitude_max);
  std::uniform_real_distribution<double> centre(r.center_min, r.center_max);
  std::uniform_real_distribution<double> width(r.width_min, r.width_max);
  std::vector<LabeledPulse> pulses;
  for (auto l : labels) {
    const double a = amp(rng), c = centre(rng), w = width(rng);
    pulses.push_back({std::string(l), {a, c, w}});
  }
  const auto window = default_window(pulses);
  return PulseSchedule(std::move(pulses), window);
}

inline void to_json(nlohmann::json& j, const PulseSchedule& s) {
  j = nlohmann::json::object();
  auto& arr = j["pulses"] = nlohmann::json::array();
  for (const auto& [label, p] : s.pulses())
    arr.push_back({{"label", label}, {"amplitude", p.amplitude}, {"center", p.center}, {"width", p.width}});
  j["window"] = {s.window().start, s.window().end};
}

inline PulseSchedule schedule_from_json(const nlohmann::json& j) {
  try {
    std::vector<LabeledPulse> pulses;
    for (const auto& e : j.at("pulses"))
      pulses.push_back({e.at("label").get<std::string>(),
                        {e.at("amplitude").get<double>(), e.at("center").get<double>(),
                         e.at("width").get<double>()}});
    const auto& w = j.at("window");
    if (!w.is_array() || w.size() != 2) throw ValidationError("window must be [t0, t1]");
    return PulseSchedule(std::move(pulses), {w[0].get<double>(), w[1].get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed schedule JSON: ") + e.what());
  }
}

}  // namespace ctap
