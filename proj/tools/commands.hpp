#pragma once

// Subcommand implementations for the ctap driver. Each command returns the
// process exit status and writes its files under RunConfig::output_dir.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctap/ctap.hpp"

namespace ctap::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

inline constexpr const char* kOutputDirEnv = "CTAP_OUTPUT_DIR";
inline constexpr double kOracleTolerance = 1e-6;

struct RunConfig {
  std::string model = "rect";
  int n = 3;
  double omega0_tp = 30.0;
  double tau_tp = 1.0;
  std::optional<double> sigma;
  std::string initial;  ///< "3" for rect, "n,m" for the Fock lattices
  double dt = 0.0;      ///< 0 selects the default step
  std::string output_dir;
  std::string schedule_file;
  std::uint64_t seed = 42;
  int count = 1;
  std::size_t spectrum_samples = 2001;
  std::string param = "omega0-tp";
  std::vector<double> grid;
  std::array<double, 3> ising_rates{1.0, 1.0, 1.0};
  bool amplitudes = false;
};

inline json to_json(const RunConfig& c) {
  json j{{"model", c.model},
         {"n", c.n},
         {"omega0_tp", c.omega0_tp},
         {"tau_tp", c.tau_tp},
         {"sigma", c.sigma ? json(*c.sigma) : json(nullptr)},
         {"initial", c.initial},
         {"dt", c.dt},
         {"seed", c.seed},
         {"count", c.count},
         {"spectrum_samples", c.spectrum_samples},
         {"param", c.param},
         {"grid", c.grid},
         {"ising_rates", c.ising_rates},
         {"schedule_file", c.schedule_file}};
  return j;
}

inline json units_json() {
  return {{"hbar", 1},
          {"time", "T_p (pulse width), fixed to 1"},
          {"rate", "1/T_p; omega0_tp is the peak rate times T_p"}};
}

inline std::filesystem::path output_dir(const RunConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return ".";
}

/// Opens a file for writing under the output directory, creating it.
inline std::ofstream open_output(const RunConfig& c, const std::string& name) {
  const auto dir = output_dir(c);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream os(dir / name);
  if (!os) throw ValidationError("cannot write output file " + (dir / name).string());
  os.precision(17);
  return os;
}

inline void write_json_file(const RunConfig& c, const std::string& name, const json& j) {
  auto os = open_output(c, name);
  os << j.dump(2) << '\n';
  if (!os) throw ValidationError("failed writing " + name);
}

// ---------------------------------------------------------------------------
// Validation and parsing.

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

inline FockSite parse_fock_site(const std::string& s) {
  const auto comma = s.find(',');
  require(comma != std::string::npos, "Fock site must be given as n,m");
  try {
    std::size_t used = 0;
    const auto head = s.substr(0, comma), tail = s.substr(comma + 1);
    const int n = std::stoi(head, &used);
    require(used == head.size(), "bad Fock site '" + s + "'");
    const int m = std::stoi(tail, &used);
    require(used == tail.size(), "bad Fock site '" + s + "'");
    return {n, m};
  } catch (const std::logic_error&) {
    throw ValidationError("bad Fock site '" + s + "'");
  }
}

inline int parse_rect_site(const std::string& s) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    require(used == s.size(), "bad rect site '" + s + "'");
    RectSiteMap::check(v);
    return v;
  } catch (const std::logic_error&) {
    throw ValidationError("bad rect site '" + s + "'");
  }
}

inline bool is_fock_model(const std::string& m) { return m == "tri" || m == "halfsquare"; }

inline double effective_sigma(const RunConfig& c) {
  if (c.model == "halfsquare") {
    require(!c.sigma || *c.sigma == 0.0, "halfsquare has omega3 = 0; drop --sigma");
    return 0.0;
  }
  return c.sigma.value_or(2.0);
}

inline void validate_common(const RunConfig& c) {
  require(std::isfinite(c.omega0_tp) && c.omega0_tp > 0.0, "--omega0-tp must be > 0");
  require(std::isfinite(c.tau_tp), "--tau-tp must be finite");
  require(std::isfinite(c.dt) && c.dt >= 0.0, "--dt must be >= 0");
  if (c.sigma) require(std::isfinite(*c.sigma) && *c.sigma >= 0.0, "--sigma must be >= 0");
}

inline void validate_fock_n(const RunConfig& c) {
  require(c.n >= 1 && c.n <= kMaxTriN, "--n must be in 1.." + std::to_string(kMaxTriN));
}

inline PulseSchedule load_schedule(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), "cannot read schedule file " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ValidationError("schedule file is not JSON: " + std::string(e.what()));
  }
  return schedule_from_json(j);
}

inline PulseSchedule rect_schedule(const RunConfig& c) {
  if (!c.schedule_file.empty()) return load_schedule(c.schedule_file);
  return rect_counterintuitive_schedule(c.omega0_tp, c.tau_tp, 1.0);
}

inline PulseSchedule fock_schedule(const RunConfig& c) {
  if (!c.schedule_file.empty()) return load_schedule(c.schedule_file);
  return tri_schedule(c.omega0_tp, c.tau_tp, 1.0, effective_sigma(c));
}

/// Point reflection through the centre site: 3 <-> 7, 1 <-> 9, 2 <-> 8.
inline int rect_target(int site) { return kRectSites + 1 - site; }

inline std::vector<double> snapshot_times(TimeWindow w, int count = 5) {
  std::vector<double> t;
  for (int i = 0; i < count; ++i) t.push_back(w.start + w.length() * i / (count - 1));
  return t;
}

inline std::size_t nearest_sample(const Trajectory& traj, double t) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < traj.times.size(); ++s)
    if (std::abs(traj.times[s] - t) < std::abs(traj.times[best] - t)) best = s;
  return best;
}

inline json rect_snapshots(const Trajectory& traj, const std::vector<double>& times) {
  auto out = json::array();
  for (double t : times) {
    const auto s = nearest_sample(traj, t);
    auto grid = json::array();
    for (int site = 1; site <= kRectSites; ++site)
      grid.push_back({{"site", site},
                      {"row", RectSiteMap::row(site)},
                      {"col", RectSiteMap::col(site)},
                      {"p", std::norm(traj.states[s](site - 1))}});
    out.push_back({{"t", traj.times[s]}, {"grid", grid}});
  }
  return out;
}

inline void write_trajectory(const RunConfig& c, const std::string& stem, const Trajectory& traj) {
  {
    auto os = open_output(c, stem + "_populations.csv");
    write_populations_csv(os, traj);
  }
  if (c.amplitudes) {
    auto os = open_output(c, stem + "_amplitudes.csv");
    write_amplitudes_csv(os, traj);
  }
}

inline json summary_header(const RunConfig& c, const std::string& model) {
  return {{"model", model}, {"config", to_json(c)}, {"units", units_json()}};
}

// ---------------------------------------------------------------------------
// Model runs. Each returns the summary it wrote.

inline json run_rect(const RunConfig& c, std::ostream& out) {
  validate_common(c);
  const int initial = parse_rect_site(c.initial.empty() ? "3" : c.initial);
  const auto schedule = rect_schedule(c);
  const auto run = run_rect_ctap(schedule, initial, c.dt);
  const int target = rect_target(initial);

  json s = summary_header(c, "rect");
  s["schedule"] = schedule;
  s["initial"] = initial;
  s["target_site"] = target;
  s["final_populations"] = run.final_populations;
  s["fidelity"] = run.fidelity(target);
  s["fidelity_site7"] = run.fidelity(7);
  s["dark_leakage_max"] = run.dark_leakage_max;
  s["max_norm_drift"] = run.trajectory.max_norm_drift;
  s["dt"] = run.trajectory.step;
  s["steps"] = run.trajectory.steps;

  write_trajectory(c, "rect", run.trajectory);
  write_json_file(c, "rect_snapshots.json", rect_snapshots(run.trajectory, snapshot_times(schedule.window())));
  write_json_file(c, "rect_summary.json", s);
  out << "rect: site " << initial << " -> " << target << " fidelity " << run.fidelity(target) << '\n';
  return s;
}

inline json run_fock(const RunConfig& c, std::ostream& out) {
  validate_common(c);
  validate_fock_n(c);
  const TriLattice lat(c.n);
  const FockSite initial = c.initial.empty() ? FockSite{c.n, 0} : parse_fock_site(c.initial);
  require(lat.contains(initial), "--initial is not a lattice site for this N");
  const auto schedule = fock_schedule(c);
  const auto run = run_tri_ctap(c.n, schedule, initial, c.dt);
  const FockSite target{initial.m, initial.n};

  json s = summary_header(c, c.model);
  s["schedule"] = schedule;
  s["n"] = c.n;
  s["initial"] = {initial.n, initial.m};
  s["target_site"] = {target.n, target.m};
  auto pops = json::array();
  for (int i = 0; i < lat.site_count(); ++i)
    pops.push_back({{"n", lat.site(i).n}, {"m", lat.site(i).m}, {"p", run.final_populations[i]}});
  s["final_populations"] = pops;
  s["fidelity"] = run.population(target);
  s["off_row_max"] = run.off_row_max;
  s["max_norm_drift"] = run.trajectory.max_norm_drift;
  s["dt"] = run.trajectory.step;
  s["steps"] = run.trajectory.steps;

  write_trajectory(c, c.model, run.trajectory);
  write_json_file(c, c.model + "_snapshots.json", tri_snapshots(lat, run.trajectory, snapshot_times(schedule.window())));
  write_json_file(c, c.model + "_summary.json", s);
  out << c.model << ": (" << initial.n << ',' << initial.m << ") -> (" << target.n << ',' << target.m
      << ") fidelity " << run.population(target) << '\n';
  return s;
}

inline void write_spectrum_csv(std::ostream& os, const SpectrumTrack& tr) {
  os << "t,lambda_lower,lambda_transfer,lambda_upper\n";
  for (std::size_t s = 0; s < tr.times.size(); ++s)
    os << tr.times[s] << ',' << tr.lambda[0][s] << ',' << tr.lambda[1][s] << ',' << tr.lambda[2][s] << '\n';
}

inline json spectrum_report(const SpectrumTrack& tr) {
  return {{"min_gap_12", tr.min_gap_12},
          {"min_gap_23", tr.min_gap_23},
          {"min_relative_gap", tr.min_relative_gap},
          {"ambiguous_samples", tr.ambiguous_samples},
          {"ordering_changed", tr.ordering_changed},
          {"crossing", tr.crossing}};
}

inline json run_spectrum(const RunConfig& c, std::ostream& out) {
  validate_common(c);
  require(c.spectrum_samples >= 2, "--samples must be >= 2");
  const auto schedule = fock_schedule(c);
  const auto sys = tri_three_level(schedule);
  const auto tr = track_spectrum(sys, schedule.window(), c.spectrum_samples);

  json s = summary_header(c, "spectrum");
  s["schedule"] = schedule;
  s["spectrum"] = spectrum_report(tr);
  {
    auto os = open_output(c, "spectrum.csv");
    write_spectrum_csv(os, tr);
  }
  write_json_file(c, "spectrum_summary.json", s);
  out << "spectrum: min gaps " << tr.min_gap_12 << ' ' << tr.min_gap_23 << (tr.crossing ? " (crossing)" : "")
      << '\n';
  return s;
}

inline json run_ionmap(const RunConfig& c, std::ostream& out) {
  require(c.n >= 1 && c.n <= kMaxTriN, "--n must be in 1.." + std::to_string(kMaxTriN));
  for (double r : c.ising_rates) require(std::isfinite(r), "Ising rates must be finite");
  const auto& r = c.ising_rates;
  const auto im = build_ising_matrix(c.n, r[0], r[1], r[2]);
  {
    auto os = open_output(c, "ionmap_symbolic.csv");
    write_ising_csv(os, im, true);
  }
  {
    auto os = open_output(c, "ionmap_numeric.csv");
    write_ising_csv(os, im, false);
  }
  json s = summary_header(c, "ionmap");
  s["spins"] = im.spins();
  auto lin = json::array();
  for (const auto& site : im.linearization) lin.push_back({site.n, site.m});
  s["linearization"] = lin;
  if (c.n <= kMaxSingleExcitationN) {
    s["single_excitation_deviation"] = verify_single_excitation(c.n, r[0], r[1], r[2]).max_deviation;
  } else {
    s["single_excitation_deviation"] = nullptr;
  }
  write_json_file(c, "ionmap_summary.json", s);
  write_ising_csv(out, im, true);
  return s;
}

inline int guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

inline int cmd_run(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    if (c.model == "rect") {
      run_rect(c, out);
    } else if (is_fock_model(c.model)) {
      run_fock(c, out);
    } else if (c.model == "spectrum") {
      run_spectrum(c, out);
    } else if (c.model == "ionmap") {
      run_ionmap(c, out);
    } else if (c.model == "oracle") {
      throw ValidationError("use the oracle subcommand for factorization checks");
    } else {
      throw ValidationError("unknown model '" + c.model + "'");
    }
  });
}

// ---------------------------------------------------------------------------
// Factorization oracle.

struct OracleCase {
  PulseSchedule schedule;
  double deviation = 0.0;
  double direct_unitarity = 0.0;
};

inline std::vector<std::string_view> oracle_labels(const std::string& model) {
  if (model == "rect") return {label::kOmega1, label::kOmega2, label::kOmega3, label::kOmega4};
  return {label::kOmega1, label::kOmega2, label::kOmega3};
}

inline OracleCase oracle_case(const RunConfig& c, PulseSchedule schedule) {
  const PropagatorOptions unchecked{false};
  OracleCase oc{std::move(schedule)};
  const auto w = oc.schedule.window();
  if (c.model == "rect") {
    const auto gen = rect_generator(oc.schedule);
    const double dt = c.dt > 0.0 ? c.dt : default_dt(gen, w);
    const CMatrix direct = propagator_matrix(gen, w, dt, unchecked);
    const auto [ssys, tsys] = rect_subsystems(oc.schedule);
    const auto s = stirap_propagator(ssys, w, dt, unchecked);
    const auto t = stirap_propagator(tsys, w, dt, unchecked);
    oc.deviation = (rect_factorized_transfer(s, t) - direct).cwiseAbs().maxCoeff();
    oc.direct_unitarity = unitarity_error(direct);
  } else {
    const TriLattice lat(c.n);
    const auto gen = tri_generator(lat, oc.schedule);
    const double dt = c.dt > 0.0 ? c.dt : default_dt(gen, w);
    const CMatrix direct = propagator_matrix(gen, w, dt, unchecked);
    const auto s = stirap_propagator(tri_three_level(oc.schedule), w, dt, unchecked);
    oc.deviation = (theta_fock(lat, s, false) - direct).cwiseAbs().maxCoeff();
    oc.direct_unitarity = unitarity_error(direct);
  }
  return oc;
}

inline int cmd_oracle(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  int status = kExitOk;
  const int rc = guarded(err, [&] {
    require(c.model == "rect" || c.model == "tri", "oracle model must be rect or tri");
    require(std::isfinite(c.dt) && c.dt >= 0.0, "--dt must be >= 0");
    require(c.count >= 1, "--count must be >= 1");
    if (c.model == "tri") validate_fock_n(c);

    std::mt19937_64 rng(c.seed);
    json s = summary_header(c, "oracle");
    s["oracle_model"] = c.model;
    s["seed"] = c.seed;
    s["tolerance"] = kOracleTolerance;
    auto cases = json::array();
    double worst = 0.0;
    for (int k = 0; k < c.count; ++k) {
      auto schedule = c.schedule_file.empty() ? random_gaussian_schedule(rng, oracle_labels(c.model))
                                              : load_schedule(c.schedule_file);
      const auto oc = oracle_case(c, std::move(schedule));
      worst = std::max(worst, oc.deviation);
      cases.push_back({{"schedule", oc.schedule},
                       {"deviation", oc.deviation},
                       {"direct_unitarity_error", oc.direct_unitarity}});
    }
    s["cases"] = cases;
    s["max_deviation"] = worst;
    s["pass"] = worst <= kOracleTolerance;
    write_json_file(c, "oracle_" + c.model + "_summary.json", s);
    out << "oracle " << c.model << ": max deviation " << worst << " (seed " << c.seed << ")\n";
    if (!(worst <= kOracleTolerance)) {
      err << "factorized and direct propagators differ by " << worst << " > " << kOracleTolerance << '\n';
      status = kExitNumerical;
    }
  });
  return rc != kExitOk ? rc : status;
}

// ---------------------------------------------------------------------------
// Parameter sweep.

struct SweepRow {
  double value = 0.0;
  double fidelity = 0.0;
  double min_gap = 0.0;
  double min_relative_gap = 0.0;
};

inline RunConfig with_param(RunConfig c, double v) {
  if (c.param == "omega0-tp") {
    c.omega0_tp = v;
  } else if (c.param == "tau-tp") {
    c.tau_tp = v;
  } else if (c.param == "sigma") {
    c.sigma = v;
  } else {
    throw ValidationError("unknown sweep parameter '" + c.param + "'");
  }
  return c;
}

inline void record_gaps(SweepRow& row, const SpectrumTrack& tr) {
  row.min_gap = std::min(tr.min_gap_12, tr.min_gap_23);
  row.min_relative_gap = tr.min_relative_gap;
}

inline SweepRow sweep_row(const RunConfig& c, double v) {
  const auto p = with_param(c, v);
  validate_common(p);
  SweepRow row{v};
  if (p.model == "rect") {
    const int initial = parse_rect_site(p.initial.empty() ? "3" : p.initial);
    const auto schedule = rect_schedule(p);
    row.fidelity = run_rect_ctap(schedule, initial, p.dt).fidelity(rect_target(initial));
    record_gaps(row, track_spectrum(rect_subsystems(schedule).first, schedule.window(), p.spectrum_samples));
  } else if (is_fock_model(p.model)) {
    validate_fock_n(p);
    const FockSite initial = p.initial.empty() ? FockSite{p.n, 0} : parse_fock_site(p.initial);
    const auto schedule = fock_schedule(p);
    row.fidelity = run_tri_ctap(p.n, schedule, initial, p.dt).population({initial.m, initial.n});
    record_gaps(row, track_spectrum(tri_three_level(schedule), schedule.window(), p.spectrum_samples));
  } else if (p.model == "spectrum") {
    const auto schedule = fock_schedule(p);
    const auto sys = tri_three_level(schedule);
    row.fidelity = std::norm(stirap_propagator(sys, schedule.window(), p.dt)(2, 0));
    record_gaps(row, track_spectrum(sys, schedule.window(), p.spectrum_samples));
  } else {
    throw ValidationError("sweep model must be rect, halfsquare, tri or spectrum");
  }
  return row;
}

inline int cmd_sweep(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    require(!c.grid.empty(), "sweep grid is empty");
    with_param(c, c.grid.front());
    std::vector<SweepRow> rows;
    rows.reserve(c.grid.size());
    for (double v : c.grid) rows.push_back(sweep_row(c, v));

    auto os = open_output(c, "sweep_" + c.model + ".csv");
    os << c.param << ",fidelity,min_gap,min_relative_gap\n";
    for (const auto& r : rows)
      os << r.value << ',' << r.fidelity << ',' << r.min_gap << ',' << r.min_relative_gap << '\n';
    json s = summary_header(c, "sweep");
    auto arr = json::array();
    for (const auto& r : rows) arr.push_back({{"value", r.value},
                    {"fidelity", r.fidelity},
                    {"min_gap", r.min_gap},
                    {"min_relative_gap", r.min_relative_gap}});
    s["rows"] = arr;
    write_json_file(c, "sweep_" + c.model + "_summary.json", s);
    out << "sweep " << c.model << ": " << rows.size() << " rows\n";
  });
}

inline int cmd_spectrum(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] { run_spectrum(c, out); });
}

inline int cmd_ionmap(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] { run_ionmap(c, out); });
}

// ---------------------------------------------------------------------------
// Dark-state residuals on random rate tuples.

inline int cmd_darkstate(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    require(c.model == "rect" || c.model == "halfsquare", "darkstate model must be rect or halfsquare");
    require(c.count >= 1, "--count must be >= 1");
    if (c.model == "halfsquare") validate_fock_n(c);
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> rate(0.1, 10.0);
    double worst_residual = 0.0, worst_norm = 0.0;
    for (int k = 0; k < c.count; ++k) {
      if (c.model == "rect") {
        const RectRates r{rate(rng), rate(rng), rate(rng), rate(rng)};
        const auto d = rect_dark_state(r);
        const CVector res = build_rect_hamiltonian(r).cast<Complex>() * d.amplitudes();
        worst_residual = std::max(worst_residual, res.cwiseAbs().maxCoeff());
        worst_norm = std::max(worst_norm, std::abs(d.amplitudes().norm() - 1.0));
      } else {
        const double o1 = rate(rng), o2 = rate(rng);
        const auto d = halfsquare_dark_state(c.n, o1 / o2);
        const CVector res = build_tri_hamiltonian(c.n, o1, o2, 0.0).cast<Complex>() * d.amplitudes();
        worst_residual = std::max(worst_residual, res.cwiseAbs().maxCoeff());
        worst_norm = std::max(worst_norm, std::abs(d.amplitudes().norm() - 1.0));
      }
    }
    json s = summary_header(c, "darkstate");
    s["seed"] = c.seed;
    s["samples"] = c.count;
    s["max_residual"] = worst_residual;
    s["max_norm_error"] = worst_norm;
    write_json_file(c, "darkstate_" + c.model + "_summary.json", s);
    out << "darkstate " << c.model << ": max |H d| " << worst_residual << '\n';
  });
}

}  // namespace ctap::cli
