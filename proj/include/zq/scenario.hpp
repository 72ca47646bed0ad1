// Copyright 2026 The zeeman-qubit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// End-to-end scenario runs: simulate every (wall time, tau) record, estimate,
// compensate the readout, fit, and derive tau_d / rms field / Delta_ac.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "zq/config.hpp"
#include "zq/drift.hpp"
#include "zq/fitting.hpp"
#include "zq/measurement.hpp"
#include "zq/mle.hpp"
#include "zq/physics.hpp"

namespace zq {

// Runs fn(i) for i in [0, n) on a small thread pool. Results must be written
// by index; the first exception is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

struct ScenarioPoint {
  double tau = 0.0;
  double wall_time = 0.0;
  MeasurementRecord record;
  CoherenceEstimate raw;
  CoherenceEstimate compensated;
};

struct ScenarioResult {
  std::string name;
  std::uint64_t seed = 0;
  std::string config_hash;
  DecayModel model = DecayModel::gaussian;
  std::vector<ScenarioPoint> points;  // wall-time major, tau minor
  std::optional<DecayFit> fit;
  std::optional<DeviationEstimate> probe;
  std::optional<DriftTrack> drift;

  std::optional<double> tau_d;      // s, Gaussian fit
  std::optional<double> rms_field;  // T, from tau_d
  std::optional<double> delta_ac;   // rad/s, ac-line fit or probe
  std::optional<double> delta_ac_stderr;

  std::vector<ContrastPoint> contrast_points() const {
    std::vector<ContrastPoint> out;
    for (const auto& p : points) out.push_back({p.tau, p.compensated.contrast, p.compensated.confidence});
    return out;
  }
};

// Readout-compensated copy of an estimate. Contrast and interval ends are
// clamped to [0, 1]; the uncertainty is only scaled, since clamping both ends
// of a near-1 interval would leave it with zero width.
inline CoherenceEstimate compensate_estimate(const CoherenceEstimate& raw, const ReadoutErrorModel& readout,
                                             double wait_time) {
  const auto errors = readout.errors_at(wait_time);
  CoherenceEstimate c = raw;
  c.contrast = compensate_contrast(raw.contrast, errors, readout.symmetry);
  const double gain = compensation_gain(errors, readout.symmetry);
  c.ci_low = std::clamp(raw.ci_low * gain, 0.0, 1.0);
  c.ci_high = std::clamp(raw.ci_high * gain, 0.0, 1.0);
  c.confidence = raw.confidence * gain;
  return c;
}

inline DecayModel resolve_model(const ScenarioConfig& cfg) {
  switch (cfg.fit.model) {
    case FitModelChoice::gaussian: return DecayModel::gaussian;
    case FitModelChoice::ac_line: return DecayModel::ac_line;
    default: break;
  }
  return (!cfg.trigger && cfg.sequence.pi_pulse_count() > 0) ? DecayModel::ac_line : DecayModel::gaussian;
}

inline DecayFit fit_points(const std::vector<ContrastPoint>& pts, DecayModel model, const FitSettings& fs) {
  if (model == DecayModel::gaussian) return fit_gaussian_decay(pts);
  return fit_ac_line_model(pts, {fs.line_frequency, fs.delta_max});
}

// Short Ramsey records at equally spaced line phases, ac line triggered.
inline std::vector<LinePhaseRecord> simulate_probe(const ScenarioConfig& cfg) {
  const auto& probe = *cfg.delta_ac_probe;
  CompositeNoise noise = cfg.noise;
  for (auto& ch : noise.channels) {
    if (auto* ac = std::get_if<AcLineNoise>(&ch)) ac->phase_mode = PhaseMode::triggered;
  }
  const auto seq = ramsey(probe.wait_time);
  std::vector<LinePhaseRecord> recs(static_cast<std::size_t>(probe.line_phases));
  // Record indices above 2^32 keep probe streams apart from the scan.
  constexpr std::uint64_t kProbeBase = 1ULL << 32;
  parallel_for(recs.size(), [&](std::size_t k) {
    const double chi = kTwoPi * static_cast<double>(k) / probe.line_phases;
    recs[k] = {chi, simulate_record(seq, noise, probe.shots_per_basis, cfg.readout, chi, {cfg.seed, kProbeBase + k})};
  });
  return recs;
}

inline double probe_line_frequency(const ScenarioConfig& cfg) {
  for (const auto& ch : cfg.noise.channels) {
    if (const auto* ac = std::get_if<AcLineNoise>(&ch)) return ac->omega_ac;
  }
  return cfg.fit.line_frequency;
}

// Simulates and estimates every (wall time, tau) point. threads = 0 uses the
// hardware concurrency; results do not depend on it.
inline std::vector<ScenarioPoint> simulate_points(const ScenarioConfig& cfg, unsigned threads = 0) {
  const auto noise = cfg.effective_noise();
  const auto trigger_phase = cfg.effective_trigger_phase();
  const std::size_t nt = cfg.tau_grid.size();
  std::vector<ScenarioPoint> points(nt * cfg.wall_time_grid.size());
  parallel_for(points.size(), [&](std::size_t idx) {
    auto& p = points[idx];
    p.tau = cfg.tau_grid[idx % nt];
    p.wall_time = cfg.wall_time_grid[idx / nt];
    const auto seq = cfg.sequence.make(p.tau);
    p.record = simulate_record(seq, noise, cfg.shots_per_basis, cfg.readout, trigger_phase, {cfg.seed, idx}, p.wall_time);
    p.raw = mle_coherence(p.record);
    p.compensated = compensate_estimate(p.raw, cfg.readout, p.tau);
  }, threads);
  return points;
}

inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult res;
  res.name = cfg.name;
  res.seed = cfg.seed;
  res.config_hash = config_hash(cfg);
  res.model = resolve_model(cfg);
  res.points = simulate_points(cfg);

  if (cfg.wall_time_grid.size() > 1 && cfg.tau_grid.size() == 1) {
    std::vector<MeasurementRecord> recs;
    for (const auto& p : res.points) recs.push_back(p.record);
    res.drift = track_drift(recs, {.window = std::min<std::size_t>(5, recs.size())});
  } else if (cfg.fit.model != FitModelChoice::none &&
             (cfg.fit.model != FitModelChoice::automatic || cfg.tau_grid.size() >= 3)) {
    res.fit = fit_points(res.contrast_points(), res.model, cfg.fit);
    if (res.model == DecayModel::gaussian && !res.fit->diverged) {
      res.tau_d = res.fit->value;
      res.rms_field = rms_field_from_dephasing(res.fit->value, cfg.constants);
    }
    if (res.model == DecayModel::ac_line && !res.fit->diverged) {
      res.delta_ac = res.fit->value;
      res.delta_ac_stderr = res.fit->stderr;
    }
  }

  if (cfg.delta_ac_probe) {
    res.probe = short_ramsey_deviation(simulate_probe(cfg), probe_line_frequency(cfg));
    if (!res.delta_ac) {
      res.delta_ac = res.probe->delta_ac;
      res.delta_ac_stderr = res.probe->stderr;
    }
  }
  return res;
}

// --- coherence table (table1) ---------------------------------------------

struct TableValue {
  double value = 0.0;  // internal units (s or rad/s)
  double uncertainty = 0.0;
  bool lower_bound = false;  // censored entry such as "> 30 ms"

  friend bool operator==(const TableValue&, const TableValue&) = default;
};

struct Table1Row {
  std::string field;   // coils | magnets
  std::string shield;  // open | closed
  bool trigger = false;
  std::optional<TableValue> tau_d_star;
  std::optional<TableValue> tau_d;
  std::optional<TableValue> delta_ac;
  ScenarioConfig ramsey;
  ScenarioConfig echo;

  std::string setup() const { return field + "/" + shield; }
  std::string id() const { return setup() + "/" + (trigger ? "triggered" : "untriggered"); }

  friend bool operator==(const Table1Row&, const Table1Row&) = default;
};

namespace detail {

inline TableValue table_value(const YAML::Node& n, Dimension d, const std::string& path) {
  require_map(n, path);
  check_keys(n, path, {"value", "uncertainty", "lower_bound"});
  TableValue v;
  if (n["lower_bound"]) {
    require(!n["value"], path + ": give value or lower_bound, not both");
    v.value = quantity(n["lower_bound"], d, join_path(path, "lower_bound"));
    v.lower_bound = true;
    return v;
  }
  require(static_cast<bool>(n["value"]), join_path(path, "value") + ": required");
  v.value = quantity(n["value"], d, join_path(path, "value"));
  if (n["uncertainty"]) v.uncertainty = quantity(n["uncertainty"], d, join_path(path, "uncertainty"));
  return v;
}

inline YAML::Node table_value_node(const TableValue& v, Dimension d) {
  YAML::Node n;
  if (v.lower_bound) {
    n["lower_bound"] = format_quantity(v.value, d);
  } else {
    n["value"] = format_quantity(v.value, d);
    n["uncertainty"] = format_quantity(v.uncertainty, d);
  }
  return n;
}

}  // namespace detail

// A table1 row file: row metadata, the table's values (for comparison),
// one shared scenario block, and separate Ramsey and echo wait-time grids.
inline Table1Row parse_table1_row(const YAML::Node& doc) {
  using namespace detail;
  require_map(doc, "");
  check_keys(doc, "", {"row", "table", "scenario", "ramsey_tau_grid", "echo_tau_grid"});
  require(doc["row"] && doc["scenario"] && doc["ramsey_tau_grid"] && doc["echo_tau_grid"],
          "document: row, scenario, ramsey_tau_grid and echo_tau_grid are required");
  Table1Row row;
  const auto r = doc["row"];
  require_map(r, "row");
  check_keys(r, "row", {"field", "shield", "trigger"});
  require(r["field"] && r["shield"] && r["trigger"], "row: field, shield and trigger are required");
  row.field = scalar(r["field"], "row.field");
  row.shield = scalar(r["shield"], "row.shield");
  require(row.field == "coils" || row.field == "magnets", "row.field: expected coils or magnets");
  require(row.shield == "open" || row.shield == "closed", "row.shield: expected open or closed");
  row.trigger = boolean(r["trigger"], "row.trigger");

  if (const auto p = doc["table"]) {
    require_map(p, "table");
    check_keys(p, "table", {"tau_d_star", "tau_d", "delta_ac"});
    if (p["tau_d_star"]) row.tau_d_star = table_value(p["tau_d_star"], Dimension::time, "table.tau_d_star");
    if (p["tau_d"]) row.tau_d = table_value(p["tau_d"], Dimension::time, "table.tau_d");
    if (p["delta_ac"]) row.delta_ac = table_value(p["delta_ac"], Dimension::frequency, "table.delta_ac");
  }

  const auto base = doc["scenario"];
  require_map(base, "scenario");
  for (const char* k : {"name", "sequence", "tau_grid", "trigger"}) {
    require(!base[k], std::string("scenario.") + k + ": set by the row file, remove it here");
  }
  const std::string stem = row.field + "-" + row.shield + "-" + (row.trigger ? "triggered" : "untriggered");
  auto make = [&](const char* seq, const char* grid_key) {
    YAML::Node n = YAML::Clone(base);
    n["name"] = stem + "-" + seq;
    n["sequence"] = seq;
    n["trigger"] = row.trigger ? "on" : "off";
    n["tau_grid"] = doc[grid_key];
    if (std::string_view(seq) == "echo") n.remove("delta_ac_probe");
    try {
      return parse_scenario(n);
    } catch (const ValidationError& e) {
      std::string msg = e.what();
      if (msg.starts_with("tau_grid")) msg = std::string(grid_key) + msg.substr(8);
      else if (!msg.starts_with("document")) msg = "scenario." + msg;
      throw ValidationError(msg);
    }
  };
  row.ramsey = make("ramsey", "ramsey_tau_grid");
  row.echo = make("echo", "echo_tau_grid");
  return row;
}

inline Table1Row load_table1_row(const std::string& path) {
  try {
    return parse_table1_row(load_yaml_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline std::string serialize_table1_row(const Table1Row& row) {
  YAML::Node doc;
  doc["row"]["field"] = row.field;
  doc["row"]["shield"] = row.shield;
  doc["row"]["trigger"] = row.trigger ? "on" : "off";
  if (row.tau_d_star) doc["table"]["tau_d_star"] = detail::table_value_node(*row.tau_d_star, Dimension::time);
  if (row.tau_d) doc["table"]["tau_d"] = detail::table_value_node(*row.tau_d, Dimension::time);
  if (row.delta_ac) doc["table"]["delta_ac"] = detail::table_value_node(*row.delta_ac, Dimension::frequency);
  YAML::Node base = scenario_to_yaml(row.ramsey);
  for (const char* k : {"name", "sequence", "tau_grid", "trigger"}) base.remove(k);
  doc["scenario"] = base;
  doc["ramsey_tau_grid"] = detail::quantity_list(row.ramsey.tau_grid, Dimension::time);
  doc["echo_tau_grid"] = detail::quantity_list(row.echo.tau_grid, Dimension::time);
  YAML::Emitter out;
  out << doc;
  return std::string(out.c_str()) + "\n";
}

// The value a row reports for one sequence: the Gaussian tau_d when the row
// is line-triggered and the fit converged, otherwise the time after which
// the contrast stays below 1/sqrt(e).
struct ReportedTime {
  double value = 0.0;
  bool censored = false;  // still above threshold at the last wait time
  bool from_fit = false;
};

inline ReportedTime reported_time(const ScenarioResult& r, bool triggered) {
  ReportedTime t;
  if (!r.fit) return t;
  if (triggered && r.fit->model == DecayModel::gaussian && !r.fit->diverged) {
    t.value = r.fit->value;
    t.from_fit = true;
    return t;
  }
  t.value = r.fit->threshold_time;
  t.censored = r.fit->threshold_censored;
  return t;
}

struct Table1RowResult {
  Table1Row row;
  ScenarioResult ramsey;
  ScenarioResult echo;
  ReportedTime tau_d_star;
  ReportedTime tau_d;
};

struct OrderingCheck {
  std::string description;
  double greater = 0.0;  // value expected to be larger
  double lesser = 0.0;
  bool passed = false;
};

struct DeltaAcCheck {
  std::string setup;
  std::string method;  // "short-ramsey" or "ac-line fit"
  double input = 0.0;  // rad/s, configured
  double table = 0.0;
  double table_uncertainty = 0.0;
  double measured = 0.0;
  double stderr = 0.0;
  bool passed = false;
};

struct Table1Report {
  std::vector<Table1RowResult> rows;
  std::vector<OrderingCheck> orderings;
  std::vector<DeltaAcCheck> delta_checks;
  bool passed = true;
};

inline Table1RowResult run_table1_row(const Table1Row& row) {
  Table1RowResult out;
  out.row = row;
  out.ramsey = run_scenario(row.ramsey);
  out.echo = run_scenario(row.echo);
  out.tau_d_star = reported_time(out.ramsey, row.trigger);
  out.tau_d = reported_time(out.echo, row.trigger);
  return out;
}

inline std::vector<std::string> table1_row_files(const std::string& dir) {
  namespace fs = std::filesystem;
  detail::require(fs::is_directory(dir), dir + ": not a directory");
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".yaml" || ext == ".yml")) files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  detail::require(!files.empty(), dir + ": no row files");
  return files;
}

namespace detail {

inline double configured_delta_ac(const ScenarioConfig& cfg) {
  for (const auto& ch : cfg.noise.channels) {
    if (const auto* ac = std::get_if<AcLineNoise>(&ch)) return ac->delta_ac * cfg.noise.field_scale();
  }
  return 0.0;
}

}  // namespace detail

// Checks the qualitative orderings and the Delta_ac reproduction on finished
// rows. Censored values enter with their lower bound.
inline void evaluate_table1(Table1Report& rep) {
  auto find = [&](const std::string& field, const std::string& shield, bool trig) -> const Table1RowResult* {
    for (const auto& r : rep.rows) {
      if (r.row.field == field && r.row.shield == shield && r.row.trigger == trig) return &r;
    }
    return nullptr;
  };
  auto add = [&](std::string what, double greater, double lesser) {
    rep.orderings.push_back({std::move(what), greater, lesser, greater > lesser});
  };

  for (const auto& r : rep.rows) {
    add(r.row.id() + ": echo tau_d > Ramsey tau_d*", r.tau_d.value, r.tau_d_star.value);
  }
  for (const char* field : {"coils", "magnets"}) {
    for (const char* shield : {"open", "closed"}) {
      const auto* on = find(field, shield, true);
      const auto* off = find(field, shield, false);
      if (!on || !off) continue;
      const std::string s = std::string(field) + "/" + shield;
      add(s + ": triggered > untriggered (Ramsey)", on->tau_d_star.value, off->tau_d_star.value);
      add(s + ": triggered > untriggered (echo)", on->tau_d.value, off->tau_d.value);
    }
    for (bool trig : {false, true}) {
      const auto* closed = find(field, "closed", trig);
      const auto* open = find(field, "open", trig);
      if (!closed || !open) continue;
      const std::string s = std::string(field) + "/" + (trig ? "triggered" : "untriggered");
      add(s + ": closed > open (Ramsey)", closed->tau_d_star.value, open->tau_d_star.value);
      add(s + ": closed > open (echo)", closed->tau_d.value, open->tau_d.value);
    }
  }
  if (const auto* best = find("magnets", "closed", true)) {
    for (const auto& r : rep.rows) {
      if (&r == best) continue;
      add("magnets/closed/triggered tau_d > " + r.row.id() + " tau_d", best->tau_d.value, r.tau_d.value);
    }
  }

  // Delta_ac per setup: probe if any row has one, else the ac-line fit.
  std::vector<std::string> setups;
  for (const auto& r : rep.rows) {
    if (std::find(setups.begin(), setups.end(), r.row.setup()) == setups.end()) setups.push_back(r.row.setup());
  }
  for (const auto& s : setups) {
    DeltaAcCheck c;
    c.setup = s;
    bool found = false;
    for (const auto& r : rep.rows) {
      if (r.row.setup() != s) continue;
      if (r.row.delta_ac && !r.row.delta_ac->lower_bound) {
        c.table = r.row.delta_ac->value;
        c.table_uncertainty = r.row.delta_ac->uncertainty;
      }
      c.input = detail::configured_delta_ac(r.row.ramsey);
      for (const auto* res : {&r.ramsey, &r.echo}) {
        if (found || !res->delta_ac) continue;
        c.measured = *res->delta_ac;
        c.stderr = res->delta_ac_stderr.value_or(0.0);
        c.method = res->probe ? "short-ramsey" : "ac-line fit";
        found = true;
      }
    }
    if (!found || c.table_uncertainty <= 0.0) continue;
    c.passed = std::fabs(c.measured - c.table) <= 2.0 * c.table_uncertainty;
    rep.delta_checks.push_back(c);
  }

  rep.passed = !rep.rows.empty();
  for (const auto& o : rep.orderings) rep.passed = rep.passed && o.passed;
  for (const auto& d : rep.delta_checks) rep.passed = rep.passed && d.passed;
}

inline Table1Report table1_suite(const std::string& dir) {
  Table1Report rep;
  for (const auto& f : table1_row_files(dir)) rep.rows.push_back(run_table1_row(load_table1_row(f)));
  evaluate_table1(rep);
  return rep;
}

}  // namespace zq
