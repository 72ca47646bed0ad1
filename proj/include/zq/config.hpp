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

// Scenario configuration: a YAML document with unit-suffixed scalars.
//
//   name: magnets-closed-triggered-echo
//   sequence: echo                  # ramsey | echo | cpmg:<n>
//   trigger: on                     # line trigger on | off
//   tau_grid: {start: 0.25 s, stop: 4 s, count: 16}   # or a list
//   shots_per_basis: 300
//   seed: 2026
//   noise:
//     attenuation: 0 dB
//     channels:
//       - {type: quasi_static, sigma: 3.818 pT, resample: per_segment}
//
// See scenarios/ for complete, annotated files.

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "zq/errors.hpp"
#include "zq/measurement.hpp"
#include "zq/noise.hpp"
#include "zq/physics.hpp"
#include "zq/sequence.hpp"
#include "zq/units.hpp"

namespace zq {

enum class FitModelChoice { automatic, gaussian, ac_line, none };

inline std::string_view to_string(FitModelChoice m) {
  switch (m) {
    case FitModelChoice::automatic: return "auto";
    case FitModelChoice::gaussian: return "gaussian";
    case FitModelChoice::ac_line: return "ac-line";
    case FitModelChoice::none: return "none";
  }
  return "auto";
}

inline FitModelChoice parse_fit_model(std::string_view s, std::string_view field = "fit.model") {
  if (s == "auto") return FitModelChoice::automatic;
  if (s == "gaussian") return FitModelChoice::gaussian;
  if (s == "ac-line" || s == "ac_line") return FitModelChoice::ac_line;
  if (s == "none") return FitModelChoice::none;
  throw ValidationError(std::string(field) + ": expected auto, gaussian, ac-line or none, got '" +
                        std::string(s) + "'");
}

struct FitSettings {
  FitModelChoice model = FitModelChoice::automatic;
  double line_frequency = kTwoPi * 50.0;  // rad/s, for the ac-line model
  double delta_max = kTwoPi * 5000.0;     // rad/s, upper end of the ac-line search

  friend bool operator==(const FitSettings&, const FitSettings&) = default;
};

// Short Ramsey scans at fixed line phases, measuring the ac-line modulation
// depth directly.
struct DeltaAcProbe {
  double wait_time = 1e-4;  // s
  int line_phases = 8;      // equally spaced over one line cycle
  long shots_per_basis = 2000;

  friend bool operator==(const DeltaAcProbe&, const DeltaAcProbe&) = default;
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  SequenceSpec sequence;
  bool trigger = false;
  double trigger_phase = 0.0;  // rad, line phase at sequence start when triggered
  std::vector<double> tau_grid;
  std::vector<double> wall_time_grid{0.0};
  long shots_per_basis = 300;
  std::uint64_t seed = 0;
  ReadoutErrorModel readout;
  PhysicalConstants constants;
  CompositeNoise noise;
  FitSettings fit;
  std::optional<DeltaAcProbe> delta_ac_probe;

  void validate() const {
    detail::require(!name.empty(), "name: must not be empty");
    detail::require(!tau_grid.empty(), "tau_grid: must not be empty");
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
      detail::require(std::isfinite(tau_grid[i]) && tau_grid[i] > 0.0,
                      "tau_grid[" + std::to_string(i) + "]: wait times must be positive");
      if (i > 0) {
        detail::require(tau_grid[i] > tau_grid[i - 1],
                        "tau_grid[" + std::to_string(i) + "]: wait times must be strictly increasing");
      }
    }
    detail::require(!wall_time_grid.empty(), "wall_time_grid: must not be empty");
    for (std::size_t i = 1; i < wall_time_grid.size(); ++i) {
      detail::require(wall_time_grid[i] > wall_time_grid[i - 1],
                      "wall_time_grid[" + std::to_string(i) + "]: wall times must be strictly increasing");
    }
    detail::require(shots_per_basis >= 1, "shots_per_basis: must be at least 1");
    detail::require(std::isfinite(trigger_phase), "trigger_phase: must be finite");
    detail::require(fit.line_frequency > 0.0, "fit.line_frequency: must be positive");
    detail::require(fit.delta_max > 0.0, "fit.delta_max: must be positive");
    if (delta_ac_probe) {
      detail::require(delta_ac_probe->wait_time > 0.0, "delta_ac_probe.wait_time: must be positive");
      detail::require(delta_ac_probe->line_phases >= 4, "delta_ac_probe.line_phases: must be at least 4");
      detail::require(delta_ac_probe->shots_per_basis >= 1,
                      "delta_ac_probe.shots_per_basis: must be at least 1");
    }
    constants.validate();
    readout.validate();
    noise.validate();
  }

  // Noise with every ac-line channel set to the scenario's trigger mode.
  CompositeNoise effective_noise() const {
    CompositeNoise n = noise;
    for (auto& ch : n.channels) {
      if (auto* ac = std::get_if<AcLineNoise>(&ch)) {
        ac->phase_mode = trigger ? PhaseMode::triggered : PhaseMode::free_running;
      }
    }
    return n;
  }

  std::optional<double> effective_trigger_phase() const {
    return trigger ? std::optional<double>(trigger_phase) : std::nullopt;
  }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

namespace detail {

inline std::string join_path(std::string_view base, std::string_view key) {
  if (base.empty()) return std::string(key);
  return std::string(base) + "." + std::string(key);
}

inline std::string index_path(std::string_view base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

inline void require_map(const YAML::Node& n, std::string_view path) {
  require(n.IsMap(), std::string(path.empty() ? "document" : path) + ": expected a mapping");
}

inline void check_keys(const YAML::Node& n, std::string_view path,
                       std::initializer_list<std::string_view> allowed) {
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    require(ok, join_path(path, key) + ": unknown setting");
  }
}

inline std::string scalar(const YAML::Node& n, const std::string& path) {
  require(n.IsScalar(), path + ": expected a scalar value");
  return n.Scalar();
}

inline double quantity(const YAML::Node& n, Dimension d, const std::string& path) {
  return parse_quantity(scalar(n, path), d, path);
}

inline bool boolean(const YAML::Node& n, const std::string& path) {
  const auto s = scalar(n, path);
  if (s == "on" || s == "true" || s == "yes") return true;
  if (s == "off" || s == "false" || s == "no") return false;
  throw ValidationError(path + ": expected on/off, got '" + s + "'");
}

template <class Int>
Int integer(const YAML::Node& n, const std::string& path) {
  const auto s = scalar(n, path);
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(), path + ": expected an integer, got '" + s + "'");
  return v;
}

// A list of quantities, or {start, stop, count[, spacing: linear|log]}.
inline std::vector<double> grid(const YAML::Node& n, Dimension d, const std::string& path) {
  std::vector<double> out;
  if (n.IsSequence()) {
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(quantity(n[i], d, index_path(path, i)));
    return out;
  }
  require(n.IsMap(), path + ": expected a list or {start, stop, count}");
  check_keys(n, path, {"start", "stop", "count", "spacing"});
  require(n["start"] && n["stop"] && n["count"], path + ": needs start, stop and count");
  const double a = quantity(n["start"], d, join_path(path, "start"));
  const double b = quantity(n["stop"], d, join_path(path, "stop"));
  const auto count = integer<long>(n["count"], join_path(path, "count"));
  require(count >= 1, join_path(path, "count") + ": must be at least 1");
  const std::string spacing = n["spacing"] ? scalar(n["spacing"], join_path(path, "spacing")) : "linear";
  require(spacing == "linear" || spacing == "log", join_path(path, "spacing") + ": expected linear or log");
  if (count == 1) return {a};
  if (spacing == "log") require(a > 0.0 && b > 0.0, path + ": log spacing needs positive bounds");
  for (long i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(spacing == "log" ? std::exp(std::log(a) + f * (std::log(b) - std::log(a))) : a + f * (b - a));
  }
  out.back() = b;
  return out;
}

inline std::vector<ErrorPoint> error_points(const YAML::Node& n, const std::string& path) {
  require(n.IsSequence(), path + ": expected a list of [wait_time, epsilon] pairs");
  std::vector<ErrorPoint> pts;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto p = index_path(path, i);
    require(n[i].IsSequence() && n[i].size() == 2, p + ": expected [wait_time, epsilon]");
    pts.push_back({quantity(n[i][0], Dimension::time, p + "[0]"),
                   quantity(n[i][1], Dimension::dimensionless, p + "[1]")});
  }
  return pts;
}

inline ReadoutErrorModel readout_model(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) {
    const auto s = n.Scalar();
    if (s == "none") return ReadoutErrorModel::none();
    if (s == "default") return ReadoutErrorModel{};
    throw ValidationError(path + ": expected none, default or a mapping");
  }
  require_map(n, path);
  check_keys(n, path, {"symmetry", "error_at", "down_error_at"});
  ReadoutErrorModel m;
  if (n["symmetry"]) {
    const auto s = scalar(n["symmetry"], join_path(path, "symmetry"));
    require(s == "symmetric" || s == "asymmetric", join_path(path, "symmetry") + ": expected symmetric or asymmetric");
    m.symmetry = s == "symmetric" ? ReadoutSymmetry::symmetric : ReadoutSymmetry::asymmetric;
  }
  if (n["error_at"]) m.error_at = error_points(n["error_at"], join_path(path, "error_at"));
  if (n["down_error_at"]) m.down_error_at = error_points(n["down_error_at"], join_path(path, "down_error_at"));
  return m;
}

// A quasi-static rms may be given as a field (T) or as a frequency.
inline double field_or_frequency(const YAML::Node& n, const PhysicalConstants& c, const std::string& path) {
  const auto s = scalar(n, path);
  const auto t = trim(s);
  if (!t.empty() && t.back() == 'T') return dephasing_sigma_from_field(parse_quantity(s, Dimension::field, path), c);
  return parse_quantity(s, Dimension::frequency, path);
}

inline NoiseChannel channel(const YAML::Node& n, const PhysicalConstants& c, const std::string& path) {
  require_map(n, path);
  require(static_cast<bool>(n["type"]), join_path(path, "type") + ": missing channel type");
  const auto type = scalar(n["type"], join_path(path, "type"));
  auto key = [&](std::string_view k) { return join_path(path, k); };

  if (type == "ac_line") {
    check_keys(n, path, {"type", "delta", "line_frequency", "mains_jitter"});
    AcLineNoise ac;
    require(static_cast<bool>(n["delta"]), key("delta") + ": required");
    ac.delta_ac = quantity(n["delta"], Dimension::frequency, key("delta"));
    if (n["line_frequency"]) ac.omega_ac = quantity(n["line_frequency"], Dimension::frequency, key("line_frequency"));
    if (n["mains_jitter"]) ac.mains_jitter_sigma = quantity(n["mains_jitter"], Dimension::frequency, key("mains_jitter"));
    return ac;
  }
  if (type == "quasi_static") {
    check_keys(n, path, {"type", "sigma", "resample"});
    QuasiStaticGaussianNoise qs;
    require(static_cast<bool>(n["sigma"]), key("sigma") + ": required");
    qs.sigma = field_or_frequency(n["sigma"], c, key("sigma"));
    if (n["resample"]) {
      const auto r = scalar(n["resample"], key("resample"));
      require(r == "per_shot" || r == "per_segment", key("resample") + ": expected per_shot or per_segment");
      qs.policy = r == "per_shot" ? ResamplePolicy::per_shot : ResamplePolicy::per_segment;
    }
    return qs;
  }
  if (type == "random_walk") {
    check_keys(n, path, {"type", "diffusion", "persist_across_shots", "step", "shot_interval"});
    RandomWalkDrift w;
    require(static_cast<bool>(n["diffusion"]), key("diffusion") + ": required");
    w.diffusion = quantity(n["diffusion"], Dimension::diffusion, key("diffusion"));
    if (n["persist_across_shots"]) w.persist_across_shots = boolean(n["persist_across_shots"], key("persist_across_shots"));
    if (n["step"]) w.step = quantity(n["step"], Dimension::time, key("step"));
    if (n["shot_interval"]) w.shot_interval = quantity(n["shot_interval"], Dimension::time, key("shot_interval"));
    return w;
  }
  if (type == "position_gradient") {
    check_keys(n, path, {"type", "gradient", "position_sigma"});
    PositionGradientNoise g;
    if (n["gradient"]) g.gradient = quantity(n["gradient"], Dimension::gradient, key("gradient"));
    require(static_cast<bool>(n["position_sigma"]), key("position_sigma") + ": required");
    g.position_sigma = quantity(n["position_sigma"], Dimension::length, key("position_sigma"));
    return g;
  }
  if (type == "thermal") {
    check_keys(n, path, {"type", "coefficient", "splitting", "field", "trajectory"});
    ThermalDriftNoise th;
    if (n["coefficient"]) th.temp_coefficient = quantity(n["coefficient"], Dimension::inverse_temperature, key("coefficient"));
    require(!(n["splitting"] && n["field"]), path + ": give splitting or field, not both");
    if (n["splitting"]) {
      th.base_splitting = quantity(n["splitting"], Dimension::frequency, key("splitting"));
    } else {
      require(static_cast<bool>(n["field"]), path + ": needs splitting or field");
      th.base_splitting = zeeman_splitting(quantity(n["field"], Dimension::field, key("field")), c);
    }
    const auto tr = n["trajectory"];
    require(tr && tr.IsSequence(), key("trajectory") + ": expected a list of [time, temperature] pairs");
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const auto p = index_path(key("trajectory"), i);
      require(tr[i].IsSequence() && tr[i].size() == 2, p + ": expected [time, temperature]");
      th.trajectory.push_back({quantity(tr[i][0], Dimension::time, p + "[0]"),
                               quantity(tr[i][1], Dimension::temperature, p + "[1]")});
    }
    return th;
  }
  throw ValidationError(key("type") + ": unknown channel type '" + type +
                        "' (expected ac_line, quasi_static, random_walk, position_gradient or thermal)");
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const YAML::Node& doc) {
  using namespace detail;
  require_map(doc, "");
  check_keys(doc, "", {"name", "description", "sequence", "trigger", "trigger_phase", "tau_grid",
                       "wall_time_grid", "shots_per_basis", "seed", "readout", "constants", "noise",
                       "fit", "delta_ac_probe"});
  ScenarioConfig cfg;
  require(doc["name"] && doc["sequence"] && doc["tau_grid"], "document: name, sequence and tau_grid are required");
  cfg.name = scalar(doc["name"], "name");
  if (doc["description"]) cfg.description = scalar(doc["description"], "description");
  cfg.sequence = SequenceSpec::parse(scalar(doc["sequence"], "sequence"));
  if (doc["trigger"]) cfg.trigger = boolean(doc["trigger"], "trigger");
  if (doc["trigger_phase"]) cfg.trigger_phase = quantity(doc["trigger_phase"], Dimension::angle, "trigger_phase");
  if (doc["shots_per_basis"]) cfg.shots_per_basis = integer<long>(doc["shots_per_basis"], "shots_per_basis");
  if (doc["seed"]) cfg.seed = integer<std::uint64_t>(doc["seed"], "seed");

  if (const auto c = doc["constants"]) {
    require_map(c, "constants");
    check_keys(c, "constants", {"bohr_magneton", "hbar", "electron_g_factor"});
    if (c["bohr_magneton"]) cfg.constants.bohr_magneton = quantity(c["bohr_magneton"], Dimension::dimensionless, "constants.bohr_magneton");
    if (c["hbar"]) cfg.constants.hbar = quantity(c["hbar"], Dimension::dimensionless, "constants.hbar");
    if (c["electron_g_factor"]) cfg.constants.electron_g_factor = quantity(c["electron_g_factor"], Dimension::dimensionless, "constants.electron_g_factor");
    cfg.constants.validate();
  }

  cfg.tau_grid = grid(doc["tau_grid"], Dimension::time, "tau_grid");
  if (doc["wall_time_grid"]) cfg.wall_time_grid = grid(doc["wall_time_grid"], Dimension::time, "wall_time_grid");
  if (doc["readout"]) cfg.readout = readout_model(doc["readout"], "readout");

  if (const auto n = doc["noise"]) {
    require_map(n, "noise");
    check_keys(n, "noise", {"attenuation", "channels"});
    if (n["attenuation"]) cfg.noise.attenuation_db = quantity(n["attenuation"], Dimension::attenuation, "noise.attenuation");
    if (const auto chs = n["channels"]) {
      require(chs.IsSequence(), "noise.channels: expected a list");
      for (std::size_t i = 0; i < chs.size(); ++i) {
        cfg.noise.channels.push_back(channel(chs[i], cfg.constants, index_path("noise.channels", i)));
      }
    }
  }

  if (const auto f = doc["fit"]) {
    require_map(f, "fit");
    check_keys(f, "fit", {"model", "line_frequency", "delta_max"});
    if (f["model"]) cfg.fit.model = parse_fit_model(scalar(f["model"], "fit.model"));
    if (f["line_frequency"]) cfg.fit.line_frequency = quantity(f["line_frequency"], Dimension::frequency, "fit.line_frequency");
    if (f["delta_max"]) cfg.fit.delta_max = quantity(f["delta_max"], Dimension::frequency, "fit.delta_max");
  }

  if (const auto p = doc["delta_ac_probe"]) {
    require_map(p, "delta_ac_probe");
    check_keys(p, "delta_ac_probe", {"wait_time", "line_phases", "shots_per_basis"});
    DeltaAcProbe probe;
    if (p["wait_time"]) probe.wait_time = quantity(p["wait_time"], Dimension::time, "delta_ac_probe.wait_time");
    if (p["line_phases"]) probe.line_phases = integer<int>(p["line_phases"], "delta_ac_probe.line_phases");
    if (p["shots_per_basis"]) probe.shots_per_basis = integer<long>(p["shots_per_basis"], "delta_ac_probe.shots_per_basis");
    cfg.delta_ac_probe = probe;
  }

  cfg.validate();
  return cfg;
}

inline YAML::Node load_yaml_text(const std::string& text, const std::string& source = "config") {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(source + ": YAML syntax error: " + e.what());
  }
}

inline YAML::Node load_yaml_file(const std::string& path) {
  std::ifstream in(path);
  detail::require(static_cast<bool>(in), path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_yaml_text(ss.str(), path);
}

inline ScenarioConfig parse_scenario_text(const std::string& text) { return parse_scenario(load_yaml_text(text)); }

inline ScenarioConfig load_scenario(const std::string& path) {
  try {
    return parse_scenario(load_yaml_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

namespace detail {

inline YAML::Node quantity_list(const std::vector<double>& xs, Dimension d) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (double x : xs) n.push_back(format_quantity(x, d));
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

inline YAML::Node pair_list(const std::vector<std::pair<double, double>>& xs, Dimension a, Dimension b) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (const auto& [x, y] : xs) {
    YAML::Node p(YAML::NodeType::Sequence);
    p.push_back(format_quantity(x, a));
    p.push_back(format_quantity(y, b));
    p.SetStyle(YAML::EmitterStyle::Flow);
    n.push_back(p);
  }
  return n;
}

inline YAML::Node error_points_node(const std::vector<ErrorPoint>& pts) {
  std::vector<std::pair<double, double>> xs;
  for (const auto& p : pts) xs.emplace_back(p.wait_time, p.epsilon);
  return pair_list(xs, Dimension::time, Dimension::dimensionless);
}

struct ChannelWriter {
  YAML::Node operator()(const AcLineNoise& ac) const {
    YAML::Node n;
    n["type"] = "ac_line";
    n["delta"] = format_quantity(ac.delta_ac, Dimension::frequency);
    n["line_frequency"] = format_quantity(ac.omega_ac, Dimension::frequency);
    n["mains_jitter"] = format_quantity(ac.mains_jitter_sigma, Dimension::frequency);
    return n;
  }
  YAML::Node operator()(const QuasiStaticGaussianNoise& qs) const {
    YAML::Node n;
    n["type"] = "quasi_static";
    n["sigma"] = format_quantity(qs.sigma, Dimension::frequency);
    n["resample"] = qs.policy == ResamplePolicy::per_shot ? "per_shot" : "per_segment";
    return n;
  }
  YAML::Node operator()(const RandomWalkDrift& w) const {
    YAML::Node n;
    n["type"] = "random_walk";
    n["diffusion"] = format_quantity(w.diffusion, Dimension::diffusion);
    n["persist_across_shots"] = w.persist_across_shots ? "on" : "off";
    n["step"] = format_quantity(w.step, Dimension::time);
    n["shot_interval"] = format_quantity(w.shot_interval, Dimension::time);
    return n;
  }
  YAML::Node operator()(const PositionGradientNoise& g) const {
    YAML::Node n;
    n["type"] = "position_gradient";
    n["gradient"] = format_quantity(g.gradient, Dimension::gradient);
    n["position_sigma"] = format_quantity(g.position_sigma, Dimension::length);
    return n;
  }
  YAML::Node operator()(const ThermalDriftNoise& th) const {
    YAML::Node n;
    n["type"] = "thermal";
    n["coefficient"] = format_quantity(th.temp_coefficient, Dimension::inverse_temperature);
    n["splitting"] = format_quantity(th.base_splitting, Dimension::frequency);
    std::vector<std::pair<double, double>> xs;
    for (const auto& p : th.trajectory) xs.emplace_back(p.time, p.kelvin);
    n["trajectory"] = pair_list(xs, Dimension::time, Dimension::temperature);
    return n;
  }
};

}  // namespace detail

inline YAML::Node scenario_to_yaml(const ScenarioConfig& cfg) {
  YAML::Node doc;
  doc["name"] = cfg.name;
  if (!cfg.description.empty()) doc["description"] = cfg.description;
  doc["sequence"] = cfg.sequence.to_string();
  doc["trigger"] = cfg.trigger ? "on" : "off";
  doc["trigger_phase"] = format_quantity(cfg.trigger_phase, Dimension::angle);
  doc["tau_grid"] = detail::quantity_list(cfg.tau_grid, Dimension::time);
  doc["wall_time_grid"] = detail::quantity_list(cfg.wall_time_grid, Dimension::time);
  doc["shots_per_basis"] = std::to_string(cfg.shots_per_basis);
  doc["seed"] = std::to_string(cfg.seed);

  YAML::Node ro;
  ro["symmetry"] = cfg.readout.symmetry == ReadoutSymmetry::symmetric ? "symmetric" : "asymmetric";
  ro["error_at"] = detail::error_points_node(cfg.readout.error_at);
  if (!cfg.readout.down_error_at.empty()) ro["down_error_at"] = detail::error_points_node(cfg.readout.down_error_at);
  doc["readout"] = ro;

  YAML::Node c;
  c["bohr_magneton"] = format_number(cfg.constants.bohr_magneton);
  c["hbar"] = format_number(cfg.constants.hbar);
  c["electron_g_factor"] = format_number(cfg.constants.electron_g_factor);
  doc["constants"] = c;

  YAML::Node noise;
  noise["attenuation"] = format_quantity(cfg.noise.attenuation_db, Dimension::attenuation);
  YAML::Node chs(YAML::NodeType::Sequence);
  for (const auto& ch : cfg.noise.channels) chs.push_back(std::visit(detail::ChannelWriter{}, ch));
  noise["channels"] = chs;
  doc["noise"] = noise;

  YAML::Node fit;
  fit["model"] = std::string(to_string(cfg.fit.model));
  fit["line_frequency"] = format_quantity(cfg.fit.line_frequency, Dimension::frequency);
  fit["delta_max"] = format_quantity(cfg.fit.delta_max, Dimension::frequency);
  doc["fit"] = fit;

  if (cfg.delta_ac_probe) {
    YAML::Node p;
    p["wait_time"] = format_quantity(cfg.delta_ac_probe->wait_time, Dimension::time);
    p["line_phases"] = std::to_string(cfg.delta_ac_probe->line_phases);
    p["shots_per_basis"] = std::to_string(cfg.delta_ac_probe->shots_per_basis);
    doc["delta_ac_probe"] = p;
  }
  return doc;
}

inline std::string serialize_scenario(const ScenarioConfig& cfg) {
  YAML::Emitter out;
  out << scenario_to_yaml(cfg);
  return std::string(out.c_str()) + "\n";
}

// 64-bit FNV-1a of the canonical serialisation.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string config_hash(const ScenarioConfig& cfg) {
  std::array<char, 17> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + 16, fnv1a64(serialize_scenario(cfg)), 16);
  std::string hex(buf.data(), ptr);
  return "fnv1a64:" + std::string(16 - hex.size(), '0') + hex;
}

}  // namespace zq
