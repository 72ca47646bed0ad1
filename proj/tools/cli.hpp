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

// Command-line front end. cli_main is kept separate from main() so tests can
// drive it in-process.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zq/config.hpp"
#include "zq/drift.hpp"
#include "zq/fitting.hpp"
#include "zq/records_io.hpp"
#include "zq/report.hpp"
#include "zq/scenario.hpp"

#ifndef ZQ_SCENARIO_DIR
#define ZQ_SCENARIO_DIR "scenarios"
#endif

namespace zq::cli {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;  // csv | json; empty picks the subcommand default
};

inline void emit(const GlobalOptions& g, std::ostream& out, const std::string& text) {
  if (g.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  detail::require(static_cast<bool>(f), g.out + ": cannot open for writing");
  f << text;
  detail::require(static_cast<bool>(f), g.out + ": write failed");
}

inline std::string format_of(const GlobalOptions& g, const std::string& fallback) {
  return g.format.empty() ? fallback : g.format;
}

inline ScenarioConfig load_config(const std::string& path, const GlobalOptions& g) {
  auto cfg = load_scenario(path);
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

inline std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

inline std::string records_text(const std::vector<MeasurementRecord>& recs, const std::string& fmt) {
  if (fmt == "json") {
    Json arr = Json::array();
    for (const auto& r : recs) {
      arr.push_back({{"wait_time_s", r.wait_time},
                     {"shots_x", r.shots_x},
                     {"bright_x", r.bright_x},
                     {"shots_y", r.shots_y},
                     {"bright_y", r.bright_y},
                     {"trigger_mode", std::string(to_string(r.trigger_mode))},
                     {"wall_time_s", r.wall_time}});
    }
    return json_text(arr);
  }
  std::ostringstream s;
  write_records_csv(s, recs);
  return s.str();
}

inline std::string estimates_text(const std::vector<EstimateRow>& rows, const std::string& fmt) {
  if (fmt == "json") {
    Json arr = Json::array();
    for (const auto& r : rows) {
      const auto& e = r.estimate;
      arr.push_back({{"wait_time_s", r.wait_time},
                     {"wall_time_s", r.wall_time},
                     {"trigger_mode", std::string(to_string(r.trigger_mode))},
                     {"contrast", e.contrast},
                     {"contrast_raw", r.contrast_raw},
                     {"phase_rad", e.phase},
                     {"ci_low", e.ci_low},
                     {"ci_high", e.ci_high},
                     {"confidence", e.confidence},
                     {"on_boundary", e.on_boundary},
                     {"phase_defined", e.phase_defined}});
    }
    return json_text(arr);
  }
  std::ostringstream s;
  write_estimates_csv(s, rows);
  return s.str();
}

// Flat key,value rendering of a report for --format csv.
inline std::string report_csv(const Json& j) {
  std::ostringstream s;
  s << "key,value\n";
  const auto flat = j.flatten();
  for (const auto& [k, v] : flat.items()) {
    s << k.substr(1) << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
  return s.str();
}

inline std::vector<EstimateRow> estimate_records(const std::vector<MeasurementRecord>& recs,
                                                 const std::optional<ReadoutErrorModel>& readout) {
  std::vector<EstimateRow> rows(recs.size());
  parallel_for(recs.size(), [&](std::size_t i) {
    const auto& r = recs[i];
    const auto raw = mle_coherence(r);
    rows[i].wait_time = r.wait_time;
    rows[i].wall_time = r.wall_time;
    rows[i].trigger_mode = r.trigger_mode;
    rows[i].contrast_raw = raw.contrast;
    rows[i].estimate = readout ? compensate_estimate(raw, *readout, r.wait_time) : raw;
  });
  return rows;
}

// Estimates from either CSV layout.
inline std::vector<EstimateRow> load_estimates(const std::string& path,
                                               const std::optional<ReadoutErrorModel>& readout) {
  const auto text = read_text_file(path);
  std::istringstream in(text);
  if (detect_csv_kind(text, path) == CsvKind::records) return estimate_records(read_records_csv(in, path), readout);
  return read_estimates_csv(in, path);
}

inline std::vector<ContrastPoint> points_of(const std::vector<EstimateRow>& rows) {
  std::vector<ContrastPoint> pts;
  for (const auto& r : rows) pts.push_back({r.wait_time, r.estimate.contrast, r.estimate.confidence});
  return pts;
}

inline double model_value(const DecayFit& fit, double tau, const FitSettings& fs) {
  if (fit.model == DecayModel::gaussian) {
    return std::isfinite(fit.value) ? gaussian_decay_model(tau, fit.value) : 1.0;
  }
  return std::fabs(ac_line_contrast_model(tau, fit.value, fs.line_frequency));
}

inline DecayModel model_for_data(const std::string& choice, const std::vector<EstimateRow>& rows) {
  if (choice == "gaussian") return DecayModel::gaussian;
  if (choice == "ac-line" || choice == "ac_line") return DecayModel::ac_line;
  detail::require(choice == "auto", "--model: expected auto, gaussian or ac-line");
  // Data files do not say which sequence was used; free-running data is
  // taken to be the untriggered echo.
  for (const auto& r : rows) {
    if (r.trigger_mode == TriggerMode::triggered) return DecayModel::gaussian;
  }
  return DecayModel::ac_line;
}

// Fit inputs shared by `fit` and `plotdata`: either a scenario run or a data
// file.
struct FitJob {
  std::vector<EstimateRow> rows;
  DecayFit fit;
  FitSettings settings;
  PhysicalConstants constants;
  Provenance provenance;
  std::optional<DeviationEstimate> probe;
};

struct FitArgs {
  std::string config;
  std::string input;
  std::string model = "auto";
  std::string line_frequency;
  std::string delta_max;
  bool compensate = false;
};

inline FitJob run_fit_job(const FitArgs& a, const GlobalOptions& g) {
  FitJob job;
  detail::require(!a.config.empty() || !a.input.empty(), "fit: give an input CSV or -c <config>");
  std::optional<ReadoutErrorModel> readout;
  if (a.compensate) readout = ReadoutErrorModel{};
  if (!a.config.empty()) {
    auto cfg = load_config(a.config, g);
    job.settings = cfg.fit;
    job.constants = cfg.constants;
    job.provenance = {config_hash(cfg), cfg.seed, a.input.empty() ? a.config : a.input};
    readout = cfg.readout;
    if (a.model != "auto") cfg.fit.model = parse_fit_model(a.model, "--model");
    if (a.input.empty()) {
      cfg.fit.model = cfg.fit.model == FitModelChoice::none ? FitModelChoice::automatic : cfg.fit.model;
      auto res = run_scenario(cfg);
      detail::require(res.fit.has_value(), "fit: scenario produced no decay fit (single wait time?)");
      for (const auto& p : res.points) {
        job.rows.push_back({p.tau, p.wall_time, p.record.trigger_mode, p.compensated, p.raw.contrast});
      }
      job.fit = *res.fit;
      job.probe = res.probe;
      return job;
    }
  } else {
    job.provenance.source = a.input;
  }
  if (!a.line_frequency.empty()) job.settings.line_frequency = parse_quantity(a.line_frequency, Dimension::frequency, "--line-frequency");
  if (!a.delta_max.empty()) job.settings.delta_max = parse_quantity(a.delta_max, Dimension::frequency, "--delta-max");
  job.rows = load_estimates(a.input, readout);
  const auto model = model_for_data(a.model, job.rows);
  job.fit = fit_points(points_of(job.rows), model, job.settings);
  return job;
}

inline void add_fit_options(CLI::App* sub, FitArgs& a) {
  sub->add_option("input", a.input, "records or estimates CSV");
  sub->add_option("-c,--config", a.config, "scenario file (simulate and fit, or supply readout/fit settings)");
  sub->add_option("--model", a.model, "auto | gaussian | ac-line")->check(CLI::IsMember({"auto", "gaussian", "ac-line", "ac_line"}));
  sub->add_option("--line-frequency", a.line_frequency, "ac-line frequency, e.g. '50 Hz'");
  sub->add_option("--delta-max", a.delta_max, "upper end of the Delta_ac search, e.g. '5 kHz'");
  sub->add_flag("--compensate", a.compensate, "undo the default readout-error model (20 % at 4 s)");
}

// Replaces the scalar at a dotted path ("noise.channels.0.sigma").
inline void set_yaml_path(YAML::Node root, const std::string& path, const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  detail::require(!parts.empty(), "--set: empty path");
  YAML::Node cur = root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const auto& p = parts[i];
    YAML::Node next;
    if (cur.IsSequence()) {
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), idx);
      detail::require(ec == std::errc() && ptr == p.data() + p.size() && idx < cur.size(),
                      "--set: '" + p + "' is not a valid index in " + path);
      next.reset(cur[idx]);
    } else {
      detail::require(cur.IsMap() && cur[p], "--set: no setting '" + p + "' in " + path);
      next.reset(cur[p]);
    }
    cur.reset(next);
  }
  if (cur.IsSequence()) {
    std::size_t idx = 0;
    const auto& p = parts.back();
    const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), idx);
    detail::require(ec == std::errc() && ptr == p.data() + p.size() && idx < cur.size(),
                    "--set: '" + p + "' is not a valid index in " + path);
    cur[idx] = value;
  } else {
    cur[parts.back()] = value;
  }
}

inline std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string v; std::getline(ss, v, ';');) {
    const auto t = detail::trim(v);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline int cli_main(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Zeeman-qubit dephasing simulator and analysis toolkit", "zq"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--seed", g.seed, "override the scenario master seed");
  app.add_option("--out", g.out, "write the result to this file instead of stdout");
  app.add_option("--format", g.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  std::string config;
  auto* simulate = app.add_subcommand("simulate", "scenario file -> records CSV");
  simulate->add_option("-c,--config", config, "scenario file")->required();

  std::string input;
  bool compensate = false;
  auto* estimate = app.add_subcommand("estimate", "records CSV -> coherence estimates");
  estimate->add_option("input", input, "records CSV")->required();
  estimate->add_option("-c,--config", config, "scenario file whose readout model is compensated");
  estimate->add_flag("--compensate", compensate, "undo the default readout-error model (20 % at 4 s)");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "estimates (or records) -> decay-model report");
  add_fit_options(fit, fit_args);

  std::size_t window = 2;
  auto* drift = app.add_subcommand("drift", "fixed-wait records over wall time -> drift track");
  drift->add_option("input", input, "records CSV");
  drift->add_option("-c,--config", config, "drift scenario (one wait time, several wall times)");
  drift->add_option("--window", window, "points per local slope fit (2 = finite difference)")->check(CLI::PositiveNumber);

  std::string set_path, values;
  auto* scan = app.add_subcommand("scan", "rerun a scenario while sweeping one setting");
  scan->add_option("-c,--config", config, "scenario file")->required();
  scan->add_option("--set", set_path, "dotted setting path, e.g. noise.channels.0.sigma")->required();
  scan->add_option("--values", values, "semicolon-separated values, e.g. '1 pT;2 pT;4 pT'")->required();

  std::string dir = std::string(ZQ_SCENARIO_DIR) + "/table1";
  auto* table1 = app.add_subcommand("table1", "run the eight-row coherence-table suite");
  table1->add_option("--dir", dir, "directory of row files");

  FitArgs plot_args;
  std::size_t samples = 400;
  auto* plot = app.add_subcommand("plotdata", "data points plus the fitted model curve, for plotting");
  add_fit_options(plot, plot_args);
  plot->add_option("--samples", samples, "model curve samples")->check(CLI::Range(2, 100000));

  std::vector<std::string> argv_store{"zq"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "zq: " << e.what() << "\n";
      return 1;
    }

    if (simulate->parsed()) {
      const auto cfg = load_config(config, g);
      const auto points = simulate_points(cfg);
      std::vector<MeasurementRecord> recs;
      for (const auto& p : points) recs.push_back(p.record);
      emit(g, out, records_text(recs, format_of(g, "csv")));
      return 0;
    }

    if (estimate->parsed()) {
      std::optional<ReadoutErrorModel> readout;
      if (compensate) readout = ReadoutErrorModel{};
      if (!config.empty()) readout = load_config(config, g).readout;
      const auto text = read_text_file(input);
      std::istringstream in(text);
      const auto rows = estimate_records(read_records_csv(in, input), readout);
      emit(g, out, estimates_text(rows, format_of(g, "csv")));
      return 0;
    }

    if (fit->parsed()) {
      const auto job = run_fit_job(fit_args, g);
      const auto report = fit_report(job.fit, job.constants, job.provenance, job.probe);
      emit(g, out, format_of(g, "json") == "json" ? json_text(report) : report_csv(report));
      return 0;
    }

    if (drift->parsed()) {
      DriftTrack track;
      Provenance prov;
      detail::require(!input.empty() || !config.empty(), "drift: give a records CSV or -c <config>");
      if (!config.empty()) {
        const auto cfg = load_config(config, g);
        detail::require(cfg.tau_grid.size() == 1 && cfg.wall_time_grid.size() >= 2,
                        "drift: scenario needs one wait time and at least two wall times");
        std::vector<MeasurementRecord> recs;
        for (const auto& p : simulate_points(cfg)) recs.push_back(p.record);
        track = track_drift(recs, {.window = window});
        prov = {config_hash(cfg), cfg.seed, config};
      } else {
        const auto text = read_text_file(input);
        std::istringstream in(text);
        track = track_drift(read_records_csv(in, input), {.window = window});
        prov.source = input;
      }
      if (format_of(g, "csv") == "json") {
        emit(g, out, json_text(drift_report(track, prov)));
      } else {
        std::ostringstream s;
        s << "wall_time_s,phase_rad,unwrapped_phase_rad,frequency_offset_hz,drift_rate_hz_per_s,ambiguous\n";
        for (std::size_t i = 0; i < track.points.size(); ++i) {
          const auto& p = track.points[i];
          const bool amb = std::find(track.unwrap_failures.begin(), track.unwrap_failures.end(), i) !=
                           track.unwrap_failures.end();
          s << format_number(p.wall_time) << ',' << format_number(p.phase) << ',' << format_number(p.unwrapped_phase)
            << ',' << format_number(angular_to_hertz(p.frequency_offset)) << ','
            << format_number(angular_to_hertz(p.drift_rate)) << ',' << (amb ? 1 : 0) << '\n';
        }
        emit(g, out, s.str());
      }
      for (auto i : track.unwrap_failures) {
        err << "zq: warning: ambiguous phase step before point " << i << " (true step may exceed pi)\n";
      }
      return 0;
    }

    if (scan->parsed()) {
      const auto vals = split_values(values);
      detail::require(!vals.empty(), "--values: no values given");
      Json rows = Json::array();
      std::ostringstream csv;
      csv << "value,model,fit_value,fit_stderr,threshold_time_s,threshold_censored,tau_d_s,rms_field_t,delta_ac_hz\n";
      for (const auto& v : vals) {
        auto doc = load_yaml_file(config);
        set_yaml_path(doc, set_path, v);
        ScenarioConfig cfg;
        try {
          cfg = parse_scenario(doc);
        } catch (const ValidationError& e) {
          throw ValidationError(config + " with " + set_path + "=" + v + ": " + e.what());
        }
        if (g.seed) cfg.seed = *g.seed;
        const auto res = run_scenario(cfg);
        auto opt = [](const std::optional<double>& x, double scale = 1.0) {
          return x ? format_number(*x * scale) : std::string();
        };
        const double fv = res.fit ? res.fit->value : 0.0;
        const double scale = res.model == DecayModel::ac_line ? 1.0 / kTwoPi : 1.0;
        csv << v << ',' << to_string(res.model) << ',' << (res.fit ? format_number(fv * scale) : "") << ','
            << (res.fit ? format_number(res.fit->stderr * scale) : "") << ','
            << (res.fit ? format_number(res.fit->threshold_time) : "") << ','
            << (res.fit ? (res.fit->threshold_censored ? "1" : "0") : "") << ',' << opt(res.tau_d) << ','
            << opt(res.rms_field) << ',' << opt(res.delta_ac, 1.0 / kTwoPi) << '\n';
        Json row = {{"value", v}, {"model", to_string(res.model)}};
        row["report"] = res.fit ? fit_report(*res.fit, cfg.constants, {res.config_hash, cfg.seed, config}, res.probe)
                                : Json(nullptr);
        rows.push_back(row);
      }
      emit(g, out, format_of(g, "csv") == "json" ? json_text(rows) : csv.str());
      return 0;
    }

    if (table1->parsed()) {
      const auto rep = table1_suite(dir);
      if (format_of(g, "json") == "json") {
        emit(g, out, json_text(table1_report_json(rep)));
      } else {
        std::ostringstream s;
        s << "row,tau_d_star_s,tau_d_star_censored,tau_d_s,tau_d_censored\n";
        for (const auto& r : rep.rows) {
          s << r.row.id() << ',' << format_number(r.tau_d_star.value) << ',' << (r.tau_d_star.censored ? 1 : 0)
            << ',' << format_number(r.tau_d.value) << ',' << (r.tau_d.censored ? 1 : 0) << '\n';
        }
        emit(g, out, s.str());
      }
      for (const auto& o : rep.orderings) {
        if (!o.passed) err << "zq: ordering violated: " << o.description << "\n";
      }
      for (const auto& d : rep.delta_checks) {
        if (!d.passed) err << "zq: Delta_ac not reproduced for " << d.setup << "\n";
      }
      return rep.passed ? 0 : 2;
    }

    if (plot->parsed()) {
      const auto job = run_fit_job(plot_args, g);
      std::vector<EstimateRow> rows = job.rows;
      std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.wait_time < b.wait_time; });
      double lo = rows.front().wait_time, hi = rows.back().wait_time;
      std::ostringstream s;
      s << "series,tau_s,contrast,ci_low,ci_high,model\n";
      for (const auto& r : rows) {
        s << "data," << format_number(r.wait_time) << ',' << format_number(r.estimate.contrast) << ','
          << format_number(r.estimate.ci_low) << ',' << format_number(r.estimate.ci_high) << ','
          << format_number(model_value(job.fit, r.wait_time, job.settings)) << '\n';
      }
      lo = std::min(lo, 0.0);
      for (std::size_t i = 0; i < samples; ++i) {
        const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
        s << "model," << format_number(t) << ",,,," << format_number(model_value(job.fit, t, job.settings)) << '\n';
      }
      emit(g, out, s.str());
      return 0;
    }
  } catch (const ValidationError& e) {
    err << "zq: error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "zq: numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "zq: failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace zq::cli
