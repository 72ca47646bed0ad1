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

#include <catch_amalgamated.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "json.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = zq::cli::cli_main(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("zq_cli_test_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string scenario(const std::string& name) { return std::string(ZQ_SCENARIO_DIR) + "/" + name; }

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

double num(const std::string& s) {
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

const std::string kSmallGauss = R"(name: small-gauss
sequence: ramsey
trigger: on
tau_grid: {start: 2 ms, stop: 40 ms, count: 10}
shots_per_basis: 200
seed: 11
readout: default
noise:
  channels:
    - {type: quasi_static, sigma: 100 rad/s}
)";

}  // namespace

TEST_CASE("simulate twice with the same seed is byte-identical", "[cli][property]") {
  TempDir tmp;
  const auto cfg = scenario("magnets_closed_untriggered_echo.yaml");
  REQUIRE(run({"--seed", "7", "--out", tmp.file("a.csv"), "simulate", "-c", cfg}).code == 0);
  REQUIRE(run({"--seed", "7", "--out", tmp.file("b.csv"), "simulate", "-c", cfg}).code == 0);
  const auto a = slurp(tmp.file("a.csv"));
  CHECK(a == slurp(tmp.file("b.csv")));
  CHECK(a.starts_with(std::string(zq::kRecordsHeader)));
  REQUIRE(run({"--seed", "8", "--out", tmp.file("c.csv"), "simulate", "-c", cfg}).code == 0);
  CHECK(a != slurp(tmp.file("c.csv")));
}

TEST_CASE("estimate rejects bright counts above shots with the column named", "[cli][errors]") {
  TempDir tmp;
  write(tmp.file("bad.csv"),
        "wait_time_s,shots_x,bright_x,shots_y,bright_y,trigger_mode\n"
        "0.01,100,40,100,50,triggered\n"
        "0.02,100,120,100,50,triggered\n");
  const auto r = run({"estimate", tmp.file("bad.csv")});
  CHECK(r.code == 1);
  CHECK(r.out.empty());
  CHECK_THAT(r.err, ContainsSubstring("line 3, column bright_x"));
  CHECK_THAT(r.err, ContainsSubstring("120 exceeds shots_x (100)"));
}

TEST_CASE("other malformed inputs exit 1", "[cli][errors]") {
  TempDir tmp;
  write(tmp.file("missing.csv"), "wait_time_s,shots_x,bright_x\n0.01,100,3\n");
  CHECK_THAT(run({"estimate", tmp.file("missing.csv")}).err, ContainsSubstring("missing column 'shots_y'"));
  write(tmp.file("word.csv"),
        "wait_time_s,shots_x,bright_x,shots_y,bright_y,trigger_mode\n0.01,100,many,100,3,triggered\n");
  const auto w = run({"estimate", tmp.file("word.csv")});
  CHECK(w.code == 1);
  CHECK_THAT(w.err, ContainsSubstring("column bright_x"));
  CHECK(run({"estimate", tmp.file("nope.csv")}).code == 1);
  write(tmp.file("cfg.yaml"), "name: x\nsequence: echo\ntau_grid: [1 ms]\nshots_per_basis: -3\n");
  const auto c = run({"simulate", "-c", tmp.file("cfg.yaml")});
  CHECK(c.code == 1);
  CHECK_THAT(c.err, ContainsSubstring("shots_per_basis"));
}

TEST_CASE("command-line usage errors exit 1, help exits 0", "[cli][errors]") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"simulate"}).code == 1);
  CHECK(run({"--format", "xml", "table1"}).code == 1);
  const auto h = run({"--help"});
  CHECK(h.code == 0);
  CHECK_THAT(h.out, ContainsSubstring("plotdata"));
}

TEST_CASE("fit --model ac-line on free-running echo data reports delta_ac_hz near 25", "[cli]") {
  TempDir tmp;
  REQUIRE(run({"--out", tmp.file("rec.csv"), "simulate", "-c", scenario("magnets_closed_untriggered_echo.yaml")})
              .code == 0);
  const auto r = run({"fit", "--model", "ac-line", tmp.file("rec.csv")});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["model"] == "ac_line");
  CHECK_THAT(j["params"]["delta_ac_hz"].get<double>(), WithinAbs(25.0, 0.5));
  CHECK(j["stderr"]["delta_ac_hz"].get<double>() > 0.0);
  CHECK(j["n_points"] == 116);
  CHECK(j.contains("residual_norm"));
  CHECK(j["provenance"]["config_hash"].is_null());
  CHECK(j["provenance"]["source"] == tmp.file("rec.csv"));
}

TEST_CASE("fit report from a config carries hash and seed", "[cli]") {
  TempDir tmp;
  write(tmp.file("g.yaml"), kSmallGauss);
  const auto r = run({"--seed", "12", "fit", "-c", tmp.file("g.yaml")});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["model"] == "gaussian");
  CHECK(j["provenance"]["seed"] == 12);
  CHECK(j["provenance"]["config_hash"].get<std::string>().starts_with("fnv1a64:"));
  CHECK(j["params"].contains("tau_d_s"));
  CHECK(j["params"].contains("rms_field_t"));
  const auto csv = run({"--seed", "12", "--format", "csv", "fit", "-c", tmp.file("g.yaml")});
  CHECK_THAT(csv.out, ContainsSubstring("params/tau_d_s,"));
}

TEST_CASE("simulate -> estimate -> fit through files matches the in-process run", "[cli][property]") {
  TempDir tmp;
  write(tmp.file("g.yaml"), kSmallGauss);
  REQUIRE(run({"--out", tmp.file("rec.csv"), "simulate", "-c", tmp.file("g.yaml")}).code == 0);
  REQUIRE(run({"--out", tmp.file("est.csv"), "estimate", "-c", tmp.file("g.yaml"), tmp.file("rec.csv")}).code == 0);
  const auto from_files = nlohmann::json::parse(run({"fit", "--model", "gaussian", tmp.file("est.csv")}).out);
  const auto direct = nlohmann::json::parse(run({"fit", "-c", tmp.file("g.yaml")}).out);
  CHECK(from_files["params"]["tau_d_s"].get<double>() == direct["params"]["tau_d_s"].get<double>());
  // Records given straight to fit are estimated on the fly.
  const auto from_records =
      nlohmann::json::parse(run({"fit", "--model", "gaussian", "--compensate", tmp.file("rec.csv")}).out);
  CHECK(from_records["params"]["tau_d_s"].get<double>() == direct["params"]["tau_d_s"].get<double>());
}

TEST_CASE("plotdata model column equals the fitted model exactly", "[cli][property]") {
  TempDir tmp;
  write(tmp.file("g.yaml"), kSmallGauss);
  const auto fit = nlohmann::json::parse(run({"fit", "-c", tmp.file("g.yaml")}).out);
  const double tau_d = fit["params"]["tau_d_s"].get<double>();
  const auto p = run({"plotdata", "-c", tmp.file("g.yaml"), "--samples", "50"});
  REQUIRE(p.code == 0);
  const auto rows = csv_rows(p.out);
  REQUIRE(rows[0] == std::vector<std::string>{"series", "tau_s", "contrast", "ci_low", "ci_high", "model"});
  int data = 0, model = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    REQUIRE(r.size() == 6);
    CHECK(num(r[5]) == zq::gaussian_decay_model(num(r[1]), tau_d));
    (r[0] == "data" ? data : model) += 1;
  }
  CHECK(data == 10);
  CHECK(model == 50);

  // Same for the ac-line model on the free-running echo.
  const auto cfg = scenario("magnets_closed_untriggered_echo.yaml");
  const auto ac = nlohmann::json::parse(run({"fit", "-c", cfg}).out);
  const double delta = zq::hertz_to_angular(ac["params"]["delta_ac_hz"].get<double>());
  const double omega = zq::hertz_to_angular(50.0);
  for (const auto& r : csv_rows(run({"plotdata", "-c", cfg, "--samples", "20"}).out)) {
    if (r[0] != "data") continue;
    CHECK_THAT(num(r[5]), WithinAbs(std::fabs(zq::ac_line_contrast_model(num(r[1]), delta, omega)), 1e-12));
  }
}

TEST_CASE("drift subcommand writes a track", "[cli]") {
  TempDir tmp;
  write(tmp.file("d.yaml"), R"(name: d
sequence: ramsey
trigger: on
tau_grid: [20 ms]
wall_time_grid: {start: 0 s, stop: 5 min, count: 6}
shots_per_basis: 200
seed: 3
readout: none
)");
  REQUIRE(run({"--out", tmp.file("rec.csv"), "simulate", "-c", tmp.file("d.yaml")}).code == 0);
  const auto r = run({"drift", tmp.file("rec.csv")});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0][0] == "wall_time_s");
  const auto j = nlohmann::json::parse(run({"--format", "json", "drift", "-c", tmp.file("d.yaml"), "--window", "3"}).out);
  CHECK(j["model"] == "drift");
  CHECK(j["points"].size() == 6);
}

TEST_CASE("scan sweeps one setting", "[cli]") {
  TempDir tmp;
  write(tmp.file("g.yaml"), kSmallGauss);
  const auto r = run({"scan", "-c", tmp.file("g.yaml"), "--set", "noise.channels.0.sigma", "--values",
                      "50 rad/s; 100 rad/s"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "50 rad/s");
  // Twice the noise, half the dephasing time.
  CHECK(num(rows[1][6]) > 1.6 * num(rows[2][6]));
  const auto bad = run({"scan", "-c", tmp.file("g.yaml"), "--set", "noise.channels.0.sigma", "--values", "loud"});
  CHECK(bad.code == 1);
  CHECK_THAT(bad.err, ContainsSubstring("noise.channels[0].sigma"));
  CHECK(run({"scan", "-c", tmp.file("g.yaml"), "--set", "noise.channels.5.sigma", "--values", "1 Hz"}).code == 1);
}

TEST_CASE("table1 exits 2 when an ordering fails", "[cli][errors]") {
  TempDir tmp;
  fs::create_directories(tmp.file("rows"));
  // Noise-free row: both times are censored at the last grid point, and the
  // echo grid stops earlier than the Ramsey grid.
  write(tmp.file("rows/only.yaml"), R"(row: {field: coils, shield: open, trigger: off}
scenario:
  shots_per_basis: 50
  seed: 1
  readout: none
ramsey_tau_grid: [1 ms, 2 ms, 3 ms, 4 ms, 10 ms]
echo_tau_grid: [1 ms, 2 ms, 3 ms, 4 ms, 5 ms]
)");
  const auto r = run({"table1", "--dir", tmp.file("rows")});
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("echo tau_d > Ramsey tau_d*"));
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["passed"] == false);
}
