// Copyright 2026 The bellsim authors
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

// Command-line front end. One subcommand per study:
//
//   bellsim correlate     --theta-grid 0:pi/2:9 --n 100000 --seed 7
//   bellsim decohere-scan --M 2,4,8,16,32 --seeds 1000
//   bellsim chsh          --settings 0:pi/4:pi/8:3pi/8 --n 100000
//   bellsim nosignal      --theta-grid 0:pi/2:5 --n 100000
//   bellsim oracle-check  --M 2 --theta pi/8 --seed 3
//
// Each run writes report.json and points.csv under --out and exits 0 when
// all checks pass, 1 on a check failure, 2 on a configuration error.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bellsim/experiment.hpp"

namespace {

struct RawFlags {
  std::string m_list;
  std::string dist = "uniform";
  std::string theta_grid;
  std::string theta;
  std::string settings;
  std::string theta_fixed;
};

void add_common_flags(CLI::App* cmd, bellsim::experiment::ExperimentConfig& config,
                      RawFlags& raw) {
  cmd->add_option("--seed", config.seed, "Experiment seed (64-bit)");
  cmd->add_option("--M", raw.m_list,
                  "Internal dimension: one value, four per-detector values, or a "
                  "scan list for decohere-scan/oracle-check");
  cmd->add_option("--dist", raw.dist, "Internal distribution: uniform | gibbs:<beta>");
  cmd->add_option("--n", config.n_trials, "Trials per point / setting pair");
  cmd->add_option("--out", config.out_dir, "Output directory for report.json/points.csv");
  cmd->add_option("--workers", config.workers, "Worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bell pair + four-detector measurement chain simulator"};
  app.require_subcommand(1);

  bellsim::experiment::ExperimentConfig config;
  RawFlags raw;

  CLI::App* correlate = app.add_subcommand(
      "correlate", "Estimate C(theta) on a theta grid against -cos(2 theta)");
  add_common_flags(correlate, config, raw);
  correlate->add_option("--theta-grid", raw.theta_grid, "Relative angle grid start:stop:count");

  CLI::App* decohere = app.add_subcommand(
      "decohere-scan", "Median off-diagonal suppression and per-detector law vs M");
  add_common_flags(decohere, config, raw);
  decohere->add_option("--seeds", config.n_seeds, "Detector seeds per M value");

  CLI::App* chsh = app.add_subcommand("chsh", "CHSH statistic at four settings");
  add_common_flags(chsh, config, raw);
  chsh->add_option("--settings", raw.settings, "Four angles a:a':b:b'");

  CLI::App* nosignal = app.add_subcommand(
      "nosignal", "Marginal independence of each station from the remote setting");
  add_common_flags(nosignal, config, raw);
  nosignal->add_option("--theta-grid", raw.theta_grid, "Remote-setting grid start:stop:count");
  nosignal->add_option("--theta-fixed", raw.theta_fixed,
                       "Audited station's own setting (default 0)");

  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "Structured vs dense-oracle reduced density matrices");
  add_common_flags(oracle, config, raw);
  oracle->add_option("--theta", raw.theta, "Single relative angle (e.g. pi/8)");
  oracle->add_option("--theta-grid", raw.theta_grid, "Relative angle grid start:stop:count");
  oracle->add_option("--seeds", config.n_seeds, "Seeds per (M, theta) case");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help and --version exit 0
  }

  try {
    namespace exp = bellsim::experiment;
    if (correlate->parsed()) config.study = exp::Study::correlate;
    if (decohere->parsed()) config.study = exp::Study::decohere_scan;
    if (chsh->parsed()) config.study = exp::Study::chsh;
    if (nosignal->parsed()) config.study = exp::Study::nosignal;
    if (oracle->parsed()) config.study = exp::Study::oracle_check;

    if (!raw.m_list.empty()) config.m_values = exp::parse_int_list(raw.m_list);
    config.dist = exp::parse_dist(raw.dist);
    if (!raw.theta_grid.empty()) config.theta_grid = exp::parse_theta_grid(raw.theta_grid);
    if (!raw.theta.empty()) config.theta_grid = {exp::parse_angle(raw.theta)};
    if (!raw.settings.empty()) config.chsh_settings = exp::parse_settings(raw.settings);
    if (!raw.theta_fixed.empty()) config.theta_fixed = exp::parse_angle(raw.theta_fixed);

    return exp::run(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
