// Copyright 2026 The QCRF Lab Authors
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

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcrf/lab/checks.hpp"
#include "qcrf/lab/config.hpp"

namespace qcrf::lab {

enum ExitCode : int {
    kExitPass = 0,
    kExitInvariantFailure = 1,
    kExitConfigError = 2,
};

/// One CSV row of a gradient-error or training run.
struct RunRecord {
    std::size_t iteration = 0;
    std::string backend;
    double nll = 0.0;
    double gradient_error = 0.0;  ///< |est - exact| / |exact|, infinity when starved
    double wall_time = 0.0;       ///< seconds
    std::uint64_t seed = 0;
    std::uint64_t samples = 0;    ///< copies per trace (quantum) or sweeps (gibbs)
    std::string flag;             ///< empty, "starved" or "diverged"
};

struct ScalingRow {
    int n = 0;
    std::string backend;
    double seconds_per_call = 0.0;
    std::uint64_t calls = 0;
    std::uint64_t seed = 0;
    std::string status;        ///< "ok" or "skipped"
    double max_abs_diff = 0.0; ///< naive vs factorized gradient (naive rows only)
};

/// Relative l2 distance; infinity for non-finite estimates.
double relative_error(std::span<const double> estimate, std::span<const double> exact);

/// Identity suite on the configured instance plus `check.random_instances` random ones.
CheckSuite run_checks(const ExperimentConfig &cfg);

/// Quantum estimator and Gibbs baseline error against the exact gradient at
/// the initial weights. Rows are ordered by iteration, then seed, then back-end.
std::vector<RunRecord> gradient_error_rows(const ExperimentConfig &cfg);

/// Training trajectory; `on_row` sees each row as it is produced (rows
/// survive a divergence abort, which is rethrown).
std::vector<RunRecord> train_rows(const ExperimentConfig &cfg, crf::Backend backend,
                                  const std::function<void(const RunRecord &)> &on_row = {});

std::vector<ScalingRow> scaling_rows(const ExperimentConfig &cfg);

/// iteration,backend,samples,nll,gradient_error,wall_time,seed,flag
void write_run_header(std::ostream &out);
void write_run_row(std::ostream &out, const RunRecord &row);
/// n,backend,seconds_per_call,calls,seed,status,max_abs_diff
void write_scaling_csv(std::ostream &out, const std::vector<ScalingRow> &rows);

int cmd_check(const ExperimentConfig &cfg, std::ostream &csv, std::ostream &log);
int cmd_gradient_error(const ExperimentConfig &cfg, std::ostream &csv, std::ostream &log);
int cmd_train(const ExperimentConfig &cfg, std::ostream &csv, std::ostream &log,
              std::optional<crf::Backend> backend = std::nullopt);
int cmd_scaling(const ExperimentConfig &cfg, std::ostream &csv, std::ostream &log);

struct CommandLine {
    std::string command;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;  ///< "-" for stdout
    std::optional<std::string> backend;
};

/// Loads the config, runs the command and maps errors to exit codes.
int run_command(const CommandLine &cl, std::ostream &log);

}  // namespace qcrf::lab
