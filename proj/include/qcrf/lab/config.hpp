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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qcrf/crf/crf.hpp"
#include "qcrf/crf/train.hpp"
#include "qcrf/crf/types.hpp"
#include "qcrf/sim/precision.hpp"

namespace qcrf::lab {

inline constexpr int kSchemaVersion = 1;

/// Where the training instance came from.
enum class InstanceSource { records, random, dataset, feature_file };

struct TrainerConfig {
    std::size_t iters = 200;
    crf::Backend backend = crf::Backend::factorized;
    std::size_t divergence_window = 10;
    crf::GibbsOptions gibbs;
};

struct EstimatorConfig {
    sim::PrecisionConfig precision;
    std::uint64_t m = 10000;                   ///< copies per trace part
    std::vector<std::uint64_t> m_schedule;     ///< strictly increasing
};

/// How "iteration" is read in the gradient-error experiment.
enum class IterationMode {
    states,  ///< iteration t = t accumulated copies of |phi>
    epochs,  ///< iteration t = training epoch t with m copies per estimate
};

struct GradientErrorConfig {
    std::size_t seeds = 10;
    std::size_t iterations = 340;
    IterationMode mode = IterationMode::states;
};

struct ScalingConfig {
    int n_min = 1;
    int n_max = 10;
    int K = 4;
    int Q = 2;
    int repeats = 5;
    double min_seconds = 0.02;  ///< each timing repeats the call until it spans this long
};

struct CheckConfig {
    std::size_t random_instances = 100;
};

/// Parsed and validated experiment description.
struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string name;
    std::string path;  ///< file the config was read from (empty for in-memory configs)
    InstanceSource source = InstanceSource::random;
    crf::Dataset dataset;
    crf::Weights weights;
    TrainerConfig trainer;
    EstimatorConfig estimator;
    GradientErrorConfig gradient_error;
    ScalingConfig scaling;
    CheckConfig check;
    std::string output;
    std::uint64_t master_seed = 0;
};

/// Throws ConfigError on schema, value or file problems. Relative file paths
/// resolve against `base_dir`. A seed override replaces master_seed before
/// anything random (instance, initial weights) is generated.
ExperimentConfig parse_config(const std::string &json_text, const std::string &base_dir = ".",
                              std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::string &path, std::optional<std::uint64_t> seed_override = std::nullopt);

std::string_view source_name(InstanceSource source);
std::string_view iteration_mode_name(IterationMode mode);

}  // namespace qcrf::lab
