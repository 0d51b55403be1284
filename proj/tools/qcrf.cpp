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

// qcrf check|gradient-error|train|scaling --config <path> [--seed <u64>] [--out <path>]

#include <iostream>
#include <utility>

#include <CLI11.hpp>

#include "qcrf/lab/commands.hpp"

int main(int argc, char **argv) {
    CLI::App app{"Quantum-CRF training experiments"};
    app.require_subcommand(1);

    qcrf::lab::CommandLine cl;
    std::uint64_t seed = 0;
    std::string out;
    std::string backend;

    const std::pair<const char *, const char *> commands[] = {
        {"check", "verify trace identities, probabilities and gradients"},
        {"gradient-error", "quantum and Gibbs gradient error against sample count"},
        {"train", "gradient-descent trajectory with one back-end"},
        {"scaling", "naive vs factorized gradient wall time over n"},
    };
    for (const auto &[name, about] : commands) {
        CLI::App *sub = app.add_subcommand(name, about);
        sub->add_option("--config", cl.config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed, overrides the config");
        sub->add_option("--out", out, "CSV output path, '-' for stdout");
        if (std::string(name) == "train") {
            sub->add_option("--backend", backend, "naive, exact, gibbs or quantum; overrides the config");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qcrf::lab::kExitConfigError;
    }

    CLI::App *sub = app.get_subcommands().front();
    cl.command = sub->get_name();
    if (sub->count("--seed") > 0) {
        cl.seed = seed;
    }
    if (sub->count("--out") > 0) {
        cl.out = out;
    }
    if (cl.command == "train" && sub->count("--backend") > 0) {
        cl.backend = backend;
    }
    return qcrf::lab::run_command(cl, std::cerr);
}
