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

#include "qcrf/lab/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>

#include "qcrf/crf/crf.hpp"
#include "qcrf/crf/io.hpp"
#include "qcrf/errors.hpp"
#include "qcrf/random.hpp"
#include "qcrf/sim/estimator.hpp"

namespace qcrf::lab {

namespace {

// Keys separating the seed streams of the different experiment parts.
enum : std::uint64_t {
    kStreamCheck = 0xc4ec,
    kStreamQuantum = 0x9e,
    kStreamGibbs = 0x6b,
    kStreamTrain = 0x7a,
    kStreamScaling = 0x5c,
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_time(double seconds) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", seconds);
    return buf;
}

std::vector<std::size_t> checkpoints(const ExperimentConfig &cfg) {
    std::vector<std::size_t> out;
    for (std::size_t t = 1; t <= cfg.gradient_error.iterations; ++t) {
        out.push_back(t);
    }
    for (std::uint64_t m : cfg.estimator.m_schedule) {
        out.push_back(static_cast<std::size_t>(m));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

RunRecord gibbs_row(const crf::Dataset &ds, std::span<const double> w, std::span<const double> exact,
                    std::size_t iteration, std::uint64_t sweeps, std::uint64_t burn_in, std::uint64_t seed) {
    RunRecord row;
    row.iteration = iteration;
    row.backend = "gibbs";
    row.nll = crf::nll(ds, w);
    row.samples = sweeps;
    row.seed = seed;
    const auto start = Clock::now();
    const auto g = crf::gradient_gibbs(ds, w, crf::GibbsOptions{sweeps, burn_in, seed});
    row.wall_time = seconds_since(start);
    row.gradient_error = relative_error(g, exact);
    return row;
}

void fill_quantum(RunRecord &row, const std::function<sim::GradientEstimate()> &estimate,
                  std::span<const double> exact) {
    try {
        const auto est = estimate();
        row.gradient_error = relative_error(est.gradient, exact);
        if (est.starved) {
            row.flag = "starved";
        }
    } catch (const PostselectionStarved &) {
        row.gradient_error = std::numeric_limits<double>::infinity();
        row.flag = "starved";
    }
}

std::vector<RunRecord> gradient_error_states(const ExperimentConfig &cfg) {
    const auto &ds = cfg.dataset;
    const auto &w = cfg.weights.w;
    const auto exact = crf::gradient_factorized(ds, w);
    const double loss = crf::nll(ds, w);
    const auto &ge = cfg.gradient_error;

    std::vector<sim::GradientSampler> samplers;
    std::vector<std::uint64_t> seeds;
    for (std::size_t s = 0; s < ge.seeds; ++s) {
        seeds.push_back(derive_seed(cfg.master_seed, {kStreamQuantum, s}));
        samplers.emplace_back(ds, w, cfg.estimator.precision, seeds.back());
    }
    std::vector<RunRecord> rows;
    for (std::size_t t : checkpoints(cfg)) {
        for (std::size_t s = 0; s < ge.seeds; ++s) {
            RunRecord row;
            row.iteration = t;
            row.backend = "quantum";
            row.nll = loss;
            row.samples = t;
            row.seed = seeds[s];
            const auto start = Clock::now();
            samplers[s].add(t - samplers[s].copies());
            fill_quantum(row, [&] { return samplers[s].estimate(); }, exact);
            row.wall_time = seconds_since(start);
            rows.push_back(row);
            rows.push_back(gibbs_row(ds, w, exact, t, t, cfg.trainer.gibbs.burn_in,
                                     derive_seed(cfg.master_seed, {kStreamGibbs, s, t})));
        }
    }
    return rows;
}

std::vector<RunRecord> gradient_error_epochs(const ExperimentConfig &cfg) {
    const auto &ds = cfg.dataset;
    const auto &ge = cfg.gradient_error;
    std::vector<RunRecord> rows;
    for (std::size_t s = 0; s < ge.seeds; ++s) {
        std::vector<double> w = cfg.weights.w;
        for (std::size_t e = 1; e <= ge.iterations; ++e) {
            const auto exact = crf::gradient_factorized(ds, w);
            RunRecord row;
            row.iteration = e;
            row.backend = "quantum";
            row.nll = crf::nll(ds, w);
            row.samples = cfg.estimator.m;
            row.seed = derive_seed(cfg.master_seed, {kStreamQuantum, s, e});
            sim::GradientEstimate est;
            const auto start = Clock::now();
            fill_quantum(
                row,
                [&] {
                    est = sim::estimate_gradient(ds, w, cfg.estimator.precision, cfg.estimator.m, row.seed);
                    return est;
                },
                exact);
            row.wall_time = seconds_since(start);
            rows.push_back(row);
            rows.push_back(gibbs_row(ds, w, exact, e, cfg.estimator.m, cfg.trainer.gibbs.burn_in,
                                     derive_seed(cfg.master_seed, {kStreamGibbs, s, e})));
            if (!row.flag.empty()) {
                break;
            }
            for (std::size_t k = 0; k < w.size(); ++k) {
                w[k] -= cfg.weights.eta * est.gradient[k];
            }
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const RunRecord &a, const RunRecord &b) { return a.iteration < b.iteration; });
    return rows;
}

/// A timed workload: `calls` is doubled until one batch spans the minimum duration.
struct TimingCell {
    std::function<void()> fn;
    std::uint64_t calls = 1;
    std::vector<double> per_call;  ///< one entry per round

    double batch() const {
        const auto start = Clock::now();
        for (std::uint64_t c = 0; c < calls; ++c) {
            fn();
        }
        return seconds_since(start);
    }
    void calibrate(double min_seconds) {
        while (batch() < min_seconds && calls < (std::uint64_t{1} << 30)) {
            calls *= 2;
        }
    }
    double median() const {
        auto v = per_call;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
        return v[v.size() / 2];
    }
};

/// Rounds are interleaved across cells so drift in machine speed hits every cell alike;
/// each cell reports its median round.
void time_cells(std::vector<TimingCell *> &cells, int repeats, double min_seconds) {
    for (auto *cell : cells) {
        cell->calibrate(min_seconds);
    }
    for (int r = 0; r < std::max(1, repeats); ++r) {
        for (auto *cell : cells) {
            cell->per_call.push_back(cell->batch() / static_cast<double>(cell->calls));
        }
    }
}

std::ostream &open_output(const std::optional<std::string> &path, std::ofstream &file) {
    if (!path || *path == "-") {
        return std::cout;
    }
    file.open(*path, std::ios::binary);
    if (!file) {
        throw ConfigError("cannot open output file " + *path);
    }
    return file;
}

}  // namespace

double relative_error(std::span<const double> estimate, std::span<const double> exact) {
    if (estimate.size() != exact.size()) {
        throw DimensionError("gradient length mismatch");
    }
    double diff = 0.0;
    double norm = 0.0;
    for (std::size_t k = 0; k < exact.size(); ++k) {
        if (!std::isfinite(estimate[k])) {
            return std::numeric_limits<double>::infinity();
        }
        diff += (estimate[k] - exact[k]) * (estimate[k] - exact[k]);
        norm += exact[k] * exact[k];
    }
    return norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
}

CheckSuite run_checks(const ExperimentConfig &cfg) {
    CheckSuite suite;
    check_dataset(suite, cfg.dataset, cfg.weights.w);
    for (std::size_t i = 0; i < cfg.check.random_instances; ++i) {
        const auto inst = random_instance(derive_seed(cfg.master_seed, {kStreamCheck, i}));
        check_dataset(suite, inst.dataset, inst.w);
    }
    return suite;
}

std::vector<RunRecord> gradient_error_rows(const ExperimentConfig &cfg) {
    return cfg.gradient_error.mode == IterationMode::states ? gradient_error_states(cfg)
                                                            : gradient_error_epochs(cfg);
}

std::vector<RunRecord> train_rows(const ExperimentConfig &cfg, crf::Backend backend,
                                  const std::function<void(const RunRecord &)> &on_row) {
    crf::GradientFn gradient;
    std::uint64_t base_seed = cfg.master_seed;
    std::uint64_t samples = 0;
    if (backend == crf::Backend::quantum) {
        base_seed = derive_seed(cfg.master_seed, {kStreamTrain});
        samples = cfg.estimator.m;
        gradient = sim::quantum_gradient(cfg.estimator.precision, cfg.estimator.m, base_seed);
    } else {
        crf::GibbsOptions gibbs = cfg.trainer.gibbs;
        if (backend == crf::Backend::gibbs) {
            base_seed = derive_seed(cfg.master_seed, {kStreamGibbs});
            samples = gibbs.sweeps;
        }
        gibbs.seed = base_seed;
        gradient = crf::classical_gradient(backend, gibbs);
    }
    const bool stochastic = backend == crf::Backend::quantum || backend == crf::Backend::gibbs;

    std::vector<RunRecord> rows;
    const auto start = Clock::now();
    crf::TrainOptions opts;
    opts.iters = cfg.trainer.iters;
    opts.divergence_window = cfg.trainer.divergence_window;
    opts.on_step = [&](const crf::TrainStep &step, std::span<const double> g) {
        RunRecord row;
        row.iteration = step.iteration;
        row.backend = std::string(crf::backend_name(backend));
        row.nll = step.nll;
        row.gradient_error = relative_error(g, crf::gradient_factorized(cfg.dataset, step.w));
        row.wall_time = seconds_since(start);
        row.seed = stochastic ? derive_seed(base_seed, {step.iteration}) : base_seed;
        row.samples = samples;
        rows.push_back(row);
        if (on_row) {
            on_row(row);
        }
    };
    crf::train(cfg.dataset, cfg.weights, gradient, opts);
    return rows;
}

std::vector<ScalingRow> scaling_rows(const ExperimentConfig &cfg) {
    const auto &sc = cfg.scaling;
    struct Workload {
        crf::Dataset ds;
        std::vector<double> w;
    };
    const int count = std::max(0, sc.n_max - sc.n_min + 1);
    std::vector<Workload> loads;
    loads.reserve(static_cast<std::size_t>(count));
    std::vector<ScalingRow> rows;
    std::vector<TimingCell> cells(2 * static_cast<std::size_t>(count));
    std::vector<TimingCell *> timed;
    volatile double sink = 0.0;
    for (int n = sc.n_min; n <= sc.n_max; ++n) {
        const std::uint64_t seed = derive_seed(cfg.master_seed, {kStreamScaling, static_cast<std::uint64_t>(n)});
        Workload load{crf::Dataset::uniform({crf::random_record(n, sc.K, sc.Q, seed)}), std::vector<double>(sc.K)};
        Rng rng(derive_seed(seed, {1}));
        for (double &x : load.w) {
            x = 2.0 * rng.uniform() - 1.0;
        }
        loads.push_back(std::move(load));
        const Workload *wl = &loads.back();
        const auto factorized = crf::gradient_factorized(wl->ds, wl->w);
        const std::size_t slot = 2 * static_cast<std::size_t>(n - sc.n_min);

        ScalingRow naive{n, "naive", 0.0, 0, seed, "skipped", 0.0};
        if (crf::sequence_count(sc.Q, n) <= static_cast<double>(crf::kEnumerationCap)) {
            const auto g = crf::gradient_naive(wl->ds, wl->w);
            for (std::size_t k = 0; k < g.size(); ++k) {
                naive.max_abs_diff = std::max(naive.max_abs_diff, std::abs(g[k] - factorized[k]));
            }
            naive.status = "ok";
            cells[slot].fn = [wl, &sink] { sink = sink + crf::gradient_naive(wl->ds, wl->w)[0]; };
            timed.push_back(&cells[slot]);
        }
        rows.push_back(naive);
        cells[slot + 1].fn = [wl, &sink] { sink = sink + crf::gradient_factorized(wl->ds, wl->w)[0]; };
        timed.push_back(&cells[slot + 1]);
        rows.push_back({n, "factorized", 0.0, 0, seed, "ok", 0.0});
    }
    time_cells(timed, sc.repeats, sc.min_seconds);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].status == "ok") {
            rows[r].seconds_per_call = cells[r].median();
            rows[r].calls = cells[r].calls;
        }
    }
    return rows;
}

void write_run_header(std::ostream &out) { out << "iteration,backend,samples,nll,gradient_error,wall_time,seed,flag\n"; }

void write_run_row(std::ostream &out, const RunRecord &row) {
    out << row.iteration << ',' << row.backend << ',' << row.samples << ',' << crf::format_double(row.nll) << ','
        << crf::format_double(row.gradient_error) << ',' << format_time(row.wall_time) << ',' << row.seed << ','
        << row.flag << '\n';
}

void write_scaling_csv(std::ostream &out, const std::vector<ScalingRow> &rows) {
    out << "n,backend,seconds_per_call,calls,seed,status,max_abs_diff\n";
    for (const auto &row : rows) {
        out << row.n << ',' << row.backend << ',' << format_time(row.seconds_per_call) << ',' << row.calls << ','
            << row.seed << ',' << row.status << ',';
        if (row.status == "ok" && row.backend == "naive") {
            out << crf::format_double(row.max_abs_diff);
        }
        out << '\n';
    }
}

int cmd_check(const ExperimentConfig &cfg, std::ostream &csv, std::ostream &log) {
    const auto suite = run_checks(cfg);
    suite.write_csv(csv);
    log << "instance: " << source_name(cfg.source) << ", " << cfg.dataset.size() << " record(s), K="
        << cfg.dataset.features() << " Q=" << cfg.dataset.labels() << "; plus " << cfg.check.random_instances
        << " random instances\n";
    suite.print(log);
    log << (suite.pass() ? "check: all identities hold\n" : "check: FAILED\n");
    return suite.pass() ? kExitPass : kExitInvariantFailure;
}

int cmd_gradient_error(const ExperimentConfig &cfg, std::ostream &csv, std::ostream &log) {
    const auto rows = gradient_error_rows(cfg);
    write_run_header(csv);
    std::size_t starved = 0;
    for (const auto &row : rows) {
        write_run_row(csv, row);
        starved += row.flag == "starved" ? 1 : 0;
    }
    log << "gradient-error: " << rows.size() << " rows (" << iteration_mode_name(cfg.gradient_error.mode)
        << " mode), " << starved << " starved\n";
    return kExitPass;
}

int cmd_train(const ExperimentConfig &cfg, std::ostream &csv, std::ostream &log, std::optional<crf::Backend> backend) {
    const crf::Backend chosen = backend.value_or(cfg.trainer.backend);
    std::vector<RunRecord> rows;
    int code = kExitPass;
    try {
        train_rows(cfg, chosen, [&](const RunRecord &row) { rows.push_back(row); });
    } catch (const DivergenceError &e) {
        if (!rows.empty()) {
            rows.back().flag = "diverged";
        }
        log << "train: " << e.what() << '\n';
        code = kExitInvariantFailure;
    }
    write_run_header(csv);
    for (const auto &row : rows) {
        write_run_row(csv, row);
    }
    if (!rows.empty()) {
        log << "train: backend=" << crf::backend_name(chosen) << " iterations=" << rows.size()
            << " final nll=" << crf::format_double(rows.back().nll) << '\n';
    }
    return code;
}

int cmd_scaling(const ExperimentConfig &cfg, std::ostream &csv, std::ostream &log) {
    const auto rows = scaling_rows(cfg);
    write_scaling_csv(csv, rows);
    log << "scaling: n=" << cfg.scaling.n_min << ".." << cfg.scaling.n_max << ", " << rows.size() << " rows\n";
    return kExitPass;
}

int run_command(const CommandLine &cl, std::ostream &log) {
    try {
        const ExperimentConfig cfg = load_config(cl.config_path, cl.seed);
        std::optional<std::string> out = cl.out;
        if (!out && !cfg.output.empty()) {
            out = cfg.output;
        }
        std::optional<crf::Backend> backend;
        if (cl.backend) {
            backend = crf::parse_backend(*cl.backend);
        }
        std::ofstream file;
        std::ostream &csv = open_output(out, file);
        if (cl.command == "check") {
            return cmd_check(cfg, csv, log);
        }
        if (cl.command == "gradient-error") {
            return cmd_gradient_error(cfg, csv, log);
        }
        if (cl.command == "train") {
            return cmd_train(cfg, csv, log, backend);
        }
        if (cl.command == "scaling") {
            return cmd_scaling(cfg, csv, log);
        }
        throw ConfigError("unknown command '" + cl.command + "'");
    } catch (const ConfigError &e) {
        log << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const Error &e) {
        log << "error: " << e.what() << '\n';
        return kExitInvariantFailure;
    }
}

}  // namespace qcrf::lab
