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

#include "qcrf/lab/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "qcrf/crf/io.hpp"
#include "qcrf/errors.hpp"
#include "qcrf/random.hpp"

namespace qcrf::lab {

using nlohmann::json;

namespace {

void allow_keys(const json &obj, const std::string &where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    for (const auto &item : obj.items()) {
        if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
        }
    }
}

template <class T>
T get_or(const json &obj, const std::string &key, T fallback, const std::string &where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

template <class T>
T require(const json &obj, const std::string &key, const std::string &where) {
    if (!obj.contains(key)) {
        throw ConfigError(where + ": missing key '" + key + "'");
    }
    return get_or<T>(obj, key, T{}, where);
}

std::string resolve(const std::string &base_dir, const std::string &path) {
    std::filesystem::path p(path);
    if (p.is_relative()) {
        p = std::filesystem::path(base_dir) / p;
    }
    if (!std::filesystem::exists(p)) {
        throw ConfigError("referenced file does not exist: " + p.string());
    }
    return p.string();
}

crf::Record parse_record(const json &obj, std::size_t index) {
    const std::string where = "instance.records[" + std::to_string(index) + "]";
    allow_keys(obj, where, {"features", "labels", "weight"});
    const auto features = require<std::vector<std::vector<std::vector<int>>>>(obj, "features", where);
    const auto labels = require<std::vector<int>>(obj, "labels", where);
    if (features.empty() || features.front().empty() || features.front().front().empty()) {
        throw ConfigError(where + ".features: expected a non-empty [k][i][j] array");
    }
    const int K = static_cast<int>(features.size());
    const int n = static_cast<int>(features.front().size());
    const int Q = static_cast<int>(features.front().front().size());
    std::vector<int> signs;
    for (const auto &per_k : features) {
        if (static_cast<int>(per_k.size()) != n) {
            throw ConfigError(where + ".features: ragged position dimension");
        }
        for (const auto &per_i : per_k) {
            if (static_cast<int>(per_i.size()) != Q) {
                throw ConfigError(where + ".features: ragged label dimension");
            }
            signs.insert(signs.end(), per_i.begin(), per_i.end());
        }
    }
    crf::Record record;
    record.table = crf::FeatureTable(K, n, Q, signs);
    record.labels = labels;
    record.weight = get_or<double>(obj, "weight", 0.0, where);
    return record;
}

crf::Dataset weighted_or_uniform(std::vector<crf::Record> records, bool weighted) {
    if (weighted) {
        return crf::Dataset(std::move(records));
    }
    return crf::Dataset::uniform(std::move(records));
}

crf::Dataset parse_instance(const json &obj, const std::string &base_dir, std::uint64_t master_seed,
                            InstanceSource &source) {
    const std::string where = "instance";
    if (!obj.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    const auto kind = require<std::string>(obj, "source", where);
    if (kind == "records") {
        source = InstanceSource::records;
        allow_keys(obj, where, {"source", "records"});
        const json &list = obj.at("records");
        if (!list.is_array() || list.empty()) {
            throw ConfigError(where + ".records: expected a non-empty array");
        }
        std::vector<crf::Record> records;
        std::size_t weighted = 0;
        for (std::size_t r = 0; r < list.size(); ++r) {
            records.push_back(parse_record(list[r], r));
            weighted += list[r].contains("weight") ? 1 : 0;
        }
        if (weighted != 0 && weighted != records.size()) {
            throw ConfigError(where + ".records: give a weight on every record or on none");
        }
        return weighted_or_uniform(std::move(records), weighted != 0);
    }
    if (kind == "random") {
        source = InstanceSource::random;
        allow_keys(obj, where, {"source", "n", "K", "Q", "count", "seed"});
        const int n = require<int>(obj, "n", where);
        const int K = require<int>(obj, "K", where);
        const int Q = require<int>(obj, "Q", where);
        const auto count = get_or<std::size_t>(obj, "count", 1, where);
        const auto seed = get_or<std::uint64_t>(obj, "seed", derive_seed(master_seed, {0x1a57}), where);
        if (count < 1) {
            throw ConfigError(where + ".count must be at least 1");
        }
        std::vector<crf::Record> records;
        for (std::size_t r = 0; r < count; ++r) {
            records.push_back(crf::random_record(n, K, Q, derive_seed(seed, {r})));
        }
        return crf::Dataset::uniform(std::move(records));
    }
    if (kind == "dataset") {
        source = InstanceSource::dataset;
        allow_keys(obj, where, {"source", "path", "templates", "labels"});
        const auto path = resolve(base_dir, require<std::string>(obj, "path", where));
        const auto sequences = crf::read_dataset_file(path);
        crf::LabelAlphabet alphabet = obj.contains("labels")
                                          ? crf::LabelAlphabet(get_or<std::vector<std::string>>(obj, "labels", {}, where))
                                          : crf::collect_alphabet(sequences);
        const json &list = obj.contains("templates") ? obj.at("templates") : json();
        if (!list.is_array() || list.empty()) {
            throw ConfigError(where + ".templates: expected a non-empty array");
        }
        std::vector<crf::IndicatorTemplate> templates;
        for (std::size_t t = 0; t < list.size(); ++t) {
            const std::string tw = where + ".templates[" + std::to_string(t) + "]";
            allow_keys(list[t], tw, {"token", "label"});
            templates.push_back({require<std::string>(list[t], "token", tw), require<std::string>(list[t], "label", tw)});
        }
        return crf::build_dataset(sequences, alphabet, templates);
    }
    if (kind == "feature_file") {
        source = InstanceSource::feature_file;
        allow_keys(obj, where, {"source", "path", "labels"});
        const auto path = resolve(base_dir, require<std::string>(obj, "path", where));
        crf::Record record;
        record.table = crf::read_feature_table_file(path);
        record.labels = require<std::vector<int>>(obj, "labels", where);
        return crf::Dataset::uniform({std::move(record)});
    }
    throw ConfigError(where + ".source: expected records, random, dataset or feature_file, got '" + kind + "'");
}

crf::Weights parse_weights(const json &obj, int K, std::uint64_t master_seed) {
    const std::string where = "weights";
    crf::Weights weights;
    weights.w.assign(K, 0.0);
    if (obj.is_null()) {
        return weights;
    }
    allow_keys(obj, where, {"init", "eta"});
    weights.eta = get_or<double>(obj, "eta", weights.eta, where);
    if (obj.contains("init")) {
        const json &init = obj.at("init");
        if (init.is_array()) {
            weights.w = get_or<std::vector<double>>(obj, "init", {}, where);
            if (static_cast<int>(weights.w.size()) != K) {
                throw ConfigError(where + ".init has " + std::to_string(weights.w.size()) + " entries, expected K = " +
                                  std::to_string(K));
            }
        } else if (init.is_string() && init.get<std::string>() == "zeros") {
        } else if (init.is_object()) {
            allow_keys(init, where + ".init", {"uniform", "seed"});
            const auto range = require<std::vector<double>>(init, "uniform", where + ".init");
            if (range.size() != 2 || !(range[0] <= range[1])) {
                throw ConfigError(where + ".init.uniform: expected [lo, hi] with lo <= hi");
            }
            Rng rng(get_or<std::uint64_t>(init, "seed", derive_seed(master_seed, {0x5eed}), where + ".init"));
            for (double &x : weights.w) {
                x = range[0] + (range[1] - range[0]) * rng.uniform();
            }
        } else {
            throw ConfigError(where + ".init: expected an array, \"zeros\" or {\"uniform\": [lo, hi]}");
        }
    }
    try {
        weights.validate();
    } catch (const Error &e) {
        throw ConfigError(std::string(where) + ": " + e.what());
    }
    return weights;
}

TrainerConfig parse_trainer(const json &obj) {
    TrainerConfig out;
    if (obj.is_null()) {
        return out;
    }
    const std::string where = "trainer";
    allow_keys(obj, where, {"iters", "backend", "divergence_window", "gibbs"});
    out.iters = get_or<std::size_t>(obj, "iters", out.iters, where);
    out.backend = crf::parse_backend(get_or<std::string>(obj, "backend", "exact", where));
    out.divergence_window = get_or<std::size_t>(obj, "divergence_window", out.divergence_window, where);
    if (obj.contains("gibbs")) {
        const json &g = obj.at("gibbs");
        allow_keys(g, where + ".gibbs", {"sweeps", "burn_in"});
        out.gibbs.sweeps = get_or<std::size_t>(g, "sweeps", out.gibbs.sweeps, where + ".gibbs");
        out.gibbs.burn_in = get_or<std::size_t>(g, "burn_in", out.gibbs.burn_in, where + ".gibbs");
    }
    if (out.iters < 1) {
        throw ConfigError(where + ".iters must be at least 1");
    }
    return out;
}

EstimatorConfig parse_estimator(const json &obj) {
    EstimatorConfig out;
    if (obj.is_null()) {
        return out;
    }
    const std::string where = "estimator";
    allow_keys(obj, where, {"r", "integer_bits", "m", "m_schedule", "C", "epsilon", "attempt_factor"});
    auto &p = out.precision;
    p.r = get_or<int>(obj, "r", p.r, where);
    p.integer_bits = get_or<int>(obj, "integer_bits", p.integer_bits, where);
    p.C = get_or<double>(obj, "C", p.C, where);
    p.epsilon = get_or<double>(obj, "epsilon", p.epsilon, where);
    p.attempt_factor = get_or<double>(obj, "attempt_factor", p.attempt_factor, where);
    p.validate();
    out.m = get_or<std::uint64_t>(obj, "m", out.m, where);
    out.m_schedule = get_or<std::vector<std::uint64_t>>(obj, "m_schedule", {}, where);
    if (out.m < 1) {
        throw ConfigError(where + ".m must be at least 1");
    }
    for (std::size_t t = 0; t < out.m_schedule.size(); ++t) {
        if (out.m_schedule[t] < 1 || (t > 0 && out.m_schedule[t] <= out.m_schedule[t - 1])) {
            throw ConfigError(where + ".m_schedule must be positive and strictly increasing");
        }
    }
    return out;
}

GradientErrorConfig parse_gradient_error(const json &obj) {
    GradientErrorConfig out;
    if (obj.is_null()) {
        return out;
    }
    const std::string where = "gradient_error";
    allow_keys(obj, where, {"seeds", "iterations", "mode"});
    out.seeds = get_or<std::size_t>(obj, "seeds", out.seeds, where);
    out.iterations = get_or<std::size_t>(obj, "iterations", out.iterations, where);
    const auto mode = get_or<std::string>(obj, "mode", "states", where);
    if (mode == "states") {
        out.mode = IterationMode::states;
    } else if (mode == "epochs") {
        out.mode = IterationMode::epochs;
    } else {
        throw ConfigError(where + ".mode: expected states or epochs, got '" + mode + "'");
    }
    if (out.seeds < 1 || out.iterations < 1) {
        throw ConfigError(where + ": seeds and iterations must be at least 1");
    }
    return out;
}

ScalingConfig parse_scaling(const json &obj) {
    ScalingConfig out;
    if (obj.is_null()) {
        return out;
    }
    const std::string where = "scaling";
    allow_keys(obj, where, {"n_min", "n_max", "K", "Q", "repeats", "min_seconds"});
    out.n_min = get_or<int>(obj, "n_min", out.n_min, where);
    out.n_max = get_or<int>(obj, "n_max", out.n_max, where);
    out.K = get_or<int>(obj, "K", out.K, where);
    out.Q = get_or<int>(obj, "Q", out.Q, where);
    out.repeats = get_or<int>(obj, "repeats", out.repeats, where);
    out.min_seconds = get_or<double>(obj, "min_seconds", out.min_seconds, where);
    if (out.n_min < 1 || out.n_max < out.n_min || out.K < 1 || out.Q < 2 || out.repeats < 1 ||
        !(out.min_seconds >= 0.0)) {
        throw ConfigError(where + ": need 1 <= n_min <= n_max, K >= 1, Q >= 2, repeats >= 1, min_seconds >= 0");
    }
    return out;
}

CheckConfig parse_check(const json &obj) {
    CheckConfig out;
    if (obj.is_null()) {
        return out;
    }
    allow_keys(obj, "check", {"random_instances"});
    out.random_instances = get_or<std::size_t>(obj, "random_instances", out.random_instances, "check");
    return out;
}

const json &section(const json &doc, const char *key) {
    static const json null_value;
    return doc.contains(key) ? doc.at(key) : null_value;
}

}  // namespace

std::string_view source_name(InstanceSource source) {
    switch (source) {
        case InstanceSource::records:
            return "records";
        case InstanceSource::random:
            return "random";
        case InstanceSource::dataset:
            return "dataset";
        case InstanceSource::feature_file:
            return "feature_file";
    }
    return "?";
}

std::string_view iteration_mode_name(IterationMode mode) {
    return mode == IterationMode::states ? "states" : "epochs";
}

ExperimentConfig parse_config(const std::string &json_text, const std::string &base_dir,
                              std::optional<std::uint64_t> seed_override) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    allow_keys(doc, "config",
               {"schema_version", "name", "master_seed", "instance", "weights", "trainer", "estimator",
                "gradient_error", "scaling", "check", "output"});
    ExperimentConfig cfg;
    cfg.schema_version = require<int>(doc, "schema_version", "config");
    if (cfg.schema_version != kSchemaVersion) {
        throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
    }
    cfg.name = get_or<std::string>(doc, "name", "", "config");
    cfg.master_seed = seed_override ? *seed_override : get_or<std::uint64_t>(doc, "master_seed", 0, "config");
    cfg.output = get_or<std::string>(doc, "output", "", "config");
    try {
        cfg.dataset = parse_instance(require<json>(doc, "instance", "config"), base_dir, cfg.master_seed, cfg.source);
        cfg.weights = parse_weights(section(doc, "weights"), cfg.dataset.features(), cfg.master_seed);
        cfg.trainer = parse_trainer(section(doc, "trainer"));
        cfg.estimator = parse_estimator(section(doc, "estimator"));
    } catch (const ConfigError &) {
        throw;
    } catch (const Error &e) {
        throw ConfigError(e.what());
    }
    cfg.gradient_error = parse_gradient_error(section(doc, "gradient_error"));
    cfg.scaling = parse_scaling(section(doc, "scaling"));
    cfg.check = parse_check(section(doc, "check"));
    return cfg;
}

ExperimentConfig load_config(const std::string &path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    const auto parent = std::filesystem::path(path).parent_path();
    ExperimentConfig cfg = parse_config(text.str(), parent.empty() ? "." : parent.string(), seed_override);
    cfg.path = path;
    return cfg;
}

}  // namespace qcrf::lab
