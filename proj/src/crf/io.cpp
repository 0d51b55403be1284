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

#include "qcrf/crf/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qcrf/errors.hpp"

namespace qcrf::crf {

std::vector<Sequence> parse_dataset(std::istream &in) {
    std::vector<Sequence> out;
    Sequence current;
    current.labels.emplace();
    std::string line;
    std::size_t line_no = 0;
    auto flush = [&] {
        if (!current.observations.empty()) {
            out.push_back(std::move(current));
        }
        current = Sequence{};
        current.labels.emplace();
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            flush();
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw ConfigError("dataset line " + std::to_string(line_no) + ": expected observation<TAB>label");
        }
        current.observations.push_back(line.substr(0, tab));
        current.labels->push_back(line.substr(tab + 1));
    }
    flush();
    return out;
}

std::vector<Sequence> read_dataset_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open dataset file: " + path);
    }
    return parse_dataset(in);
}

LabelAlphabet collect_alphabet(const std::vector<Sequence> &sequences) {
    std::vector<std::string> labels;
    for (const auto &seq : sequences) {
        if (!seq.labels) continue;
        for (const auto &label : *seq.labels) {
            if (std::find(labels.begin(), labels.end(), label) == labels.end()) {
                labels.push_back(label);
            }
        }
    }
    return LabelAlphabet(std::move(labels));
}

FeatureTable parse_feature_table(std::istream &in) {
    int K = 0;
    int n = 0;
    int Q = 0;
    if (!(in >> K >> n >> Q) || K < 1 || n < 1 || Q < 1) {
        throw ConfigError("feature table header must be \"K n Q\" with positive integers");
    }
    const std::size_t count = static_cast<std::size_t>(K) * n * Q;
    std::vector<int> signs;
    signs.reserve(count);
    int s = 0;
    while (signs.size() < count && in >> s) {
        signs.push_back(s);
    }
    if (signs.size() != count) {
        throw ConfigError("feature table: expected " + std::to_string(count) + " signs, read " +
                          std::to_string(signs.size()));
    }
    std::string extra;
    if (in >> extra) {
        throw ConfigError("feature table: trailing data after " + std::to_string(count) + " signs");
    }
    return FeatureTable(K, n, Q, signs);
}

FeatureTable read_feature_table_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open feature table file: " + path);
    }
    return parse_feature_table(in);
}

void write_feature_table(std::ostream &out, const FeatureTable &table) {
    out << table.features() << ' ' << table.positions() << ' ' << table.labels() << '\n';
    for (int k = 0; k < table.features(); ++k) {
        for (int i = 0; i < table.positions(); ++i) {
            for (int j = 0; j < table.labels(); ++j) {
                out << (j ? " " : "") << table.at(k, i, j);
            }
            out << '\n';
        }
    }
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

}  // namespace qcrf::crf
