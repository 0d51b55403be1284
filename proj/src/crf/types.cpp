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

#include "qcrf/crf/types.hpp"

#include <cmath>

#include "qcrf/errors.hpp"
#include "qcrf/random.hpp"

namespace qcrf::crf {

LabelAlphabet::LabelAlphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) {
        throw DomainError("label alphabet needs at least two labels");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (!index_.emplace(labels_[i], static_cast<int>(i)).second) {
            throw DomainError("duplicate label token: " + labels_[i]);
        }
    }
}

const std::string &LabelAlphabet::token(int index) const {
    if (index < 0 || index >= size()) {
        throw DomainError("label index out of range: " + std::to_string(index));
    }
    return labels_[static_cast<std::size_t>(index)];
}

int LabelAlphabet::index_of(const std::string &token) const {
    auto it = index_.find(token);
    if (it == index_.end()) {
        throw DomainError("label not in alphabet: " + token);
    }
    return it->second;
}

void Sequence::validate(const LabelAlphabet *alphabet) const {
    if (observations.empty()) {
        throw DimensionError("sequence must have at least one observation");
    }
    if (!labels) {
        return;
    }
    if (labels->size() != observations.size()) {
        throw DimensionError("sequence has " + std::to_string(observations.size()) + " observations but " +
                             std::to_string(labels->size()) + " labels");
    }
    if (alphabet != nullptr) {
        for (const auto &label : *labels) {
            alphabet->index_of(label);
        }
    }
}

FeatureTable::FeatureTable(int K, int n, int Q, std::span<const int> signs) : K_(K), n_(n), Q_(Q) {
    if (K < 1 || n < 1 || Q < 1) {
        throw DimensionError("feature table needs K, n, Q >= 1");
    }
    const std::size_t expected = static_cast<std::size_t>(K) * n * Q;
    if (signs.size() != expected) {
        throw DimensionError("feature table expects " + std::to_string(expected) + " signs, got " +
                             std::to_string(signs.size()));
    }
    signs_.resize(expected);
    std::size_t src = 0;
    for (int k = 0; k < K; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < Q; ++j) {
                const int s = signs[src++];
                if (s != 1 && s != -1) {
                    throw DomainError("feature sign must be -1 or +1, got " + std::to_string(s));
                }
                signs_[(static_cast<std::size_t>(i) * Q + j) * K + k] = static_cast<std::int8_t>(s);
            }
        }
    }
}

FeatureTable FeatureTable::from_function(int K, int n, int Q, const std::function<int(int, int, int)> &f) {
    std::vector<int> signs;
    signs.reserve(static_cast<std::size_t>(K) * n * Q);
    for (int k = 0; k < K; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < Q; ++j) {
                signs.push_back(f(k, i, j));
            }
        }
    }
    return FeatureTable(K, n, Q, signs);
}

FeatureTable FeatureTable::with_constant_feature() const {
    return from_function(K_ + 1, n_, Q_, [this](int k, int i, int j) { return k < K_ ? at(k, i, j) : 1; });
}

void Weights::validate() const {
    for (double v : w) {
        if (!std::isfinite(v)) {
            throw DomainError("weights must be finite");
        }
    }
    if (!std::isfinite(eta) || eta < 0.0) {
        throw DomainError("step length must be finite and non-negative");
    }
}

Dataset::Dataset(std::vector<Record> records, std::optional<LabelAlphabet> alphabet)
    : records_(std::move(records)), alphabet_(std::move(alphabet)) {
    if (records_.empty()) {
        throw DimensionError("dataset must contain at least one record");
    }
    K_ = records_.front().table.features();
    Q_ = records_.front().table.labels();
    double total = 0.0;
    for (const auto &rec : records_) {
        if (rec.table.features() != K_ || rec.table.labels() != Q_) {
            throw DimensionError("records disagree on feature count or label count");
        }
        if (static_cast<int>(rec.labels.size()) != rec.table.positions()) {
            throw DimensionError("record label count does not match its feature table");
        }
        for (int y : rec.labels) {
            if (y < 0 || y >= Q_) {
                throw DomainError("label index out of range: " + std::to_string(y));
            }
        }
        if (!(rec.weight > 0.0 && rec.weight <= 1.0)) {
            throw DomainError("record weight must lie in (0, 1]");
        }
        total += rec.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw DomainError("record weights must sum to 1");
    }
    if (alphabet_ && alphabet_->size() != Q_) {
        throw DimensionError("alphabet size does not match feature tables");
    }
}

Dataset Dataset::uniform(std::vector<Record> records, std::optional<LabelAlphabet> alphabet) {
    const double weight = records.empty() ? 0.0 : 1.0 / static_cast<double>(records.size());
    for (auto &rec : records) {
        rec.weight = weight;
    }
    return Dataset(std::move(records), std::move(alphabet));
}

FeatureTable build_feature_table(const Sequence &seq, const LabelAlphabet &alphabet,
                                 std::span<const IndicatorTemplate> templates) {
    if (templates.empty()) {
        throw DimensionError("at least one feature template is required");
    }
    seq.validate(&alphabet);
    std::vector<int> template_label(templates.size());
    for (std::size_t k = 0; k < templates.size(); ++k) {
        template_label[k] = alphabet.index_of(templates[k].label);
    }
    return FeatureTable::from_function(
        static_cast<int>(templates.size()), seq.size(), alphabet.size(), [&](int k, int i, int j) {
            const bool match = seq.observations[static_cast<std::size_t>(i)] == templates[static_cast<std::size_t>(k)].token &&
                               j == template_label[static_cast<std::size_t>(k)];
            return match ? 1 : -1;
        });
}

Dataset build_dataset(std::span<const Sequence> sequences, const LabelAlphabet &alphabet,
                      std::span<const IndicatorTemplate> templates) {
    std::vector<Record> records;
    records.reserve(sequences.size());
    for (const auto &seq : sequences) {
        if (!seq.labels) {
            throw DomainError("training sequences must carry labels");
        }
        Record rec;
        rec.table = build_feature_table(seq, alphabet, templates);
        for (const auto &label : *seq.labels) {
            rec.labels.push_back(alphabet.index_of(label));
        }
        records.push_back(std::move(rec));
    }
    return Dataset::uniform(std::move(records), alphabet);
}

Record random_record(int n, int K, int Q, std::uint64_t seed) {
    Rng rng(seed);
    Record rec;
    rec.table = FeatureTable::from_function(K, n, Q, [&](int, int, int) { return rng.bernoulli(0.5) ? 1 : -1; });
    rec.labels.resize(static_cast<std::size_t>(n));
    for (auto &y : rec.labels) {
        y = static_cast<int>(rng.below(static_cast<std::uint64_t>(Q)));
    }
    rec.weight = 1.0;
    return rec;
}

}  // namespace qcrf::crf
