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
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace qcrf::crf {

/// Ordered set of label tokens with a bijective index mapping.
class LabelAlphabet {
   public:
    LabelAlphabet() = default;
    explicit LabelAlphabet(std::vector<std::string> labels);

    int size() const { return static_cast<int>(labels_.size()); }
    const std::string &token(int index) const;
    int index_of(const std::string &token) const;
    bool contains(const std::string &token) const { return index_.count(token) != 0; }
    const std::vector<std::string> &labels() const { return labels_; }

   private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> index_;
};

/// Observation tokens with optional gold labels.
struct Sequence {
    std::vector<std::string> observations;
    std::optional<std::vector<std::string>> labels;

    int size() const { return static_cast<int>(observations.size()); }
    /// Throws DimensionError / DomainError when the invariants fail.
    void validate(const LabelAlphabet *alphabet = nullptr) const;
};

/// Feature signs f_k(x_i, label j) in {-1, +1} for one observation sequence.
///
/// Indices are zero based. Storage keeps the K signs of a (position, label)
/// pair contiguous so the potential of a node is one signed dot product.
class FeatureTable {
   public:
    FeatureTable() = default;

    /// `signs` in file order: k outermost, then position i, then label j.
    FeatureTable(int K, int n, int Q, std::span<const int> signs);

    static FeatureTable from_function(int K, int n, int Q,
                                      const std::function<int(int k, int i, int j)> &f);

    int features() const { return K_; }
    int positions() const { return n_; }
    int labels() const { return Q_; }

    int at(int k, int i, int j) const {
        return signs_[(static_cast<std::size_t>(i) * Q_ + j) * K_ + k];
    }
    /// The K signs of (position i, label j).
    std::span<const std::int8_t> node(int i, int j) const {
        return {signs_.data() + (static_cast<std::size_t>(i) * Q_ + j) * K_, static_cast<std::size_t>(K_)};
    }

    /// Copy with one extra always-+1 feature appended.
    FeatureTable with_constant_feature() const;

    friend bool operator==(const FeatureTable &, const FeatureTable &) = default;

   private:
    int K_ = 0;
    int n_ = 0;
    int Q_ = 0;
    std::vector<std::int8_t> signs_;
};

/// Feature weights plus the gradient step length.
struct Weights {
    std::vector<double> w;
    double eta = 0.1;

    std::size_t size() const { return w.size(); }
    /// Throws DomainError on non-finite entries or negative eta.
    void validate() const;
};

/// One labeled training sequence with its empirical weight.
struct Record {
    FeatureTable table;
    std::vector<int> labels;
    double weight = 1.0;
};

/// Labeled records sharing K and Q, with weights summing to one.
class Dataset {
   public:
    Dataset() = default;
    explicit Dataset(std::vector<Record> records, std::optional<LabelAlphabet> alphabet = std::nullopt);

    /// Equal weights 1/N.
    static Dataset uniform(std::vector<Record> records, std::optional<LabelAlphabet> alphabet = std::nullopt);

    const std::vector<Record> &records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    int features() const { return K_; }
    int labels() const { return Q_; }
    const std::optional<LabelAlphabet> &alphabet() const { return alphabet_; }

   private:
    std::vector<Record> records_;
    std::optional<LabelAlphabet> alphabet_;
    int K_ = 0;
    int Q_ = 0;
};

/// Feature template "observation == token and label == label".
struct IndicatorTemplate {
    std::string token;
    std::string label;
};

/// Signs from indicator templates: +1 on a match, -1 otherwise.
FeatureTable build_feature_table(const Sequence &seq, const LabelAlphabet &alphabet,
                                 std::span<const IndicatorTemplate> templates);

/// Labeled sequences to a uniformly weighted dataset.
Dataset build_dataset(std::span<const Sequence> sequences, const LabelAlphabet &alphabet,
                      std::span<const IndicatorTemplate> templates);

/// Dataset-independent random instance: signs uniform in {-1, +1}, labels uniform.
Record random_record(int n, int K, int Q, std::uint64_t seed);

}  // namespace qcrf::crf
