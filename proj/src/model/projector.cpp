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

#include "qcrf/model/projector.hpp"

#include <algorithm>

#include "qcrf/crf/crf.hpp"
#include "qcrf/errors.hpp"

namespace qcrf::model {

Projector::Projector(RegisterLayout layout, std::shared_ptr<const std::function<bool(std::uint64_t)>> indicator,
                     std::shared_ptr<const std::vector<std::uint64_t>> support)
    : layout_(layout), indicator_(std::move(indicator)), support_(std::move(support)) {}

Projector Projector::from_indicator(RegisterLayout layout, std::function<bool(std::uint64_t)> indicator) {
    return Projector(layout, std::make_shared<const std::function<bool(std::uint64_t)>>(std::move(indicator)), nullptr);
}

Projector Projector::with_support(RegisterLayout layout, std::function<bool(std::uint64_t)> indicator,
                                  std::vector<std::uint64_t> support) {
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    return Projector(layout, std::make_shared<const std::function<bool(std::uint64_t)>>(std::move(indicator)),
                     std::make_shared<const std::vector<std::uint64_t>>(std::move(support)));
}

std::vector<std::uint64_t> Projector::support() const {
    if (support_) {
        return *support_;
    }
    std::vector<std::uint64_t> out;
    layout_.for_each_basis([&](std::uint64_t b) {
        if ((*indicator_)(b)) {
            out.push_back(b);
        }
    });
    return out;
}

std::uint64_t Projector::rank() const { return support_ ? support_->size() : support().size(); }

std::uint64_t clamped_pattern(const crf::FeatureTable &table, std::span<const int> y) {
    const RegisterLayout layout(table.positions(), table.features(), table.labels(), Mode::clamped);
    std::uint64_t bits = 0;
    for (int i = 0; i < table.positions(); ++i) {
        const int j = y[static_cast<std::size_t>(i)];
        if (j < 0 || j >= table.labels()) {
            throw DomainError("label index out of range: " + std::to_string(j));
        }
        for (int k = 0; k < table.features(); ++k) {
            if (table.at(k, i, j) < 0) {
                bits |= std::uint64_t{1} << layout.slot(k, i);
            }
        }
    }
    return bits;
}

Projector build_lambda_xy(const crf::FeatureTable &table, std::span<const int> y) {
    if (static_cast<int>(y.size()) != table.positions()) {
        throw DimensionError("label sequence length does not match the feature table");
    }
    const RegisterLayout layout(table.positions(), table.features(), table.labels(), Mode::clamped);
    const std::uint64_t pattern = clamped_pattern(table, y);
    return Projector::with_support(
        layout, [pattern](std::uint64_t b) { return b == pattern; }, {pattern});
}

Projector build_lambda_x(const crf::FeatureTable &table) {
    const RegisterLayout layout(table.positions(), table.features(), table.labels(), Mode::free);
    constexpr std::uint64_t kExplicitSupportCap = std::uint64_t{1} << 22;
    std::vector<std::uint64_t> support;
    if (layout.label_configurations() <= kExplicitSupportCap) {
        support.reserve(layout.label_configurations());
        crf::for_each_labeling(table.positions(), table.labels(), [&](std::span<const int> j) {
            support.push_back(layout.compose(j, clamped_pattern(table, j)));
        });
    }
    // Position-local control: label register i selects the signs checked on
    // the feature qubits of position i.
    auto indicator = [table, layout](std::uint64_t index) {
        for (int i = 0; i < layout.positions(); ++i) {
            const int j = layout.label_of(index, i);
            if (j >= layout.labels()) {
                return false;
            }
            for (int k = 0; k < layout.features(); ++k) {
                const int expected = table.at(k, i, j) < 0 ? 1 : 0;
                if (layout.feature_bit(index, k, i) != expected) {
                    return false;
                }
            }
        }
        return true;
    };
    if (support.empty()) {
        return Projector::from_indicator(layout, std::move(indicator));
    }
    return Projector::with_support(layout, std::move(indicator), std::move(support));
}

}  // namespace qcrf::model
