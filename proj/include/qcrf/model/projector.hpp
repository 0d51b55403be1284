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
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qcrf/crf/types.hpp"
#include "qcrf/model/layout.hpp"

namespace qcrf::model {

/// Diagonal 0/1 projector. When the support is known at construction it is
/// kept sorted, so traces only visit rank-many indices.
class Projector {
   public:
    static Projector from_indicator(RegisterLayout layout, std::function<bool(std::uint64_t)> indicator);
    /// `indicator` must agree with membership in `support`.
    static Projector with_support(RegisterLayout layout, std::function<bool(std::uint64_t)> indicator,
                                  std::vector<std::uint64_t> support);

    const RegisterLayout &layout() const { return layout_; }
    bool operator()(std::uint64_t index) const { return layout_.is_valid(index) && (*indicator_)(index); }

    /// Sorted indices with indicator 1 (scans the layout if not known).
    std::vector<std::uint64_t> support() const;
    std::uint64_t rank() const;
    bool has_explicit_support() const { return support_ != nullptr; }

   private:
    Projector(RegisterLayout layout, std::shared_ptr<const std::function<bool(std::uint64_t)>> indicator,
              std::shared_ptr<const std::vector<std::uint64_t>> support);

    RegisterLayout layout_;
    std::shared_ptr<const std::function<bool(std::uint64_t)>> indicator_;
    std::shared_ptr<const std::vector<std::uint64_t>> support_;
};

/// Feature bits b with b_{k,i} = (1 - f_k(x_i, y_i)) / 2.
std::uint64_t clamped_pattern(const crf::FeatureTable &table, std::span<const int> y);

/// Rank-1 projector on the clamped layout selecting the data pattern of y.
Projector build_lambda_xy(const crf::FeatureTable &table, std::span<const int> y);

/// Rank-Q^n projector on the free layout: label register i holding j_i and
/// feature bits matching f(x_i, j_i), for every labeling j.
Projector build_lambda_x(const crf::FeatureTable &table);

}  // namespace qcrf::model
