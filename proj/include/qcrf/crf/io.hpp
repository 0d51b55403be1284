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

// Text formats:
//   dataset:       one "observation<TAB>label" per line, blank line between sequences
//   feature table: header "K n Q", then one line per (k, i) (k outer, i inner)
//                  holding the Q signs for labels 0..Q-1

#include <iosfwd>
#include <string>
#include <vector>

#include "qcrf/crf/types.hpp"

namespace qcrf::crf {

std::vector<Sequence> parse_dataset(std::istream &in);
std::vector<Sequence> read_dataset_file(const std::string &path);

/// Labels in order of first appearance.
LabelAlphabet collect_alphabet(const std::vector<Sequence> &sequences);

FeatureTable parse_feature_table(std::istream &in);
FeatureTable read_feature_table_file(const std::string &path);
void write_feature_table(std::ostream &out, const FeatureTable &table);

/// Floating-point text with 17 significant digits.
std::string format_double(double value);

}  // namespace qcrf::crf
