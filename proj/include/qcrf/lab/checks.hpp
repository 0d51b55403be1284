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
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qcrf/crf/types.hpp"

namespace qcrf::lab {

/// Worst residual of one identity over every instance it was evaluated on.
struct CheckResult {
    std::string name;
    double tolerance = 0.0;
    double worst = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
    std::string skip_reason;

    bool pass() const { return worst <= tolerance; }
};

/// Collects residuals by check name, in first-seen order.
class CheckSuite {
   public:
    void record(const std::string &name, double residual, double tolerance);
    void skip(const std::string &name, double tolerance, const std::string &reason);

    const std::vector<CheckResult> &results() const { return results_; }
    bool pass() const;
    void print(std::ostream &out) const;
    /// check,evaluated,skipped,worst_residual,tolerance,status
    void write_csv(std::ostream &out) const;

   private:
    CheckResult &slot(const std::string &name, double tolerance);

    std::vector<CheckResult> results_;
    std::map<std::string, std::size_t> index_;
};

/// Tolerances of the identity suite.
inline constexpr double kTraceTolerance = 1e-10;         ///< relative
inline constexpr double kProbabilityTolerance = 1e-12;   ///< absolute
inline constexpr double kGradientTolerance = 1e-10;      ///< absolute, scaled by max(1, |g|)
inline constexpr double kFiniteDifferenceTolerance = 1e-6;
inline constexpr double kFiniteDifferenceStep = 1e-5;

/// Operator identities and probability bridge for one labeled sequence.
void check_record(CheckSuite &suite, const crf::Record &record, std::span<const double> w);

/// Gradient agreement (naive, factorized, operator form) and finite differences.
void check_gradients(CheckSuite &suite, const crf::Dataset &ds, std::span<const double> w);

/// Both of the above for every record.
void check_dataset(CheckSuite &suite, const crf::Dataset &ds, std::span<const double> w);

/// Random instance with Q^n 2^(nK) <= max_dimension and weights uniform in [-1, 1].
struct RandomInstance {
    crf::Dataset dataset;
    std::vector<double> w;
};
RandomInstance random_instance(std::uint64_t seed, std::uint64_t max_dimension = std::uint64_t{1} << 16);

}  // namespace qcrf::lab
