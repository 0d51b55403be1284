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

#include "qcrf/sim/precision.hpp"

#include <cmath>
#include <string>

#include "qcrf/errors.hpp"

namespace qcrf::sim {

PhaseCodec::PhaseCodec(double lo, double hi, int bits) : lo_(lo), hi_(hi), bits_(bits) {
    if (bits < 1 || bits > 32) {
        throw ConfigError("phase register width must be in [1, 32]");
    }
    if (!(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ConfigError("phase codec needs a finite interval lo <= hi");
    }
    if (hi_ == lo_) {
        hi_ = lo_ + 1.0;  // constant spectrum: lo maps to code 0 exactly
    }
    step_ = (hi_ - lo_) / static_cast<double>(modulus() - 1);
}

std::uint64_t PhaseCodec::encode(double value) const {
    const double scaled = std::nearbyint((value - lo_) / step_);
    if (scaled < 0.0 || scaled > static_cast<double>(modulus() - 1)) {
        throw ContractViolation("eigenvalue outside the phase codec interval");
    }
    return static_cast<std::uint64_t>(scaled);
}

FixedPoint::FixedPoint(int int_bits, int frac_bits)
    : int_bits_(int_bits), frac_bits_(frac_bits), ulp_(std::ldexp(1.0, -frac_bits)) {
    if (int_bits < 1 || frac_bits < 1 || int_bits + frac_bits > 60) {
        throw ConfigError("fixed-point format needs 1 <= bits and a total width <= 60");
    }
}

std::uint64_t FixedPoint::encode(double value, std::uint64_t branch) const {
    const double scaled = std::nearbyint(std::ldexp(value, frac_bits_));
    if (!(scaled >= 0.0)) {
        throw SaturationError("fixed-point underflow: negative value " + std::to_string(value), branch);
    }
    if (scaled >= static_cast<double>(modulus())) {
        throw SaturationError("fixed-point overflow: " + std::to_string(value) + " needs more than " +
                                  std::to_string(int_bits_) + " integer bits",
                              branch);
    }
    return static_cast<std::uint64_t>(scaled);
}

void PrecisionConfig::validate() const {
    if (r < 4 || r > 24) {
        throw ConfigError("precision register width r must be in [4, 24], got " + std::to_string(r));
    }
    if (integer_bits < 1 || integer_bits > 24) {
        throw ConfigError("integer_bits must be in [1, 24]");
    }
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw ConfigError("epsilon must lie in (0, 1)");
    }
    if (!(attempt_factor >= 1.0)) {
        throw ConfigError("attempt_factor must be >= 1");
    }
    if (!std::isfinite(C)) {
        throw ConfigError("rotation constant must be finite");
    }
}

double default_rotation_constant(double dimension, int feature_qubits, double max_abs_weight, double epsilon) {
    const double shrink = static_cast<double>(feature_qubits) * max_abs_weight;
    if (!(dimension > shrink)) {
        throw ConfigError("default rotation constant undefined: D <= nK max|w|");
    }
    return std::sqrt(dimension * (1.0 - epsilon) / (dimension - shrink));
}

}  // namespace qcrf::sim
