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

namespace qcrf::sim {

/// Affine map from an eigenvalue interval [lo, hi] onto r-bit phase codes
/// 0 .. 2^r - 1 (phase = code / 2^r stays in [0, 1)). Rounding is to nearest,
/// ties to even.
class PhaseCodec {
   public:
    PhaseCodec(double lo, double hi, int bits);

    std::uint64_t encode(double value) const;
    double decode(std::uint64_t code) const { return lo_ + static_cast<double>(code) * step_; }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int bits() const { return bits_; }
    double step() const { return step_; }
    /// Largest decode(encode(v)) - v over [lo, hi], ignoring float rounding.
    double max_error() const { return 0.5 * step_; }
    std::uint64_t modulus() const { return std::uint64_t{1} << bits_; }

   private:
    double lo_;
    double hi_;
    int bits_;
    double step_;
};

/// Unsigned fixed point with `int_bits` integer and `frac_bits` fractional bits.
class FixedPoint {
   public:
    FixedPoint(int int_bits, int frac_bits);

    /// Throws SaturationError (tagged with `branch`) outside [0, 2^int_bits).
    std::uint64_t encode(double value, std::uint64_t branch) const;
    double decode(std::uint64_t raw) const { return static_cast<double>(raw) * ulp_; }

    int int_bits() const { return int_bits_; }
    int frac_bits() const { return frac_bits_; }
    int width() const { return int_bits_ + frac_bits_; }
    double ulp() const { return ulp_; }
    std::uint64_t modulus() const { return std::uint64_t{1} << width(); }

   private:
    int int_bits_;
    int frac_bits_;
    double ulp_;
};

struct PrecisionConfig {
    int r = 12;                 ///< bits per precision register, in [4, 24]
    int integer_bits = 8;       ///< integer part of the arithmetic registers
    double C = 0.0;             ///< rotation constant; <= 0 selects it automatically
    double epsilon = 0.1;       ///< post-selection slack used by the default C
    double attempt_factor = 50; ///< per-copy attempt budget = ceil(attempt_factor / P(0))

    /// Throws ConfigError.
    void validate() const;
};

/// sqrt(D (1 - eps) / (D - nK max|w|)), max|w| read as the largest |w_k|.
double default_rotation_constant(double dimension, int feature_qubits, double max_abs_weight, double epsilon);

}  // namespace qcrf::sim
