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

// Register-level simulation of the trace-estimation circuit for one diagonal
// Hamiltonian H and one non-negative diagonal factor F:
//
//   |0>                                  uniform superposition over D basis states
//   -> |psi_k>|E_k>                      phase estimation of H into reg2
//   -> |psi_k>|E_k>|mu_k>                phase estimation of F into reg3
//   -> ... |e^E_k> ... |lambda_k>        EXP gate, then lambda = mu * e^E
//   -> |psi_k>|E_k>|lambda_k>            EXP and reg3 uncomputed
//   -> ... (q_k|0> + sqrt(1-q_k^2)|1>)   rotation, q_k = C sqrt(lambda_k)
//   -> sum_k sqrt(lambda_k)|psi_k>       ancilla measured as 0, registers uncomputed
//
// Every basis state is an eigenvector of the diagonal operators, so phase
// estimation is exact up to the r-bit quantization of the codec.

#include <cstdint>
#include <utility>

#include "qcrf/model/diagonal.hpp"
#include "qcrf/model/projector.hpp"
#include "qcrf/sim/precision.hpp"
#include "qcrf/sim/register_state.hpp"

namespace qcrf::sim {

/// Amplitude 1/sqrt(D) on every valid basis state, all registers zero.
RegisterState prepare_uniform(const model::RegisterLayout &layout);

/// Codec covering the operator's spectrum bounds.
PhaseCodec phase_codec_for(const model::DiagonalOperator &op, int bits);

/// target += code(op(main)) mod 2^r; requires target == 0 on every branch.
void phase_estimate(RegisterState &state, const model::DiagonalOperator &op, RegisterId target, const PhaseCodec &codec);
/// target -= code(op(main)) mod 2^r.
void inverse_phase_estimate(RegisterState &state, const model::DiagonalOperator &op, RegisterId target,
                            const PhaseCodec &codec);

/// exp_reg += fixed(e^decode(reg2)) mod 2^width.
void apply_exp(RegisterState &state, const PhaseCodec &h_codec, const FixedPoint &fixed);
void inverse_exp(RegisterState &state, const PhaseCodec &h_codec, const FixedPoint &fixed);

/// lambda_reg += fixed(value(exp_reg) * decode(reg3)) mod 2^width.
void apply_multiply(RegisterState &state, const PhaseCodec &factor_codec, const FixedPoint &fixed);
void inverse_multiply(RegisterState &state, const PhaseCodec &factor_codec, const FixedPoint &fixed);

/// Ancilla rotation by q = C sqrt(value(lambda_reg)). Throws ConfigError if q > 1.
void controlled_rotation(RegisterState &state, double C, const FixedPoint &fixed);
void inverse_controlled_rotation(RegisterState &state, double C, const FixedPoint &fixed);

/// Samples the ancilla and collapses the state. Returns (outcome was 0, P(0)).
std::pair<bool, double> measure_ancilla(RegisterState &state, std::uint64_t seed);

/// Drops branches with |amp|^2 <= tol.
void prune(RegisterState &state, double tol = 1e-28);

struct ProjectorMeasurement {
    double mean = 0.0;
    double standard_error = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t shots = 0;
    double probability = 0.0;  ///< exact <phi|P|phi>
};

/// <phi|P|phi> from the amplitudes.
double projector_probability(const RegisterState &state, const model::Projector &P);

/// m Bernoulli draws with success probability <phi|P|phi>.
ProjectorMeasurement measure_projector(const RegisterState &state, const model::Projector &P, std::uint64_t shots,
                                       std::uint64_t seed);

/// Circuit for one (H, F) pair. F must be non-negative.
class TracePipeline {
   public:
    TracePipeline(model::DiagonalOperator h, model::DiagonalOperator factor, const PrecisionConfig &cfg);

    /// Steps up to the rotation: |psi_k>|E_k> in reg2, |lambda_k> in lambda_reg.
    RegisterState encode() const;
    /// Rotation on an encoded state.
    RegisterState rotate(RegisterState encoded) const;
    /// Measure the ancilla; on success uncompute every work register.
    std::pair<RegisterState, bool> postselect(RegisterState rotated, std::uint64_t seed) const;
    /// The post-selected state, computed deterministically (success branch).
    RegisterState amplitude_state() const;

    /// Quantized lambda on every branch of an encoded state, in branch order.
    std::vector<double> lambdas(const RegisterState &encoded) const;

    double rotation_constant() const { return C_; }
    double lambda_sum() const { return lambda_sum_; }
    double lambda_max() const { return lambda_max_; }
    double dimension() const { return static_cast<double>(h_.layout().dimension()); }
    /// C^2 sum(lambda) / D.
    double p0_analytic() const { return C_ * C_ * lambda_sum_ / dimension(); }
    bool empty() const { return lambda_sum_ == 0.0; }

    const PhaseCodec &h_codec() const { return h_codec_; }
    const PhaseCodec &factor_codec() const { return f_codec_; }
    const FixedPoint &fixed() const { return fixed_; }

   private:
    void uncompute_after_measurement(RegisterState &state) const;

    model::DiagonalOperator h_;
    model::DiagonalOperator f_;
    PrecisionConfig cfg_;
    PhaseCodec h_codec_;
    PhaseCodec f_codec_;
    FixedPoint fixed_;
    double C_ = 0.0;
    double lambda_sum_ = 0.0;
    double lambda_max_ = 0.0;
};

}  // namespace qcrf::sim
