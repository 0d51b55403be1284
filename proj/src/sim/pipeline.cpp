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

#include "qcrf/sim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcrf/errors.hpp"
#include "qcrf/random.hpp"
#include "qcrf/simd/kernels.hpp"

namespace qcrf::sim {

namespace {

std::uint64_t &target_of(Branch &b, RegisterId id) { return id == RegisterId::reg2 ? b.reg2 : b.reg3; }

/// Operator entries at the branch mains, batching contiguous runs through eval_range.
std::vector<double> eval_on_branches(const model::DiagonalOperator &op, const std::vector<Branch> &branches) {
    std::vector<double> out(branches.size());
    std::size_t t = 0;
    while (t < branches.size()) {
        std::size_t end = t + 1;
        while (end < branches.size() && branches[end].main == branches[end - 1].main + 1) {
            ++end;
        }
        if (end - t > 1) {
            op.eval_range(branches[t].main, std::span<double>(out).subspan(t, end - t));
        } else {
            out[t] = op(branches[t].main);
        }
        t = end;
    }
    return out;
}

void require_layout(const RegisterState &state, const model::DiagonalOperator &op) {
    if (!(state.layout() == op.layout())) {
        throw DimensionError("operator and register state live on different layouts");
    }
}

double rotation_amplitude(double C, double lambda, std::uint64_t branch) {
    const double q = C * std::sqrt(lambda);
    if (q > 1.0 + 1e-12) {
        throw ConfigError("rotation amplitude q = " + std::to_string(q) + " > 1 on branch main=" +
                          std::to_string(branch) + "; rotation constant C too large");
    }
    return std::min(q, 1.0);
}

void rotate_pairs(RegisterState &state, double C, const FixedPoint &fixed, double direction) {
    auto &in = state.branches();
    std::vector<Branch> out;
    out.reserve(in.size() * 2);
    std::size_t t = 0;
    while (t < in.size()) {
        Branch zero = in[t];
        Branch one = in[t];
        zero.ancilla = 0;
        one.ancilla = 1;
        std::complex<double> a0 = 0.0;
        std::complex<double> a1 = 0.0;
        std::size_t end = t;
        while (end < in.size() && in[end].main == in[t].main) {
            (in[end].ancilla == 0 ? a0 : a1) = in[end].amp;
            ++end;
        }
        if (end - t == 2 && !(in[t].reg2 == in[t + 1].reg2 && in[t].lambda_reg == in[t + 1].lambda_reg)) {
            throw ContractViolation("ancilla pair disagrees on work registers");
        }
        const double q = rotation_amplitude(C, fixed.decode(in[t].lambda_reg), in[t].main);
        const double c = q;
        const double s = direction * std::sqrt(std::max(0.0, 1.0 - q * q));
        zero.amp = c * a0 - s * a1;
        one.amp = s * a0 + c * a1;
        out.push_back(zero);
        out.push_back(one);
        t = end;
    }
    in = std::move(out);
}

}  // namespace

RegisterState prepare_uniform(const model::RegisterLayout &layout) {
    const std::uint64_t D = layout.dimension();
    if (D > kSimulationCap) {
        throw DimensionError("simulation cap exceeded: D = " + std::to_string(D) + " > " + std::to_string(kSimulationCap));
    }
    RegisterState state(layout);
    auto &branches = state.branches();
    branches.resize(D);
    const double amp = 1.0 / std::sqrt(static_cast<double>(D));
    for (std::uint64_t t = 0; t < D; ++t) {
        branches[t].main = layout.basis_index(t);
        branches[t].amp = amp;
    }
    return state;
}

PhaseCodec phase_codec_for(const model::DiagonalOperator &op, int bits) {
    const auto [lo, hi] = op.spectrum_bounds();
    return PhaseCodec(lo, hi, bits);
}

void phase_estimate(RegisterState &state, const model::DiagonalOperator &op, RegisterId target,
                    const PhaseCodec &codec) {
    require_layout(state, op);
    const auto values = eval_on_branches(op, state.branches());
    const std::uint64_t mask = codec.modulus() - 1;
    for (std::size_t t = 0; t < state.size(); ++t) {
        auto &reg = target_of(state.branches()[t], target);
        if (reg != 0) {
            throw ContractViolation("phase estimation target register is not zero on branch main=" +
                                    std::to_string(state.branches()[t].main));
        }
        reg = (reg + codec.encode(values[t])) & mask;
    }
}

void inverse_phase_estimate(RegisterState &state, const model::DiagonalOperator &op, RegisterId target,
                            const PhaseCodec &codec) {
    require_layout(state, op);
    const auto values = eval_on_branches(op, state.branches());
    const std::uint64_t mask = codec.modulus() - 1;
    for (std::size_t t = 0; t < state.size(); ++t) {
        auto &reg = target_of(state.branches()[t], target);
        reg = (reg - codec.encode(values[t])) & mask;
    }
}

void apply_exp(RegisterState &state, const PhaseCodec &h_codec, const FixedPoint &fixed) {
    const std::uint64_t mask = fixed.modulus() - 1;
    for (auto &b : state.branches()) {
        b.exp_reg = (b.exp_reg + fixed.encode(std::exp(h_codec.decode(b.reg2)), b.main)) & mask;
    }
}

void inverse_exp(RegisterState &state, const PhaseCodec &h_codec, const FixedPoint &fixed) {
    const std::uint64_t mask = fixed.modulus() - 1;
    for (auto &b : state.branches()) {
        b.exp_reg = (b.exp_reg - fixed.encode(std::exp(h_codec.decode(b.reg2)), b.main)) & mask;
    }
}

void apply_multiply(RegisterState &state, const PhaseCodec &factor_codec, const FixedPoint &fixed) {
    const std::uint64_t mask = fixed.modulus() - 1;
    for (auto &b : state.branches()) {
        const double product = fixed.decode(b.exp_reg) * factor_codec.decode(b.reg3);
        b.lambda_reg = (b.lambda_reg + fixed.encode(product, b.main)) & mask;
    }
}

void inverse_multiply(RegisterState &state, const PhaseCodec &factor_codec, const FixedPoint &fixed) {
    const std::uint64_t mask = fixed.modulus() - 1;
    for (auto &b : state.branches()) {
        const double product = fixed.decode(b.exp_reg) * factor_codec.decode(b.reg3);
        b.lambda_reg = (b.lambda_reg - fixed.encode(product, b.main)) & mask;
    }
}

void controlled_rotation(RegisterState &state, double C, const FixedPoint &fixed) {
    rotate_pairs(state, C, fixed, 1.0);
}

void inverse_controlled_rotation(RegisterState &state, double C, const FixedPoint &fixed) {
    rotate_pairs(state, C, fixed, -1.0);
    prune(state);
}

std::pair<bool, double> measure_ancilla(RegisterState &state, std::uint64_t seed) {
    const double p0 = state.ancilla_zero_probability();
    Rng rng(seed);
    const bool success = rng.uniform() < p0;
    const std::uint8_t keep = success ? 0 : 1;
    const double scale = 1.0 / std::sqrt(success ? p0 : 1.0 - p0);
    auto &branches = state.branches();
    std::erase_if(branches, [keep](const Branch &b) { return b.ancilla != keep; });
    for (auto &b : branches) {
        b.amp *= scale;
    }
    return {success, p0};
}

void prune(RegisterState &state, double tol) {
    std::erase_if(state.branches(), [tol](const Branch &b) { return std::norm(b.amp) <= tol; });
}

double projector_probability(const RegisterState &state, const model::Projector &P) {
    const auto &branches = state.branches();
    std::vector<double> prob(branches.size());
    std::vector<double> mask(branches.size());
    for (std::size_t t = 0; t < branches.size(); ++t) {
        prob[t] = std::norm(branches[t].amp);
        mask[t] = P(branches[t].main) ? 1.0 : 0.0;
    }
    return simd::dot(prob, mask);
}

ProjectorMeasurement measure_projector(const RegisterState &state, const model::Projector &P, std::uint64_t shots,
                                       std::uint64_t seed) {
    if (shots < 1) {
        throw DomainError("projector measurement needs at least one shot");
    }
    ProjectorMeasurement out;
    out.shots = shots;
    out.probability = std::clamp(projector_probability(state, P), 0.0, 1.0);
    Rng rng(seed);
    for (std::uint64_t s = 0; s < shots; ++s) {
        out.hits += rng.bernoulli(out.probability) ? 1 : 0;
    }
    const double m = static_cast<double>(shots);
    out.mean = static_cast<double>(out.hits) / m;
    out.standard_error = std::sqrt(out.mean * (1.0 - out.mean) / m);
    return out;
}

TracePipeline::TracePipeline(model::DiagonalOperator h, model::DiagonalOperator factor, const PrecisionConfig &cfg)
    : h_(std::move(h)),
      f_(std::move(factor)),
      cfg_(cfg),
      h_codec_(phase_codec_for(h_, cfg.r)),
      f_codec_(phase_codec_for(f_, cfg.r)),
      fixed_(cfg.integer_bits, cfg.r) {
    cfg.validate();
    if (!(h_.layout() == f_.layout())) {
        throw DimensionError("Hamiltonian and factor live on different layouts");
    }
    if (f_codec_.lo() < 0.0) {
        throw DomainError("trace pipeline factor must be non-negative; split it first");
    }
    const auto encoded = encode();
    for (double l : lambdas(encoded)) {
        lambda_sum_ += l;
        lambda_max_ = std::max(lambda_max_, l);
    }
    if (cfg.C > 0.0) {
        C_ = cfg.C;
        rotation_amplitude(C_, lambda_max_, 0);
    } else {
        double max_abs_w = 0.0;
        if (h_.zform()) {
            for (double c : h_.zform()->coeff) {
                max_abs_w = std::max(max_abs_w, std::abs(c));
            }
        }
        const double D = dimension();
        const double nK = h_.layout().feature_bits();
        C_ = D > nK * max_abs_w ? default_rotation_constant(D, h_.layout().feature_bits(), max_abs_w, cfg.epsilon)
                                : 1.0;
        if (lambda_max_ > 0.0) {
            C_ = std::min(C_, 1.0 / std::sqrt(lambda_max_));
        }
    }
}

RegisterState TracePipeline::encode() const {
    RegisterState state = prepare_uniform(h_.layout());
    phase_estimate(state, h_, RegisterId::reg2, h_codec_);
    phase_estimate(state, f_, RegisterId::reg3, f_codec_);
    apply_exp(state, h_codec_, fixed_);
    apply_multiply(state, f_codec_, fixed_);
    inverse_exp(state, h_codec_, fixed_);
    inverse_phase_estimate(state, f_, RegisterId::reg3, f_codec_);
    return state;
}

std::vector<double> TracePipeline::lambdas(const RegisterState &encoded) const {
    std::vector<double> out;
    out.reserve(encoded.size());
    for (const auto &b : encoded.branches()) {
        out.push_back(fixed_.decode(b.lambda_reg));
    }
    return out;
}

RegisterState TracePipeline::rotate(RegisterState encoded) const {
    for (const auto &b : encoded.branches()) {
        if (b.ancilla != 0) {
            throw ContractViolation("rotation expects the ancilla in |0> on every branch");
        }
    }
    controlled_rotation(encoded, C_, fixed_);
    return encoded;
}

void TracePipeline::uncompute_after_measurement(RegisterState &state) const {
    phase_estimate(state, f_, RegisterId::reg3, f_codec_);
    apply_exp(state, h_codec_, fixed_);
    inverse_multiply(state, f_codec_, fixed_);
    inverse_exp(state, h_codec_, fixed_);
    inverse_phase_estimate(state, f_, RegisterId::reg3, f_codec_);
    inverse_phase_estimate(state, h_, RegisterId::reg2, h_codec_);
    for (auto &b : state.branches()) {
        b.ancilla = 0;
    }
}

std::pair<RegisterState, bool> TracePipeline::postselect(RegisterState rotated, std::uint64_t seed) const {
    const auto [success, p0] = measure_ancilla(rotated, seed);
    (void)p0;
    if (success) {
        prune(rotated, 0.0);
        uncompute_after_measurement(rotated);
    }
    return {std::move(rotated), success};
}

RegisterState TracePipeline::amplitude_state() const {
    if (empty()) {
        throw PostselectionStarved(0);
    }
    RegisterState state = rotate(encode());
    std::erase_if(state.branches(), [](const Branch &b) { return b.ancilla != 0 || b.amp == 0.0; });
    const double scale = 1.0 / std::sqrt(state.ancilla_zero_probability());
    for (auto &b : state.branches()) {
        b.amp *= scale;
    }
    uncompute_after_measurement(state);
    return state;
}

}  // namespace qcrf::sim
