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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "frozen_values.hpp"
#include "instances.hpp"
#include "qcrf/crf/crf.hpp"
#include "qcrf/errors.hpp"
#include "qcrf/model/qcrf.hpp"
#include "qcrf/random.hpp"
#include "qcrf/sim/estimator.hpp"
#include "qcrf/sim/pipeline.hpp"

using namespace qcrf;
using model::DiagonalOperator;
using model::Mode;
using model::RegisterLayout;
using sim::RegisterId;
using sim::RegisterState;

namespace {

sim::PrecisionConfig precision(int r = 12) {
    sim::PrecisionConfig cfg;
    cfg.r = r;
    return cfg;
}

model::QcrfInstance desk_instance(std::span<const double> w = instances::kDeskWeights) {
    const auto rec = instances::desk();
    return model::make_instance(rec.table, rec.labels, w);
}

const sim::Branch &branch_at(const RegisterState &s, std::uint64_t main) {
    const auto it = std::find_if(s.branches().begin(), s.branches().end(),
                                 [main](const sim::Branch &b) { return b.main == main; });
    REQUIRE(it != s.branches().end());
    return *it;
}

}  // namespace

TEST_CASE("uniform preparation") {
    const RegisterLayout two(1, 1, 2, Mode::clamped);
    const auto s = sim::prepare_uniform(two);
    REQUIRE(s.size() == 2);
    for (const auto &b : s.branches()) {
        CHECK(b.amp.real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
        CHECK(b.registers_clear());
    }
    const RegisterLayout full(2, 5, 2, Mode::free);
    const auto big = sim::prepare_uniform(full);
    CHECK(big.size() == 4 * 1024);
    CHECK(big.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const RegisterLayout odd(2, 2, 3, Mode::free);
    CHECK(sim::prepare_uniform(odd).size() == 9 * 16);
    CHECK_THROWS_AS(sim::prepare_uniform(RegisterLayout(2, 9, 2, Mode::clamped)), DimensionError);
}

TEST_CASE("phase codec") {
    const sim::PhaseCodec codec(-3.64, 3.64, 12);
    CHECK(codec.encode(-3.64) == 0);
    CHECK(codec.encode(3.64) == 4095);
    CHECK(codec.decode(4095) == doctest::Approx(3.64).epsilon(1e-15));
    CHECK_THROWS_AS(codec.encode(3.7), ContractViolation);
    // ties go to even codes
    const sim::PhaseCodec unit(0.0, 15.0, 4);
    CHECK(unit.encode(0.5) == 0);
    CHECK(unit.encode(1.5) == 2);
    CHECK(unit.encode(2.5) == 2);
    const sim::PhaseCodec flat(2.0, 2.0, 8);
    CHECK(flat.encode(2.0) == 0);
    CHECK(flat.decode(0) == 2.0);

    sim::FixedPoint fixed(8, 12);
    CHECK(fixed.decode(fixed.encode(1.0, 0)) == 1.0);
    CHECK_THROWS_AS(fixed.encode(256.0, 17), SaturationError);
    try {
        fixed.encode(-1.0, 42);
    } catch (const SaturationError &e) {
        CHECK(e.branch() == 42);
    }
    auto bad = precision(3);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(precision(25).validate(), ConfigError);
}

TEST_CASE("phase estimation") {
    const RegisterLayout c(2, 5, 2, Mode::clamped);
    const auto h = model::build_h(c, instances::kFullScaleWeights);
    const auto codec = sim::phase_codec_for(h, 12);
    auto state = sim::prepare_uniform(c);
    const auto before = state;
    sim::phase_estimate(state, h, RegisterId::reg2, codec);
    CHECK(state.norm() == doctest::Approx(1.0).epsilon(1e-12));
    double worst = 0.0;
    for (const auto &b : state.branches()) {
        worst = std::max(worst, std::abs(codec.decode(b.reg2) - h(b.main)));
        CHECK(b.reg2 < codec.modulus());
    }
    // range 2^-(r+1) plus the 2^r - 1 grid: 7.28 / (2 (2^12 - 1))
    CHECK(worst <= codec.max_error() * (1.0 + 1e-9));
    CHECK(worst == doctest::Approx(frozen::kFullScaleCodecMaxError).epsilon(1e-9));
    CHECK(worst <= 3.64 * std::ldexp(1.0, -12) + (codec.step() - 7.28 / 4096.0) / 2.0 + 1e-15);
    CHECK_THROWS_AS(sim::phase_estimate(state, h, RegisterId::reg2, codec), ContractViolation);
    sim::inverse_phase_estimate(state, h, RegisterId::reg2, codec);
    CHECK(state == before);

    const auto zero = DiagonalOperator::constant(c, 0.0);
    const auto zcodec = sim::PhaseCodec(-1.0, 1.0, 8);
    auto z = sim::prepare_uniform(c);
    sim::phase_estimate(z, zero, RegisterId::reg3, zcodec);
    for (const auto &b : z.branches()) {
        CHECK(b.reg3 == zcodec.encode(0.0));
    }
    const RegisterLayout other(1, 5, 2, Mode::clamped);
    CHECK_THROWS_AS(sim::phase_estimate(z, model::build_h(other, instances::kFullScaleWeights), RegisterId::reg2, codec),
                    DimensionError);
}

TEST_CASE("register arithmetic") {
    const RegisterLayout c(2, 5, 2, Mode::clamped);
    const auto h = model::build_h(c, instances::kFullScaleWeights);
    const auto mu = model::build_dh(c, 0).positive_part();
    const auto cfg = precision();
    const sim::TracePipeline pipe(h, mu, cfg);
    const auto &hc = pipe.h_codec();
    const auto &fc = pipe.factor_codec();
    const auto &fixed = pipe.fixed();
    CHECK(fixed.int_bits() == 8);
    CHECK(fixed.frac_bits() == 12);

    auto state = sim::prepare_uniform(c);
    sim::phase_estimate(state, h, RegisterId::reg2, hc);
    sim::phase_estimate(state, mu, RegisterId::reg3, fc);
    const auto staged = state;
    sim::apply_exp(state, hc, fixed);
    CHECK(state.norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto &b : state.branches()) {
        CHECK(std::abs(fixed.decode(b.exp_reg) - std::exp(hc.decode(b.reg2))) <= fixed.ulp() / 2);
    }
    auto undo = state;
    sim::inverse_exp(undo, hc, fixed);
    CHECK(undo == staged);

    sim::apply_multiply(state, fc, fixed);
    const auto multiplied = state;
    sim::inverse_multiply(state, fc, fixed);
    sim::apply_multiply(state, fc, fixed);
    CHECK(state == multiplied);
    for (const auto &b : state.branches()) {
        if (mu(b.main) == 0.0) {
            CHECK(b.lambda_reg == 0);
        }
    }
    // b = 0: E = 3.64 (top of the spectrum), mu = n = 2
    const auto &top = branch_at(state, 0);
    CHECK(hc.decode(top.reg2) == doctest::Approx(3.64).epsilon(1e-14));
    CHECK(fc.decode(top.reg3) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::abs(fixed.decode(top.lambda_reg) - 2.0 * std::exp(3.64)) <= std::ldexp(1.0, -(12 - 8)));

    // the encoded state holds lambda only
    const auto encoded = pipe.encode();
    for (const auto &b : encoded.branches()) {
        CHECK(b.reg3 == 0);
        CHECK(b.exp_reg == 0);
        CHECK(b.ancilla == 0);
    }
    CHECK(std::abs(fixed.decode(branch_at(encoded, 0).lambda_reg) - 2.0 * std::exp(3.64)) <= std::ldexp(1.0, -4));

    // large weights overflow the integer part
    const auto wide = model::build_h(c, std::vector<double>{1.0, 1.0, 1.0, 1.0, 1.0});
    CHECK_THROWS_AS(sim::TracePipeline(wide, DiagonalOperator::constant(c, 1.0), cfg), SaturationError);
}

TEST_CASE("rotation and post-selection") {
    const auto q = desk_instance();
    const auto cfg = precision();
    const auto one = DiagonalOperator::constant(q.free, 1.0);
    const sim::TracePipeline pipe(q.hn, one, cfg);
    const auto encoded = pipe.encode();
    const auto lambdas = pipe.lambdas(encoded);
    double sum = 0.0;
    double max = 0.0;
    for (double l : lambdas) {
        sum += l;
        max = std::max(max, l);
    }
    CHECK(pipe.lambda_sum() == doctest::Approx(sum).epsilon(1e-15));
    CHECK(pipe.rotation_constant() * std::sqrt(max) <= 1.0 + 1e-12);

    const auto rotated = pipe.rotate(encoded);
    CHECK(rotated.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(rotated.ancilla_zero_probability() - pipe.p0_analytic()) <= 1e-10);
    auto back = rotated;
    sim::inverse_controlled_rotation(back, pipe.rotation_constant(), pipe.fixed());
    CHECK(max_amplitude_difference(back, encoded) <= 1e-12);

    // post-selected state: sqrt(lambda_k) / sqrt(sum lambda), registers clear
    const auto phi = pipe.amplitude_state();
    CHECK(phi.norm() == doctest::Approx(1.0).epsilon(1e-10));
    for (std::size_t t = 0; t < phi.size(); ++t) {
        const auto &b = phi.branches()[t];
        CHECK(b.registers_clear());
        CHECK(b.amp.real() == doctest::Approx(std::sqrt(lambdas[t] / sum)).epsilon(1e-12));
    }
    bool succeeded = false;
    bool failed = false;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto [state, ok] = pipe.postselect(rotated, seed);
        if (ok) {
            succeeded = true;
            CHECK(max_amplitude_difference(state, phi) <= 1e-12);
        } else {
            failed = true;
            for (const auto &b : state.branches()) {
                CHECK(b.ancilla == 1);
            }
        }
    }
    CHECK(succeeded);
    CHECK(failed);

    // empirical success frequency
    const double p0 = rotated.ancilla_zero_probability();
    int successes = 0;
    const int attempts = 10000;
    for (int a = 0; a < attempts; ++a) {
        auto copy = rotated;
        successes += sim::measure_ancilla(copy, derive_seed(99, {static_cast<std::uint64_t>(a)})).first ? 1 : 0;
    }
    const double sigma = std::sqrt(p0 * (1.0 - p0) / attempts);
    CHECK(std::abs(successes / static_cast<double>(attempts) - p0) <= 3.0 * sigma);

    // C too large
    auto loud = cfg;
    loud.C = 2.0 / std::sqrt(max);
    CHECK_THROWS_AS(sim::TracePipeline(q.hn, one, loud), ConfigError);
}

TEST_CASE("constant lambda gives a uniform post-selected state") {
    const RegisterLayout c(1, 3, 2, Mode::clamped);
    auto cfg = precision();
    cfg.C = 0.5;
    const sim::TracePipeline pipe(DiagonalOperator::constant(c, 0.0), DiagonalOperator::constant(c, 2.0), cfg);
    const auto rotated = pipe.rotate(pipe.encode());
    CHECK(rotated.ancilla_zero_probability() == doctest::Approx(0.25 * 2.0).epsilon(1e-12));
    const auto phi = pipe.amplitude_state();
    for (const auto &b : phi.branches()) {
        CHECK(b.amp.real() == doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-12));
    }
}

TEST_CASE("default rotation constant keeps P(0) above 1 - epsilon for small weights") {
    const auto rec = crf::random_record(1, 2, 2, 3);
    const std::vector<double> w{0.02, 0.03};
    const auto q = model::make_instance(rec.table, rec.labels, w);
    auto cfg = precision();
    cfg.epsilon = 0.1;
    const double D = static_cast<double>(q.clamped.dimension());
    cfg.C = sim::default_rotation_constant(D, 2, 0.03, cfg.epsilon);
    CHECK(cfg.C == doctest::Approx(std::sqrt(D * 0.9 / (D - 2 * 0.03))).epsilon(1e-15));
    const sim::TracePipeline pipe(q.h0, DiagonalOperator::constant(q.clamped, 1.0), cfg);
    CHECK(pipe.rotate(pipe.encode()).ancilla_zero_probability() >= 1.0 - cfg.epsilon);
    CHECK_THROWS_AS(sim::default_rotation_constant(4.0, 4, 1.0, 0.1), ConfigError);
}

TEST_CASE("projector measurement") {
    const auto q = desk_instance();
    const sim::TracePipeline pipe(q.hn, DiagonalOperator::constant(q.free, 1.0), precision());
    const auto phi = pipe.amplitude_state();
    const auto all = model::Projector::from_indicator(q.free, [](std::uint64_t) { return true; });
    const auto none = model::Projector::from_indicator(q.free, [](std::uint64_t) { return false; });
    CHECK(sim::measure_projector(phi, all, 100, 1).mean == 1.0);
    CHECK(sim::measure_projector(phi, none, 100, 1).mean == 0.0);
    const auto m = sim::measure_projector(phi, q.lambda_x, 100000, 5);
    CHECK(m.shots == 100000);
    CHECK(std::abs(m.mean - m.probability) <= 3.0 * m.standard_error);
    CHECK(sim::measure_projector(phi, q.lambda_x, 1000, 5).hits == sim::measure_projector(phi, q.lambda_x, 1000, 5).hits);
    CHECK_THROWS_AS(sim::measure_projector(phi, q.lambda_x, 0, 5), DomainError);
}

TEST_CASE("trace estimates") {
    const auto q = desk_instance();
    const auto cfg = precision();
    const auto clamped = sim::estimate_trace(q, sim::TraceKind::Lxy_H0, -1, cfg, 10000, 3);
    const double e = std::exp(crf::potential(q.table, q.w, q.labels));
    CHECK(std::abs(clamped.value - e) <= 3.0 * clamped.standard_error);
    CHECK(clamped.postselect_successes <= clamped.postselect_attempts);
    CHECK(clamped.shots == 10000);
    CHECK(clamped.r == 12);

    const std::vector<double> zero{0.0, 0.0};
    const auto flat = desk_instance(zero);
    const auto z = sim::estimate_trace(flat, sim::TraceKind::Lx_Hn, -1, cfg, 10000, 4);
    CHECK(std::abs(z.value - 4.0) <= 3.0 * z.standard_error);

    // the data pattern has mu_0 = 0: the clamped derivative trace is exactly zero
    const auto d0 = sim::estimate_trace(q, sim::TraceKind::Lxy_dH0, 0, cfg, 1000, 5);
    CHECK(d0.value == 0.0);
    CHECK(sim::exact_trace(q, sim::TraceKind::Lxy_dH0, 0) == 0.0);
    CHECK_THROWS_AS(sim::estimate_trace(q, sim::TraceKind::Lx_dHn, 2, cfg, 10, 1), DomainError);
    CHECK_THROWS_AS(sim::estimate_trace(q, sim::TraceKind::Lx_Hn, -1, cfg, 0, 1), DomainError);

    // deterministic per seed
    const auto again = sim::estimate_trace(q, sim::TraceKind::Lxy_H0, -1, cfg, 10000, 3);
    CHECK(again.value == clamped.value);
    CHECK(again.postselect_attempts == clamped.postselect_attempts);

    CHECK(sim::parse_trace_kind("Lx_dHn") == sim::TraceKind::Lx_dHn);
    CHECK_THROWS_AS(sim::parse_trace_kind("Lz"), ConfigError);
}

TEST_CASE("single pass equals the split pass on a non-negative factor") {
    const auto q = desk_instance();
    const auto cfg = precision();
    // dHn + n >= 0 everywhere
    const auto shifted = q.dhn(1) + DiagonalOperator::constant(q.free, 2.0);
    const auto single = std::make_shared<const sim::PreparedTrace>(
        sim::PreparedTrace::from_operators(q.hn, shifted, q.lambda_x, cfg, false));
    const auto split = std::make_shared<const sim::PreparedTrace>(
        sim::PreparedTrace::from_operators(q.hn, shifted, q.lambda_x, cfg, true));
    CHECK(split->parts().size() == 2);
    CHECK(split->parts()[1].pipeline->empty());
    CHECK(single->quantized_value() == doctest::Approx(split->quantized_value()).epsilon(1e-12));
    const auto a = sim::estimate_trace(single, 20000, 1);
    const auto b = sim::estimate_trace(split, 20000, 2);
    CHECK(std::abs(a.value - b.value) <= 3.0 * std::hypot(a.standard_error, b.standard_error));
    CHECK(single->exact_value() == doctest::Approx(split->exact_value()).epsilon(1e-15));
}

TEST_CASE("quantized trace is close to the exact trace at r = 12") {
    const auto q = desk_instance();
    for (auto kind : {sim::TraceKind::Lx_dHn, sim::TraceKind::Lx_Hn, sim::TraceKind::Lxy_dH0, sim::TraceKind::Lxy_H0}) {
        for (int k = 0; k < 2; ++k) {
            const sim::PreparedTrace trace(q, kind, k, precision());
            const double exact = sim::exact_trace(q, kind, k);
            CHECK(trace.exact_value() == exact);
            CHECK(std::abs(trace.quantized_value() - exact) <= 2e-3 * std::max(1.0, std::abs(exact)));
        }
    }
}

TEST_CASE("post-selection starvation is reported with the attempt count") {
    const auto q = desk_instance();
    auto cfg = precision();
    cfg.attempt_factor = 1.0;
    const auto trace = std::make_shared<const sim::PreparedTrace>(q, sim::TraceKind::Lx_dHn, 0, cfg);
    int starved = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        try {
            sim::estimate_trace(trace, 1, seed);
        } catch (const PostselectionStarved &e) {
            CHECK(e.attempts() > 0);
            ++starved;
        }
    }
    CHECK(starved > 0);
}

TEST_CASE("standard error shrinks like 1/sqrt(m)") {
    const auto q = desk_instance();
    const auto trace = std::make_shared<const sim::PreparedTrace>(q, sim::TraceKind::Lx_Hn, -1, precision());
    std::vector<double> ratios;
    for (std::uint64_t seed = 0; seed < 9; ++seed) {
        const auto small = sim::estimate_trace(trace, 20000, seed);
        const auto large = sim::estimate_trace(trace, 40000, seed + 100);
        ratios.push_back(large.standard_error / small.standard_error);
    }
    std::nth_element(ratios.begin(), ratios.begin() + 4, ratios.end());
    CHECK(ratios[4] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.1));
}

TEST_CASE("property: seed-averaged estimates agree with the exact traces") {
    const auto q = desk_instance();
    for (auto kind : {sim::TraceKind::Lx_dHn, sim::TraceKind::Lx_Hn, sim::TraceKind::Lxy_dH0, sim::TraceKind::Lxy_H0}) {
        const int k = sim::is_derivative(kind) ? 1 : -1;
        const auto trace = std::make_shared<const sim::PreparedTrace>(q, kind, k, precision());
        double mean = 0.0;
        double var = 0.0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto e = sim::estimate_trace(trace, 2000, derive_seed(17, {seed}));
            mean += e.value / 50.0;
            var += e.standard_error * e.standard_error / 2500.0;
        }
        CAPTURE(sim::trace_kind_name(kind));
        CHECK(std::abs(mean - sim::exact_trace(q, kind, k)) <= 3.0 * std::sqrt(var));
    }
}

TEST_CASE("gradient estimates") {
    const auto ds = instances::single(instances::desk());
    const auto cfg = precision();
    const auto exact = model::quantum_gradient_exact(ds, instances::kDeskWeights);
    for (int k = 0; k < 2; ++k) {
        CHECK(exact[k] == doctest::Approx(frozen::kDeskGradient[k]).epsilon(1e-12));
    }
    const auto est = sim::estimate_gradient(ds, instances::kDeskWeights, cfg, 100000, 8);
    CHECK_FALSE(est.starved);
    REQUIRE(est.traces.size() == 1);
    CHECK(est.traces[0].size() == 2 + 2 * 2);
    for (int k = 0; k < 2; ++k) {
        CHECK(std::abs(est.gradient[k] - exact[k]) <= 4.0 * est.standard_error[k]);
    }

    // incremental accumulation reproduces the one-shot estimate bit for bit
    sim::GradientSampler sampler(ds, instances::kDeskWeights, cfg, 8);
    sampler.add(40000);
    sampler.add(60000);
    CHECK(sampler.copies() == 100000);
    CHECK(sampler.estimate().gradient == est.gradient);

    const auto fn = sim::quantum_gradient(cfg, 1000, 3);
    CHECK(fn(ds, instances::kDeskWeights, 4) == fn(ds, instances::kDeskWeights, 4));
    CHECK(fn(ds, instances::kDeskWeights, 4) != fn(ds, instances::kDeskWeights, 5));
}

TEST_CASE("trace CSV rows") {
    sim::TraceEstimate e;
    e.which = sim::TraceKind::Lxy_dH0;
    e.k = 3;
    e.r = 12;
    e.shots = 100;
    e.seed = 7;
    e.value = 0.5;
    e.standard_error = 0.25;
    e.p0_empirical = 0.125;
    e.p0_analytic = 0.1;
    std::ostringstream out;
    sim::write_trace_csv_header(out);
    sim::write_trace_csv_row(out, e);
    CHECK(out.str() ==
          "which,k,r,m,seed,estimate,std_error,p0_empirical,p0_analytic\n"
          "Lxy_dH0,3,12,100,7,0.5,0.25,0.125,0.10000000000000001\n");
}
