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

#include "qcrf/sim/estimator.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qcrf/crf/io.hpp"
#include "qcrf/errors.hpp"
#include "qcrf/random.hpp"

namespace qcrf::sim {

std::string_view trace_kind_name(TraceKind kind) {
    switch (kind) {
        case TraceKind::Lx_dHn:
            return "Lx_dHn";
        case TraceKind::Lx_Hn:
            return "Lx_Hn";
        case TraceKind::Lxy_dH0:
            return "Lxy_dH0";
        case TraceKind::Lxy_H0:
            return "Lxy_H0";
    }
    return "?";
}

TraceKind parse_trace_kind(std::string_view name) {
    for (TraceKind kind : {TraceKind::Lx_dHn, TraceKind::Lx_Hn, TraceKind::Lxy_dH0, TraceKind::Lxy_H0}) {
        if (trace_kind_name(kind) == name) {
            return kind;
        }
    }
    throw ConfigError("unknown trace kind '" + std::string(name) + "'");
}

bool is_derivative(TraceKind kind) { return kind == TraceKind::Lx_dHn || kind == TraceKind::Lxy_dH0; }

namespace {

bool uses_free_layout(TraceKind kind) { return kind == TraceKind::Lx_dHn || kind == TraceKind::Lx_Hn; }

void require_k(const model::QcrfInstance &inst, TraceKind kind, int k) {
    if (is_derivative(kind) && (k < 0 || k >= inst.table.features())) {
        throw DomainError("trace " + std::string(trace_kind_name(kind)) + " needs a feature index in [0, K), got " +
                          std::to_string(k));
    }
}

}  // namespace

double exact_trace(const model::QcrfInstance &inst, TraceKind which, int k) {
    require_k(inst, which, k);
    switch (which) {
        case TraceKind::Lx_dHn:
            return model::trace_lambda_exp(inst.lambda_x, inst.hn, inst.dhn(k));
        case TraceKind::Lx_Hn:
            return model::trace_lambda_exp(inst.lambda_x, inst.hn);
        case TraceKind::Lxy_dH0:
            return model::trace_lambda_exp(inst.lambda_xy, inst.h0, inst.dh0(k));
        case TraceKind::Lxy_H0:
            return model::trace_lambda_exp(inst.lambda_xy, inst.h0);
    }
    return 0.0;
}

void PreparedTrace::add_part(double sign, const model::DiagonalOperator &h, const model::DiagonalOperator &factor,
                             const model::Projector &P) {
    TracePart part;
    part.sign = sign;
    auto pipeline = std::make_shared<const TracePipeline>(h, factor, cfg_);
    if (!pipeline->empty()) {
        const RegisterState rotated = pipeline->rotate(pipeline->encode());
        part.p0 = rotated.ancilla_zero_probability();
        part.hit_probability = std::clamp(projector_probability(pipeline->amplitude_state(), P), 0.0, 1.0);
    }
    part.pipeline = std::move(pipeline);
    parts_.push_back(std::move(part));
}

PreparedTrace::PreparedTrace(const model::QcrfInstance &inst, TraceKind kind, int k, const PrecisionConfig &cfg)
    : kind_(kind), k_(is_derivative(kind) ? k : -1), cfg_(cfg) {
    cfg.validate();
    require_k(inst, kind, k);
    const bool free = uses_free_layout(kind);
    const model::DiagonalOperator &h = free ? inst.hn : inst.h0;
    const model::Projector &P = free ? inst.lambda_x : inst.lambda_xy;
    if (is_derivative(kind)) {
        const model::DiagonalOperator dh = free ? inst.dhn(k) : inst.dh0(k);
        add_part(1.0, h, dh.positive_part(), P);
        add_part(-1.0, h, dh.negative_part(), P);
    } else {
        add_part(1.0, h, model::DiagonalOperator::constant(h.layout(), 1.0), P);
    }
    exact_ = exact_trace(inst, kind, k);
}

PreparedTrace PreparedTrace::from_operators(const model::DiagonalOperator &h, const model::DiagonalOperator &factor,
                                            const model::Projector &P, const PrecisionConfig &cfg, bool split) {
    cfg.validate();
    PreparedTrace out;
    out.cfg_ = cfg;
    out.kind_ = TraceKind::Lx_dHn;
    out.k_ = -1;
    if (split) {
        out.add_part(1.0, h, factor.positive_part(), P);
        out.add_part(-1.0, h, factor.negative_part(), P);
    } else {
        out.add_part(1.0, h, factor, P);
    }
    out.exact_ = model::trace_lambda_exp(P, h, factor);
    return out;
}

double PreparedTrace::quantized_value() const {
    double value = 0.0;
    for (const auto &part : parts_) {
        value += part.sign * part.pipeline->lambda_sum() * part.hit_probability;
    }
    return value;
}

double PreparedTrace::p0_analytic() const {
    double inverse_sum = 0.0;
    int live = 0;
    for (const auto &part : parts_) {
        if (!part.pipeline->empty()) {
            inverse_sum += 1.0 / part.pipeline->p0_analytic();
            ++live;
        }
    }
    return live == 0 ? 0.0 : live / inverse_sum;
}

TraceSampler::TraceSampler(std::shared_ptr<const PreparedTrace> trace, std::uint64_t seed)
    : trace_(std::move(trace)), seed_(seed) {
    const auto parts = trace_->parts();
    for (std::size_t p = 0; p < parts.size(); ++p) {
        PartTally tally{Rng(derive_seed(seed, {p})), 0, 0, 0, 0};
        if (parts[p].p0 > 0.0) {
            tally.budget = static_cast<std::uint64_t>(std::ceil(trace_->config().attempt_factor / parts[p].p0));
        }
        tallies_.push_back(std::move(tally));
    }
}

void TraceSampler::add(std::uint64_t copies) {
    const auto parts = trace_->parts();
    for (std::size_t p = 0; p < parts.size(); ++p) {
        if (parts[p].pipeline->empty()) {
            continue;
        }
        PartTally &tally = tallies_[p];
        for (std::uint64_t c = 0; c < copies; ++c) {
            const std::uint64_t attempts = tally.rng.geometric(parts[p].p0);
            if (attempts > tally.budget) {
                tally.attempts += tally.budget;
                continue;
            }
            tally.attempts += attempts;
            ++tally.successes;
            tally.hits += tally.rng.bernoulli(parts[p].hit_probability) ? 1 : 0;
        }
    }
    copies_ += copies;
}

TraceEstimate TraceSampler::estimate() const {
    TraceEstimate out;
    out.which = trace_->kind();
    out.k = trace_->k();
    out.r = trace_->config().r;
    out.shots = copies_;
    out.seed = seed_;
    out.p0_analytic = trace_->p0_analytic();
    double variance = 0.0;
    const auto parts = trace_->parts();
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const TracePipeline &pipe = *parts[p].pipeline;
        if (pipe.empty()) {
            continue;
        }
        const PartTally &tally = tallies_[p];
        out.postselect_attempts += tally.attempts;
        out.postselect_successes += tally.successes;
        out.hits += tally.hits;
        if (tally.successes == 0) {
            throw PostselectionStarved(tally.attempts);
        }
        const double s = static_cast<double>(tally.successes);
        const double p0_hat = s / static_cast<double>(tally.attempts);
        const double h_hat = static_cast<double>(tally.hits) / s;
        const double C = pipe.rotation_constant();
        const double prefactor = p0_hat * pipe.dimension() / (C * C);
        const double value = prefactor * h_hat;
        out.value += parts[p].sign * value;
        variance += prefactor * prefactor * h_hat * (1.0 - h_hat) / s + value * value * (1.0 - p0_hat) / s;
    }
    out.standard_error = std::sqrt(variance);
    if (out.postselect_attempts > 0) {
        out.p0_empirical =
            static_cast<double>(out.postselect_successes) / static_cast<double>(out.postselect_attempts);
    }
    return out;
}

TraceEstimate estimate_trace(std::shared_ptr<const PreparedTrace> trace, std::uint64_t m, std::uint64_t seed) {
    if (m < 1) {
        throw DomainError("trace estimate needs at least one copy");
    }
    TraceSampler sampler(std::move(trace), seed);
    sampler.add(m);
    return sampler.estimate();
}

TraceEstimate estimate_trace(const model::QcrfInstance &inst, TraceKind which, int k, const PrecisionConfig &cfg,
                             std::uint64_t m, std::uint64_t seed) {
    return estimate_trace(std::make_shared<const PreparedTrace>(inst, which, k, cfg), m, seed);
}

namespace {

enum : std::uint64_t { kSeedClamped = 0, kSeedFree = 1, kSeedDClamped = 2, kSeedDFree = 3 };

TraceSampler make_sampler(const model::QcrfInstance &inst, TraceKind kind, int k, const PrecisionConfig &cfg,
                          std::uint64_t seed) {
    return TraceSampler(std::make_shared<const PreparedTrace>(inst, kind, k, cfg), seed);
}

/// Ratio a/A and the first-order variance of the ratio.
std::pair<double, double> ratio(const TraceEstimate &a, const TraceEstimate &A) {
    if (A.value == 0.0) {
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
    const double q = a.value / A.value;
    const double rel_a = a.standard_error / A.value;
    const double rel_A = q * A.standard_error / A.value;
    return {q, rel_a * rel_a + rel_A * rel_A};
}

}  // namespace

GradientSampler::GradientSampler(const crf::Dataset &ds, std::span<const double> w, const PrecisionConfig &cfg,
                                 std::uint64_t seed)
    : K_(ds.features()) {
    if (static_cast<int>(w.size()) != K_) {
        throw DimensionError("weight vector has " + std::to_string(w.size()) + " entries, expected K = " +
                             std::to_string(K_));
    }
    const auto &records = ds.records();
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto inst = model::make_instance(records[r].table, records[r].labels, w);
        RecordTraces traces{records[r].weight,
                            make_sampler(inst, TraceKind::Lxy_H0, -1, cfg, derive_seed(seed, {r, kSeedClamped})),
                            make_sampler(inst, TraceKind::Lx_Hn, -1, cfg, derive_seed(seed, {r, kSeedFree})),
                            {},
                            {}};
        for (int k = 0; k < K_; ++k) {
            const auto kk = static_cast<std::uint64_t>(k);
            traces.d_clamped.push_back(
                make_sampler(inst, TraceKind::Lxy_dH0, k, cfg, derive_seed(seed, {r, kSeedDClamped, kk})));
            traces.d_free.push_back(
                make_sampler(inst, TraceKind::Lx_dHn, k, cfg, derive_seed(seed, {r, kSeedDFree, kk})));
        }
        records_.push_back(std::move(traces));
    }
}

void GradientSampler::add(std::uint64_t copies) {
    for (auto &rec : records_) {
        rec.clamped.add(copies);
        rec.free.add(copies);
        for (int k = 0; k < K_; ++k) {
            rec.d_clamped[k].add(copies);
            rec.d_free[k].add(copies);
        }
    }
}

std::uint64_t GradientSampler::copies() const { return records_.empty() ? 0 : records_.front().clamped.copies(); }

GradientEstimate GradientSampler::estimate() const {
    GradientEstimate out;
    out.gradient.assign(K_, 0.0);
    std::vector<double> variance(K_, 0.0);
    for (const auto &rec : records_) {
        std::vector<TraceEstimate> traces;
        traces.push_back(rec.clamped.estimate());
        traces.push_back(rec.free.estimate());
        const TraceEstimate &A = traces[0];
        const TraceEstimate &B = traces[1];
        if (A.value == 0.0 || B.value == 0.0) {
            out.starved = true;
        }
        for (int k = 0; k < K_; ++k) {
            traces.push_back(rec.d_clamped[k].estimate());
            traces.push_back(rec.d_free[k].estimate());
            const auto [qa, va] = ratio(traces[traces.size() - 2], A);
            const auto [qb, vb] = ratio(traces.back(), B);
            out.gradient[k] -= rec.weight * (qa - qb);
            variance[k] += rec.weight * rec.weight * (va + vb);
        }
        out.traces.push_back(std::move(traces));
    }
    out.standard_error.resize(K_);
    for (int k = 0; k < K_; ++k) {
        out.standard_error[k] = std::sqrt(variance[k]);
    }
    return out;
}

GradientEstimate estimate_gradient(const crf::Dataset &ds, std::span<const double> w, const PrecisionConfig &cfg,
                                   std::uint64_t m, std::uint64_t seed) {
    if (m < 1) {
        throw DomainError("gradient estimate needs at least one copy per trace");
    }
    GradientSampler sampler(ds, w, cfg, seed);
    sampler.add(m);
    return sampler.estimate();
}

crf::GradientFn quantum_gradient(const PrecisionConfig &cfg, std::uint64_t m, std::uint64_t seed) {
    cfg.validate();
    return [cfg, m, seed](const crf::Dataset &ds, std::span<const double> w, std::size_t iteration) {
        auto est = estimate_gradient(ds, w, cfg, m, derive_seed(seed, {iteration}));
        if (est.starved) {
            std::uint64_t attempts = 0;
            for (const auto &traces : est.traces) {
                for (const auto &t : traces) {
                    attempts += t.postselect_attempts;
                }
            }
            throw PostselectionStarved(attempts);
        }
        return std::move(est.gradient);
    };
}

void write_trace_csv_header(std::ostream &out) {
    out << "which,k,r,m,seed,estimate,std_error,p0_empirical,p0_analytic\n";
}

void write_trace_csv_row(std::ostream &out, const TraceEstimate &e) {
    out << trace_kind_name(e.which) << ',' << e.k << ',' << e.r << ',' << e.shots << ',' << e.seed << ','
        << crf::format_double(e.value) << ',' << crf::format_double(e.standard_error) << ','
        << crf::format_double(e.p0_empirical) << ',' << crf::format_double(e.p0_analytic) << '\n';
}

}  // namespace qcrf::sim
