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
#include <memory>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "qcrf/crf/train.hpp"
#include "qcrf/crf/types.hpp"
#include "qcrf/model/qcrf.hpp"
#include "qcrf/random.hpp"
#include "qcrf/sim/pipeline.hpp"

namespace qcrf::sim {

/// The four traces that make up one gradient component.
enum class TraceKind {
    Lx_dHn,   ///< Tr(Lx dHn/dw_k e^Hn)
    Lx_Hn,    ///< Tr(Lx e^Hn) = Z
    Lxy_dH0,  ///< Tr(Lxy dH0/dw_k e^H0)
    Lxy_H0,   ///< Tr(Lxy e^H0) = e^E
};

std::string_view trace_kind_name(TraceKind kind);
/// Throws ConfigError on an unknown name.
TraceKind parse_trace_kind(std::string_view name);
bool is_derivative(TraceKind kind);

/// One non-negative piece of a trace, run through its own circuit.
struct TracePart {
    double sign = 1.0;
    std::shared_ptr<const TracePipeline> pipeline;
    double hit_probability = 0.0;  ///< <phi|P|phi> on the post-selected state
    double p0 = 0.0;               ///< ancilla-0 probability read off the rotated state
};

/// Everything about a trace that does not depend on the sampling seed.
class PreparedTrace {
   public:
    PreparedTrace(const model::QcrfInstance &inst, TraceKind kind, int k, const PrecisionConfig &cfg);

    /// Tr(P F e^H) for explicit operators. With `split` the factor is divided
    /// into positive and negative parts; without it F must be non-negative.
    static PreparedTrace from_operators(const model::DiagonalOperator &h, const model::DiagonalOperator &factor,
                                        const model::Projector &P, const PrecisionConfig &cfg, bool split);

    TraceKind kind() const { return kind_; }
    int k() const { return k_; }
    const PrecisionConfig &config() const { return cfg_; }
    std::span<const TracePart> parts() const { return parts_; }

    /// Value the estimator converges to: sum_parts sign * sum(lambda) * hit probability.
    double quantized_value() const;
    /// Tr(P F e^H) in double precision, no quantization.
    double exact_value() const { return exact_; }
    /// Harmonic mean of P(0) over non-empty parts (what the pooled frequency estimates).
    double p0_analytic() const;

   private:
    PreparedTrace() = default;
    void add_part(double sign, const model::DiagonalOperator &h, const model::DiagonalOperator &factor,
                  const model::Projector &P);

    TraceKind kind_ = TraceKind::Lx_Hn;
    int k_ = -1;
    PrecisionConfig cfg_;
    std::vector<TracePart> parts_;
    double exact_ = 0.0;
};

struct TraceEstimate {
    TraceKind which = TraceKind::Lx_Hn;
    int k = -1;
    int r = 0;
    double value = 0.0;
    std::uint64_t shots = 0;  ///< post-selected copies per part
    std::uint64_t postselect_attempts = 0;
    std::uint64_t postselect_successes = 0;
    std::uint64_t hits = 0;
    double standard_error = 0.0;
    std::uint64_t seed = 0;
    double p0_empirical = 0.0;
    double p0_analytic = 0.0;
};

/// Accumulates copies of |phi> for one prepared trace. Each copy costs a
/// geometric number of post-selection attempts and yields one Lambda outcome.
/// The circuit state is deterministic, so it is simulated once and only the
/// measurement records are drawn per copy.
class TraceSampler {
   public:
    TraceSampler(std::shared_ptr<const PreparedTrace> trace, std::uint64_t seed);

    void add(std::uint64_t copies);
    /// Throws PostselectionStarved if a non-empty part has no success yet.
    TraceEstimate estimate() const;
    std::uint64_t copies() const { return copies_; }

   private:
    struct PartTally {
        Rng rng;
        std::uint64_t budget = 0;
        std::uint64_t attempts = 0;
        std::uint64_t successes = 0;
        std::uint64_t hits = 0;
    };

    std::shared_ptr<const PreparedTrace> trace_;
    std::uint64_t seed_;
    std::uint64_t copies_ = 0;
    std::vector<PartTally> tallies_;
};

/// m post-selected copies per part.
TraceEstimate estimate_trace(const model::QcrfInstance &inst, TraceKind which, int k, const PrecisionConfig &cfg,
                             std::uint64_t m, std::uint64_t seed);
TraceEstimate estimate_trace(std::shared_ptr<const PreparedTrace> trace, std::uint64_t m, std::uint64_t seed);

/// Exact Tr(P F e^H) for the kind (qcrf-model oracle).
double exact_trace(const model::QcrfInstance &inst, TraceKind which, int k);

struct GradientEstimate {
    std::vector<double> gradient;
    std::vector<double> standard_error;
    /// Per record: Lxy_H0, Lx_Hn, then Lxy_dH0 and Lx_dHn for each k.
    std::vector<std::vector<TraceEstimate>> traces;
    /// A denominator trace saw no Lambda hit; affected components are NaN.
    bool starved = false;
};

/// Keeps one sampler per trace so the number of copies can grow step by step.
class GradientSampler {
   public:
    GradientSampler(const crf::Dataset &ds, std::span<const double> w, const PrecisionConfig &cfg,
                    std::uint64_t seed);

    void add(std::uint64_t copies);
    GradientEstimate estimate() const;
    std::uint64_t copies() const;

   private:
    struct RecordTraces {
        double weight = 0.0;
        TraceSampler clamped;
        TraceSampler free;
        std::vector<TraceSampler> d_clamped;
        std::vector<TraceSampler> d_free;
    };

    int K_ = 0;
    std::vector<RecordTraces> records_;
};

/// dL/dw from four sampled traces per k and record, m copies per trace part.
GradientEstimate estimate_gradient(const crf::Dataset &ds, std::span<const double> w, const PrecisionConfig &cfg,
                                   std::uint64_t m, std::uint64_t seed);

/// Training back-end; iteration t uses seed derive_seed(seed, {t}).
/// Throws PostselectionStarved if an estimate has an undefined ratio.
crf::GradientFn quantum_gradient(const PrecisionConfig &cfg, std::uint64_t m, std::uint64_t seed);

/// which,k,r,m,seed,estimate,std_error,p0_empirical,p0_analytic
void write_trace_csv_header(std::ostream &out);
void write_trace_csv_row(std::ostream &out, const TraceEstimate &e);

}  // namespace qcrf::sim
