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

#include "qcrf/model/diagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "qcrf/crf/io.hpp"
#include "qcrf/errors.hpp"
#include "qcrf/simd/kernels.hpp"

namespace qcrf::model {

namespace {
using Fn = std::function<double(std::uint64_t)>;

std::shared_ptr<const Fn> make_fn(Fn fn) { return std::make_shared<const Fn>(std::move(fn)); }

double eval_zform(const DiagonalOperator::ZForm &form, std::uint64_t index) {
    double acc = form.offset;
    for (std::size_t s = 0; s < form.coeff.size(); ++s) {
        acc += ((index >> s) & 1U) ? -form.coeff[s] : form.coeff[s];
    }
    return acc;
}
}  // namespace

DiagonalOperator::DiagonalOperator(RegisterLayout layout, std::shared_ptr<const Fn> fn, std::optional<ZForm> zform)
    : layout_(layout), fn_(std::move(fn)), zform_(std::move(zform)) {}

DiagonalOperator DiagonalOperator::from_function(RegisterLayout layout, Fn fn) {
    return DiagonalOperator(layout, make_fn(std::move(fn)), std::nullopt);
}

DiagonalOperator DiagonalOperator::from_zform(RegisterLayout layout, ZForm form) {
    if (static_cast<int>(form.coeff.size()) != layout.feature_bits()) {
        throw DimensionError("z-form needs one coefficient per feature qubit");
    }
    auto shared = std::make_shared<const ZForm>(form);
    return DiagonalOperator(layout, make_fn([shared](std::uint64_t b) { return eval_zform(*shared, b); }),
                            std::move(form));
}

DiagonalOperator DiagonalOperator::constant(RegisterLayout layout, double value) {
    ZForm form{std::vector<double>(static_cast<std::size_t>(layout.feature_bits()), 0.0), value};
    return from_zform(layout, std::move(form));
}

double DiagonalOperator::operator()(std::uint64_t index) const { return (*fn_)(index); }

void DiagonalOperator::eval_range(std::uint64_t first, std::span<double> out) const {
    if (zform_) {
        simd::zsum(zform_->coeff, zform_->offset, first, out);
        return;
    }
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t] = (*fn_)(first + t);
    }
}

std::vector<double> DiagonalOperator::entries() const {
    std::vector<double> out(layout_.dimension());
    const std::uint64_t block = std::uint64_t{1} << layout_.feature_bits();
    // Valid indices come in contiguous runs of 2^(nK), one per label configuration.
    for (std::uint64_t c = 0; c < layout_.label_configurations(); ++c) {
        const std::uint64_t first = layout_.basis_index(c * block);
        eval_range(first, std::span<double>(out).subspan(c * block, block));
    }
    return out;
}

std::pair<double, double> DiagonalOperator::spectrum_bounds() const {
    if (zform_) {
        double spread = 0.0;
        for (double c : zform_->coeff) {
            spread += std::abs(c);
        }
        return {zform_->offset - spread, zform_->offset + spread};
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    layout_.for_each_basis([&](std::uint64_t b) {
        const double v = (*fn_)(b);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    });
    return {lo, hi};
}

void DiagonalOperator::require_same_layout(const DiagonalOperator &other) const {
    if (!(layout_ == other.layout_)) {
        throw DimensionError("diagonal operators live on different layouts");
    }
}

DiagonalOperator DiagonalOperator::operator+(const DiagonalOperator &other) const {
    require_same_layout(other);
    if (zform_ && other.zform_) {
        ZForm form = *zform_;
        for (std::size_t s = 0; s < form.coeff.size(); ++s) {
            form.coeff[s] += other.zform_->coeff[s];
        }
        form.offset += other.zform_->offset;
        return from_zform(layout_, std::move(form));
    }
    return from_function(layout_, [a = fn_, b = other.fn_](std::uint64_t i) { return (*a)(i) + (*b)(i); });
}

DiagonalOperator DiagonalOperator::operator*(const DiagonalOperator &other) const {
    require_same_layout(other);
    return from_function(layout_, [a = fn_, b = other.fn_](std::uint64_t i) { return (*a)(i) * (*b)(i); });
}

DiagonalOperator DiagonalOperator::scaled(double factor) const {
    if (zform_) {
        ZForm form = *zform_;
        for (double &c : form.coeff) {
            c *= factor;
        }
        form.offset *= factor;
        return from_zform(layout_, std::move(form));
    }
    return map([factor](double v) { return factor * v; });
}

DiagonalOperator DiagonalOperator::exp() const {
    return map([](double v) { return std::exp(v); });
}

DiagonalOperator DiagonalOperator::map(std::function<double(double)> fn) const {
    return from_function(layout_, [a = fn_, f = std::move(fn)](std::uint64_t i) { return f((*a)(i)); });
}

DiagonalOperator DiagonalOperator::positive_part() const {
    return map([](double v) { return v > 0.0 ? v : 0.0; });
}

DiagonalOperator DiagonalOperator::negative_part() const {
    return map([](double v) { return v < 0.0 ? -v : 0.0; });
}

void DiagonalOperator::dump(std::ostream &out) const {
    if (layout_.dimension() > (std::uint64_t{1} << 12)) {
        throw DimensionError("operator dump limited to D <= 4096, got D = " + std::to_string(layout_.dimension()));
    }
    const auto values = entries();
    for (std::uint64_t t = 0; t < layout_.dimension(); ++t) {
        out << layout_.basis_index(t) << '\t' << crf::format_double(values[t]) << '\n';
    }
}

DiagonalOperator sigma_z(const RegisterLayout &layout, int k, int i) {
    if (k < 0 || k >= layout.features() || i < 0 || i >= layout.positions()) {
        throw DomainError("sigma_z index out of range: k=" + std::to_string(k) + " i=" + std::to_string(i));
    }
    DiagonalOperator::ZForm form{std::vector<double>(static_cast<std::size_t>(layout.feature_bits()), 0.0), 0.0};
    form.coeff[static_cast<std::size_t>(layout.slot(k, i))] = 1.0;
    return DiagonalOperator::from_zform(layout, std::move(form));
}

DiagonalOperator build_h(const RegisterLayout &layout, std::span<const double> w) {
    if (static_cast<int>(w.size()) != layout.features()) {
        throw DimensionError("weight vector length does not match K");
    }
    DiagonalOperator::ZForm form{std::vector<double>(static_cast<std::size_t>(layout.feature_bits())), 0.0};
    for (int i = 0; i < layout.positions(); ++i) {
        for (int k = 0; k < layout.features(); ++k) {
            form.coeff[static_cast<std::size_t>(layout.slot(k, i))] = w[static_cast<std::size_t>(k)];
        }
    }
    return DiagonalOperator::from_zform(layout, std::move(form));
}

DiagonalOperator build_dh(const RegisterLayout &layout, int k) {
    if (k < 0 || k >= layout.features()) {
        throw DomainError("feature index out of range: " + std::to_string(k));
    }
    DiagonalOperator::ZForm form{std::vector<double>(static_cast<std::size_t>(layout.feature_bits()), 0.0), 0.0};
    for (int i = 0; i < layout.positions(); ++i) {
        form.coeff[static_cast<std::size_t>(layout.slot(k, i))] = 1.0;
    }
    return DiagonalOperator::from_zform(layout, std::move(form));
}

}  // namespace qcrf::model
