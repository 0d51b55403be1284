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

#include <cmath>
#include <fstream>
#include <sstream>

#include "frozen_values.hpp"
#include "instances.hpp"
#include "oracles.hpp"
#include "qcrf/crf/crf.hpp"
#include "qcrf/crf/io.hpp"
#include "qcrf/crf/train.hpp"
#include "qcrf/errors.hpp"
#include "qcrf/random.hpp"

using namespace qcrf;
using crf::Dataset;
using crf::FeatureTable;
using crf::Record;

namespace {

struct Instance {
    Record record;
    std::vector<double> w;
};

Instance random_instance(Rng &rng, int max_n = 5, int max_q = 3, int max_k = 4) {
    const int n = 1 + static_cast<int>(rng.below(max_n));
    const int Q = 2 + static_cast<int>(rng.below(max_q - 1));
    const int K = 1 + static_cast<int>(rng.below(max_k));
    Instance out{crf::random_record(n, K, Q, rng.next()), std::vector<double>(K)};
    for (double &x : out.w) {
        x = 3.0 * rng.uniform() - 1.5;
    }
    return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        worst = std::max(worst, std::abs(a[k] - b[k]));
    }
    return worst;
}

}  // namespace

TEST_CASE("label alphabet") {
    crf::LabelAlphabet a({"N", "V", "D"});
    CHECK(a.size() == 3);
    CHECK(a.index_of("V") == 1);
    CHECK(a.token(2) == "D");
    for (int i = 0; i < a.size(); ++i) {
        CHECK(a.index_of(a.token(i)) == i);
    }
    CHECK_THROWS_AS(crf::LabelAlphabet({"N"}), DomainError);
    CHECK_THROWS_AS(crf::LabelAlphabet({"N", "V", "N"}), DomainError);
    CHECK_THROWS_AS(a.index_of("X"), DomainError);
}

TEST_CASE("sequence validation") {
    crf::LabelAlphabet a({"N", "V"});
    crf::Sequence ok{{"a", "b"}, std::vector<std::string>{"N", "V"}};
    CHECK_NOTHROW(ok.validate(&a));
    crf::Sequence empty{{}, std::nullopt};
    CHECK_THROWS_AS(empty.validate(), DimensionError);
    crf::Sequence ragged{{"a", "b"}, std::vector<std::string>{"N"}};
    CHECK_THROWS_AS(ragged.validate(), DimensionError);
    crf::Sequence unknown{{"a"}, std::vector<std::string>{"X"}};
    CHECK_THROWS_AS(unknown.validate(&a), DomainError);
}

TEST_CASE("feature table layout and validation") {
    // file order: k outer, then i, then j
    const std::vector<int> signs{1, -1, -1, 1, /* k=1 */ -1, -1, 1, 1};
    FeatureTable t(2, 2, 2, signs);
    CHECK(t.at(0, 0, 0) == 1);
    CHECK(t.at(0, 0, 1) == -1);
    CHECK(t.at(0, 1, 0) == -1);
    CHECK(t.at(1, 1, 1) == 1);
    const auto node = t.node(1, 0);
    CHECK(node.size() == 2);
    CHECK(node[0] == t.at(0, 1, 0));
    CHECK(node[1] == t.at(1, 1, 0));
    CHECK_THROWS_AS(FeatureTable(1, 1, 2, std::vector<int>{1, 0}), DomainError);
    CHECK_THROWS_AS(FeatureTable(1, 1, 2, std::vector<int>{1}), DimensionError);
    const auto c = t.with_constant_feature();
    CHECK(c.features() == 3);
    CHECK(c.at(2, 1, 0) == 1);
    CHECK(c.at(1, 1, 1) == t.at(1, 1, 1));
}

TEST_CASE("dataset invariants") {
    auto r = instances::desk();
    CHECK_NOTHROW(Dataset({r}));
    r.weight = 0.5;
    CHECK_THROWS_AS(Dataset({r}), DomainError);
    CHECK_NOTHROW(Dataset({r, r}));
    Record other = crf::random_record(2, 3, 2, 5);
    CHECK_THROWS_AS(Dataset::uniform({instances::desk(), other}), DimensionError);
    Record bad = instances::desk();
    bad.labels = {0, 2};
    CHECK_THROWS_AS(Dataset::uniform({bad}), DomainError);
    CHECK_THROWS_AS(Dataset::uniform({}), DimensionError);
    crf::Weights w{{1.0, NAN}, 0.1};
    CHECK_THROWS_AS(w.validate(), DomainError);
    crf::Weights neg{{1.0}, -0.1};
    CHECK_THROWS_AS(neg.validate(), DomainError);
}

TEST_CASE("potential") {
    const auto one = FeatureTable::from_function(1, 1, 2, [](int, int, int j) { return j == 0 ? 1 : -1; });
    const std::vector<int> y0{0};
    CHECK(crf::potential(one, std::vector<double>{1.0}, y0) == 1.0);
    const auto plus = FeatureTable::from_function(2, 2, 2, [](int, int, int) { return 1; });
    const std::vector<int> y{0, 1};
    CHECK(crf::potential(plus, std::vector<double>{0.3, -0.5}, y) == doctest::Approx(-0.4).epsilon(1e-15));
    CHECK(crf::potential(plus, std::vector<double>{0.0, 0.0}, y) == 0.0);
    CHECK_THROWS_AS(crf::potential(plus, std::vector<double>{0.3}, y), DimensionError);
    CHECK_THROWS_AS(crf::potential(plus, std::vector<double>{0.3, 0.1}, std::vector<int>{0}), DimensionError);
    CHECK_THROWS_AS(crf::potential(plus, std::vector<double>{0.3, 0.1}, std::vector<int>{0, 2}), DomainError);
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const auto inst = random_instance(rng);
        CHECK(crf::potential(inst.record.table, inst.w, inst.record.labels) ==
              doctest::Approx(oracle::potential(inst.record.table, inst.w, inst.record.labels)).epsilon(1e-14));
    }
}

TEST_CASE("conditional probability") {
    const auto t = FeatureTable::from_function(1, 1, 2, [](int, int, int j) { return j == 0 ? 1 : -1; });
    const double want = std::exp(0.5) / (std::exp(0.5) + std::exp(-0.5));
    CHECK(crf::conditional_probability(t, std::vector<double>{0.5}, std::vector<int>{0}) ==
          doctest::Approx(want).epsilon(1e-15));

    const auto rec = crf::random_record(3, 2, 3, 11);
    for (const auto &y : oracle::labelings(3, 3)) {
        CHECK(crf::conditional_probability(rec.table, std::vector<double>{0.0, 0.0}, y) ==
              doctest::Approx(1.0 / 27.0).epsilon(1e-14));
    }
    // huge weights stay finite through the log-space evaluation
    const std::vector<double> big{800.0, -650.0};
    const double p = crf::conditional_probability(rec.table, big, rec.labels);
    CHECK(std::isfinite(p));
    CHECK(std::isfinite(crf::log_partition(rec.table, big)));
    CHECK(crf::log_partition(rec.table, big) == doctest::Approx(crf::log_partition_naive(rec.table, big)).epsilon(1e-13));
}

TEST_CASE("property: normalization, n <= 5, Q <= 3") {
    Rng rng(4);
    for (int t = 0; t < 200; ++t) {
        const auto inst = random_instance(rng);
        const auto &table = inst.record.table;
        double total = 0.0;
        crf::for_each_labeling(table.positions(), table.labels(),
                               [&](std::span<const int> y) { total += crf::conditional_probability(table, inst.w, y); });
        CHECK(std::abs(total - 1.0) <= 1e-12);
        CHECK(crf::log_partition(table, inst.w) == doctest::Approx(std::log(oracle::partition(table, inst.w))).epsilon(1e-12));
    }
}

TEST_CASE("property: shift invariance through an always-on feature") {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        const auto inst = random_instance(rng);
        const auto shifted = inst.record.table.with_constant_feature();
        std::vector<double> w = inst.w;
        w.push_back(2.0 * rng.uniform() - 1.0);
        CHECK(crf::log_partition(shifted, w) != doctest::Approx(crf::log_partition(inst.record.table, inst.w)));
        crf::for_each_labeling(shifted.positions(), shifted.labels(), [&](std::span<const int> y) {
            CHECK(std::abs(crf::conditional_probability(shifted, w, y) -
                           crf::conditional_probability(inst.record.table, inst.w, y)) <= 1e-12);
        });
    }
}

TEST_CASE("nll") {
    const auto rec = crf::random_record(4, 3, 3, 9);
    CHECK(crf::nll(instances::single(rec), std::vector<double>{0.0, 0.0, 0.0}) ==
          doctest::Approx(4.0 * std::log(3.0)).epsilon(1e-14));
    CHECK(crf::nll(instances::single(instances::full_scale()), instances::kFullScaleWeights) ==
          doctest::Approx(frozen::kFullScaleNll).epsilon(1e-13));
    CHECK(crf::nll(instances::single(instances::desk()), instances::kDeskWeights) ==
          doctest::Approx(frozen::kDeskNll).epsilon(1e-13));

    const auto aligned = instances::single(instances::aligned());
    double last = INFINITY;
    for (double c : {1.0, 2.0, 4.0, 8.0}) {
        const double value = crf::nll(aligned, std::vector<double>{0.5 * c, 0.25 * c});
        CHECK(value < last);
        last = value;
    }
    CHECK(last < 1e-4);
}

TEST_CASE("naive gradient") {
    // balanced features at w = 0: the model term vanishes
    const auto rec = crf::random_record(3, 4, 2, 21);
    const auto balanced = FeatureTable::from_function(4, 3, 2, [&](int k, int i, int j) {
        return j == 0 ? rec.table.at(k, i, 0) : -rec.table.at(k, i, 0);
    });
    const auto ds = instances::single({balanced, rec.labels, 1.0});
    const std::vector<double> zero(4, 0.0);
    const auto g = crf::gradient_naive(ds, zero);
    const auto counts = crf::clamped_feature_counts(balanced, rec.labels);
    for (int k = 0; k < 4; ++k) {
        CHECK(g[k] == doctest::Approx(-counts[k]).epsilon(1e-14));
    }
    CHECK(max_abs_diff(crf::gradient_factorized(ds, zero), g) <= 1e-14);

    const auto full = crf::gradient_naive(instances::single(instances::full_scale()), instances::kFullScaleWeights);
    for (int k = 0; k < 5; ++k) {
        CHECK(full[k] == doctest::Approx(frozen::kFullScaleGradient[k]).epsilon(1e-12));
    }

    // saturated aligned model: gradient vanishes
    const auto aligned = instances::single(instances::aligned());
    const auto sat = crf::gradient_naive(aligned, std::vector<double>{0.5 * 64, 0.25 * 64});
    CHECK(max_abs_diff(sat, std::vector<double>{0.0, 0.0}) <= 1e-12);

    const auto huge = crf::random_record(21, 1, 2, 3);
    CHECK_THROWS_AS(crf::gradient_naive(instances::single(huge), std::vector<double>{0.1}), EnumerationTooLarge);
    CHECK_THROWS_AS(crf::log_partition_naive(huge.table, std::vector<double>{0.1}), EnumerationTooLarge);
    CHECK(std::isfinite(crf::gradient_factorized(instances::single(huge), std::vector<double>{0.1})[0]));
}

TEST_CASE("property: naive == factorized on 200 random instances") {
    Rng rng(6);
    for (int t = 0; t < 200; ++t) {
        std::vector<Record> records;
        auto first = random_instance(rng);
        records.push_back(first.record);
        if (rng.bernoulli(0.5)) {
            records.push_back(crf::random_record(1 + static_cast<int>(rng.below(5)), first.record.table.features(),
                                                 first.record.table.labels(), rng.next()));
        }
        const auto ds = Dataset::uniform(records);
        CHECK(max_abs_diff(crf::gradient_naive(ds, first.w), crf::gradient_factorized(ds, first.w)) <= 1e-10);
    }
}

TEST_CASE("property: gradients match central finite differences") {
    Rng rng(7);
    for (int t = 0; t < 60; ++t) {
        const auto inst = random_instance(rng, 4, 3, 4);
        const auto ds = instances::single(inst.record);
        const auto fd = oracle::finite_difference_gradient(ds, inst.w, 1e-5);
        const auto g = crf::gradient_factorized(ds, inst.w);
        for (std::size_t k = 0; k < g.size(); ++k) {
            CHECK(std::abs(fd[k] - g[k]) <= 1e-6 * std::max(std::abs(g[k]), 1e-3));
        }
    }
}

TEST_CASE("gibbs estimator") {
    const auto ds = instances::single(instances::desk());
    const auto exact = crf::gradient_naive(ds, instances::kDeskWeights);
    crf::GibbsOptions opts{100000, 100, 42};
    const auto est = crf::gradient_gibbs_estimate(ds, instances::kDeskWeights, opts);
    for (std::size_t k = 0; k < exact.size(); ++k) {
        CHECK(est.standard_error[k] > 0.0);
        CHECK(std::abs(est.gradient[k] - exact[k]) <= 3.0 * est.standard_error[k]);
    }
    CHECK(crf::gradient_gibbs(ds, instances::kDeskWeights, opts) == est.gradient);

    // bias and spread shrink with the sweep count
    const auto few = crf::gradient_gibbs_estimate(ds, instances::kDeskWeights, {1000, 100, 42});
    CHECK(few.standard_error[0] > 5.0 * est.standard_error[0]);
    CHECK_THROWS_AS(crf::gradient_gibbs(ds, instances::kDeskWeights, {0, 10, 1}), DomainError);

    // symmetric case at w = 0
    const auto rec = crf::random_record(2, 3, 2, 31);
    const auto balanced = FeatureTable::from_function(3, 2, 2, [&](int k, int i, int j) {
        return j == 0 ? rec.table.at(k, i, 0) : -rec.table.at(k, i, 0);
    });
    const auto sym = instances::single({balanced, rec.labels, 1.0});
    const std::vector<double> zero(3, 0.0);
    const auto g0 = crf::gradient_gibbs_estimate(sym, zero, {100000, 100, 8});
    const auto want = crf::gradient_naive(sym, zero);
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(g0.gradient[k] - want[k]) <= 3.0 * g0.standard_error[k] + 1e-12);
    }
}

TEST_CASE("most probable labels breaks ties toward the lowest index") {
    const auto flat = crf::random_record(3, 2, 3, 4);
    CHECK(crf::most_probable_labels(flat.table, std::vector<double>{0.0, 0.0}) == std::vector<int>{0, 0, 0});
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
        const auto inst = random_instance(rng);
        const auto best = crf::most_probable_labels(inst.record.table, inst.w);
        const double p = crf::conditional_probability(inst.record.table, inst.w, best);
        for (const auto &y : oracle::labelings(inst.record.table.positions(), inst.record.table.labels())) {
            CHECK(crf::conditional_probability(inst.record.table, inst.w, y) <= p * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("training") {
    const auto aligned = instances::single(instances::aligned());
    crf::TrainOptions opts;
    opts.iters = 200;
    const auto traj =
        crf::train(aligned, crf::Weights{{0.0, 0.0}, 0.1}, crf::classical_gradient(crf::Backend::factorized), opts);
    REQUIRE(traj.size() == 200);
    CHECK(traj.front().nll == doctest::Approx(frozen::kAlignedNllStart).epsilon(1e-14));
    for (std::size_t t = 1; t < traj.size(); ++t) {
        CHECK(traj[t].nll < traj[t - 1].nll);
    }
    CHECK(traj.back().nll < 0.1 * traj.front().nll);
    // the last row holds the weights before the final update
    std::vector<double> w = traj.back().w;
    const auto g = crf::gradient_factorized(aligned, w);
    for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] -= 0.1 * g[k];
        CHECK(w[k] == doctest::Approx(frozen::kAlignedWeightsAfter200[k]).epsilon(1e-12));
    }
    CHECK(crf::nll(aligned, w) == doctest::Approx(frozen::kAlignedNllAfter200).epsilon(1e-10));

    // naive back-end follows the same trajectory
    opts.iters = 20;
    const auto naive =
        crf::train(aligned, crf::Weights{{0.0, 0.0}, 0.1}, crf::classical_gradient(crf::Backend::naive), opts);
    CHECK(naive[19].nll == doctest::Approx(traj[19].nll).epsilon(1e-12));

    // eta = 0 keeps the weights
    opts.iters = 1;
    const auto still = crf::train(aligned, crf::Weights{{0.3, 0.1}, 0.0}, crf::classical_gradient(crf::Backend::factorized), opts);
    CHECK(still.size() == 1);
    CHECK(still[0].w == std::vector<double>{0.3, 0.1});
    opts.iters = 5;
    const auto flat = crf::train(aligned, crf::Weights{{0.3, 0.1}, 0.0}, crf::classical_gradient(crf::Backend::factorized), opts);
    for (const auto &step : flat) {
        CHECK(step.nll == flat.front().nll);
    }

    CHECK_THROWS_AS(crf::classical_gradient(crf::Backend::quantum), ConfigError);
    CHECK(crf::parse_backend("exact") == crf::Backend::factorized);
    CHECK_THROWS_AS(crf::parse_backend("adam"), ConfigError);
}

TEST_CASE("divergence detector") {
    const auto aligned = instances::single(instances::aligned());
    // ascent instead of descent: nll rises every step
    crf::GradientFn ascent = [](const Dataset &ds, std::span<const double> w, std::size_t) {
        auto g = crf::gradient_factorized(ds, w);
        for (double &x : g) {
            x = -x;
        }
        return g;
    };
    crf::TrainOptions opts;
    opts.iters = 50;
    std::size_t seen = 0;
    opts.on_step = [&](const crf::TrainStep &, std::span<const double>) { ++seen; };
    CHECK_THROWS_AS(crf::train(aligned, crf::Weights{{0.0, 0.0}, 0.1}, ascent, opts), DivergenceError);
    CHECK(seen == 11);
    opts.divergence_window = 0;
    CHECK(crf::train(aligned, crf::Weights{{0.0, 0.0}, 0.1}, ascent, opts).size() == 50);
}

TEST_CASE("dataset file and indicator templates") {
    const auto seqs = crf::read_dataset_file(std::string(QCRF_TEST_DATA) + "/tiny.tsv");
    REQUIRE(seqs.size() == 2);
    CHECK(seqs[0].observations == std::vector<std::string>{"a", "b", "a"});
    const auto alphabet = crf::collect_alphabet(seqs);
    CHECK(alphabet.labels() == std::vector<std::string>{"N", "V"});
    const std::vector<crf::IndicatorTemplate> templates{{"a", "N"}, {"b", "V"}};
    const auto ds = crf::build_dataset(seqs, alphabet, templates);
    CHECK(ds.records()[0].table.at(0, 0, 0) == 1);
    CHECK(ds.records()[0].table.at(0, 0, 1) == -1);
    CHECK(ds.records()[0].table.at(1, 1, 1) == 1);
    CHECK(ds.records()[1].labels == std::vector<int>{1, 0});
    const std::vector<double> w{0.4, -0.7};
    CHECK(crf::nll(ds, w) == doctest::Approx(frozen::kTinyDatasetNll).epsilon(1e-13));
    const auto g = crf::gradient_factorized(ds, w);
    for (int k = 0; k < 2; ++k) {
        CHECK(g[k] == doctest::Approx(frozen::kTinyDatasetGradient[k]).epsilon(1e-12));
    }

    std::istringstream bad("a\tN\nb\n");
    CHECK_THROWS_AS(crf::parse_dataset(bad), ConfigError);
    CHECK_THROWS_AS(crf::read_dataset_file("/nonexistent/file.tsv"), ConfigError);
}

TEST_CASE("feature table text round trip") {
    const auto rec = crf::random_record(3, 4, 3, 77);
    std::ostringstream out;
    crf::write_feature_table(out, rec.table);
    std::istringstream in(out.str());
    CHECK(crf::parse_feature_table(in) == rec.table);
    CHECK(out.str().substr(0, 6) == "4 3 3\n");

    std::istringstream short_input("1 1 2\n1\n");
    CHECK_THROWS_AS(crf::parse_feature_table(short_input), ConfigError);
    std::istringstream bad_sign("1 1 2\n1 0\n");
    CHECK_THROWS(crf::parse_feature_table(bad_sign));
    CHECK(crf::format_double(0.1) == "0.10000000000000001");
}
