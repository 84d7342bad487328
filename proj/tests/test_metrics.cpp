// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace xstack;
using namespace xstack::testing;

namespace {

// Period-by-period scan, weighting each period by its length inside the span.
double naive_sampled(const Trace& t, DurationNs period)
{
    auto span = *trace_span(t);
    DurationNs utilized = 0;
    for (TimestampNs p = span.begin; p < span.end; p += period) {
        TimestampNs q = std::min(p + period, span.end);
        for (const auto& e : t.events) {
            if (e.category == Category::Gpu && e.duration > 0 && e.start < q && p < e.end()) {
                utilized += q - p;
                break;
            }
        }
    }
    return static_cast<double>(utilized) / static_cast<double>(span.length());
}

// Busy time by marking every nanosecond (small spans only).
DurationNs naive_busy(const Trace& t, Category c)
{
    auto span = trace_span(t);
    if (!span) return 0;
    std::vector<bool> busy(span->length());
    for (const auto& e : t.events) {
        if (e.category != c) continue;
        for (auto x = e.start; x < e.end(); ++x) busy[x - span->begin] = true;
    }
    return static_cast<DurationNs>(std::count(busy.begin(), busy.end(), true));
}

}  // namespace

TEST(Metrics, NoGpuEventsIsZero)
{
    auto t = single_process({ev(1, 1, Category::HighLevel, "py", 0, 100)});
    EXPECT_EQ(sampled_utilization(t, 10), 0.0);
    EXPECT_EQ(busy_fraction(t, Category::Gpu), 0.0);
}

TEST(Metrics, GpuBusyForWholeSpanIsOne)
{
    auto t = single_process({ev(1, 7, Category::Gpu, "k", 0, 100), ev(1, 1, Category::HighLevel, "py", 0, 100)});
    EXPECT_EQ(sampled_utilization(t, 7), 1.0);
    EXPECT_EQ(busy_fraction(t, Category::Gpu), 1.0);
}

TEST(Metrics, SparseKernelsLookFullyUtilized)
{
    auto t = sparse_kernel_trace();
    EXPECT_EQ(sampled_utilization(t, 166'666'667), 1.0);
    EXPECT_DOUBLE_EQ(busy_fraction(t, Category::Gpu), 1e-5);
    auto samples = utilization_samples(t, 166'666'667);
    ASSERT_EQ(samples.size(), 60u);
    for (const auto& s : samples) EXPECT_TRUE(s.utilized);
}

TEST(Metrics, EmptySpanIsAnArgumentError)
{
    for (const auto& t : {Trace{}, single_process({ev(1, 1, Category::Gpu, "k", 5, 0)})}) {
        try {
            sampled_utilization(t, 10);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::Argument);
            EXPECT_EQ(e.detail(), "no span");
        }
        EXPECT_THROW(busy_fraction(t, Category::Gpu), Error);
    }
    EXPECT_THROW(sampled_utilization(expand_leaf_trace(), 0), Error);
}

TEST(Metrics, BusyFractionExamples)
{
    auto half = single_process({ev(1, 1, Category::HighLevel, "py", 0, 100), ev(1, 1, Category::Backend, "tf", 25, 50)});
    EXPECT_EQ(busy_fraction(half, Category::Backend), 0.5);
    auto twice = single_process({ev(1, 7, Category::Gpu, "k", 0, 40), ev(1, 8, Category::Gpu, "k", 0, 40),
                                 ev(1, 1, Category::HighLevel, "py", 0, 80)});
    EXPECT_EQ(busy_ns(twice, Category::Gpu), 40u);
}

TEST(Metrics, GeneratorBusyMatchesTruth)
{
    auto w = synth::generate_workload(synth::load_workload_spec(config_path("default.cfg")));
    EXPECT_EQ(busy_ns(w.uninstrumented, Category::Gpu), w.truth.gpu_busy_ns);
}

TEST(Metrics, SamplesTileTheSpan)
{
    auto t = synth::random_trace(4);
    auto span = *trace_span(t);
    for (DurationNs p : std::vector<DurationNs>{1, 7, 1000, span.length(), span.length() * 3}) {
        auto s = utilization_samples(t, p);
        TimestampNs cursor = span.begin;
        for (const auto& x : s) {
            EXPECT_EQ(x.period_start, cursor);
            cursor += x.period_length;
        }
        EXPECT_EQ(cursor, span.end);
    }
}

TEST(Metrics, SampledMatchesNaiveScanAndDominatesBusy)
{
    std::mt19937_64 rng(8);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto t = synth::random_trace(seed, {.max_events = 200});
        auto span = trace_span(t);
        if (!span) continue;
        for (int k = 0; k < 5; ++k) {
            DurationNs p = 1 + rng() % (span->length() + 10);
            double s = sampled_utilization(t, p);
            EXPECT_DOUBLE_EQ(s, naive_sampled(t, p)) << "seed " << seed << " period " << p;
            EXPECT_GE(s, busy_fraction(t, Category::Gpu)) << "seed " << seed << " period " << p;
        }
    }
}

TEST(Metrics, RefiningThePeriodNeverRaisesUtilization)
{
    std::mt19937_64 rng(9);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto t = synth::random_trace(seed, {.max_events = 200});
        if (!trace_span(t)) continue;
        DurationNs p = 1 + rng() % 5000;
        for (DurationNs k : {2ull, 3ull, 10ull}) EXPECT_GE(sampled_utilization(t, p * k), sampled_utilization(t, p));
    }
}

TEST(Metrics, BusyMatchesNaiveAndIgnoresSplits)
{
    std::mt19937_64 rng(10);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto t = synth::random_trace(seed, {.max_events = 200, .max_span = 50'000});
        for (Category c : kResourceCategories) EXPECT_EQ(busy_ns(t, c), naive_busy(t, c));
        auto split = t;
        for (auto& e : split.events) {
            if (e.category == Category::Gpu && e.duration > 1 && !e.correlation) {
                DurationNs cut = 1 + rng() % (e.duration - 1);
                Event tail = e;
                tail.start += cut;
                tail.duration -= cut;
                e.duration = cut;
                split.events.push_back(tail);
                break;
            }
        }
        EXPECT_EQ(busy_ns(split, Category::Gpu), busy_ns(t, Category::Gpu));
    }
}

TEST(Metrics, SummarizeRowsAndPercentages)
{
    auto rows = summarize(compute_overlap(expand_leaf_trace()));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].ns, 1'700'000u);
    EXPECT_EQ(rows[0].categories, (CategorySet{Category::Backend, Category::Gpu}));
    EXPECT_NEAR(rows[0].percent, 100.0 * 1.7 / 2.49, 1e-9);
    EXPECT_EQ(rows[1].ns, 790'000u);
    EXPECT_NEAR(rows[1].percent, 100.0 * 0.79 / 2.49, 1e-9);

    auto one = summarize(compute_overlap(single_process({ev(1, 1, Category::HighLevel, "py", 0, 10)})));
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].percent, 100.0);
}

TEST(Metrics, SummarizeCoversEveryCellAndUntracked)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto b = compute_overlap(synth::random_trace(seed));
        auto rows = summarize(b);
        std::map<Pid, DurationNs> sum;
        std::map<Pid, double> pct;
        std::size_t cells = 0;
        for (const auto& r : rows) {
            sum[r.pid] += r.ns;
            pct[r.pid] += r.percent;
            if (!r.untracked()) ++cells;
        }
        EXPECT_EQ(cells, b.cells.size());
        for (const auto& [pid, span] : b.span) {
            EXPECT_EQ(sum[pid], span);
            if (span > 0) {
                EXPECT_NEAR(pct[pid], 100.0, 1e-9);
            }
        }
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].pid == rows[i - 1].pid && !rows[i].untracked()) {
                EXPECT_GE(rows[i - 1].ns, rows[i].ns);
            }
        }
    }
}
