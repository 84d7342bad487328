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

using namespace xstack;
using namespace xstack::testing;

TEST(TraceModel, WellFormedTwoEventTraceHasNoViolations)
{
    auto t = single_process({ev(1, 1, Category::Operation, "A", 0, 10), ev(1, 1, Category::HighLevel, "py", 0, 10)});
    EXPECT_TRUE(validate_trace(t).empty());
}

TEST(TraceModel, PartialOverlapOfOperationsIsImproperNesting)
{
    auto t = single_process({ev(1, 1, Category::Operation, "A", 0, 10), ev(1, 1, Category::Operation, "B", 5, 10)});
    auto v = validate_trace(t);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, Rule::ImproperNesting);
    EXPECT_EQ(v[0].events, (std::vector<std::size_t>{0, 1}));
}

TEST(TraceModel, PartialOverlapOnDifferentTidsIsAllowed)
{
    auto t = single_process({ev(1, 1, Category::Operation, "A", 0, 10), ev(1, 2, Category::Operation, "B", 5, 10)});
    EXPECT_TRUE(validate_trace(t).empty());
}

TEST(TraceModel, TouchingAndIdenticalOperationsNest)
{
    auto t = single_process({ev(1, 1, Category::Operation, "A", 0, 10), ev(1, 1, Category::Operation, "B", 10, 5),
                             ev(1, 1, Category::Operation, "A", 0, 10), ev(1, 1, Category::Operation, "z", 3, 0)});
    EXPECT_TRUE(validate_trace(t).empty());
}

TEST(TraceModel, DanglingCorrelation)
{
    auto t = single_process({ev(1, 7, Category::Gpu, "k", 0, 5, 99)});
    auto v = validate_trace(t);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, Rule::DanglingCorrelation);
    EXPECT_EQ(v[0].events, std::vector<std::size_t>{0});
}

TEST(TraceModel, CorrelationMustResolveWithinThePid)
{
    Trace t = single_process({ev(1, 1, Category::AccelApi, "launch", 0, 5, 3), ev(2, 7, Category::Gpu, "k", 5, 5, 3)});
    t.processes.push_back({2, "other", std::nullopt, std::nullopt, std::nullopt});
    auto v = validate_trace(t);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, Rule::DanglingCorrelation);
}

TEST(TraceModel, OtherRules)
{
    Trace t = single_process({ev(1, 1, Category::HighLevel, "x", std::numeric_limits<TimestampNs>::max(), 1),
                              ev(3, 1, Category::HighLevel, "y", 0, 1), ev(1, 1, Category::AccelApi, "a", 0, 1, 5),
                              ev(1, 1, Category::AccelApi, "b", 2, 1, 5)});
    t.processes.push_back({1, "dup", std::nullopt, std::nullopt, std::nullopt});
    t.processes.push_back({4, "late", std::nullopt, 10, 5});
    t.processes.push_back({5, "a", 6, std::nullopt, std::nullopt});
    t.processes.push_back({6, "b", 5, std::nullopt, std::nullopt});
    std::set<Rule> rules;
    for (const auto& v : validate_trace(t)) rules.insert(v.rule);
    EXPECT_EQ(rules, (std::set<Rule>{Rule::DurationOverflow, Rule::MissingProcess, Rule::DuplicateCorrelation,
                                     Rule::DuplicateProcess, Rule::ForkAfterJoin, Rule::ParentCycle}));
}

TEST(TraceModel, ValidationIsPureAndIdempotent)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto t = synth::random_trace(seed, {.max_events = 200});
        auto copy = t;
        auto a = validate_trace(t);
        auto b = validate_trace(t);
        EXPECT_EQ(a, b);
        EXPECT_EQ(t.events, copy.events);
    }
}

TEST(TraceModel, GeneratedTracesValidate)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        EXPECT_TRUE(validate_trace(synth::random_trace(seed)).empty()) << "seed " << seed;
    }
    auto w = synth::generate_workload(synth::load_workload_spec(config_path("default.cfg")));
    EXPECT_TRUE(validate_trace(w.uninstrumented).empty());
    EXPECT_TRUE(validate_trace(w.instrumented).empty());
}

TEST(TraceModel, CanonicalOrderIsStableByStartEndCategory)
{
    std::vector<Event> e{ev(1, 1, Category::Gpu, "a", 5, 5), ev(1, 1, Category::HighLevel, "b", 5, 5),
                         ev(1, 1, Category::HighLevel, "c", 5, 2), ev(1, 1, Category::HighLevel, "d", 5, 5),
                         ev(1, 1, Category::HighLevel, "e", 0, 20)};
    sort_events(e);
    std::string names;
    for (const auto& x : e) names += x.name;
    EXPECT_EQ(names, "ecbda");
}

TEST(TraceModel, CategorySetText)
{
    CategorySet s{Category::Gpu, Category::Backend};
    EXPECT_EQ(s.to_string(), "BACKEND+GPU");
    EXPECT_EQ(CategorySet::parse("BACKEND+GPU"), s);
    EXPECT_FALSE(CategorySet::parse("BACKEND+NOPE"));
    EXPECT_TRUE(s.has_cpu());
    EXPECT_FALSE((CategorySet{Category::Gpu}).has_cpu());
    for (Category c : kAllCategories) EXPECT_EQ(category_from_string(to_string(c)), c);
}

TEST(TraceModel, SpansIgnoreZeroLengthEvents)
{
    auto t = single_process({ev(1, 1, Category::HighLevel, "a", 10, 5), ev(1, 1, Category::HighLevel, "b", 100, 0)});
    auto s = trace_span(t);
    ASSERT_TRUE(s);
    EXPECT_EQ(s->begin, 10u);
    EXPECT_EQ(s->end, 15u);
    EXPECT_FALSE(trace_span(single_process({ev(1, 1, Category::HighLevel, "z", 3, 0)})));
}
