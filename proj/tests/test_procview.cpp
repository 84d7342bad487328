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

#include <sstream>

using namespace xstack;
using namespace xstack::testing;

namespace {

Trace proc(Pid pid, std::optional<Pid> parent, TimestampNs start, DurationNs dur, DurationNs gpu = 0,
           std::optional<TimestampNs> fork = std::nullopt)
{
    Trace t;
    t.clock_domain = 1;
    t.processes.push_back({pid, "p" + std::to_string(pid), parent, fork, std::nullopt});
    t.events.push_back(ev(pid, 1, Category::HighLevel, "py", start, dur));
    if (gpu > 0) t.events.push_back(ev(pid, 7, Category::Gpu, "k", start, gpu));
    return t;
}

}  // namespace

TEST(ProcView, MinigoTreeHasSeventeenNodes)
{
    auto w = synth::generate_workload(synth::load_workload_spec(config_path("minigo.cfg")));
    auto tree = build_process_tree(split_by_pid(w.uninstrumented));
    EXPECT_EQ(tree.nodes.size(), 17u);
    EXPECT_EQ(tree.leaf_count(), 16u);
    ASSERT_EQ(tree.roots.size(), 1u);
    EXPECT_EQ(tree.nodes.at(tree.roots[0]).children.size(), 16u);
    EXPECT_TRUE(tree.warnings.empty());
    for (const auto& [pid, n] : tree.nodes) {
        if (n.children.empty()) {
            EXPECT_LT(n.gpu_busy_fraction(), 0.01) << pid;
        }
    }
    // Splitting or not gives the same per-process numbers.
    auto whole = build_process_tree({w.uninstrumented});
    for (const auto& [pid, n] : tree.nodes) {
        EXPECT_EQ(whole.nodes.at(pid).span_ns, n.span_ns);
        EXPECT_EQ(whole.nodes.at(pid).gpu_busy_ns, n.gpu_busy_ns);
        EXPECT_EQ(whole.nodes.at(pid).breakdown, n.breakdown);
    }
}

TEST(ProcView, SingleProcessAndEmptyInput)
{
    auto tree = build_process_tree({proc(1, std::nullopt, 0, 100, 25)});
    ASSERT_EQ(tree.nodes.size(), 1u);
    EXPECT_EQ(tree.leaf_count(), 1u);
    EXPECT_EQ(tree.nodes.at(1).span_ns, 100u);
    EXPECT_DOUBLE_EQ(tree.nodes.at(1).gpu_busy_fraction(), 0.25);
    EXPECT_TRUE(build_process_tree({}).nodes.empty());
}

TEST(ProcView, DuplicatePidAcrossTraces)
{
    try {
        build_process_tree({proc(1, std::nullopt, 0, 10), proc(1, std::nullopt, 0, 10)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DuplicatePid);
    }
}

TEST(ProcView, ClockDomainMismatch)
{
    auto b = proc(2, 1, 0, 10);
    b.clock_domain = 2;
    try {
        build_process_tree({proc(1, std::nullopt, 0, 10), b});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ClockDomainMismatch);
    }
}

TEST(ProcView, OrphanBecomesRootWithWarning)
{
    auto tree = build_process_tree({proc(1, std::nullopt, 0, 10), proc(5, 99, 0, 10)});
    EXPECT_EQ(tree.roots, (std::vector<Pid>{1, 5}));
    ASSERT_EQ(tree.warnings.size(), 1u);
    EXPECT_NE(tree.warnings[0].find("99"), std::string::npos);
}

TEST(ProcView, ForkOutsideParentSpanWarns)
{
    auto tree = build_process_tree({proc(1, std::nullopt, 100, 10), proc(2, 1, 0, 10, 0, 500)});
    ASSERT_EQ(tree.warnings.size(), 1u);
    EXPECT_NE(tree.warnings[0].find("fork"), std::string::npos);
}

TEST(ProcView, CrossTraceCycleIsRejected)
{
    EXPECT_THROW(build_process_tree({proc(1, 2, 0, 10), proc(2, 1, 0, 10)}), Error);
}

TEST(ProcView, PreorderVisitsParentsFirstAndSiblingsByPid)
{
    auto tree = build_process_tree({proc(1, std::nullopt, 0, 100), proc(4, 1, 0, 10), proc(3, 1, 0, 10),
                                    proc(7, 3, 0, 10), proc(2, std::nullopt, 0, 10)});
    std::vector<std::pair<Pid, int>> want{{1, 0}, {3, 1}, {7, 2}, {4, 1}, {2, 0}};
    EXPECT_EQ(tree.preorder(), want);
    EXPECT_EQ(tree.leaf_count(), 3u);
}

TEST(ProcView, TotalsAreSumsOverNodes)
{
    auto tree = build_process_tree({proc(1, std::nullopt, 0, 100, 10), proc(2, 1, 20, 50, 30), proc(3, 1, 0, 7)});
    EXPECT_EQ(tree.total_span(), 157u);
    EXPECT_EQ(tree.total_gpu_busy(), 40u);
    std::ostringstream o;
    render_tree(o, tree);
    EXPECT_NE(o.str().find("nodes=3 leaves=2 total_span_ns=157 total_gpu_busy_ns=40"), std::string::npos);
    EXPECT_NE(o.str().find("  p2 [2]"), std::string::npos);
}

TEST(ProcView, DotOutput)
{
    auto b = proc(2, 1, 20, 50, 0, 20);
    b.processes[0].name = "wor\"ker";
    auto tree = build_process_tree({proc(1, std::nullopt, 0, 100), b});
    std::ostringstream o;
    render_dot(o, tree);
    auto s = o.str();
    EXPECT_EQ(s.rfind("digraph process_tree {", 0), 0u);
    EXPECT_NE(s.find("p1 -> p2 [label=\"fork 20\"];"), std::string::npos);
    EXPECT_NE(s.find("wor\\\"ker (2)"), std::string::npos);
    EXPECT_EQ(s.substr(s.size() - 2), "}\n");
}

TEST(ProcView, NodeSpanMatchesPidSpan)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto t = synth::random_trace(seed);
        auto tree = build_process_tree(split_by_pid(t));
        for (const auto& [pid, n] : tree.nodes) {
            auto s = pid_span(t, pid);
            EXPECT_EQ(n.span_ns, s ? s->length() : 0);
            EXPECT_EQ(n.gpu_busy_ns, busy_ns(t, Category::Gpu, pid));
        }
    }
}
