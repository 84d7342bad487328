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

/** \file
 * procview.hpp: fork/join process tree with per-process breakdowns.
 *
 * Each input trace may hold one or more processes. A process whose parent is
 * not among the inputs becomes a root and a warning is recorded. Children
 * are visited in pid order, so rendering is deterministic.
 */
#ifndef XSTACK_PROCVIEW_HPP
#define XSTACK_PROCVIEW_HPP

#include "xstack/metrics.hpp"
#include "xstack/overlap.hpp"
#include "xstack/trace_model.hpp"

#include <iomanip>

namespace xstack {

struct ProcessNode {
    Pid pid = 0;
    std::string name;
    std::optional<Pid> parent;
    std::optional<TimestampNs> fork_time;
    std::optional<TimestampNs> join_time;
    Breakdown breakdown;
    std::optional<Span> span;
    DurationNs span_ns = 0;
    DurationNs gpu_busy_ns = 0;
    std::vector<Pid> children;  // ascending

    double gpu_busy_fraction() const
    {
        return span_ns == 0 ? 0.0 : static_cast<double>(gpu_busy_ns) / static_cast<double>(span_ns);
    }
};

struct ProcessTree {
    std::uint64_t clock_domain = 0;
    std::map<Pid, ProcessNode> nodes;
    std::vector<Pid> roots;  // ascending
    std::vector<std::string> warnings;

    std::size_t leaf_count() const
    {
        std::size_t n = 0;
        for (const auto& [pid, node] : nodes) n += node.children.empty() ? 1 : 0;
        return n;
    }

    DurationNs total_span() const
    {
        DurationNs s = 0;
        for (const auto& [pid, node] : nodes) s += node.span_ns;
        return s;
    }

    DurationNs total_gpu_busy() const
    {
        DurationNs s = 0;
        for (const auto& [pid, node] : nodes) s += node.gpu_busy_ns;
        return s;
    }

    /// Depth-first, parents before children, siblings by pid.
    std::vector<std::pair<Pid, int>> preorder() const
    {
        std::vector<std::pair<Pid, int>> out;
        std::vector<std::pair<Pid, int>> stack;
        for (auto it = roots.rbegin(); it != roots.rend(); ++it) stack.emplace_back(*it, 0);
        while (!stack.empty()) {
            auto [pid, depth] = stack.back();
            stack.pop_back();
            out.emplace_back(pid, depth);
            const auto& ch = nodes.at(pid).children;
            for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.emplace_back(*it, depth + 1);
        }
        return out;
    }
};

/// Splits a multi-process trace into one trace per process.
inline std::vector<Trace> split_by_pid(const Trace& trace)
{
    std::map<Pid, Trace> parts;
    for (const auto& p : trace.processes) {
        auto& t = parts[p.pid];
        t.clock_domain = trace.clock_domain;
        t.processes.push_back(p);
    }
    for (const auto& e : trace.events) parts[e.pid].events.push_back(e);
    std::vector<Trace> out;
    for (auto& [pid, t] : parts) out.push_back(std::move(t));
    return out;
}

inline ProcessTree build_process_tree(const std::vector<Trace>& traces)
{
    ProcessTree tree;
    if (traces.empty()) return tree;
    tree.clock_domain = traces.front().clock_domain;
    for (const auto& t : traces) {
        if (t.clock_domain != tree.clock_domain) {
            throw Error(ErrorKind::ClockDomainMismatch, std::to_string(t.clock_domain) + " vs " +
                                                            std::to_string(tree.clock_domain));
        }
    }
    for (const auto& t : traces) {
        require_valid(t);
        auto breakdown = compute_overlap(t);
        for (const auto& p : t.processes) {
            if (tree.nodes.count(p.pid)) throw Error(ErrorKind::DuplicatePid, std::to_string(p.pid));
            ProcessNode n;
            n.pid = p.pid;
            n.name = p.name;
            n.parent = p.parent;
            n.fork_time = p.fork_time;
            n.join_time = p.join_time;
            auto s = pid_span(t, p.pid);
            n.span = s;
            n.span_ns = s ? s->length() : 0;
            n.gpu_busy_ns = busy_ns(t, Category::Gpu, p.pid);
            n.breakdown.span[p.pid] = breakdown.span.count(p.pid) ? breakdown.span.at(p.pid) : 0;
            n.breakdown.untracked[p.pid] = breakdown.untracked.count(p.pid) ? breakdown.untracked.at(p.pid) : 0;
            for (const auto& [key, ns] : breakdown.cells) {
                if (key.pid == p.pid) n.breakdown.cells[key] = ns;
            }
            tree.nodes.emplace(p.pid, std::move(n));
        }
    }
    for (auto& [pid, node] : tree.nodes) {
        if (node.parent && !tree.nodes.count(*node.parent)) {
            tree.warnings.push_back("pid " + std::to_string(pid) + ": parent " + std::to_string(*node.parent) +
                                    " not found; treated as a root");
            node.parent.reset();
        }
    }
    for (auto& [pid, node] : tree.nodes) {
        if (node.parent) {
            auto& parent = tree.nodes.at(*node.parent);
            parent.children.push_back(pid);
            if (node.fork_time && parent.span && (*node.fork_time < parent.span->begin || *node.fork_time > parent.span->end)) {
                tree.warnings.push_back("pid " + std::to_string(pid) + ": fork time outside parent span");
            }
        } else {
            tree.roots.push_back(pid);
        }
    }
    // Validation already rejects cycles within one trace; cycles across traces
    // leave nodes unreachable from any root.
    if (tree.preorder().size() != tree.nodes.size()) {
        throw Error(ErrorKind::InvalidTrace, "parent relationships form a cycle");
    }
    return tree;
}

inline void render_tree(std::ostream& out, const ProcessTree& tree)
{
    out << std::left << std::setw(32) << "process" << std::right << std::setw(16) << "span_ns" << std::setw(16)
        << "gpu_busy_ns" << std::setw(10) << "gpu_%" << '\n';
    for (const auto& [pid, depth] : tree.preorder()) {
        const auto& n = tree.nodes.at(pid);
        std::string label = std::string(static_cast<std::size_t>(depth) * 2, ' ') + n.name + " [" + std::to_string(pid) + "]";
        std::ostringstream pct;
        pct << std::fixed << std::setprecision(3) << 100.0 * n.gpu_busy_fraction();
        out << std::left << std::setw(32) << label << std::right << std::setw(16) << n.span_ns << std::setw(16)
            << n.gpu_busy_ns << std::setw(10) << pct.str() << '\n';
    }
    out << "nodes=" << tree.nodes.size() << " leaves=" << tree.leaf_count() << " total_span_ns=" << tree.total_span()
        << " total_gpu_busy_ns=" << tree.total_gpu_busy() << '\n';
}

inline std::string dot_escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

/// Graphviz description: one node per process, edges labeled with fork/join times.
inline void render_dot(std::ostream& out, const ProcessTree& tree)
{
    out << "digraph process_tree {\n  node [shape=box];\n";
    for (const auto& [pid, depth] : tree.preorder()) {
        const auto& n = tree.nodes.at(pid);
        std::ostringstream pct;
        pct << std::fixed << std::setprecision(3) << 100.0 * n.gpu_busy_fraction();
        out << "  p" << pid << " [label=\"" << dot_escape(n.name) << " (" << pid << ")\\nspan " << n.span_ns
            << " ns\\ngpu " << pct.str() << "%\"];\n";
    }
    for (const auto& [pid, depth] : tree.preorder()) {
        const auto& n = tree.nodes.at(pid);
        if (!n.parent) continue;
        out << "  p" << *n.parent << " -> p" << pid;
        std::string label;
        if (n.fork_time) label += "fork " + std::to_string(*n.fork_time);
        if (n.join_time) label += (label.empty() ? "" : "\\n") + std::string("join ") + std::to_string(*n.join_time);
        if (!label.empty()) out << " [label=\"" << label << "\"]";
        out << ";\n";
    }
    out << "}\n";
}

}  // namespace xstack

#endif  // XSTACK_PROCVIEW_HPP
