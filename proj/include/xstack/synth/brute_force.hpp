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
 * brute_force.hpp: discretized overlap oracle.
 *
 * Cuts each pid span into cells of `resolution` ns. Cell k is represented by
 * its left edge t_k and weighs min(resolution, span_end - t_k). An event
 * covers a cell when start <= t_k < end. Category presence comes from
 * per-cell coverage counts, operation paths from painting operations onto
 * cells outer-to-inner. When every event boundary lies on the cell grid the
 * result is exact; at resolution 1 it always is.
 *
 * This deliberately shares nothing with the sweep in overlap.hpp beyond the
 * data types and the canonical event order.
 */
#ifndef XSTACK_SYNTH_BRUTE_FORCE_HPP
#define XSTACK_SYNTH_BRUTE_FORCE_HPP

#include "xstack/overlap.hpp"
#include "xstack/trace_model.hpp"

namespace xstack::synth {

inline constexpr std::uint64_t kBruteForceCellLimit = 100'000'000;

inline Breakdown brute_force_overlap(const Trace& trace, DurationNs resolution,
                                     Attribution mode = Attribution::Instant)
{
    if (resolution == 0) throw Error(ErrorKind::Argument, "resolution must be positive");
    require_valid(trace);

    const auto& evs = trace.events;
    auto order = canonical_order(evs);
    std::vector<std::size_t> rank(evs.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

    Breakdown out;
    std::map<OperationPath, int> path_ids;
    std::vector<OperationPath> paths;
    auto intern = [&](OperationPath p) {
        auto [it, inserted] = path_ids.emplace(std::move(p), static_cast<int>(paths.size()));
        if (inserted) paths.push_back(it->first);
        return it->second;
    };
    auto extend = [&](int parent, const std::string& name) {
        OperationPath p = parent < 0 ? OperationPath{} : paths[static_cast<std::size_t>(parent)];
        if (p.empty() || p.back() != name) p.push_back(name);
        return intern(std::move(p));
    };

    for (Pid pid : pids_of(trace)) {
        auto span = pid_span(trace, pid);
        out.span[pid] = span ? span->length() : 0;
        out.untracked[pid] = 0;
        if (!span) continue;

        const TimestampNs s0 = span->begin;
        const std::uint64_t cells = (span->length() + resolution - 1) / resolution;
        if (cells > kBruteForceCellLimit) {
            throw Error(ErrorKind::Argument, "span / resolution exceeds " + std::to_string(kBruteForceCellLimit));
        }
        auto first_cell = [&](TimestampNs t) { return (t - s0 + resolution - 1) / resolution; };

        std::vector<std::size_t> mine;
        for (std::size_t i : order) {
            if (evs[i].pid == pid) mine.push_back(i);
        }

        // Category coverage counts.
        std::array<std::vector<std::int32_t>, 6> diff;
        for (Category c : kResourceCategories) diff[static_cast<std::size_t>(c)].assign(cells + 1, 0);
        for (std::size_t i : mine) {
            const auto& e = evs[i];
            if (e.category == Category::Operation || e.duration == 0) continue;
            auto lo = first_cell(e.start), hi = first_cell(e.end());
            if (lo >= hi) continue;
            diff[static_cast<std::size_t>(e.category)][lo] += 1;
            diff[static_cast<std::size_t>(e.category)][hi] -= 1;
        }

        // Innermost operation per cell, per tid (ascending tid order).
        std::map<Tid, std::vector<std::size_t>> ops_by_tid;
        for (std::size_t i : mine) {
            if (evs[i].category == Category::Operation && evs[i].duration > 0) ops_by_tid[evs[i].tid].push_back(i);
        }
        std::vector<std::vector<std::int32_t>> painted;
        std::vector<int> op_path(evs.size(), -1);
        for (auto& [tid, ops] : ops_by_tid) {
            std::stable_sort(ops.begin(), ops.end(), [&](std::size_t a, std::size_t b) {
                if (evs[a].start != evs[b].start) return evs[a].start < evs[b].start;
                if (evs[a].end() != evs[b].end()) return evs[a].end() > evs[b].end();
                return rank[a] < rank[b];
            });
            std::vector<std::int32_t> at(cells, -1);
            for (std::size_t i : ops) {
                auto lo = first_cell(evs[i].start), hi = first_cell(evs[i].end());
                if (lo >= hi) continue;
                int parent = at[lo] < 0 ? -1 : op_path[static_cast<std::size_t>(at[lo])];
                op_path[i] = extend(parent, evs[i].name);
                std::fill(at.begin() + static_cast<std::ptrdiff_t>(lo), at.begin() + static_cast<std::ptrdiff_t>(hi),
                          static_cast<std::int32_t>(i));
            }
            painted.push_back(std::move(at));
        }

        // Path at an arbitrary instant by direct membership, for launch scoping.
        auto path_at = [&](TimestampNs t) {
            for (const auto& [tid, ops] : ops_by_tid) {
                std::vector<std::size_t> chain;
                for (std::size_t i : ops) {
                    if (evs[i].contains(t)) chain.push_back(i);
                }
                if (chain.empty()) continue;
                int p = -1;
                for (std::size_t i : chain) p = extend(p, evs[i].name);  // ops are sorted outer-first
                return p;
            }
            return -1;
        };
        std::vector<std::size_t> gpu_events;
        std::map<CorrelationId, int> launch_path;
        if (mode == Attribution::Correlation) {
            for (std::size_t i : mine) {
                const auto& e = evs[i];
                if (e.category == Category::Gpu && e.duration > 0) gpu_events.push_back(i);
                if (e.category == Category::AccelApi && e.correlation) launch_path[*e.correlation] = path_at(e.start);
            }
        }

        std::map<std::pair<int, std::uint8_t>, DurationNs> acc;
        DurationNs untracked = 0;
        std::array<std::int32_t, 6> count{};
        std::pair<int, std::uint8_t> run_key{-2, 0};
        DurationNs run_len = 0;
        auto flush = [&]() {
            if (run_len == 0) return;
            if (run_key.second == 0) {
                untracked += run_len;
            } else {
                acc[run_key] += run_len;
            }
            run_len = 0;
        };

        for (std::uint64_t k = 0; k < cells; ++k) {
            const TimestampNs t = s0 + k * resolution;
            const DurationNs weight = std::min<DurationNs>(resolution, span->end - t);
            std::uint8_t mask = 0;
            for (Category c : kResourceCategories) {
                auto ci = static_cast<std::size_t>(c);
                count[ci] += diff[ci][k];
                if (count[ci] > 0) mask |= static_cast<std::uint8_t>(1u << ci);
            }
            int path = -1;
            for (const auto& at : painted) {
                if (at[k] >= 0) {
                    path = op_path[static_cast<std::size_t>(at[k])];
                    break;
                }
            }
            auto set = CategorySet::from_bits(mask);
            if (mode == Attribution::Correlation && set.contains(Category::Gpu) && !set.has_cpu()) {
                for (std::size_t g : gpu_events) {  // canonical order: first hit has lowest rank
                    if (!evs[g].contains(t)) continue;
                    if (evs[g].correlation) {
                        if (auto it = launch_path.find(*evs[g].correlation); it != launch_path.end()) path = it->second;
                    }
                    break;
                }
            }
            std::pair<int, std::uint8_t> key{path, mask};
            if (key != run_key) {
                flush();
                run_key = key;
            }
            run_len += weight;
        }
        flush();

        out.untracked[pid] = untracked;
        for (const auto& [key, ns] : acc) {
            OperationPath p = key.first < 0 ? OperationPath{} : paths[static_cast<std::size_t>(key.first)];
            out.cells[OverlapKey{pid, std::move(p), CategorySet::from_bits(key.second)}] += ns;
        }
    }
    return out;
}

}  // namespace xstack::synth

#endif  // XSTACK_SYNTH_BRUTE_FORCE_HPP
