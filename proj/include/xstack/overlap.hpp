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
 * overlap.hpp: cross-stack overlap attribution.
 *
 * Each pid's timeline is cut at every event boundary. An elementary interval
 * of length L whose active resource-category set S is non-empty adds L to the
 * cell (pid, operation path, S); intervals with S empty add to the pid's
 * untracked time. Per pid, cells plus untracked sum to the span exactly.
 *
 * The operation path of an instant is the nesting chain of OPERATION events
 * active on the lowest-numbered tid of the pid that has any active operation.
 * Adjacent duplicate names in a chain collapse into one level.
 */
#ifndef XSTACK_OVERLAP_HPP
#define XSTACK_OVERLAP_HPP

#include "xstack/trace_model.hpp"

#include <unordered_map>

namespace xstack {

enum class Attribution {
    Instant,      // GPU time scopes to whatever operation is active while it runs
    Correlation,  // GPU-only time scopes to the operation active at its launch
};

inline std::string_view to_string(Attribution a) { return a == Attribution::Instant ? "instant" : "correlation"; }

using OperationPath = std::vector<std::string>;

inline std::string path_to_string(const OperationPath& path)
{
    std::string out;
    for (const auto& p : path) {
        if (!out.empty()) out += '/';
        out += p;
    }
    return out;
}

struct OverlapKey {
    Pid pid = 0;
    OperationPath path;
    CategorySet categories;

    auto operator<=>(const OverlapKey&) const = default;
    bool operator==(const OverlapKey&) const = default;
};

struct Breakdown {
    std::map<OverlapKey, DurationNs> cells;
    std::map<Pid, DurationNs> span;       // earliest start to latest end, per pid
    std::map<Pid, DurationNs> untracked;  // span time with no active resource

    bool operator==(const Breakdown&) const = default;

    DurationNs cell_total(Pid pid) const
    {
        DurationNs sum = 0;
        for (const auto& [k, v] : cells) {
            if (k.pid == pid) sum += v;
        }
        return sum;
    }

    DurationNs get(const OverlapKey& key) const
    {
        auto it = cells.find(key);
        return it == cells.end() ? 0 : it->second;
    }

    /// Total time, over all paths, in which `category` was active on `pid`.
    DurationNs category_total(Pid pid, Category category) const
    {
        DurationNs sum = 0;
        for (const auto& [k, v] : cells) {
            if (k.pid == pid && k.categories.contains(category)) sum += v;
        }
        return sum;
    }
};

namespace detail {

class PathTable {
public:
    static constexpr int kEmpty = -1;

    int child(int parent, const std::string& name)
    {
        OperationPath p = parent == kEmpty ? OperationPath{} : paths_[static_cast<std::size_t>(parent)];
        if (p.empty() || p.back() != name) p.push_back(name);
        return intern(std::move(p));
    }

    int intern(OperationPath p)
    {
        auto [it, inserted] = ids_.emplace(std::move(p), static_cast<int>(paths_.size()));
        if (inserted) paths_.push_back(it->first);
        return it->second;
    }

    const OperationPath& path(int id) const
    {
        static const OperationPath empty;
        return id == kEmpty ? empty : paths_[static_cast<std::size_t>(id)];
    }

private:
    std::map<OperationPath, int> ids_;
    std::vector<OperationPath> paths_;
};

inline std::map<Pid, std::vector<std::size_t>> events_by_pid(const Trace& trace)
{
    std::map<Pid, std::vector<std::size_t>> out;
    for (Pid pid : pids_of(trace)) out[pid];
    for (std::size_t i : canonical_order(trace.events)) out[trace.events[i].pid].push_back(i);
    return out;
}

// Sweep over one pid. Calls `on_interval(t0, t1, mask, path_id, first_gpu)`
// for every elementary interval of positive length inside the span, where
// first_gpu is the active GPU event with the lowest canonical rank (or
// npos). `on_point(t, path_id)` answers path queries at the requested times.
class PidSweep {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    PidSweep(const Trace& trace, const std::vector<std::size_t>& events, PathTable& paths)
        : evs_(trace.events), order_(events), paths_(paths)
    {
        rank_.assign(evs_.size(), 0);
        for (std::size_t r = 0; r < order_.size(); ++r) rank_[order_[r]] = r;
    }

    template <typename OnInterval, typename OnPoint>
    void run(const std::vector<TimestampNs>& queries, OnInterval&& on_interval, OnPoint&& on_point)
    {
        struct Boundary {
            TimestampNs t;
            bool start;
            std::size_t ev;
        };
        std::vector<Boundary> bounds;
        for (std::size_t i : order_) {
            if (evs_[i].duration == 0) continue;
            bounds.push_back({evs_[i].start, true, i});
            bounds.push_back({evs_[i].end(), false, i});
        }
        std::sort(bounds.begin(), bounds.end(), [&](const Boundary& a, const Boundary& b) {
            if (a.t != b.t) return a.t < b.t;
            if (a.start != b.start) return !a.start;  // ends first
            if (a.start) {
                if (evs_[a.ev].end() != evs_[b.ev].end()) return evs_[a.ev].end() > evs_[b.ev].end();
            }
            return rank_[a.ev] < rank_[b.ev];
        });

        std::array<int, 6> counts{};
        std::map<Tid, std::vector<std::size_t>> stacks;
        std::unordered_map<std::size_t, int> op_path;
        std::set<std::pair<std::size_t, std::size_t>> gpu_active;  // (rank, event)

        auto current_path = [&]() {
            for (const auto& [tid, st] : stacks) {
                if (!st.empty()) return op_path.at(st.back());
            }
            return PathTable::kEmpty;
        };

        std::size_t q = 0;
        std::size_t b = 0;
        while (b < bounds.size()) {
            TimestampNs t = bounds[b].t;
            while (q < queries.size() && queries[q] < t) on_point(q++, current_path());
            for (; b < bounds.size() && bounds[b].t == t; ++b) {
                const auto& bd = bounds[b];
                const Event& e = evs_[bd.ev];
                auto c = static_cast<std::size_t>(e.category);
                if (bd.start) {
                    ++counts[c];
                    if (e.category == Category::Operation) {
                        auto& st = stacks[e.tid];
                        int parent = st.empty() ? PathTable::kEmpty : op_path.at(st.back());
                        op_path[bd.ev] = paths_.child(parent, e.name);
                        st.push_back(bd.ev);
                    } else if (e.category == Category::Gpu) {
                        gpu_active.emplace(rank_[bd.ev], bd.ev);
                    }
                } else {
                    --counts[c];
                    if (e.category == Category::Operation) {
                        auto& st = stacks[e.tid];
                        st.erase(std::find(st.begin(), st.end(), bd.ev));
                    } else if (e.category == Category::Gpu) {
                        gpu_active.erase({rank_[bd.ev], bd.ev});
                    }
                }
            }
            int path = current_path();
            TimestampNs next = b < bounds.size() ? bounds[b].t : t;
            while (q < queries.size() && queries[q] < next) on_point(q++, path);
            if (b == bounds.size()) break;
            std::uint8_t mask = 0;
            for (Category cat : kResourceCategories) {
                if (counts[static_cast<std::size_t>(cat)] > 0) mask |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(cat));
            }
            std::size_t first_gpu = gpu_active.empty() ? npos : gpu_active.begin()->second;
            on_interval(t, next, CategorySet::from_bits(mask), path, first_gpu);
        }
        // Queries after the last boundary see no active operation.
        while (q < queries.size()) on_point(q++, PathTable::kEmpty);
    }

private:
    const std::vector<Event>& evs_;
    const std::vector<std::size_t>& order_;
    PathTable& paths_;
    std::vector<std::size_t> rank_;
};

}  // namespace detail

/// Sweep-line overlap attribution. Throws Error(InvalidTrace) on invalid input.
inline Breakdown compute_overlap(const Trace& trace, Attribution mode = Attribution::Instant)
{
    require_valid(trace);
    Breakdown out;
    detail::PathTable paths;

    for (const auto& [pid, events] : detail::events_by_pid(trace)) {
        auto span = pid_span(trace, pid);
        out.span[pid] = span ? span->length() : 0;
        out.untracked[pid] = 0;
        if (!span) continue;

        // Launch path per correlation id, answered by a first pass.
        std::map<CorrelationId, int> launch_path;
        if (mode == Attribution::Correlation) {
            std::vector<std::pair<TimestampNs, CorrelationId>> launches;
            for (std::size_t i : events) {
                const auto& e = trace.events[i];
                if (e.category == Category::AccelApi && e.correlation) launches.emplace_back(e.start, *e.correlation);
            }
            std::sort(launches.begin(), launches.end());
            std::vector<TimestampNs> times;
            for (const auto& l : launches) times.push_back(l.first);
            detail::PidSweep pass(trace, events, paths);
            pass.run(
                times, [](auto&&...) {},
                [&](std::size_t q, int path) { launch_path[launches[q].second] = path; });
        }

        std::map<std::pair<int, std::uint8_t>, DurationNs> acc;
        DurationNs untracked = 0;
        detail::PidSweep sweep(trace, events, paths);
        sweep.run(
            {},
            [&](TimestampNs t0, TimestampNs t1, CategorySet set, int path, std::size_t first_gpu) {
                DurationNs len = t1 - t0;
                if (set.empty()) {
                    untracked += len;
                    return;
                }
                if (mode == Attribution::Correlation && !set.has_cpu() && first_gpu != detail::PidSweep::npos) {
                    const auto& g = trace.events[first_gpu];
                    if (g.correlation) {
                        auto it = launch_path.find(*g.correlation);
                        if (it != launch_path.end()) path = it->second;
                    }
                }
                acc[{path, set.bits()}] += len;
            },
            [](std::size_t, int) {});

        out.untracked[pid] = untracked;
        for (const auto& [k, v] : acc) {
            out.cells[OverlapKey{pid, paths.path(k.first), CategorySet::from_bits(k.second)}] += v;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Language transitions

struct TransitionCounts {
    std::map<std::pair<Category, Category>, std::uint64_t> counts;

    std::uint64_t get(Category from, Category to) const
    {
        auto it = counts.find({from, to});
        return it == counts.end() ? 0 : it->second;
    }
    bool operator==(const TransitionCounts&) const = default;
};

/// Pairs reported by count_transitions. The last pair is reported for
/// completeness but carries no acceptance weight.
inline constexpr std::array<std::pair<Category, Category>, 4> kTransitionPairs = {{
    {Category::HighLevel, Category::Backend},
    {Category::HighLevel, Category::Simulator},
    {Category::Backend, Category::AccelApi},
    {Category::Simulator, Category::AccelApi},
}};

/// Indices of the inner events of every (from -> to) transition. An inner
/// event is a `to`-category event not nested in another `to` event on its
/// tid, whose start lies inside an active `from` event on the same tid.
inline std::vector<std::size_t> transition_sites(const Trace& trace, Category from, Category to)
{
    struct TidEvents {
        std::vector<std::size_t> outer;
        std::vector<std::size_t> inner;
    };
    std::map<std::pair<Pid, Tid>, TidEvents> groups;
    for (std::size_t i : canonical_order(trace.events)) {
        const auto& e = trace.events[i];
        if (e.category == from) groups[{e.pid, e.tid}].outer.push_back(i);
        if (e.category == to) groups[{e.pid, e.tid}].inner.push_back(i);
    }

    std::vector<std::size_t> out;
    for (auto& [key, g] : groups) {
        if (g.inner.empty() || g.outer.empty()) continue;
        // Union of the outer intervals, sorted and disjoint.
        std::vector<std::pair<TimestampNs, TimestampNs>> cover;
        for (std::size_t i : g.outer) {
            const auto& e = trace.events[i];
            if (e.duration == 0) continue;
            if (!cover.empty() && e.start <= cover.back().second) {
                cover.back().second = std::max(cover.back().second, e.end());
            } else {
                cover.emplace_back(e.start, e.end());
            }
        }
        auto inside = [&](TimestampNs t) {
            auto it = std::upper_bound(cover.begin(), cover.end(), t,
                                       [](TimestampNs v, const auto& iv) { return v < iv.first; });
            return it != cover.begin() && t < std::prev(it)->second;
        };
        std::stable_sort(g.inner.begin(), g.inner.end(), [&](std::size_t a, std::size_t b) {
            const auto& ea = trace.events[a];
            const auto& eb = trace.events[b];
            if (ea.start != eb.start) return ea.start < eb.start;
            return ea.end() > eb.end();
        });
        bool any = false;
        TimestampNs max_end = 0;
        for (std::size_t i : g.inner) {
            const auto& e = trace.events[i];
            bool nested = any && max_end >= e.end() && max_end > e.start;
            if (!any || e.end() > max_end) max_end = e.end();
            any = true;
            if (!nested && inside(e.start)) out.push_back(i);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline TransitionCounts count_transitions(const Trace& trace)
{
    require_valid(trace);
    TransitionCounts out;
    for (const auto& [from, to] : kTransitionPairs) out.counts[{from, to}] = transition_sites(trace, from, to).size();
    return out;
}

}  // namespace xstack

#endif  // XSTACK_OVERLAP_HPP
