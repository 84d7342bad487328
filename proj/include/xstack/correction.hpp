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
 * correction.hpp: removes calibrated book-keeping overhead from a trace.
 *
 * Every hook site owns a slice of its calibrated mean duration:
 *  - annotation: half just after the operation's start, half just before its end;
 *  - transition: at the start of the inner (BACKEND / SIMULATOR) event;
 *  - API interception + API internal: at the start of the ACCEL_API event.
 * A slice never extends past its owning event; any excess is shortfall.
 *
 * The slices of a pid are cut out of that pid's timeline. A timestamp t maps
 * to t minus the cut time before it; timestamps inside a cut collapse onto
 * the cut's start. CPU events map both edges (and so shrink by the cut time
 * they contain). GPU events map their start and keep their duration.
 *
 * Per-site slice lengths use cumulative rounding: the k-th site of a hook
 * kind gets floor((k+1)*mean) - floor(k*mean) ns, so n sites remove
 * floor(n*mean) ns in total.
 */
#ifndef XSTACK_CORRECTION_HPP
#define XSTACK_CORRECTION_HPP

#include "xstack/calibration.hpp"
#include "xstack/overlap.hpp"
#include "xstack/trace_model.hpp"

namespace xstack {

/// Sum over pids of each pid's span.
inline DurationNs total_time(const Trace& trace)
{
    DurationNs sum = 0;
    for (Pid pid : pids_of(trace)) {
        if (auto s = pid_span(trace, pid)) sum += s->length();
    }
    return sum;
}

struct HookSiteCounts {
    std::uint64_t annotation = 0;  // one per OPERATION event (start/end pair)
    std::uint64_t transition = 0;  // HIGH_LEVEL -> BACKEND / SIMULATOR transitions
    std::uint64_t api = 0;         // one per ACCEL_API event

    bool operator==(const HookSiteCounts&) const = default;
};

/// Book-keeping sites implied by the trace structure.
inline HookSiteCounts hook_site_counts(const Trace& trace)
{
    HookSiteCounts out;
    for (const auto& e : trace.events) {
        if (e.category == Category::Operation) ++out.annotation;
        if (e.category == Category::AccelApi) ++out.api;
    }
    for (auto to : {Category::Backend, Category::Simulator}) {
        out.transition += transition_sites(trace, Category::HighLevel, to).size();
    }
    return out;
}

struct PidCorrection {
    std::map<HookKind, DurationNs> removed;
    DurationNs shortfall = 0;
    DurationNs original_total = 0;
    DurationNs corrected_total = 0;  // original_total - removed
    DurationNs corrected_span = 0;   // span of the corrected timeline

    DurationNs removed_total() const
    {
        DurationNs s = 0;
        for (const auto& [k, v] : removed) s += v;
        return s;
    }
};

struct CorrectionReport {
    std::map<Pid, PidCorrection> pids;
    std::optional<DurationNs> uninstrumented_total;
    std::optional<double> bias;

    DurationNs original_total() const
    {
        DurationNs s = 0;
        for (const auto& [pid, p] : pids) s += p.original_total;
        return s;
    }
    DurationNs corrected_total() const
    {
        DurationNs s = 0;
        for (const auto& [pid, p] : pids) s += p.corrected_total;
        return s;
    }
    DurationNs removed(HookKind kind) const
    {
        DurationNs s = 0;
        for (const auto& [pid, p] : pids) {
            if (auto it = p.removed.find(kind); it != p.removed.end()) s += it->second;
        }
        return s;
    }
};

/// (corrected - uninstrumented) / uninstrumented.
inline double correction_bias(DurationNs corrected_total, DurationNs uninstrumented_total)
{
    if (uninstrumented_total == 0) throw Error(ErrorKind::Argument, "uninstrumented total must be positive");
    return (static_cast<double>(corrected_total) - static_cast<double>(uninstrumented_total)) /
           static_cast<double>(uninstrumented_total);
}

namespace detail {

class SliceRounder {
public:
    explicit SliceRounder(Rational mean) : mean_(mean) {}

    DurationNs next()
    {
        using Wide = __int128;
        Wide num = mean_.numerator();
        Wide den = mean_.denominator();
        Wide hi = (Wide(k_) + 1) * num / den;
        Wide lo = Wide(k_) * num / den;
        ++k_;
        return static_cast<DurationNs>(hi - lo);
    }

private:
    Rational mean_;
    std::uint64_t k_ = 0;
};

struct Slice {
    TimestampNs at;
    DurationNs length;
    HookKind kind;
};

// Monotone time map that removes a sorted set of disjoint cuts.
class CutMap {
public:
    explicit CutMap(std::vector<std::pair<TimestampNs, TimestampNs>> cuts) : cuts_(std::move(cuts))
    {
        DurationNs acc = 0;
        for (const auto& [a, b] : cuts_) {
            before_.push_back(acc);
            acc += b - a;
        }
    }

    TimestampNs operator()(TimestampNs t) const
    {
        auto it = std::lower_bound(cuts_.begin(), cuts_.end(), t,
                                   [](const auto& cut, TimestampNs v) { return cut.first < v; });
        if (it == cuts_.begin()) return t;
        auto k = static_cast<std::size_t>(std::distance(cuts_.begin(), it)) - 1;
        DurationNs removed = before_[k] + (std::min(t, cuts_[k].second) - cuts_[k].first);
        return t - removed;
    }

private:
    std::vector<std::pair<TimestampNs, TimestampNs>> cuts_;
    std::vector<DurationNs> before_;
};

inline void require_coverage(const Trace& trace, const CalibrationProfile& profile,
                             const std::vector<std::size_t>& transition_inner)
{
    std::vector<std::string> missing;
    bool has_ops = false, has_api = false;
    std::set<std::string> apis;
    for (const auto& e : trace.events) {
        if (e.category == Category::Operation) has_ops = true;
        if (e.category == Category::AccelApi) {
            has_api = true;
            apis.insert(e.name);
        }
    }
    if (has_ops && !profile.annotation) missing.push_back("annotation");
    if (!transition_inner.empty() && !profile.transition) missing.push_back("transition");
    if (has_api && !profile.api_interception) missing.push_back("api_interception");
    for (const auto& api : apis) {
        if (!profile.api_internal.count(api)) missing.push_back("api_internal(" + api + ")");
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw Error(ErrorKind::UncalibratedHook, list);
    }
}

}  // namespace detail

struct CorrectedTrace {
    Trace trace;
    CorrectionReport report;
};

/// Removes calibrated overhead at every hook site. The optional
/// uninstrumented total fills in the report's bias.
inline CorrectedTrace correct_trace(const Trace& trace, const CalibrationProfile& profile,
                                    std::optional<DurationNs> uninstrumented_total = std::nullopt)
{
    require_valid(trace);

    std::vector<std::size_t> inner;
    for (auto to : {Category::Backend, Category::Simulator}) {
        auto s = transition_sites(trace, Category::HighLevel, to);
        inner.insert(inner.end(), s.begin(), s.end());
    }
    detail::require_coverage(trace, profile, inner);
    std::set<std::size_t> transition_inner(inner.begin(), inner.end());

    CorrectedTrace out;
    out.trace.clock_domain = trace.clock_domain;
    out.trace.processes = trace.processes;
    out.trace.events = trace.events;

    for (const auto& [pid, events] : detail::events_by_pid(trace)) {
        auto& rep = out.report.pids[pid];
        auto span = pid_span(trace, pid);
        rep.original_total = span ? span->length() : 0;

        std::optional<detail::SliceRounder> ann, trans, intercept;
        if (profile.annotation) ann.emplace(*profile.annotation);
        if (profile.transition) trans.emplace(*profile.transition);
        if (profile.api_interception) intercept.emplace(*profile.api_interception);
        std::map<std::string, detail::SliceRounder> internal;

        std::vector<detail::Slice> slices;
        for (std::size_t i : events) {
            const Event& e = trace.events[i];
            if (e.category == Category::Operation) {
                DurationNs d = ann->next();
                DurationNs head = std::min(d / 2, e.duration);
                DurationNs tail = std::min(d - d / 2, e.duration - head);
                rep.shortfall += d - head - tail;
                slices.push_back({e.start, head, HookKind::Annotation});
                slices.push_back({e.end() - tail, tail, HookKind::Annotation});
            } else if (transition_inner.count(i)) {
                DurationNs d = trans->next();
                DurationNs take = std::min(d, e.duration);
                rep.shortfall += d - take;
                slices.push_back({e.start, take, HookKind::Transition});
            } else if (e.category == Category::AccelApi) {
                auto it = internal.find(e.name);
                if (it == internal.end()) it = internal.emplace(e.name, profile.api_internal.at(e.name)).first;
                DurationNs di = intercept->next();
                DurationNs dn = it->second.next();
                DurationNs take_i = std::min(di, e.duration);
                DurationNs take_n = std::min(dn, e.duration - take_i);
                rep.shortfall += (di - take_i) + (dn - take_n);
                slices.push_back({e.start, take_i, HookKind::ApiInterception});
                slices.push_back({e.start + take_i, take_n, HookKind::ApiInternal});
            }
        }

        // Union of slices; overlapping parts count once (toward the earlier slice).
        std::stable_sort(slices.begin(), slices.end(),
                         [](const auto& a, const auto& b) { return a.at < b.at; });
        std::vector<std::pair<TimestampNs, TimestampNs>> cuts;
        TimestampNs covered = 0;
        for (const auto& s : slices) {
            rep.removed[s.kind] += 0;
            if (s.length == 0) continue;
            TimestampNs from = std::max(s.at, covered);
            TimestampNs to = s.at + s.length;
            if (from >= to) {
                rep.shortfall += s.length;
                continue;
            }
            rep.shortfall += from - s.at;
            rep.removed[s.kind] += to - from;
            if (!cuts.empty() && cuts.back().second == from) {
                cuts.back().second = to;
            } else {
                cuts.emplace_back(from, to);
            }
            covered = to;
        }

        detail::CutMap map(std::move(cuts));
        for (std::size_t i : events) {
            Event& e = out.trace.events[i];
            TimestampNs s = map(e.start);
            if (e.category != Category::Gpu) e.duration = map(e.end()) - s;
            e.start = s;
        }
        for (auto& p : out.trace.processes) {
            if (p.pid != pid) continue;
            if (p.fork_time) p.fork_time = map(*p.fork_time);
            if (p.join_time) p.join_time = map(*p.join_time);
        }
        rep.corrected_total = rep.original_total - rep.removed_total();
    }

    for (auto& [pid, rep] : out.report.pids) {
        auto s = pid_span(out.trace, pid);
        rep.corrected_span = s ? s->length() : 0;
    }
    if (uninstrumented_total) {
        out.report.uninstrumented_total = uninstrumented_total;
        out.report.bias = correction_bias(out.report.corrected_total(), *uninstrumented_total);
    }
    return out;
}

}  // namespace xstack

#endif  // XSTACK_CORRECTION_HPP
