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
 * metrics.hpp: derived metrics over traces and breakdowns.
 *
 * sampled_utilization() models a utilization sampler that marks a period as
 * busy when at least one GPU event runs at any point inside it. Periods tile
 * [min start, max end) starting at the earliest event. busy_fraction() is the
 * true busy time (interval union) over the span.
 */
#ifndef XSTACK_METRICS_HPP
#define XSTACK_METRICS_HPP

#include "xstack/overlap.hpp"
#include "xstack/trace_model.hpp"

namespace xstack {

struct UtilizationSample {
    TimestampNs period_start = 0;
    DurationNs period_length = 0;
    bool utilized = false;
};

namespace detail {

inline Span require_span(const std::optional<Span>& s)
{
    if (!s || s->length() == 0) throw Error(ErrorKind::Argument, "no span");
    return *s;
}

// Merged period-index ranges [first, last] that intersect a GPU event.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> utilized_ranges(const Trace& trace, Span span,
                                                                            DurationNs period)
{
    std::uint64_t n = (span.length() + period - 1) / period;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
    for (const auto& e : trace.events) {
        if (e.category != Category::Gpu || e.duration == 0) continue;
        std::uint64_t first = (e.start - span.begin) / period;
        std::uint64_t last = std::min<std::uint64_t>((e.end() - 1 - span.begin) / period, n - 1);
        ranges.emplace_back(first, last);
    }
    std::sort(ranges.begin(), ranges.end());
    std::vector<std::pair<std::uint64_t, std::uint64_t>> merged;
    for (const auto& r : ranges) {
        if (!merged.empty() && r.first <= merged.back().second + 1) {
            merged.back().second = std::max(merged.back().second, r.second);
        } else {
            merged.push_back(r);
        }
    }
    return merged;
}

}  // namespace detail

/// Fraction of the span covered by sampling periods in which any GPU event
/// runs. The trailing partial period is weighted by its actual length.
inline double sampled_utilization(const Trace& trace, DurationNs period_ns)
{
    if (period_ns == 0) throw Error(ErrorKind::Argument, "sampling period must be positive");
    Span span = detail::require_span(trace_span(trace));
    std::uint64_t n = (span.length() + period_ns - 1) / period_ns;
    DurationNs last_len = span.length() - (n - 1) * period_ns;
    DurationNs utilized = 0;
    for (const auto& [first, last] : detail::utilized_ranges(trace, span, period_ns)) {
        utilized += (last - first + 1) * period_ns;
        if (last == n - 1) utilized -= period_ns - last_len;
    }
    return static_cast<double>(utilized) / static_cast<double>(span.length());
}

inline std::vector<UtilizationSample> utilization_samples(const Trace& trace, DurationNs period_ns)
{
    if (period_ns == 0) throw Error(ErrorKind::Argument, "sampling period must be positive");
    Span span = detail::require_span(trace_span(trace));
    std::uint64_t n = (span.length() + period_ns - 1) / period_ns;
    std::vector<UtilizationSample> out(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        out[i].period_start = span.begin + i * period_ns;
        out[i].period_length = std::min<DurationNs>(period_ns, span.end - out[i].period_start);
    }
    for (const auto& [first, last] : detail::utilized_ranges(trace, span, period_ns)) {
        for (auto i = first; i <= last; ++i) out[i].utilized = true;
    }
    return out;
}

/// Length of the union of positive-length `category` intervals, optionally
/// restricted to one pid.
inline DurationNs busy_ns(const Trace& trace, Category category, std::optional<Pid> pid = std::nullopt)
{
    std::vector<std::pair<TimestampNs, TimestampNs>> iv;
    for (const auto& e : trace.events) {
        if (e.category != category || e.duration == 0) continue;
        if (pid && e.pid != *pid) continue;
        iv.emplace_back(e.start, e.end());
    }
    std::sort(iv.begin(), iv.end());
    DurationNs total = 0;
    TimestampNs cur_begin = 0, cur_end = 0;
    bool open = false;
    for (const auto& [b, e] : iv) {
        if (open && b <= cur_end) {
            cur_end = std::max(cur_end, e);
            continue;
        }
        if (open) total += cur_end - cur_begin;
        cur_begin = b;
        cur_end = e;
        open = true;
    }
    if (open) total += cur_end - cur_begin;
    return total;
}

inline double busy_fraction(const Trace& trace, Category category, std::optional<Pid> pid = std::nullopt)
{
    Span span = detail::require_span(pid ? pid_span(trace, *pid) : trace_span(trace));
    return static_cast<double>(busy_ns(trace, category, pid)) / static_cast<double>(span.length());
}

// ---------------------------------------------------------------------------
// Report rows

struct ReportRow {
    Pid pid = 0;
    OperationPath path;
    CategorySet categories;  // empty for the untracked row
    DurationNs ns = 0;
    double percent = 0.0;    // of the pid's span

    bool untracked() const { return categories.empty(); }
};

/// Per pid: one row per cell, largest first, then an untracked row when the
/// pid has untracked time. Row ns sum to the pid span.
inline std::vector<ReportRow> summarize(const Breakdown& breakdown)
{
    std::vector<ReportRow> out;
    for (const auto& [pid, span] : breakdown.span) {
        auto pct = [span = span](DurationNs ns) {
            return span == 0 ? 0.0 : 100.0 * static_cast<double>(ns) / static_cast<double>(span);
        };
        std::vector<ReportRow> rows;
        for (const auto& [key, ns] : breakdown.cells) {
            if (key.pid == pid) rows.push_back({pid, key.path, key.categories, ns, pct(ns)});
        }
        std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) { return a.ns > b.ns; });
        out.insert(out.end(), rows.begin(), rows.end());
        auto it = breakdown.untracked.find(pid);
        if (it != breakdown.untracked.end() && it->second > 0) {
            out.push_back({pid, {}, {}, it->second, pct(it->second)});
        }
    }
    return out;
}

}  // namespace xstack

#endif  // XSTACK_METRICS_HPP
