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
 * trace_model.hpp: the event/trace data model shared by the analysis modules.
 *
 * An Event is a half-open interval [start, start + duration) on one
 * (pid, tid) with a stack-level category. OPERATION events are user
 * annotations and are never treated as resources; the remaining categories
 * are resources (CPU-side: HIGH_LEVEL, BACKEND, SIMULATOR, ACCEL_API;
 * device-side: GPU). For GPU events the tid is the stream id.
 */
#ifndef XSTACK_TRACE_MODEL_HPP
#define XSTACK_TRACE_MODEL_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xstack {

using TimestampNs = std::uint64_t;
using DurationNs = std::uint64_t;
using Pid = std::uint32_t;
using Tid = std::uint64_t;
using CorrelationId = std::uint64_t;

// Error categories surfaced by every module. The CLI maps them to exit codes.
enum class ErrorKind {
    Format,             // bad magic / version / malformed record
    Truncated,          // missing chunk index
    Incomplete,         // missing meta.bin sentinel
    Io,                 // filesystem failure
    InvalidTrace,       // trace violates model invariants
    Argument,           // bad argument to an operation
    Config,             // malformed config / summary / profile file
    UnpairedApi,        // difference-of-average input missing a side
    IncompleteLadder,   // calibration ladder missing a leg
    UncalibratedHook,   // correction needs a profile entry that is absent
    DuplicatePid,
    ClockDomainMismatch,
};

inline std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Format: return "format error";
    case ErrorKind::Truncated: return "truncated trace";
    case ErrorKind::Incomplete: return "incomplete trace";
    case ErrorKind::Io: return "io error";
    case ErrorKind::InvalidTrace: return "invalid trace";
    case ErrorKind::Argument: return "argument error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::UnpairedApi: return "unpaired API";
    case ErrorKind::IncompleteLadder: return "incomplete calibration ladder";
    case ErrorKind::UncalibratedHook: return "uncalibrated hook";
    case ErrorKind::DuplicatePid: return "duplicate pid";
    case ErrorKind::ClockDomainMismatch: return "clock domain mismatch";
    }
    return "error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + (detail.empty() ? "" : ": " + detail)),
          kind_(kind), detail_(detail)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

enum class Category : std::uint8_t {
    Operation = 0,
    HighLevel = 1,
    Backend = 2,
    Simulator = 3,
    AccelApi = 4,
    Gpu = 5,
};

inline constexpr std::array<Category, 6> kAllCategories = {
    Category::Operation, Category::HighLevel, Category::Backend,
    Category::Simulator, Category::AccelApi,  Category::Gpu,
};

inline constexpr std::array<Category, 5> kResourceCategories = {
    Category::HighLevel, Category::Backend, Category::Simulator,
    Category::AccelApi,  Category::Gpu,
};

constexpr bool is_resource(Category c) noexcept { return c != Category::Operation; }
constexpr bool is_cpu_side(Category c) noexcept
{
    return c == Category::HighLevel || c == Category::Backend || c == Category::Simulator ||
           c == Category::AccelApi;
}

inline std::string_view to_string(Category c)
{
    switch (c) {
    case Category::Operation: return "OPERATION";
    case Category::HighLevel: return "HIGH_LEVEL";
    case Category::Backend: return "BACKEND";
    case Category::Simulator: return "SIMULATOR";
    case Category::AccelApi: return "ACCEL_API";
    case Category::Gpu: return "GPU";
    }
    return "?";
}

inline std::optional<Category> category_from_string(std::string_view s)
{
    for (Category c : kAllCategories) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

inline std::optional<Category> category_from_code(std::uint8_t code)
{
    if (code > static_cast<std::uint8_t>(Category::Gpu)) return std::nullopt;
    return static_cast<Category>(code);
}

/// Set of resource categories, stored as a bitmask. OPERATION is never a member.
class CategorySet {
public:
    constexpr CategorySet() = default;
    constexpr CategorySet(std::initializer_list<Category> cs)
    {
        for (Category c : cs) insert(c);
    }

    static constexpr CategorySet from_bits(std::uint8_t bits) noexcept
    {
        CategorySet s;
        s.bits_ = bits & kResourceMask;
        return s;
    }

    constexpr void insert(Category c)
    {
        if (!is_resource(c)) throw std::invalid_argument("OPERATION is not a resource category");
        bits_ |= bit(c);
    }
    constexpr bool contains(Category c) const noexcept { return (bits_ & bit(c)) != 0; }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr std::uint8_t bits() const noexcept { return bits_; }
    constexpr bool has_cpu() const noexcept { return (bits_ & ~bit(Category::Gpu)) != 0; }
    constexpr bool cpu_only() const noexcept { return has_cpu() && !contains(Category::Gpu); }
    int size() const noexcept { return __builtin_popcount(bits_); }

    constexpr auto operator<=>(const CategorySet&) const = default;

    /// "BACKEND+GPU"; categories in enumeration order. Empty set renders as "".
    std::string to_string() const
    {
        std::string out;
        for (Category c : kResourceCategories) {
            if (!contains(c)) continue;
            if (!out.empty()) out += '+';
            out += xstack::to_string(c);
        }
        return out;
    }

    static std::optional<CategorySet> parse(std::string_view s)
    {
        CategorySet out;
        while (!s.empty()) {
            auto plus = s.find('+');
            auto part = s.substr(0, plus);
            auto c = category_from_string(part);
            if (!c || !is_resource(*c)) return std::nullopt;
            out.insert(*c);
            if (plus == std::string_view::npos) break;
            s.remove_prefix(plus + 1);
        }
        return out;
    }

private:
    static constexpr std::uint8_t kResourceMask = 0b111110;
    static constexpr std::uint8_t bit(Category c) noexcept
    {
        return static_cast<std::uint8_t>(1u << static_cast<unsigned>(c));
    }

    std::uint8_t bits_ = 0;
};

struct Event {
    Pid pid = 0;
    Tid tid = 0;
    Category category = Category::HighLevel;
    std::string name;
    TimestampNs start = 0;
    DurationNs duration = 0;
    std::optional<CorrelationId> correlation;

    TimestampNs end() const noexcept { return start + duration; }
    bool contains(TimestampNs t) const noexcept { return start <= t && t < end(); }

    bool operator==(const Event&) const = default;
};

struct ProcessMeta {
    Pid pid = 0;
    std::string name;
    std::optional<Pid> parent;
    std::optional<TimestampNs> fork_time;
    std::optional<TimestampNs> join_time;

    bool operator==(const ProcessMeta&) const = default;
};

struct Trace {
    std::uint64_t clock_domain = 0;
    std::vector<Event> events;
    std::vector<ProcessMeta> processes;

    bool operator==(const Trace&) const = default;

    const ProcessMeta* process(Pid pid) const
    {
        for (const auto& p : processes) {
            if (p.pid == pid) return &p;
        }
        return nullptr;
    }
};

/// Canonical event order: (start, end, category), stable on input position.
inline bool canonical_less(const Event& a, const Event& b)
{
    if (a.start != b.start) return a.start < b.start;
    if (a.end() != b.end()) return a.end() < b.end();
    return a.category < b.category;
}

inline void sort_events(std::vector<Event>& events)
{
    std::stable_sort(events.begin(), events.end(), canonical_less);
}

/// Copy of the trace with events in canonical order and processes by pid.
inline Trace canonicalized(Trace t)
{
    sort_events(t.events);
    std::stable_sort(t.processes.begin(), t.processes.end(),
                     [](const ProcessMeta& a, const ProcessMeta& b) { return a.pid < b.pid; });
    return t;
}

/// Indices of `events` in canonical order.
inline std::vector<std::size_t> canonical_order(const std::vector<Event>& events)
{
    std::vector<std::size_t> idx(events.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return canonical_less(events[a], events[b]); });
    return idx;
}

/// Sorted set of pids that own at least one event or process record.
inline std::vector<Pid> pids_of(const Trace& trace)
{
    std::set<Pid> pids;
    for (const auto& e : trace.events) pids.insert(e.pid);
    for (const auto& p : trace.processes) pids.insert(p.pid);
    return {pids.begin(), pids.end()};
}

/// [begin, end) covered by positive-length events. Zero-duration events do
/// not extend the span. Returns nullopt when no event has positive length.
struct Span {
    TimestampNs begin = 0;
    TimestampNs end = 0;
    DurationNs length() const noexcept { return end - begin; }
};

template <typename Pred>
std::optional<Span> span_where(const Trace& trace, Pred&& pred)
{
    std::optional<Span> out;
    for (const auto& e : trace.events) {
        if (e.duration == 0 || !pred(e)) continue;
        if (!out) {
            out = Span{e.start, e.end()};
        } else {
            out->begin = std::min(out->begin, e.start);
            out->end = std::max(out->end, e.end());
        }
    }
    return out;
}

inline std::optional<Span> trace_span(const Trace& trace)
{
    return span_where(trace, [](const Event&) { return true; });
}

inline std::optional<Span> pid_span(const Trace& trace, Pid pid)
{
    return span_where(trace, [pid](const Event& e) { return e.pid == pid; });
}

// ---------------------------------------------------------------------------
// Validation

enum class Rule {
    DurationOverflow,
    ImproperNesting,
    DanglingCorrelation,
    DuplicateCorrelation,
    MissingProcess,
    DuplicateProcess,
    ForkAfterJoin,
    ParentCycle,
};

inline std::string_view to_string(Rule r)
{
    switch (r) {
    case Rule::DurationOverflow: return "duration overflow";
    case Rule::ImproperNesting: return "improper nesting";
    case Rule::DanglingCorrelation: return "dangling correlation";
    case Rule::DuplicateCorrelation: return "duplicate correlation";
    case Rule::MissingProcess: return "missing process";
    case Rule::DuplicateProcess: return "duplicate process";
    case Rule::ForkAfterJoin: return "fork after join";
    case Rule::ParentCycle: return "parent cycle";
    }
    return "?";
}

struct Violation {
    Rule rule;
    std::vector<std::size_t> events;  // indices into Trace::events
    std::string message;

    bool operator==(const Violation&) const = default;
};

inline std::vector<Violation> validate_trace(const Trace& trace)
{
    std::vector<Violation> out;
    const auto& evs = trace.events;

    for (std::size_t i = 0; i < evs.size(); ++i) {
        if (evs[i].duration > std::numeric_limits<TimestampNs>::max() - evs[i].start) {
            out.push_back({Rule::DurationOverflow, {i}, "start + duration overflows"});
        }
    }

    // OPERATION nesting per (pid, tid).
    std::map<std::pair<Pid, Tid>, std::vector<std::size_t>> ops;
    for (std::size_t i = 0; i < evs.size(); ++i) {
        if (evs[i].category == Category::Operation) ops[{evs[i].pid, evs[i].tid}].push_back(i);
    }
    for (auto& [key, idx] : ops) {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (evs[a].start != evs[b].start) return evs[a].start < evs[b].start;
            return evs[a].end() > evs[b].end();
        });
        std::vector<std::size_t> stack;
        for (std::size_t i : idx) {
            while (!stack.empty() && evs[stack.back()].end() <= evs[i].start) stack.pop_back();
            if (!stack.empty() && evs[i].end() > evs[stack.back()].end()) {
                std::ostringstream msg;
                msg << "operation '" << evs[i].name << "' partially overlaps '" << evs[stack.back()].name
                    << "' on pid " << key.first << " tid " << key.second;
                out.push_back({Rule::ImproperNesting, {stack.back(), i}, msg.str()});
                continue;
            }
            stack.push_back(i);
        }
    }

    // Correlation ids: unique among ACCEL_API events of a pid; GPU refs must resolve.
    std::map<std::pair<Pid, CorrelationId>, std::size_t> launches;
    for (std::size_t i = 0; i < evs.size(); ++i) {
        const auto& e = evs[i];
        if (e.category != Category::AccelApi || !e.correlation) continue;
        auto [it, inserted] = launches.emplace(std::make_pair(e.pid, *e.correlation), i);
        if (!inserted) {
            out.push_back({Rule::DuplicateCorrelation, {it->second, i},
                           "correlation " + std::to_string(*e.correlation) + " used by two ACCEL_API events"});
        }
    }
    for (std::size_t i = 0; i < evs.size(); ++i) {
        const auto& e = evs[i];
        if (e.category != Category::Gpu || !e.correlation) continue;
        if (!launches.count({e.pid, *e.correlation})) {
            out.push_back({Rule::DanglingCorrelation, {i},
                           "GPU event '" + e.name + "' references missing correlation " +
                               std::to_string(*e.correlation)});
        }
    }

    // Process metadata.
    std::map<Pid, const ProcessMeta*> procs;
    for (const auto& p : trace.processes) {
        if (!procs.emplace(p.pid, &p).second) {
            out.push_back({Rule::DuplicateProcess, {}, "pid " + std::to_string(p.pid) + " listed twice"});
        }
        if (p.fork_time && p.join_time && *p.fork_time > *p.join_time) {
            out.push_back({Rule::ForkAfterJoin, {}, "pid " + std::to_string(p.pid) + " forks after it joins"});
        }
    }
    std::set<Pid> reported_missing;
    for (std::size_t i = 0; i < evs.size(); ++i) {
        if (!procs.count(evs[i].pid) && reported_missing.insert(evs[i].pid).second) {
            out.push_back({Rule::MissingProcess, {i}, "no process record for pid " + std::to_string(evs[i].pid)});
        }
    }
    for (const auto& [pid, meta] : procs) {
        std::set<Pid> seen{pid};
        const ProcessMeta* cur = meta;
        while (cur->parent) {
            auto it = procs.find(*cur->parent);
            if (it == procs.end()) break;  // parent lives in another trace
            if (!seen.insert(it->first).second) {
                out.push_back({Rule::ParentCycle, {}, "pid " + std::to_string(pid) + " is its own ancestor"});
                break;
            }
            cur = it->second;
        }
    }
    return out;
}

inline void require_valid(const Trace& trace)
{
    auto violations = validate_trace(trace);
    if (violations.empty()) return;
    std::string detail = std::to_string(violations.size()) + " violation(s); first: " +
                         std::string(to_string(violations.front().rule)) + " (" + violations.front().message + ")";
    throw Error(ErrorKind::InvalidTrace, detail);
}

}  // namespace xstack

#endif  // XSTACK_TRACE_MODEL_HPP
