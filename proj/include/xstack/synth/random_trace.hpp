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

// Randomized valid traces for property tests: nested operations on several
// tids, resource events with coincident boundaries, zero-length events and
// correlated GPU/API pairs.
#ifndef XSTACK_SYNTH_RANDOM_TRACE_HPP
#define XSTACK_SYNTH_RANDOM_TRACE_HPP

#include "xstack/trace_model.hpp"

#include <random>

namespace xstack::synth {

struct RandomTraceParams {
    std::size_t max_events = 1000;
    int max_depth = 3;           // operation nesting levels
    int max_categories = 4;      // distinct resource categories per trace
    DurationNs max_span = 1'000'000;
    int max_pids = 3;
    int max_tids = 3;
};

namespace detail {

class RandomTraceBuilder {
public:
    RandomTraceBuilder(std::uint64_t seed, const RandomTraceParams& p) : rng_(seed), p_(p) {}

    Trace build()
    {
        Trace t;
        t.clock_domain = uniform(1, 3);
        span_ = uniform(16, p_.max_span);
        grid_ = std::max<DurationNs>(1, span_ / uniform(4, 64));
        budget_ = uniform(1, p_.max_events);

        std::vector<Category> pool(kResourceCategories.begin(), kResourceCategories.end());
        std::shuffle(pool.begin(), pool.end(), rng_);
        pool.resize(static_cast<std::size_t>(uniform(1, static_cast<std::uint64_t>(p_.max_categories))));

        auto npids = uniform(1, static_cast<std::uint64_t>(p_.max_pids));
        for (std::uint64_t k = 0; k < npids; ++k) {
            Pid pid = static_cast<Pid>(100 + k * 7);
            t.processes.push_back({pid, "proc" + std::to_string(k), std::nullopt, std::nullopt, std::nullopt});
            auto ntids = uniform(1, static_cast<std::uint64_t>(p_.max_tids));
            std::vector<Tid> tids;
            for (std::uint64_t j = 0; j < ntids; ++j) tids.push_back(pid * 10 + j);

            std::size_t pid_budget = std::max<std::size_t>(1, budget_ / npids);
            ops_left_ = pid_budget / 4;
            for (Tid tid : tids) {
                if (uniform(0, 3) == 0) continue;
                nest_ops(t, pid, tid, 0, span_, 1, ops_left_ / tids.size() + 1);
            }
            std::vector<std::size_t> apis;
            CorrelationId next_corr = 1;
            while (t.events.size() < (k + 1) * pid_budget) {
                Category c = pool[static_cast<std::size_t>(uniform(0, pool.size() - 1))];
                Event e;
                e.pid = pid;
                e.category = c;
                e.tid = c == Category::Gpu ? 7 + uniform(0, 1) : tids[static_cast<std::size_t>(uniform(0, tids.size() - 1))];
                e.name = kNames[static_cast<std::size_t>(uniform(0, kNames.size() - 1))];
                e.start = point();
                e.duration = duration(e.start);
                if (c == Category::AccelApi) {
                    e.correlation = next_corr++;
                    apis.push_back(t.events.size());
                }
                if (c == Category::Gpu && !apis.empty() && uniform(0, 2) != 0) {
                    e.correlation = t.events[apis[static_cast<std::size_t>(uniform(0, apis.size() - 1))]].correlation;
                }
                t.events.push_back(std::move(e));
            }
        }
        std::shuffle(t.events.begin(), t.events.end(), rng_);
        return t;
    }

private:
    static inline const std::array<std::string, 4> kNames = {"a", "b", "c", "a"};

    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi)
    {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_);
    }

    // Start points snap to a coarse grid often enough to create ties.
    TimestampNs point(TimestampNs lo = 0, TimestampNs hi = 0)
    {
        if (hi == 0) hi = span_;
        TimestampNs t = uniform(lo, hi);
        if (uniform(0, 2) == 0) t = std::clamp<TimestampNs>(t / grid_ * grid_, lo, hi);
        return t;
    }

    DurationNs duration(TimestampNs start)
    {
        DurationNs room = span_ - start;
        switch (uniform(0, 9)) {
        case 0: return 0;
        case 1: return room;
        case 2:
        case 3: return uniform(0, room);
        default: return uniform(0, std::min<DurationNs>(room, span_ / 10 + 1));
        }
    }

    // Disjoint (possibly touching) child intervals inside [lo, hi).
    void nest_ops(Trace& t, Pid pid, Tid tid, TimestampNs lo, TimestampNs hi, int depth, std::size_t budget)
    {
        if (depth > p_.max_depth || budget == 0 || hi <= lo) return;
        auto n = uniform(0, std::min<std::size_t>(budget, 4) * 2);
        std::vector<TimestampNs> cuts;
        for (std::uint64_t i = 0; i < n; ++i) cuts.push_back(point(lo, hi));
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size() && ops_left_ > 0; i += 2) {
            --ops_left_;
            Event op{pid, tid, Category::Operation,
                     kNames[static_cast<std::size_t>(uniform(0, kNames.size() - 1))], cuts[i], cuts[i + 1] - cuts[i],
                     std::nullopt};
            t.events.push_back(op);
            int used = 1;
            if (depth < p_.max_depth && ops_left_ > 0 && uniform(0, 7) == 0) {
                --ops_left_;
                t.events.push_back(op);  // identical twin, one level deeper
                used = 2;
            }
            nest_ops(t, pid, tid, cuts[i], cuts[i + 1], depth + used, budget / 2);
        }
    }

    std::mt19937_64 rng_;
    RandomTraceParams p_;
    DurationNs span_ = 0;
    DurationNs grid_ = 1;
    std::size_t budget_ = 0;
    std::size_t ops_left_ = 0;
};

}  // namespace detail

inline Trace random_trace(std::uint64_t seed, const RandomTraceParams& params = {})
{
    return detail::RandomTraceBuilder(seed, params).build();
}

}  // namespace xstack::synth

#endif  // XSTACK_SYNTH_RANDOM_TRACE_HPP
