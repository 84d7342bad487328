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
 * workload.hpp: ground-truth synthetic training workloads.
 *
 * A workload is first drawn as a fixed program per process (a sequence of
 * begin/end/work/hook/launch steps shaped like an inference / simulation /
 * backprop training loop). The program is then executed several times
 * against a virtual clock: once with every hook disabled (uninstrumented),
 * once with every hook enabled (instrumented) and once per calibration leg.
 * Work steps advance the clock by the same amount in every run; hook steps
 * advance it by a freshly drawn overhead only when their class is enabled.
 * GPU events start when their launching API call returns and keep a fixed
 * duration, so device time never depends on CPU book-keeping.
 *
 * Each process ends with a CPU wait long enough (in the uninstrumented run)
 * to cover its last GPU event, so the process span always ends on CPU time.
 */
#ifndef XSTACK_SYNTH_WORKLOAD_HPP
#define XSTACK_SYNTH_WORKLOAD_HPP

#include "xstack/calibration.hpp"
#include "xstack/correction.hpp"
#include "xstack/kv_file.hpp"
#include "xstack/overlap.hpp"
#include "xstack/synth/brute_force.hpp"
#include "xstack/trace_model.hpp"

#include <cmath>
#include <random>

namespace xstack::synth {

inline constexpr std::string_view kLaunchApi = "cudaLaunchKernel";
inline constexpr std::string_view kMemcpyApi = "cudaMemcpyAsync";
inline constexpr Tid kGpuStream = 7;

/// Non-negative duration distribution: const, uniform or lognormal (by mean and cv).
class Distribution {
public:
    enum class Kind { Const, Uniform, Lognormal };

    static Distribution constant(double v) { return {Kind::Const, v, 0}; }
    static Distribution uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
    static Distribution lognormal(double mean, double cv) { return {Kind::Lognormal, mean, cv}; }

    Distribution() = default;

    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::Const || (kind_ == Kind::Lognormal && b_ == 0); }

    double mean() const
    {
        switch (kind_) {
        case Kind::Const: return a_;
        case Kind::Uniform: return (a_ + b_) / 2;
        case Kind::Lognormal: return a_;
        }
        return 0;
    }

    bool valid() const
    {
        if (!std::isfinite(a_) || !std::isfinite(b_) || a_ < 0 || b_ < 0) return false;
        return kind_ != Kind::Uniform || a_ <= b_;
    }

    template <typename Rng>
    DurationNs sample(Rng& rng) const
    {
        double x = 0;
        switch (kind_) {
        case Kind::Const: x = a_; break;
        case Kind::Uniform: x = a_ == b_ ? a_ : std::uniform_real_distribution<double>(a_, b_)(rng); break;
        case Kind::Lognormal:
            if (a_ == 0 || b_ == 0) {
                x = a_;
            } else {
                double s2 = std::log1p(b_ * b_);
                x = std::lognormal_distribution<double>(std::log(a_) - s2 / 2, std::sqrt(s2))(rng);
            }
            break;
        }
        return static_cast<DurationNs>(std::llround(std::max(0.0, x)));
    }

    std::string to_string() const
    {
        std::ostringstream o;
        switch (kind_) {
        case Kind::Const: o << "const " << a_; break;
        case Kind::Uniform: o << "uniform " << a_ << ' ' << b_; break;
        case Kind::Lognormal: o << "lognormal " << a_ << ' ' << b_; break;
        }
        return o.str();
    }

    /// "const 5000", "uniform 100 200", "lognormal 5000 0.3" or a bare number.
    static std::optional<Distribution> parse(std::string_view text)
    {
        auto tok = kv::split_ws(text);
        auto num = [](const std::string& s) -> std::optional<double> {
            try {
                std::size_t used = 0;
                double v = std::stod(s, &used);
                if (used != s.size()) return std::nullopt;
                return v;
            } catch (const std::exception&) {
                return std::nullopt;
            }
        };
        std::optional<Distribution> d;
        if (tok.size() == 1) {
            if (auto v = num(tok[0])) d = constant(*v);
        } else if (tok.size() == 2 && tok[0] == "const") {
            if (auto v = num(tok[1])) d = constant(*v);
        } else if (tok.size() == 3 && (tok[0] == "uniform" || tok[0] == "lognormal")) {
            auto a = num(tok[1]), b = num(tok[2]);
            if (a && b) d = tok[0] == "uniform" ? uniform(*a, *b) : lognormal(*a, *b);
        }
        if (d && !d->valid()) return std::nullopt;
        return d;
    }

    bool operator==(const Distribution&) const = default;

private:
    Distribution(Kind k, double a, double b) : kind_(k), a_(a), b_(b) {}

    Kind kind_ = Kind::Const;
    double a_ = 0;
    double b_ = 0;
};

struct WorkloadSpec {
    std::uint64_t seed = 1;
    std::uint64_t clock_domain = 1;
    Pid first_pid = 1000;
    std::uint32_t processes = 1;        // > 1: first pid is the root, the rest are its workers
    std::string root_name = "main";
    std::string worker_name = "worker";
    DurationNs fork_stagger_ns = 0;     // worker k starts k * stagger after the root

    std::uint32_t iterations = 10;
    std::string outer_operation = "training_loop";  // empty: no enclosing operation
    std::uint32_t inference_backend_calls = 1;
    std::uint32_t simulation_calls = 1;
    std::uint32_t backprop_period = 1;  // every n-th iteration; 0 disables backprop
    std::uint32_t backprop_backend_calls = 1;
    std::uint32_t kernels_per_call = 1;
    std::uint32_t backprop_kernels_per_call = 2;
    std::uint32_t memcpys_per_call = 1;
    DurationNs quantum_ns = 1;          // work durations are multiples of this

    Distribution high_level = Distribution::uniform(20'000, 40'000);
    Distribution backend = Distribution::uniform(10'000, 30'000);
    Distribution simulator = Distribution::uniform(50'000, 150'000);
    Distribution accel_api = Distribution::uniform(3'000, 8'000);
    Distribution kernel = Distribution::uniform(5'000, 40'000);
    Distribution memcpy = Distribution::uniform(1'000, 4'000);

    Distribution overhead_annotation = Distribution::constant(0);
    Distribution overhead_transition = Distribution::constant(0);
    Distribution overhead_interception = Distribution::constant(0);
    std::map<std::string, Distribution> overhead_internal = {
        {std::string(kLaunchApi), Distribution::constant(0)},
        {std::string(kMemcpyApi), Distribution::constant(0)},
    };

    bool operator==(const WorkloadSpec&) const = default;
};

struct GroundTruth {
    Breakdown uninstrumented;
    std::map<HookKind, std::uint64_t> site_counts;
    std::map<HookKind, DurationNs> injected_ns;
    TransitionCounts transitions;
    DurationNs gpu_busy_ns = 0;
    DurationNs uninstrumented_total = 0;  // sum of process spans
    DurationNs instrumented_total = 0;
};

struct Workload {
    Trace uninstrumented;
    Trace instrumented;
    GroundTruth truth;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct Step {
    enum class Op : std::uint8_t { Begin, End, Work, AnnHead, AnnTail, Transition, Intercept, Internal, Launch };
    Op op;
    Category category = Category::HighLevel;
    std::string name;
    DurationNs ns = 0;
    CorrelationId correlation = 0;
};

struct Program {
    Pid pid = 0;
    TimestampNs origin = 0;
    std::vector<Step> steps;
    std::uint64_t ops = 0, transitions = 0, api_calls = 0;
    std::uint64_t hl_to_backend = 0, hl_to_sim = 0;
};

class ProgramBuilder {
public:
    ProgramBuilder(const WorkloadSpec& spec, std::mt19937_64& rng, Program& prog)
        : spec_(spec), rng_(rng), prog_(prog)
    {
    }

    void build()
    {
        if (spec_.iterations == 0) return;
        if (!spec_.outer_operation.empty()) {
            op(spec_.outer_operation, [&] { iterations(); });
        } else {
            iterations();
        }
    }

private:
    DurationNs draw(const Distribution& d)
    {
        DurationNs q = std::max<DurationNs>(1, spec_.quantum_ns);
        DurationNs x = d.sample(rng_);
        return (x + q / 2) / q * q;
    }

    void push(Step::Op op, Category c = Category::HighLevel, std::string name = {}, DurationNs ns = 0,
              CorrelationId corr = 0)
    {
        prog_.steps.push_back({op, c, std::move(name), ns, corr});
    }

    template <typename Body>
    void op(const std::string& name, Body&& body)
    {
        ++prog_.ops;
        push(Step::Op::Begin, Category::Operation, name);
        push(Step::Op::AnnHead);
        body();
        push(Step::Op::AnnTail);
        push(Step::Op::End);
    }

    template <typename Body>
    void high_level(Body&& body)
    {
        push(Step::Op::Begin, Category::HighLevel, "python");
        body();
        push(Step::Op::End);
    }

    void work(const Distribution& d) { push(Step::Op::Work, Category::HighLevel, {}, draw(d)); }

    void api(std::string_view name, const Distribution& device, const std::string& device_name)
    {
        ++prog_.api_calls;
        CorrelationId corr = ++next_corr_;
        push(Step::Op::Begin, Category::AccelApi, std::string(name), 0, corr);
        push(Step::Op::Intercept);
        push(Step::Op::Internal, Category::AccelApi, std::string(name));
        push(Step::Op::Work, Category::AccelApi, {}, draw(spec_.accel_api));
        push(Step::Op::End);
        push(Step::Op::Launch, Category::Gpu, device_name, draw(device), corr);
    }

    void backend_call(std::uint32_t kernels)
    {
        ++prog_.transitions;
        ++prog_.hl_to_backend;
        push(Step::Op::Begin, Category::Backend, "backend");
        push(Step::Op::Transition);
        DurationNs total = draw(spec_.backend);
        DurationNs q = std::max<DurationNs>(1, spec_.quantum_ns);
        DurationNs first = total / 2 / q * q;
        push(Step::Op::Work, Category::Backend, {}, first);
        for (std::uint32_t m = 0; m < spec_.memcpys_per_call; ++m) api(kMemcpyApi, spec_.memcpy, "memcpy_htod");
        for (std::uint32_t k = 0; k < kernels; ++k) api(kLaunchApi, spec_.kernel, "kernel");
        push(Step::Op::Work, Category::Backend, {}, total - first);
        push(Step::Op::End);
    }

    void simulator_call()
    {
        ++prog_.transitions;
        ++prog_.hl_to_sim;
        push(Step::Op::Begin, Category::Simulator, "simulator");
        push(Step::Op::Transition);
        work(spec_.simulator);
        push(Step::Op::End);
    }

    void iterations()
    {
        for (std::uint32_t it = 0; it < spec_.iterations; ++it) {
            op("inference", [&] {
                high_level([&] {
                    work(spec_.high_level);
                    for (std::uint32_t c = 0; c < spec_.inference_backend_calls; ++c) {
                        backend_call(spec_.kernels_per_call);
                        work(spec_.high_level);
                    }
                });
            });
            op("simulation", [&] {
                high_level([&] {
                    work(spec_.high_level);
                    for (std::uint32_t c = 0; c < spec_.simulation_calls; ++c) {
                        simulator_call();
                        work(spec_.high_level);
                    }
                });
            });
            if (spec_.backprop_period != 0 && (it + 1) % spec_.backprop_period == 0) {
                op("backprop", [&] {
                    high_level([&] {
                        work(spec_.high_level);
                        for (std::uint32_t c = 0; c < spec_.backprop_backend_calls; ++c) {
                            backend_call(spec_.backprop_kernels_per_call);
                            work(spec_.high_level);
                        }
                    });
                });
            }
        }
    }

    const WorkloadSpec& spec_;
    std::mt19937_64& rng_;
    Program& prog_;
    CorrelationId next_corr_ = 0;
};

struct HookSwitches {
    bool annotation = false;
    bool transition = false;
    bool interception = false;
    bool internal = false;

    static HookSwitches all() { return {true, true, true, true}; }
    static HookSwitches for_leg(LadderLeg leg)
    {
        auto level = static_cast<int>(leg);
        return {level >= 1, level >= 2, level >= 3, level >= 4};
    }
};

struct RunResult {
    std::vector<Event> events;
    TimestampNs cpu_end = 0;
    TimestampNs gpu_end = 0;
    std::map<HookKind, DurationNs> injected;
};

inline RunResult execute(const Program& prog, const WorkloadSpec& spec, HookSwitches hooks, std::uint64_t overhead_seed)
{
    std::mt19937_64 rng(overhead_seed);
    RunResult out;
    TimestampNs clock = prog.origin;
    std::vector<std::size_t> open;
    std::vector<DurationNs> pending_tail;
    auto overhead = [&](bool enabled, const Distribution& d, HookKind kind) -> DurationNs {
        if (!enabled) return 0;
        DurationNs x = d.sample(rng);
        out.injected[kind] += x;
        return x;
    };

    for (const auto& s : prog.steps) {
        switch (s.op) {
        case Step::Op::Begin: {
            Event e{prog.pid, prog.pid, s.category, s.name, clock, 0, std::nullopt};
            if (s.correlation) e.correlation = s.correlation;
            open.push_back(out.events.size());
            out.events.push_back(std::move(e));
            break;
        }
        case Step::Op::End: {
            auto& e = out.events[open.back()];
            e.duration = clock - e.start;
            open.pop_back();
            break;
        }
        case Step::Op::Work: clock += s.ns; break;
        case Step::Op::AnnHead: {
            DurationNs d = overhead(hooks.annotation, spec.overhead_annotation, HookKind::Annotation);
            clock += d / 2;
            pending_tail.push_back(d - d / 2);
            break;
        }
        case Step::Op::AnnTail:
            clock += pending_tail.back();
            pending_tail.pop_back();
            break;
        case Step::Op::Transition:
            clock += overhead(hooks.transition, spec.overhead_transition, HookKind::Transition);
            break;
        case Step::Op::Intercept:
            clock += overhead(hooks.interception, spec.overhead_interception, HookKind::ApiInterception);
            break;
        case Step::Op::Internal:
            clock += overhead(hooks.internal, spec.overhead_internal.at(s.name), HookKind::ApiInternal);
            break;
        case Step::Op::Launch:
            out.events.push_back({prog.pid, kGpuStream, Category::Gpu, s.name, clock, s.ns, s.correlation});
            out.gpu_end = std::max(out.gpu_end, clock + s.ns);
            break;
        }
    }
    out.cpu_end = clock;
    return out;
}

inline void validate_spec(const WorkloadSpec& spec)
{
    auto bad = [](const std::string& what) { throw Error(ErrorKind::Config, "invalid workload spec: " + what); };
    if (spec.processes == 0) bad("processes must be at least 1");
    if (spec.quantum_ns == 0) bad("quantum_ns must be positive");
    if (spec.processes > 1 && static_cast<std::uint64_t>(spec.first_pid) + spec.processes > 0xffffffffULL) {
        bad("pid range overflows");
    }
    for (const auto* d : {&spec.high_level, &spec.backend, &spec.simulator, &spec.accel_api, &spec.kernel, &spec.memcpy,
                          &spec.overhead_annotation, &spec.overhead_transition, &spec.overhead_interception}) {
        if (!d->valid()) bad("distribution " + d->to_string());
    }
    for (auto api : {kLaunchApi, kMemcpyApi}) {
        auto it = spec.overhead_internal.find(std::string(api));
        if (it == spec.overhead_internal.end()) bad("missing overhead.api_internal." + std::string(api));
        if (!it->second.valid()) bad("distribution " + it->second.to_string());
    }
}

struct Layout {
    std::vector<Program> programs;
    std::vector<ProcessMeta> processes;
};

// Draws every process program, then appends the closing CPU wait sized from
// the uninstrumented run.
inline Layout build_layout(const WorkloadSpec& spec)
{
    validate_spec(spec);
    std::mt19937_64 rng(mix_seed(spec.seed, 0));
    Layout out;
    DurationNs q = spec.quantum_ns;
    for (std::uint32_t k = 0; k < spec.processes; ++k) {
        Program prog;
        prog.pid = spec.first_pid + k;
        prog.origin = (spec.fork_stagger_ns * k + q / 2) / q * q;
        ProgramBuilder(spec, rng, prog).build();
        auto dry = execute(prog, spec, {}, 0);
        if (dry.gpu_end > dry.cpu_end) {
            prog.steps.push_back({Step::Op::Begin, Category::HighLevel, "sync_wait", 0, 0});
            prog.steps.push_back({Step::Op::Work, Category::HighLevel, {}, dry.gpu_end - dry.cpu_end, 0});
            prog.steps.push_back({Step::Op::End, Category::HighLevel, {}, 0, 0});
        }
        ProcessMeta meta;
        meta.pid = prog.pid;
        if (spec.processes == 1) {
            meta.name = spec.root_name;
        } else if (k == 0) {
            meta.name = spec.root_name;
        } else {
            meta.name = spec.worker_name + "_" + std::to_string(k - 1);
            meta.parent = spec.first_pid;
            meta.fork_time = prog.origin;
        }
        out.programs.push_back(std::move(prog));
        out.processes.push_back(std::move(meta));
    }
    return out;
}

inline Trace run_layout(const Layout& layout, const WorkloadSpec& spec, HookSwitches hooks, std::uint64_t salt,
                        std::map<HookKind, DurationNs>* injected = nullptr)
{
    Trace t;
    t.clock_domain = spec.clock_domain;
    t.processes = layout.processes;
    for (std::size_t k = 0; k < layout.programs.size(); ++k) {
        auto r = execute(layout.programs[k], spec, hooks, mix_seed(spec.seed, salt * 4096 + k + 1));
        if (t.processes[k].parent && !r.events.empty()) t.processes[k].join_time = std::max(r.cpu_end, r.gpu_end);
        t.events.insert(t.events.end(), std::make_move_iterator(r.events.begin()),
                        std::make_move_iterator(r.events.end()));
        if (injected) {
            for (const auto& [kind, ns] : r.injected) (*injected)[kind] += ns;
        }
    }
    sort_events(t.events);
    return t;
}

inline constexpr std::uint64_t kInstrumentedSalt = 1;
inline constexpr std::uint64_t kLadderSalt = 16;

// Exact oracle resolution: gcd of every boundary offset from its pid's span start.
inline DurationNs grid_resolution(const Trace& t)
{
    std::map<Pid, TimestampNs> begin;
    for (Pid pid : pids_of(t)) {
        if (auto s = pid_span(t, pid)) begin[pid] = s->begin;
    }
    DurationNs g = 0;
    for (const auto& e : t.events) {
        if (e.duration == 0) continue;
        g = std::gcd(g, e.start - begin.at(e.pid));
        g = std::gcd(g, e.end() - begin.at(e.pid));
    }
    return g == 0 ? 1 : g;
}

}  // namespace detail

/// Paired uninstrumented/instrumented traces and their ground truth.
inline Workload generate_workload(const WorkloadSpec& spec)
{
    auto layout = detail::build_layout(spec);
    Workload w;
    w.uninstrumented = detail::run_layout(layout, spec, {}, 0);
    w.instrumented =
        detail::run_layout(layout, spec, detail::HookSwitches::all(), detail::kInstrumentedSalt, &w.truth.injected_ns);

    auto& truth = w.truth;
    for (auto k : {HookKind::Annotation, HookKind::Transition, HookKind::ApiInterception, HookKind::ApiInternal}) {
        truth.injected_ns[k] += 0;
    }
    std::uint64_t ops = 0, trans = 0, apis = 0, hl_backend = 0, hl_sim = 0;
    for (const auto& p : layout.programs) {
        ops += p.ops;
        trans += p.transitions;
        apis += p.api_calls;
        hl_backend += p.hl_to_backend;
        hl_sim += p.hl_to_sim;
    }
    truth.site_counts = {{HookKind::Annotation, ops},
                         {HookKind::Transition, trans},
                         {HookKind::ApiInterception, apis},
                         {HookKind::ApiInternal, apis}};
    truth.transitions.counts = {{{Category::HighLevel, Category::Backend}, hl_backend},
                                {{Category::HighLevel, Category::Simulator}, hl_sim},
                                {{Category::Backend, Category::AccelApi}, apis},
                                {{Category::Simulator, Category::AccelApi}, 0}};
    truth.uninstrumented = brute_force_overlap(w.uninstrumented, detail::grid_resolution(w.uninstrumented));
    for (const auto& [key, ns] : truth.uninstrumented.cells) {
        if (key.categories.contains(Category::Gpu)) truth.gpu_busy_ns += ns;
    }
    truth.uninstrumented_total = total_time(w.uninstrumented);
    truth.instrumented_total = total_time(w.instrumented);
    return w;
}

inline RunSummary summarize_run(const Trace& trace, LadderLeg leg, std::string run_id)
{
    RunSummary r;
    r.run_id = std::move(run_id);
    r.leg = leg;
    r.total_ns = total_time(trace);
    auto sites = hook_site_counts(trace);
    r.annotation_sites = sites.annotation;
    r.transition_sites = sites.transition;
    r.api_sites = sites.api;
    for (const auto& e : trace.events) {
        if (e.category == Category::AccelApi) r.api_durations[e.name].push_back(e.duration);
    }
    return r;
}

/// One run summary per ladder leg (times `repetitions`), each with
/// independent overhead draws.
inline std::vector<RunSummary> calibration_ladder(const WorkloadSpec& spec, int repetitions = 1)
{
    if (repetitions < 1) throw Error(ErrorKind::Argument, "repetitions must be at least 1");
    auto layout = detail::build_layout(spec);
    std::vector<RunSummary> out;
    for (int rep = 0; rep < repetitions; ++rep) {
        for (auto leg : kLadder) {
            auto salt = detail::kLadderSalt + static_cast<std::uint64_t>(rep) * 8 + static_cast<std::uint64_t>(leg);
            auto trace = detail::run_layout(layout, spec, detail::HookSwitches::for_leg(leg), salt);
            out.push_back(summarize_run(trace, leg,
                                        "seed" + std::to_string(spec.seed) + "-" + std::string(to_string(leg)) +
                                            "-r" + std::to_string(rep)));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config file

inline constexpr std::string_view kWorkloadFormat = "xstack-workload";

inline WorkloadSpec parse_workload_spec(std::istream& in, const std::string& what = "workload spec")
{
    auto f = kv::parse(in, what);
    if (!f.format.empty() && (f.format != kWorkloadFormat || f.version != 1)) {
        throw Error(ErrorKind::Config, what + ": expected header '" + std::string(kWorkloadFormat) + " v1'");
    }
    WorkloadSpec s;
    for (const auto& e : f.entries) {
        auto where = what + ":" + std::to_string(e.line);
        auto u32 = [&] { return kv::parse_int<std::uint32_t>(e.value, where); };
        auto u64 = [&] { return kv::parse_int<std::uint64_t>(e.value, where); };
        auto dist = [&] {
            auto d = Distribution::parse(e.value);
            if (!d) throw Error(ErrorKind::Config, where + ": bad distribution '" + e.value + "'");
            return *d;
        };
        const auto& k = e.key;
        if (k == "seed") s.seed = u64();
        else if (k == "clock_domain") s.clock_domain = u64();
        else if (k == "first_pid") s.first_pid = u32();
        else if (k == "processes") s.processes = u32();
        else if (k == "root_name") s.root_name = e.value;
        else if (k == "worker_name") s.worker_name = e.value;
        else if (k == "fork_stagger_ns") s.fork_stagger_ns = u64();
        else if (k == "iterations") s.iterations = u32();
        else if (k == "outer_operation") s.outer_operation = e.value;
        else if (k == "inference.backend_calls") s.inference_backend_calls = u32();
        else if (k == "simulation.calls") s.simulation_calls = u32();
        else if (k == "backprop.period") s.backprop_period = u32();
        else if (k == "backprop.backend_calls") s.backprop_backend_calls = u32();
        else if (k == "kernels_per_call") s.kernels_per_call = u32();
        else if (k == "backprop.kernels_per_call") s.backprop_kernels_per_call = u32();
        else if (k == "memcpys_per_call") s.memcpys_per_call = u32();
        else if (k == "quantum_ns") s.quantum_ns = u64();
        else if (k == "duration.high_level") s.high_level = dist();
        else if (k == "duration.backend") s.backend = dist();
        else if (k == "duration.simulator") s.simulator = dist();
        else if (k == "duration.accel_api") s.accel_api = dist();
        else if (k == "duration.kernel") s.kernel = dist();
        else if (k == "duration.memcpy") s.memcpy = dist();
        else if (k == "overhead.annotation") s.overhead_annotation = dist();
        else if (k == "overhead.transition") s.overhead_transition = dist();
        else if (k == "overhead.api_interception") s.overhead_interception = dist();
        else if (k.rfind("overhead.api_internal.", 0) == 0 && k.size() > 22) s.overhead_internal[k.substr(22)] = dist();
        else throw Error(ErrorKind::Config, where + ": unknown key '" + k + "'");
    }
    detail::validate_spec(s);
    return s;
}

inline WorkloadSpec load_workload_spec(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::Config, "cannot open workload spec " + path);
    return parse_workload_spec(f, path);
}

}  // namespace xstack::synth

#endif  // XSTACK_SYNTH_WORKLOAD_HPP
