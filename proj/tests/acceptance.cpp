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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "test_util.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace xstack;
using namespace xstack::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4)
{
    std::ostringstream o;
    o << std::fixed << std::setprecision(prec) << v;
    return o.str();
}

// 1. Sweep equals the 1 ns brute-force oracle on 500 random traces, under 60 s.
Outcome overlap_oracle()
{
    auto t0 = Clock::now();
    synth::RandomTraceParams params{.max_events = 1000, .max_depth = 3, .max_categories = 4, .max_span = 1'000'000};
    std::size_t mismatches = 0, events = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        auto t = synth::random_trace(1000 + seed, params);
        events += t.events.size();
        if (compute_overlap(t) != synth::brute_force_overlap(t, 1)) ++mismatches;
    }
    double s = seconds_since(t0);
    return {mismatches == 0 && s < 60.0,
            "500 traces, " + std::to_string(events) + " events, " + std::to_string(mismatches) + " mismatches, " +
                fmt(s, 1) + " s (limit 60 s)"};
}

// 2. expand_leaf: 0.79 ms BACKEND only, 1.7 ms BACKEND+GPU.
Outcome fig3_cells()
{
    auto b = compute_overlap(expand_leaf_trace());
    OperationPath path{"expand_leaf"};
    auto cpu = b.get({1, path, {Category::Backend}});
    auto both = b.get({1, path, {Category::Backend, Category::Gpu}});
    return {cpu == 790'000 && both == 1'700'000 && b.cells.size() == 2,
            "cpu-only " + std::to_string(cpu) + " ns, cpu+gpu " + std::to_string(both) + " ns"};
}

// 3. Difference of averages: launch 9.5 - 6.5 = 3 us, memcpy 5.5 - 4.5 = 1 us.
Outcome diff_of_average()
{
    ApiSamples enabled{{"cudaLaunchKernel", {10'000, 9'000}}, {"cudaMemcpyAsync", {5'000, 6'000}}};
    ApiSamples disabled{{"cudaLaunchKernel", {7'000, 6'000}}, {"cudaMemcpyAsync", {4'000, 5'000}}};
    auto r = diff_of_avg_calibrate(enabled, disabled);
    auto launch = r.at("cudaLaunchKernel").mean_ns, memcpy = r.at("cudaMemcpyAsync").mean_ns;
    return {launch == Rational(3000) && memcpy == Rational(1000),
            "launch " + format_rational(launch) + " ns, memcpy " + format_rational(memcpy) + " ns"};
}

std::optional<double> bias_for(const synth::WorkloadSpec& spec, double* inflation = nullptr)
{
    auto w = synth::generate_workload(spec);
    auto profile = ladder_profile(spec);
    auto c = correct_trace(w.instrumented, profile, w.truth.uninstrumented_total);
    if (inflation) {
        *inflation = static_cast<double>(w.truth.instrumented_total) / static_cast<double>(w.truth.uninstrumented_total);
    }
    return c.report.bias;
}

// 4. Constant overheads: corrected totals equal uninstrumented totals exactly, under 30 s.
Outcome constant_closure()
{
    auto t0 = Clock::now();
    auto base = synth::load_workload_spec(config_path("constant-overhead.cfg"));
    int exact = 0, runs = 0;
    DurationNs worst = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        for (std::uint32_t procs : {1u, 3u}) {
            auto spec = base;
            spec.seed = seed;
            spec.processes = procs;
            auto w = synth::generate_workload(spec);
            auto c = correct_trace(w.instrumented, ladder_profile(spec), w.truth.uninstrumented_total);
            auto got = c.report.corrected_total(), want = w.truth.uninstrumented_total;
            worst = std::max(worst, got > want ? got - want : want - got);
            exact += got == want;
            ++runs;
        }
    }
    double s = seconds_since(t0);
    return {exact == runs && s < 30.0, std::to_string(exact) + "/" + std::to_string(runs) +
                                           " exact, worst error " + std::to_string(worst) + " ns, " + fmt(s, 1) +
                                           " s (limit 30 s)"};
}

struct BiasStats {
    int within = 0;
    int total = 0;
    double worst = 0;
};

BiasStats bias_over_seeds(const synth::WorkloadSpec& base, double* min_inflation = nullptr)
{
    BiasStats st;
    if (min_inflation) *min_inflation = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        auto spec = base;
        spec.seed = seed;
        double inflation = 0;
        auto b = bias_for(spec, &inflation);
        if (min_inflation) *min_inflation = std::min(*min_inflation, inflation);
        ++st.total;
        if (b && std::abs(*b) <= 0.16) ++st.within;
        if (b) st.worst = std::max(st.worst, std::abs(*b));
    }
    return st;
}

bool meets_95(const BiasStats& st) { return st.within * 100 >= 95 * st.total; }

// 5. Lognormal overheads (cv 0.3), 50 seeds: |bias| <= 0.16 for at least 95%.
Outcome noisy_bias()
{
    auto spec = synth::load_workload_spec(config_path("noisy.cfg"));
    auto st = bias_over_seeds(spec);
    return {meets_95(st), std::to_string(st.within) + "/" + std::to_string(st.total) +
                              " seeds within 0.16, worst |bias| " + fmt(st.worst)};
}

// 6. A regime with at least 1.9x inflation, where criterion 5 still holds.
Outcome inflation_regime()
{
    auto spec = synth::load_workload_spec(config_path("inflation.cfg"));
    double inflation = 0;
    bias_for(spec, &inflation);
    double min_inflation = 0;
    auto st = bias_over_seeds(spec, &min_inflation);
    return {inflation >= 1.9 && min_inflation >= 1.9 && meets_95(st),
            "inflation " + fmt(inflation, 3) + "x (min over 50 seeds " + fmt(min_inflation, 3) + "x), " +
                std::to_string(st.within) + "/" + std::to_string(st.total) + " seeds within 0.16, worst |bias| " +
                fmt(st.worst)};
}

// 7. Sampled utilization reads 1.0 on sparse kernels; sampled >= busy on 200 random traces.
Outcome utilization_divergence()
{
    auto sparse = sparse_kernel_trace();
    double sampled = sampled_utilization(sparse, 166'666'667);
    double busy = busy_fraction(sparse, Category::Gpu);
    std::mt19937_64 rng(77);
    int checked = 0, violations = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto t = synth::random_trace(5000 + seed);
        auto span = trace_span(t);
        if (!span) continue;
        for (int k = 0; k < 5; ++k) {
            DurationNs p = 1 + rng() % (2 * span->length());
            ++checked;
            if (sampled_utilization(t, p) < busy_fraction(t, Category::Gpu)) ++violations;
        }
    }
    return {sampled == 1.0 && busy <= 1e-4 && violations == 0 && checked > 0,
            "sampled " + fmt(sampled, 3) + " vs busy " + fmt(busy, 6) + " at 1/6 s; dominance " +
                std::to_string(checked - violations) + "/" + std::to_string(checked)};
}

// 8. Minigo-shaped tree: 17 nodes, every worker under 1% GPU busy.
Outcome multi_process()
{
    auto w = synth::generate_workload(synth::load_workload_spec(config_path("minigo.cfg")));
    auto tree = build_process_tree(split_by_pid(w.uninstrumented));
    std::ostringstream rendered;
    render_tree(rendered, tree);
    double worst = 0;
    std::size_t workers = 0;
    for (const auto& [pid, n] : tree.nodes) {
        if (!n.parent) continue;
        ++workers;
        worst = std::max(worst, n.gpu_busy_fraction());
    }
    bool rendered_all = rendered.str().find("nodes=17 ") != std::string::npos;
    return {tree.nodes.size() == 17 && workers == 16 && worst < 0.01 && rendered_all,
            std::to_string(tree.nodes.size()) + " nodes, " + std::to_string(workers) + " workers, max worker gpu " +
                fmt(100 * worst, 3) + "%"};
}

bool throws_kind(const std::filesystem::path& dir, ErrorKind kind)
{
    try {
        read_trace(dir);
    } catch (const Error& e) {
        return e.kind() == kind;
    }
    return false;
}

// 9. Byte determinism and round trip on 100 random traces; truncation and bad magic rejected.
Outcome trace_format()
{
    int deterministic = 0, round_trips = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto t = synth::random_trace(9000 + seed);
        TempDir a("xstack-acc"), b("xstack-acc");
        auto shuffled = canonicalized(t);
        std::reverse(shuffled.processes.begin(), shuffled.processes.end());
        auto na = write_trace(t, a.path(), 8192), nb = write_trace(shuffled, b.path(), 8192);
        bool same = na == nb;
        for (std::uint32_t i = 0; same && i < na; ++i) {
            same = io::read_file(a / io::chunk_file_name(i)) == io::read_file(b / io::chunk_file_name(i));
        }
        same = same && io::read_file(a / "meta.bin") == io::read_file(b / "meta.bin");
        deterministic += same;

        auto want = t;
        std::stable_sort(want.processes.begin(), want.processes.end(), [](auto& x, auto& y) { return x.pid < y.pid; });
        round_trips += read_trace(a.path()) == canonicalized(want);
    }

    std::vector<Event> events;
    for (TimestampNs i = 0; i < 500; ++i) events.push_back(ev(1, 1, Category::HighLevel, "x", i, 1));
    TempDir trunc("xstack-acc"), magic("xstack-acc");
    write_trace(single_process(events), trunc.path(), 4096);
    std::filesystem::remove(trunc / io::chunk_file_name(1));
    bool truncated = throws_kind(trunc.path(), ErrorKind::Truncated);
    write_trace(expand_leaf_trace(), magic.path());
    auto bytes = io::read_file(magic / io::chunk_file_name(0));
    bytes[0] ^= 0x5a;
    io::write_file(magic / io::chunk_file_name(0), bytes);
    bool bad_magic = throws_kind(magic.path(), ErrorKind::Format);

    return {deterministic == 100 && round_trips == 100 && truncated && bad_magic,
            "deterministic " + std::to_string(deterministic) + "/100, round trip " + std::to_string(round_trips) +
                "/100, truncated " + (truncated ? "rejected" : "accepted") + ", bad magic " +
                (bad_magic ? "rejected" : "accepted")};
}

}  // namespace

int main()
{
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"overlap oracle equivalence", overlap_oracle},
        {"expand_leaf worked example", fig3_cells},
        {"difference-of-average calibration", diff_of_average},
        {"constant-overhead correction closure", constant_closure},
        {"noisy-overhead correction bias", noisy_bias},
        {"inflation regime", inflation_regime},
        {"utilization divergence", utilization_divergence},
        {"multi-process view", multi_process},
        {"trace format", trace_format},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        auto t0 = Clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
                  << "): " << o.detail << " [" << fmt(seconds_since(t0), 2) << " s]" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
