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

// Command-line front end. Kept in a header so tests can drive it in-process.
//
// Exit status: 0 success, 1 trace/format/validation error, 2 argument or
// config error. Errors go to stderr as one JSON object per line.
#ifndef XSTACK_TOOLS_CLI_HPP
#define XSTACK_TOOLS_CLI_HPP

#include "xstack/xstack.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iomanip>

namespace xstack::cli {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kReportFormat = "xstack-report";
inline constexpr int kReportVersion = 1;
inline constexpr DurationNs kDefaultPeriodNs = 166'666'667;  // 1/6 s

inline int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Argument:
    case ErrorKind::Config:
    case ErrorKind::IncompleteLadder:
    case ErrorKind::UnpairedApi:
        return 2;
    default:
        return 1;
    }
}

inline std::string kind_name(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Format: return "format";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::Incomplete: return "incomplete";
    case ErrorKind::Io: return "io";
    case ErrorKind::InvalidTrace: return "invalid_trace";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Config: return "config";
    case ErrorKind::UnpairedApi: return "unpaired_api";
    case ErrorKind::IncompleteLadder: return "incomplete_ladder";
    case ErrorKind::UncalibratedHook: return "uncalibrated_hook";
    case ErrorKind::DuplicatePid: return "duplicate_pid";
    case ErrorKind::ClockDomainMismatch: return "clock_domain_mismatch";
    }
    return "unknown";
}

inline void emit_error(std::ostream& err, const std::string& kind, const std::string& message, int code)
{
    Json j;
    j["level"] = "error";
    j["kind"] = kind;
    j["message"] = message;
    j["exit"] = code;
    err << j.dump() << '\n';
}

inline void emit_warning(std::ostream& err, const std::string& message)
{
    Json j;
    j["level"] = "warning";
    j["message"] = message;
    err << j.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Report lines

class Report {
public:
    explicit Report(std::string command)
    {
        Json h;
        h["format"] = kReportFormat;
        h["version"] = kReportVersion;
        h["command"] = std::move(command);
        lines_.push_back(std::move(h));
    }

    void add(Json j) { lines_.push_back(std::move(j)); }
    const std::vector<Json>& lines() const { return lines_; }

    void write(const std::filesystem::path& path) const
    {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
        for (const auto& j : lines_) f << j.dump() << '\n';
        if (!f) throw Error(ErrorKind::Io, "write failed: " + path.string());
    }

private:
    std::vector<Json> lines_;
};

inline Json path_json(const OperationPath& p)
{
    Json a = Json::array();
    for (const auto& s : p) a.push_back(s);
    return a;
}

inline std::string fmt_ms(DurationNs ns)
{
    std::ostringstream o;
    o << std::fixed << std::setprecision(3) << static_cast<double>(ns) / 1e6;
    return o.str();
}

inline std::string fmt_fixed(double v, int prec)
{
    std::ostringstream o;
    o << std::fixed << std::setprecision(prec) << v;
    return o.str();
}

inline void add_breakdown(Report& rep, std::ostream& out, const Breakdown& b)
{
    out << std::left << std::setw(8) << "pid" << std::setw(40) << "operation" << std::setw(34) << "categories"
        << std::right << std::setw(14) << "ms" << std::setw(9) << "%" << '\n';
    for (const auto& row : summarize(b)) {
        std::string path = row.path.empty() ? "-" : path_to_string(row.path);
        std::string cats = row.untracked() ? "(untracked)" : row.categories.to_string();
        out << std::left << std::setw(8) << row.pid << std::setw(40) << path << std::setw(34) << cats << std::right
            << std::setw(14) << fmt_ms(row.ns) << std::setw(9) << fmt_fixed(row.percent, 2) << '\n';
        Json j;
        j["type"] = row.untracked() ? "untracked" : "cell";
        j["pid"] = row.pid;
        j["path"] = path_json(row.path);
        j["categories"] = row.untracked() ? "" : row.categories.to_string();
        j["ns"] = row.ns;
        j["percent"] = row.percent;
        rep.add(std::move(j));
    }
    for (const auto& [pid, span] : b.span) {
        Json j;
        j["type"] = "span";
        j["pid"] = pid;
        j["ns"] = span;
        rep.add(std::move(j));
    }
}

inline void add_transitions(Report& rep, std::ostream& out, const TransitionCounts& tc)
{
    out << "transitions:";
    for (const auto& [from, to] : kTransitionPairs) {
        auto n = tc.get(from, to);
        out << ' ' << to_string(from) << "->" << to_string(to) << '=' << n;
        Json j;
        j["type"] = "transition";
        j["from"] = to_string(from);
        j["to"] = to_string(to);
        j["count"] = n;
        rep.add(std::move(j));
    }
    out << '\n';
}

inline void add_busy(Report& rep, std::ostream& out, const Trace& t)
{
    for (Pid pid : pids_of(t)) {
        auto span = pid_span(t, pid);
        if (!span || span->length() == 0) continue;
        out << "busy pid " << pid << ':';
        for (Category c : kResourceCategories) {
            auto ns = busy_ns(t, c, pid);
            double f = static_cast<double>(ns) / static_cast<double>(span->length());
            out << ' ' << to_string(c) << '=' << fmt_fixed(f, 6);
            Json j;
            j["type"] = "busy";
            j["pid"] = pid;
            j["category"] = to_string(c);
            j["ns"] = ns;
            j["fraction"] = f;
            rep.add(std::move(j));
        }
        out << '\n';
    }
}

inline Json correction_json(const CorrectionReport& r)
{
    Json j;
    j["type"] = "correction";
    j["original_total_ns"] = r.original_total();
    j["corrected_total_ns"] = r.corrected_total();
    Json removed;
    for (auto k : {HookKind::Annotation, HookKind::Transition, HookKind::ApiInterception, HookKind::ApiInternal}) {
        removed[std::string(to_string(k))] = r.removed(k);
    }
    j["removed_ns"] = removed;
    DurationNs shortfall = 0;
    for (const auto& [pid, p] : r.pids) shortfall += p.shortfall;
    j["shortfall_ns"] = shortfall;
    if (r.uninstrumented_total) j["uninstrumented_total_ns"] = *r.uninstrumented_total;
    if (r.bias) j["bias"] = *r.bias;
    return j;
}

inline void print_correction(std::ostream& out, const CorrectionReport& r)
{
    out << std::left << std::setw(8) << "pid" << std::right << std::setw(16) << "original_ms" << std::setw(16)
        << "removed_ms" << std::setw(16) << "corrected_ms" << std::setw(16) << "shortfall_ns" << '\n';
    for (const auto& [pid, p] : r.pids) {
        out << std::left << std::setw(8) << pid << std::right << std::setw(16) << fmt_ms(p.original_total)
            << std::setw(16) << fmt_ms(p.removed_total()) << std::setw(16) << fmt_ms(p.corrected_total)
            << std::setw(16) << p.shortfall << '\n';
    }
    out << "total: original_ms=" << fmt_ms(r.original_total()) << " corrected_ms=" << fmt_ms(r.corrected_total());
    if (r.uninstrumented_total) out << " uninstrumented_ms=" << fmt_ms(*r.uninstrumented_total);
    if (r.bias) out << " bias=" << fmt_fixed(*r.bias, 6);
    out << '\n';
}

// ---------------------------------------------------------------------------
// SVG stacked bars: one bar per (pid, operation path), stacked by category set.

inline void write_plot(const std::filesystem::path& path, const Breakdown& b)
{
    std::map<std::pair<Pid, std::string>, std::vector<std::pair<std::string, DurationNs>>> bars;
    std::set<std::string> sets;
    for (const auto& [key, ns] : b.cells) {
        auto label = std::to_string(key.pid) + ":" + (key.path.empty() ? "-" : path_to_string(key.path));
        bars[{key.pid, label}].emplace_back(key.categories.to_string(), ns);
        sets.insert(key.categories.to_string());
    }
    DurationNs max_total = 1;
    for (const auto& [k, segs] : bars) {
        DurationNs s = 0;
        for (const auto& [c, ns] : segs) s += ns;
        max_total = std::max(max_total, s);
    }
    static constexpr std::array<const char*, 10> kPalette = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                                             "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
    std::map<std::string, std::string> color;
    for (const auto& s : sets) color[s] = kPalette[color.size() % kPalette.size()];

    const int bar_w = 40, gap = 30, height = 300, left = 60, top = 20;
    int width = left + static_cast<int>(bars.size()) * (bar_w + gap) + 220;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height + 140 << "\">\n";
    int x = left;
    for (const auto& [k, segs] : bars) {
        double y = top + height;
        for (const auto& [c, ns] : segs) {
            double h = height * static_cast<double>(ns) / static_cast<double>(max_total);
            y -= h;
            svg << "<rect x=\"" << x << "\" y=\"" << fmt_fixed(y, 2) << "\" width=\"" << bar_w << "\" height=\""
                << fmt_fixed(h, 2) << "\" fill=\"" << color[c] << "\"/>\n";
        }
        svg << "<text x=\"" << x << "\" y=\"" << top + height + 14 << "\" font-size=\"10\" transform=\"rotate(45 " << x
            << ',' << top + height + 14 << ")\">" << k.second << "</text>\n";
        x += bar_w + gap;
    }
    int ly = top;
    for (const auto& [c, col] : color) {
        svg << "<rect x=\"" << x + 10 << "\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\"" << col << "\"/>\n";
        svg << "<text x=\"" << x + 28 << "\" y=\"" << ly + 10 << "\" font-size=\"11\">" << c << "</text>\n";
        ly += 18;
    }
    svg << "<text x=\"4\" y=\"" << top + 10 << "\" font-size=\"11\">" << fmt_ms(max_total) << " ms</text>\n";
    svg << "</svg>\n";
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::Io, "cannot write plot " + path.string());
    f << svg.str();
    if (!f) throw Error(ErrorKind::Io, "plot write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Commands

struct AnalyzeArgs {
    std::string trace_dir;
    std::string attribution = "instant";
    std::string profile;
    std::string report;
    std::string plot;
};

inline std::filesystem::path default_report_path(const std::string& dir, std::string_view suffix)
{
    std::filesystem::path p(dir);
    if (!p.has_filename()) p = p.parent_path();
    return p.parent_path() / (p.filename().string() + std::string(suffix));
}

inline Attribution parse_attribution(const std::string& s)
{
    if (s == "instant") return Attribution::Instant;
    if (s == "correlation") return Attribution::Correlation;
    throw Error(ErrorKind::Argument, "unknown attribution '" + s + "'");
}

inline CalibrationProfile load_profile(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::Config, "cannot open profile " + path);
    return read_profile(f, path);
}

inline int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err)
{
    auto mode = parse_attribution(a.attribution);
    Trace t = read_trace(a.trace_dir);
    require_valid(t);
    Report rep("analyze");
    Json src;
    src["type"] = "source";
    src["trace"] = a.trace_dir;
    src["attribution"] = to_string(mode);
    src["corrected"] = !a.profile.empty();
    rep.add(std::move(src));
    if (!a.profile.empty()) {
        auto corrected = correct_trace(t, load_profile(a.profile));
        rep.add(correction_json(corrected.report));
        print_correction(out, corrected.report);
        t = std::move(corrected.trace);
    }
    auto b = compute_overlap(t, mode);
    add_breakdown(rep, out, b);
    add_transitions(rep, out, count_transitions(t));
    add_busy(rep, out, t);
    Json tot;
    tot["type"] = "total";
    tot["ns"] = total_time(t);
    rep.add(std::move(tot));
    out << "total_ms=" << fmt_ms(total_time(t)) << '\n';

    auto report_path = a.report.empty() ? default_report_path(a.trace_dir, ".report.jsonl")
                                        : std::filesystem::path(a.report);
    rep.write(report_path);
    out << "report: " << report_path.string() << '\n';
    if (!a.plot.empty()) {
        try {
            write_plot(a.plot, b);
        } catch (const std::exception& e) {
            emit_warning(err, std::string("plot failed: ") + e.what());
        }
    }
    return 0;
}

inline int cmd_calibrate(const std::vector<std::string>& files, const std::string& output, std::ostream& out)
{
    std::vector<RunSummary> runs;
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) throw Error(ErrorKind::Config, "cannot open run summary " + f);
        runs.push_back(read_run_summary(in, f));
    }
    auto profile = build_profile(runs);
    if (output.empty() || output == "-") {
        write_profile(out, profile);
    } else {
        std::filesystem::path p(output);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream f(p);
        if (!f) throw Error(ErrorKind::Io, "cannot write " + output);
        write_profile(f, profile);
        out << "profile: " << output << '\n';
    }
    return 0;
}

struct CorrectArgs {
    std::string trace_dir;
    std::string profile;
    std::string out_dir;
    std::string uninstrumented_dir;
    std::string report;
};

inline int cmd_correct(const CorrectArgs& a, std::ostream& out)
{
    Trace t = read_trace(a.trace_dir);
    std::optional<DurationNs> base;
    if (!a.uninstrumented_dir.empty()) base = total_time(read_trace(a.uninstrumented_dir));
    auto corrected = correct_trace(t, load_profile(a.profile), base);
    print_correction(out, corrected.report);
    if (!a.out_dir.empty()) {
        write_trace(corrected.trace, a.out_dir);
        out << "corrected trace: " << a.out_dir << '\n';
    }
    Report rep("correct");
    rep.add(correction_json(corrected.report));
    for (const auto& [pid, p] : corrected.report.pids) {
        Json j;
        j["type"] = "pid_correction";
        j["pid"] = pid;
        j["original_total_ns"] = p.original_total;
        j["corrected_total_ns"] = p.corrected_total;
        j["corrected_span_ns"] = p.corrected_span;
        j["removed_ns"] = p.removed_total();
        j["shortfall_ns"] = p.shortfall;
        rep.add(std::move(j));
    }
    auto report_path = a.report.empty() ? default_report_path(a.trace_dir, ".correction.jsonl")
                                        : std::filesystem::path(a.report);
    rep.write(report_path);
    out << "report: " << report_path.string() << '\n';
    return 0;
}

struct GenArgs {
    std::string spec;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    int repetitions = 1;
    bool split = false;
    std::size_t chunk_limit = io::kDefaultChunkLimit;
};

inline Json truth_json(const synth::GroundTruth& truth)
{
    Json j;
    j["type"] = "truth";
    j["uninstrumented_total_ns"] = truth.uninstrumented_total;
    j["instrumented_total_ns"] = truth.instrumented_total;
    j["gpu_busy_ns"] = truth.gpu_busy_ns;
    Json sites, injected;
    for (const auto& [k, n] : truth.site_counts) sites[std::string(to_string(k))] = n;
    for (const auto& [k, n] : truth.injected_ns) injected[std::string(to_string(k))] = n;
    j["site_counts"] = sites;
    j["injected_ns"] = injected;
    return j;
}

inline void write_traces(const Trace& t, const std::filesystem::path& dir, bool split, std::size_t limit)
{
    if (!split) {
        write_trace(t, dir, limit);
        return;
    }
    for (const auto& part : split_by_pid(t)) {
        write_trace(part, dir / ("pid." + std::to_string(part.processes.front().pid)), limit);
    }
}

inline int cmd_gen(const GenArgs& a, std::ostream& out)
{
    auto spec = synth::load_workload_spec(a.spec);
    if (a.seed) spec.seed = *a.seed;
    auto w = synth::generate_workload(spec);
    std::filesystem::path root(a.out_dir);
    write_traces(w.uninstrumented, root / "uninstrumented", a.split, a.chunk_limit);
    write_traces(w.instrumented, root / "instrumented", a.split, a.chunk_limit);

    Report truth("gen");
    truth.add(truth_json(w.truth));
    for (const auto& [pair, n] : w.truth.transitions.counts) {
        Json j;
        j["type"] = "transition";
        j["from"] = to_string(pair.first);
        j["to"] = to_string(pair.second);
        j["count"] = n;
        truth.add(std::move(j));
    }
    for (const auto& [key, ns] : w.truth.uninstrumented.cells) {
        Json j;
        j["type"] = "cell";
        j["pid"] = key.pid;
        j["path"] = path_json(key.path);
        j["categories"] = key.categories.to_string();
        j["ns"] = ns;
        truth.add(std::move(j));
    }
    for (const auto& [pid, ns] : w.truth.uninstrumented.untracked) {
        Json j;
        j["type"] = "untracked";
        j["pid"] = pid;
        j["ns"] = ns;
        truth.add(std::move(j));
    }
    truth.write(root / "truth.jsonl");

    auto ladder = synth::calibration_ladder(spec, a.repetitions);
    std::filesystem::create_directories(root / "ladder");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        std::ofstream f(root / "ladder" / ("run." + std::to_string(i) + ".txt"));
        if (!f) throw Error(ErrorKind::Io, "cannot write ladder summary");
        write_run_summary(f, ladder[i]);
    }
    double inflation = w.truth.uninstrumented_total == 0
                           ? 0.0
                           : static_cast<double>(w.truth.instrumented_total) /
                                 static_cast<double>(w.truth.uninstrumented_total);
    out << "seed=" << spec.seed << " events=" << w.instrumented.events.size()
        << " uninstrumented_ms=" << fmt_ms(w.truth.uninstrumented_total)
        << " instrumented_ms=" << fmt_ms(w.truth.instrumented_total) << " inflation=" << fmt_fixed(inflation, 4)
        << '\n';
    out << "wrote " << (root / "uninstrumented").string() << ", " << (root / "instrumented").string() << ", "
        << (root / "truth.jsonl").string() << ", " << ladder.size() << " ladder summaries\n";
    return 0;
}

inline int cmd_util(const std::string& dir, DurationNs period, const std::string& report, std::ostream& out)
{
    Trace t = read_trace(dir);
    require_valid(t);
    double sampled = sampled_utilization(t, period);
    double busy = busy_fraction(t, Category::Gpu);
    out << "period_ns=" << period << " sampled_utilization=" << fmt_fixed(sampled, 6)
        << " busy_fraction=" << fmt_fixed(busy, 9) << '\n';
    Report rep("util");
    Json j;
    j["type"] = "utilization";
    j["period_ns"] = period;
    j["sampled_utilization"] = sampled;
    j["busy_fraction"] = busy;
    j["busy_ns"] = busy_ns(t, Category::Gpu);
    rep.add(std::move(j));
    if (!report.empty()) rep.write(report);
    return 0;
}

inline int cmd_tree(const std::vector<std::string>& dirs, const std::string& dot, const std::string& report,
                    std::ostream& out, std::ostream& err)
{
    std::vector<Trace> traces;
    for (const auto& d : dirs) traces.push_back(read_trace(d));
    auto tree = build_process_tree(traces);
    for (const auto& w : tree.warnings) emit_warning(err, w);
    render_tree(out, tree);
    if (!dot.empty()) {
        std::ofstream f(dot);
        if (!f) throw Error(ErrorKind::Io, "cannot write " + dot);
        render_dot(f, tree);
    }
    if (!report.empty()) {
        Report rep("tree");
        for (const auto& [pid, depth] : tree.preorder()) {
            const auto& n = tree.nodes.at(pid);
            Json j;
            j["type"] = "node";
            j["pid"] = pid;
            j["name"] = n.name;
            j["depth"] = depth;
            j["parent"] = n.parent ? Json(*n.parent) : Json(nullptr);
            j["span_ns"] = n.span_ns;
            j["gpu_busy_ns"] = n.gpu_busy_ns;
            j["gpu_busy_fraction"] = n.gpu_busy_fraction();
            rep.add(std::move(j));
        }
        rep.write(report);
    }
    return 0;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"xstack: cross-stack trace analysis", "xstack"};
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* an = app.add_subcommand("analyze", "Overlap breakdown, transitions and busy fractions of a trace");
    an->add_option("trace", analyze.trace_dir, "Trace directory")->required();
    an->add_option("--attribution", analyze.attribution, "GPU time scoping: instant or correlation")
        ->check(CLI::IsMember({"instant", "correlation"}));
    an->add_option("--profile", analyze.profile, "Calibration profile; corrects the trace before analysis");
    an->add_option("--report", analyze.report, "Report path (default: <trace>.report.jsonl)");
    an->add_option("--plot", analyze.plot, "Write a stacked-bar SVG of the breakdown");

    std::vector<std::string> summaries;
    std::string profile_out;
    auto* cal = app.add_subcommand("calibrate", "Build a calibration profile from ladder run summaries");
    cal->add_option("summaries", summaries, "Run summary files")->required();
    cal->add_option("-o,--output", profile_out, "Profile path (default: stdout)");

    CorrectArgs correct;
    auto* cor = app.add_subcommand("correct", "Remove calibrated overhead from a trace");
    cor->add_option("trace", correct.trace_dir, "Trace directory")->required();
    cor->add_option("--profile", correct.profile, "Calibration profile")->required();
    cor->add_option("-o,--output", correct.out_dir, "Directory for the corrected trace");
    cor->add_option("--uninstrumented", correct.uninstrumented_dir, "Uninstrumented trace, for the bias");
    cor->add_option("--report", correct.report, "Report path (default: <trace>.correction.jsonl)");

    GenArgs gen;
    std::uint64_t seed = 0;
    auto* gn = app.add_subcommand("gen", "Generate paired synthetic traces, ground truth and ladder summaries");
    gn->add_option("spec", gen.spec, "Workload spec file")->required();
    auto* seed_opt = gn->add_option("--seed", seed, "Override the workload seed");
    gn->add_option("-o,--output", gen.out_dir, "Output directory")->required();
    gn->add_option("--repetitions", gen.repetitions, "Runs per ladder leg")->check(CLI::PositiveNumber);
    gn->add_flag("--split", gen.split, "Write one trace directory per process");
    gn->add_option("--chunk-limit", gen.chunk_limit, "Chunk size limit in bytes")
        ->check(CLI::Range(io::kMinChunkLimit, std::numeric_limits<std::size_t>::max()));

    std::string util_dir, util_report;
    DurationNs period = kDefaultPeriodNs;
    auto* ut = app.add_subcommand("util", "Sampled GPU utilization vs true busy fraction");
    ut->add_option("trace", util_dir, "Trace directory")->required();
    ut->add_option("--period-ns", period, "Sampling period in ns (default 1/6 s)");
    ut->add_option("--report", util_report, "Report path");

    std::vector<std::string> tree_dirs;
    std::string dot, tree_report;
    auto* tr = app.add_subcommand("tree", "Multi-process fork/join view");
    tr->add_option("traces", tree_dirs, "Trace directories")->required();
    tr->add_option("--dot", dot, "Write a Graphviz description");
    tr->add_option("--report", tree_report, "Report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        emit_error(err, "argument", e.what(), 2);
        return 2;
    }

    try {
        if (*an) return cmd_analyze(analyze, out, err);
        if (*cal) return cmd_calibrate(summaries, profile_out, out);
        if (*cor) return cmd_correct(correct, out);
        if (*gn) {
            if (*seed_opt) gen.seed = seed;
            return cmd_gen(gen, out);
        }
        if (*ut) return cmd_util(util_dir, period, util_report, out);
        if (*tr) return cmd_tree(tree_dirs, dot, tree_report, out, err);
    } catch (const Error& e) {
        int code = exit_code(e.kind());
        emit_error(err, kind_name(e.kind()), e.what(), code);
        return code;
    } catch (const std::filesystem::filesystem_error& e) {
        emit_error(err, "io", e.what(), 1);
        return 1;
    }
    return 2;
}

}  // namespace xstack::cli

#endif  // XSTACK_TOOLS_CLI_HPP
