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
 * calibration.hpp: mean book-keeping overhead estimation.
 *
 * Two estimators:
 *  - delta calibration: (total with hook class on - total off) / site count,
 *    for hooks whose cost does not depend on where they fire;
 *  - difference of averages: mean(enabled samples) - mean(disabled samples)
 *    per API name, for accelerator-library internal profiling cost that
 *    varies by API and cannot be toggled per API.
 *
 * Runs are organised as a ladder of configurations, each enabling one more
 * hook class than the previous leg. All arithmetic is exact (rational ns).
 */
#ifndef XSTACK_CALIBRATION_HPP
#define XSTACK_CALIBRATION_HPP

#include "xstack/kv_file.hpp"
#include "xstack/trace_model.hpp"

#include <boost/rational.hpp>

#include <ostream>

namespace xstack {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r)
{
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

/// Integer when exact, otherwise "num/den".
inline std::string format_rational(const Rational& r)
{
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

/// Accepts "12", "12.25" and "49/4".
inline std::optional<Rational> parse_rational(std::string_view s)
{
    auto as_int = [](std::string_view v) -> std::optional<std::int64_t> {
        std::int64_t out = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || p != v.data() + v.size() || v.empty()) return std::nullopt;
        return out;
    };
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto n = as_int(s.substr(0, slash));
        auto d = as_int(s.substr(slash + 1));
        if (!n || !d || *d <= 0) return std::nullopt;
        return Rational(*n, *d);
    }
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        auto whole = as_int(s.substr(0, dot));
        auto frac_str = s.substr(dot + 1);
        auto frac = as_int(frac_str);
        if (!whole || !frac || frac_str.size() > 15 || s.front() == '-') return std::nullopt;
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < frac_str.size(); ++i) scale *= 10;
        return Rational(*whole * scale + *frac, scale);
    }
    if (auto n = as_int(s)) return Rational(*n);
    return std::nullopt;
}

enum class HookKind { Annotation, Transition, ApiInterception, ApiInternal };

inline std::string_view to_string(HookKind k)
{
    switch (k) {
    case HookKind::Annotation: return "annotation";
    case HookKind::Transition: return "transition";
    case HookKind::ApiInterception: return "api_interception";
    case HookKind::ApiInternal: return "api_internal";
    }
    return "?";
}

struct Estimate {
    Rational mean_ns{0};
    bool clamped = false;  // raw estimate was negative

    double ns() const { return to_double(mean_ns); }
    bool operator==(const Estimate&) const = default;
};

namespace detail {
inline Estimate clamp_estimate(Rational raw)
{
    if (raw < Rational(0)) return {Rational(0), true};
    return {raw, false};
}
}  // namespace detail

/// Delta calibration over exact (possibly averaged) totals.
inline Estimate delta_calibrate(const Rational& total_on, const Rational& total_off, const Rational& n_sites)
{
    if (n_sites <= Rational(0)) throw Error(ErrorKind::Argument, "delta calibration needs at least one hook site");
    return detail::clamp_estimate((total_on - total_off) / n_sites);
}

inline Estimate delta_calibrate(DurationNs total_on, DurationNs total_off, std::uint64_t n_sites)
{
    if (n_sites == 0) throw Error(ErrorKind::Argument, "delta calibration needs at least one hook site");
    return delta_calibrate(Rational(static_cast<std::int64_t>(total_on)), Rational(static_cast<std::int64_t>(total_off)),
                           Rational(static_cast<std::int64_t>(n_sites)));
}

using ApiSamples = std::map<std::string, std::vector<DurationNs>>;

inline Rational mean_of(const std::vector<DurationNs>& xs)
{
    std::int64_t sum = 0;
    for (auto x : xs) sum += static_cast<std::int64_t>(x);
    return Rational(sum, static_cast<std::int64_t>(xs.size()));
}

/// Per-API mean(enabled) - mean(disabled), clamped at zero.
inline std::map<std::string, Estimate> diff_of_avg_calibrate(const ApiSamples& enabled, const ApiSamples& disabled)
{
    std::vector<std::string> unpaired;
    for (const auto& [api, xs] : enabled) {
        auto it = disabled.find(api);
        if (it == disabled.end() || it->second.empty() || xs.empty()) unpaired.push_back(api);
    }
    for (const auto& [api, xs] : disabled) {
        if (!enabled.count(api)) unpaired.push_back(api);
    }
    if (!unpaired.empty()) {
        std::sort(unpaired.begin(), unpaired.end());
        std::string list;
        for (const auto& a : unpaired) list += (list.empty() ? "" : ", ") + a;
        throw Error(ErrorKind::UnpairedApi, list);
    }
    std::map<std::string, Estimate> out;
    for (const auto& [api, xs] : enabled) {
        out[api] = detail::clamp_estimate(mean_of(xs) - mean_of(disabled.at(api)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Calibration ladder

enum class LadderLeg { AllOff, Annotations, Transitions, ApiInterception, ApiInternal };

inline constexpr std::array<LadderLeg, 5> kLadder = {
    LadderLeg::AllOff, LadderLeg::Annotations, LadderLeg::Transitions,
    LadderLeg::ApiInterception, LadderLeg::ApiInternal,
};

inline std::string_view to_string(LadderLeg leg)
{
    switch (leg) {
    case LadderLeg::AllOff: return "all_off";
    case LadderLeg::Annotations: return "annotations";
    case LadderLeg::Transitions: return "transitions";
    case LadderLeg::ApiInterception: return "api_interception";
    case LadderLeg::ApiInternal: return "api_internal";
    }
    return "?";
}

inline std::optional<LadderLeg> leg_from_string(std::string_view s)
{
    for (auto leg : kLadder) {
        if (to_string(leg) == s) return leg;
    }
    return std::nullopt;
}

/// What one calibration run reports: its total runtime, how many times each
/// book-keeping site fired, and the duration of every accelerator-API call.
struct RunSummary {
    std::string run_id;
    LadderLeg leg = LadderLeg::AllOff;
    DurationNs total_ns = 0;
    std::uint64_t annotation_sites = 0;
    std::uint64_t transition_sites = 0;
    std::uint64_t api_sites = 0;
    ApiSamples api_durations;

    bool operator==(const RunSummary&) const = default;
};

struct CalibrationProfile {
    std::optional<Rational> annotation;
    std::optional<Rational> transition;
    std::optional<Rational> api_interception;
    std::map<std::string, Rational> api_internal;
    std::vector<std::string> provenance;

    bool operator==(const CalibrationProfile&) const = default;

    static CalibrationProfile zero()
    {
        CalibrationProfile p;
        p.annotation = p.transition = p.api_interception = Rational(0);
        return p;
    }
};

/// Builds a profile from a complete ladder. Legs may repeat; repeated legs
/// are averaged (totals, site counts) or pooled (API samples).
inline CalibrationProfile build_profile(const std::vector<RunSummary>& runs)
{
    struct Leg {
        Rational total{0};
        Rational ann{0}, trans{0}, api{0};
        ApiSamples samples;
        int reps = 0;
        std::vector<std::string> ids;
    };
    std::map<LadderLeg, Leg> legs;
    for (const auto& r : runs) {
        auto& l = legs[r.leg];
        l.total += static_cast<std::int64_t>(r.total_ns);
        l.ann += static_cast<std::int64_t>(r.annotation_sites);
        l.trans += static_cast<std::int64_t>(r.transition_sites);
        l.api += static_cast<std::int64_t>(r.api_sites);
        for (const auto& [api, xs] : r.api_durations) {
            auto& dst = l.samples[api];
            dst.insert(dst.end(), xs.begin(), xs.end());
        }
        ++l.reps;
        l.ids.push_back(r.run_id.empty() ? "?" : r.run_id);
    }
    for (auto leg : kLadder) {
        if (!legs.count(leg)) throw Error(ErrorKind::IncompleteLadder, "missing leg '" + std::string(to_string(leg)) + "'");
    }
    for (auto& [leg, l] : legs) {
        l.total /= l.reps;
        l.ann /= l.reps;
        l.trans /= l.reps;
        l.api /= l.reps;
    }

    CalibrationProfile p;
    auto delta = [&](LadderLeg on, LadderLeg off, const Rational& sites, std::string_view what) {
        if (sites == Rational(0)) {
            p.provenance.push_back("note: no " + std::string(what) + " sites in leg '" + std::string(to_string(on)) +
                                   "'; overhead set to 0");
            return Rational(0);
        }
        auto est = delta_calibrate(legs[on].total, legs[off].total, sites);
        if (est.clamped) {
            p.provenance.push_back("warning: negative " + std::string(what) + " delta clamped to 0");
        }
        return est.mean_ns;
    };
    p.annotation = delta(LadderLeg::Annotations, LadderLeg::AllOff, legs[LadderLeg::Annotations].ann, "annotation");
    p.transition = delta(LadderLeg::Transitions, LadderLeg::Annotations, legs[LadderLeg::Transitions].trans, "transition");
    p.api_interception = delta(LadderLeg::ApiInterception, LadderLeg::Transitions,
                               legs[LadderLeg::ApiInterception].api, "api_interception");
    for (const auto& [api, est] :
         diff_of_avg_calibrate(legs[LadderLeg::ApiInternal].samples, legs[LadderLeg::ApiInterception].samples)) {
        p.api_internal[api] = est.mean_ns;
        if (est.clamped) p.provenance.push_back("warning: negative api_internal." + api + " difference clamped to 0");
    }
    for (auto leg : kLadder) {
        std::string ids;
        for (const auto& id : legs[leg].ids) ids += (ids.empty() ? "" : " ") + id;
        p.provenance.push_back("leg " + std::string(to_string(leg)) + ": runs=" + std::to_string(legs[leg].reps) +
                               " total_ns=" + format_rational(legs[leg].total) + " ids=" + ids);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Text serialization

inline constexpr std::string_view kProfileFormat = "xstack-calibration-profile";
inline constexpr std::string_view kRunSummaryFormat = "xstack-run-summary";

inline void write_profile(std::ostream& out, const CalibrationProfile& p)
{
    out << kProfileFormat << " v1\n";
    out << "# mean book-keeping overhead per hook site in ns (integer, decimal or num/den)\n";
    auto scalar = [&](std::string_view key, const std::optional<Rational>& v) {
        if (!v) return;
        out << key << " = " << format_rational(*v);
        if (v->denominator() != 1) out << "  # ~" << to_double(*v);
        out << '\n';
    };
    scalar("annotation", p.annotation);
    scalar("transition", p.transition);
    scalar("api_interception", p.api_interception);
    for (const auto& [api, v] : p.api_internal) scalar("api_internal." + api, v);
    for (const auto& line : p.provenance) out << "provenance = " << line << '\n';
}

inline CalibrationProfile read_profile(std::istream& in, const std::string& what = "profile")
{
    auto f = kv::expect_format(kv::parse(in, what), kProfileFormat, 1, what);
    CalibrationProfile p;
    for (const auto& e : f.entries) {
        if (e.key == "provenance") {
            p.provenance.push_back(e.value);
            continue;
        }
        // Values may carry a trailing "# ~approx" comment.
        auto value = kv::trim(std::string_view(e.value).substr(0, e.value.find('#')));
        auto r = parse_rational(value);
        if (!r || *r < Rational(0)) {
            throw Error(ErrorKind::Config, what + ":" + std::to_string(e.line) + ": bad overhead '" + e.value + "'");
        }
        if (e.key == "annotation") {
            p.annotation = *r;
        } else if (e.key == "transition") {
            p.transition = *r;
        } else if (e.key == "api_interception") {
            p.api_interception = *r;
        } else if (e.key.rfind("api_internal.", 0) == 0 && e.key.size() > 13) {
            p.api_internal[e.key.substr(13)] = *r;
        } else {
            throw Error(ErrorKind::Config, what + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "'");
        }
    }
    return p;
}

inline void write_run_summary(std::ostream& out, const RunSummary& r)
{
    out << kRunSummaryFormat << " v1\n";
    out << "run_id = " << r.run_id << '\n';
    out << "leg = " << to_string(r.leg) << '\n';
    out << "total_ns = " << r.total_ns << '\n';
    out << "sites.annotation = " << r.annotation_sites << '\n';
    out << "sites.transition = " << r.transition_sites << '\n';
    out << "sites.api = " << r.api_sites << '\n';
    for (const auto& [api, xs] : r.api_durations) {
        out << "api." << api << " =";
        for (auto x : xs) out << ' ' << x;
        out << '\n';
    }
}

inline RunSummary read_run_summary(std::istream& in, const std::string& what = "run summary")
{
    auto f = kv::expect_format(kv::parse(in, what), kRunSummaryFormat, 1, what);
    RunSummary r;
    bool have_leg = false, have_total = false;
    for (const auto& e : f.entries) {
        auto where = what + ":" + std::to_string(e.line);
        if (e.key == "run_id") {
            r.run_id = e.value;
        } else if (e.key == "leg") {
            auto leg = leg_from_string(e.value);
            if (!leg) throw Error(ErrorKind::Config, where + ": unknown leg '" + e.value + "'");
            r.leg = *leg;
            have_leg = true;
        } else if (e.key == "total_ns") {
            r.total_ns = kv::parse_int<DurationNs>(e.value, where);
            have_total = true;
        } else if (e.key == "sites.annotation") {
            r.annotation_sites = kv::parse_int<std::uint64_t>(e.value, where);
        } else if (e.key == "sites.transition") {
            r.transition_sites = kv::parse_int<std::uint64_t>(e.value, where);
        } else if (e.key == "sites.api") {
            r.api_sites = kv::parse_int<std::uint64_t>(e.value, where);
        } else if (e.key.rfind("api.", 0) == 0 && e.key.size() > 4) {
            auto& dst = r.api_durations[e.key.substr(4)];
            for (const auto& tok : kv::split_ws(e.value)) dst.push_back(kv::parse_int<DurationNs>(tok, where));
        } else {
            throw Error(ErrorKind::Config, where + ": unknown key '" + e.key + "'");
        }
    }
    if (!have_leg || !have_total) throw Error(ErrorKind::Config, what + ": 'leg' and 'total_ns' are required");
    return r;
}

}  // namespace xstack

#endif  // XSTACK_CALIBRATION_HPP
