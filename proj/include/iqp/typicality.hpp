#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "iqp/credal.hpp"
#include "iqp/csv.hpp"
#include "iqp/error.hpp"
#include "iqp/event_expr.hpp"
#include "iqp/quantum.hpp"
#include "iqp/trajectory.hpp"

namespace iqp {

inline constexpr double kBoundTolerance = 1e-8;

struct MutualTypicality {
    double ratio = 0.0;
    bool typical = false;
};

// P(A & B) / max{P(A), P(B)}, typical when >= 1 - eps.
inline MutualTypicality mutual_typicality(const TrajectoryMeasure& p, const Event& a, const Event& b, double eps) {
    const double denom = std::max(event_probability(p, a), event_probability(p, b));
    if (!(denom > 0.0)) throw InvalidArgument("typicality-analysis", "both events are null under the measure");
    const double ratio = event_probability(p, a & b) / denom;
    return {ratio, ratio >= 1.0 - eps};
}

// |Psi(S1) - Psi(S2)|^2 / |Psi(S1)|^2.
inline double relative_distance(const QuantumSystem& sys, const SSet& s1, const SSet& s2) {
    const double w1 = sset_state(sys, s1).weight;
    if (!(w1 > 0.0)) throw InvalidArgument("typicality-analysis", "base s-set " + sset_text(s1) + " has zero weight");
    return sset_distance(sys, s1, s2) / w1;
}

// Trigger of the physical rule: equal weights and small relative distance.
inline bool qtr_predicate(const QuantumSystem& sys, const SSet& s1, const SSet& s2, double eps,
                          double tau_norm = kDefaultTauNorm) {
    const double w1 = sset_state(sys, s1).weight;
    const double w2 = sset_state(sys, s2).weight;
    if (!(w1 > 0.0)) throw InvalidArgument("typicality-analysis", "base s-set " + sset_text(s1) + " has zero weight");
    if (std::abs(w1 - w2) > tau_norm)
        throw InvalidArgument("typicality-analysis", "weights differ: " + std::to_string(w1) + " vs " +
                                                         std::to_string(w2));
    return relative_distance(sys, s1, s2) <= eps;
}

struct TypicalityReport {
    SSet s1;
    SSet s2;
    double weight = 0.0;  // |Psi(S1)|^2
    double distance = 0.0;
    double relative_distance = 0.0;
    double epsilon = 0.0;
    bool qtr_fires = false;
    double measured_ratio = 0.0;
    bool passes = true;

    // "pass" / "fail" when the rule fires, otherwise "not-triggered".
    std::string verdict() const {
        if (!qtr_fires) return "not-triggered";
        return passes ? "pass" : "fail";
    }
};

namespace detail {

inline TypicalityReport typicality_base(const QuantumSystem& sys, const SSet& s1, const SSet& s2, double eps) {
    TypicalityReport r{s1, s2};
    r.weight = sset_state(sys, s1).weight;
    if (!(r.weight > 0.0)) throw InvalidArgument("typicality-analysis", "base s-set " + sset_text(s1) + " has zero weight");
    r.distance = sset_distance(sys, s1, s2);
    r.relative_distance = r.distance / r.weight;
    r.epsilon = eps;
    r.qtr_fires = r.relative_distance <= eps;
    return r;
}

}  // namespace detail

// Ratio measured under one measure.
inline TypicalityReport typicality_report(const QuantumSystem& sys, const TrajectorySpace& space,
                                          const TrajectoryMeasure& p, const SSet& s1, const SSet& s2, double eps) {
    TypicalityReport r = detail::typicality_base(sys, s1, s2, eps);
    r.measured_ratio = mutual_typicality(p, sset_event(space, s1), sset_event(space, s2), eps).ratio;
    r.passes = !r.qtr_fires || r.measured_ratio >= 1.0 - eps - kBoundTolerance;
    return r;
}

// Ratio as a lower bound over the credal set: P_*(S1 & S2) / max{P^*(S1), P^*(S2)}.
inline TypicalityReport typicality_report(const QuantumSystem& sys, const ConstraintSet& cs, const SSet& s1,
                                          const SSet& s2, double eps) {
    TypicalityReport r = detail::typicality_base(sys, s1, s2, eps);
    const Event a = sset_event(cs.space, s1);
    const Event b = sset_event(cs.space, s2);
    const BoundsResult both = lower_upper(cs, a & b);
    const BoundsResult ba = lower_upper(cs, a);
    const BoundsResult bb = lower_upper(cs, b);
    if (both.status != BoundsStatus::Solved || ba.status != BoundsStatus::Solved || bb.status != BoundsStatus::Solved)
        throw InvalidArgument("typicality-analysis", "credal set is empty");
    const double denom = std::max(ba.upper, bb.upper);
    if (!(denom > 0.0)) throw InvalidArgument("typicality-analysis", "both s-sets are null on the credal set");
    r.measured_ratio = std::clamp(both.lower / denom, 0.0, 1.0);
    r.passes = !r.qtr_fires || r.measured_ratio >= 1.0 - eps - kBoundTolerance;
    return r;
}

struct CrossTimeBound {
    double lo = 0.0;
    double hi = 0.0;
    double intersection_weight = 0.0;  // |Psi(S2 & S2')|^2
    double distance = 0.0;             // |Psi(S1) - Psi(S2)|^2
};

// Interval [w' - d, w' + d] that must contain P(S1 & S2') on the typicality
// credal set, where w' is the weight of the same-time intersection S2 & S2'.
inline CrossTimeBound cross_time_bound(const QuantumSystem& sys, const SSet& s1, const SSet& s2, const SSet& s2p,
                                       double tau_norm = kDefaultTauNorm) {
    if (s2.time != s2p.time)
        throw InvalidArgument("typicality-analysis", "S2 and S2' must share a time (" + std::to_string(s2.time) +
                                                         " vs " + std::to_string(s2p.time) + ")");
    const double w1 = sset_state(sys, s1).weight;
    const double w2 = sset_state(sys, s2).weight;
    if (std::abs(w1 - w2) > tau_norm)
        throw InvalidArgument("typicality-analysis", "S1 and S2 have different weights: " + std::to_string(w1) +
                                                         " vs " + std::to_string(w2));
    CrossTimeBound b;
    b.intersection_weight = sset_state(sys, SSet{s2.time, s2.region.intersect(s2p.region)}).weight;
    b.distance = sset_distance(sys, s1, s2);
    b.lo = b.intersection_weight - b.distance;
    b.hi = b.intersection_weight + b.distance;
    return b;
}

// A declared branch: s-sets (t, D_t) on consecutive grid times with equal
// weights. `epsilon` is the largest relative distance to the first s-set.
struct Branch {
    std::string name;
    std::vector<SSet> ssets;
    double weight = 0.0;
    double epsilon = 0.0;

    const SSet& base() const { return ssets.front(); }
};

inline Branch make_branch(const QuantumSystem& sys, std::vector<SSet> ssets, double tau_norm = kDefaultTauNorm,
                          std::string name = {}) {
    if (ssets.empty()) throw InvalidArgument("typicality-analysis", "branch has no s-sets");
    for (std::size_t i = 1; i < ssets.size(); ++i)
        if (ssets[i].time != ssets[i - 1].time + 1)
            throw InvalidArgument("typicality-analysis", "branch times must be consecutive grid points");
    Branch b{std::move(name), std::move(ssets)};
    b.weight = sset_state(sys, b.base()).weight;
    if (!(b.weight > 0.0)) throw InvalidArgument("typicality-analysis", "branch base has zero weight");
    for (const SSet& s : b.ssets) {
        const double w = sset_state(sys, s).weight;
        if (std::abs(w - b.weight) > tau_norm)
            throw InvalidArgument("typicality-analysis", "branch s-set " + sset_text(s) + " has weight " +
                                                             std::to_string(w) + ", base has " +
                                                             std::to_string(b.weight));
        b.epsilon = std::max(b.epsilon, sset_distance(sys, b.base(), s) / b.weight);
    }
    return b;
}

// Number of branch times at which the trajectory sits inside D_t.
inline std::size_t branch_hits(const TrajectorySpace& space, const Branch& branch, std::size_t index) {
    std::size_t hits = 0;
    for (const SSet& s : branch.ssets)
        if (s.region.contains(space.label_at(index, s.time))) ++hits;
    return hits;
}

// Y(lambda): fraction of branch times spent inside the branch regions.
inline double branch_fraction(const TrajectorySpace& space, const Branch& branch, std::size_t index) {
    return static_cast<double>(branch_hits(space, branch, index)) / static_cast<double>(branch.ssets.size());
}

struct BranchStats {
    double expectation = 0.0;  // E_P(Y | base)
    double tail = 0.0;         // P(Y <= 1 - delta | base)
    double delta = 0.0;
    std::size_t n_times = 0;
    double base_probability = 0.0;
};

// Statistics of Y conditioned on an arbitrary base event.
inline BranchStats branch_stats_given(const TrajectoryMeasure& p, const TrajectorySpace& space, const Branch& branch,
                                      const Event& base, double delta) {
    if (p.size() != space.size() || base.size() != space.size())
        throw InvalidArgument("typicality-analysis", "measure/event dimension mismatch");
    const std::size_t n = branch.ssets.size();
    BranchStats st;
    st.delta = delta;
    st.n_times = n;
    st.base_probability = event_probability(p, base);
    if (!(st.base_probability > 0.0)) throw InvalidArgument("typicality-analysis", "base event is null");
    // Y <= 1 - delta  <=>  misses >= delta * n, compared on the integer count.
    const double miss_threshold = delta * static_cast<double>(n) - 1e-9;
    double mass_y = 0.0;
    double mass_tail = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (!base.test(i) || p.probs[i] == 0.0) continue;
        const std::size_t hits = branch_hits(space, branch, i);
        mass_y += p.probs[i] * static_cast<double>(hits) / static_cast<double>(n);
        if (static_cast<double>(n - hits) >= miss_threshold) mass_tail += p.probs[i];
    }
    st.expectation = mass_y / st.base_probability;
    st.tail = mass_tail / st.base_probability;
    return st;
}

inline BranchStats branch_stats(const TrajectoryMeasure& p, const TrajectorySpace& space, const Branch& branch,
                                double delta) {
    return branch_stats_given(p, space, branch, sset_event(space, branch.base()), delta);
}

struct BranchSample {
    std::string source;
    BranchStats stats;
    bool expectation_ok = true;
    bool tail_ok = true;
};

struct BranchBoundReport {
    double epsilon = 0.0;
    double delta = 0.0;
    double expectation_bound = 0.0;  // 1 - epsilon
    double tail_bound = 0.0;         // epsilon / delta
    bool expectation_vacuous = false;
    bool tail_vacuous = false;
    std::vector<BranchSample> samples;
    double worst_expectation = 1.0;
    double worst_tail = 0.0;

    bool passed() const {
        return std::all_of(samples.begin(), samples.end(), [](const BranchSample& s) { return s.expectation_ok && s.tail_ok; });
    }

    std::string expectation_verdict() const {
        if (expectation_vacuous) return "vacuous";
        return std::all_of(samples.begin(), samples.end(), [](const BranchSample& s) { return s.expectation_ok; }) ? "pass"
                                                                                                                : "fail";
    }
    std::string tail_verdict() const {
        if (tail_vacuous) return "vacuous";
        return std::all_of(samples.begin(), samples.end(), [](const BranchSample& s) { return s.tail_ok; }) ? "pass"
                                                                                                          : "fail";
    }
};

namespace detail {

// Uniform double in [-1, 1) from the top 53 bits; identical on every platform.
inline double signed_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

}  // namespace detail

// Draws `samples` extreme points of the credal set by minimizing seeded random
// linear objectives (plus the product witness of `sys` when it belongs to the
// set) and checks E(Y) >= 1 - eps and P(Y <= 1 - delta) <= eps / delta on each.
inline BranchBoundReport verify_branch_bounds(const ConstraintSet& cs, const Branch& branch, double delta, std::size_t samples,
                            std::uint64_t seed, const QuantumSystem* sys = nullptr) {
    if (!(delta > 0.0)) throw InvalidArgument("typicality-analysis", "delta must be positive");
    BranchBoundReport rep;
    rep.epsilon = branch.epsilon;
    rep.delta = delta;
    rep.expectation_bound = 1.0 - branch.epsilon;
    rep.tail_bound = branch.epsilon / delta;
    rep.expectation_vacuous = rep.expectation_bound <= 0.0;
    rep.tail_vacuous = rep.tail_bound >= 1.0;

    auto record = [&](std::string source, const TrajectoryMeasure& p) {
        BranchSample s{std::move(source), branch_stats(p, cs.space, branch, delta)};
        s.expectation_ok = rep.expectation_vacuous || s.stats.expectation >= rep.expectation_bound - kBoundTolerance;
        s.tail_ok = rep.tail_vacuous || s.stats.tail <= rep.tail_bound + kBoundTolerance;
        rep.worst_expectation = std::min(rep.worst_expectation, s.stats.expectation);
        rep.worst_tail = std::max(rep.worst_tail, s.stats.tail);
        rep.samples.push_back(std::move(s));
    };

    if (!feasibility(cs).feasible()) throw InvalidArgument("typicality-analysis", "credal set is empty");
    if (sys != nullptr) {
        const TrajectoryMeasure product = born_product_witness(*sys, cs.space);
        if (max_violation(cs, product) <= kFeasibilityTolerance) record("product", product);
    }
    std::mt19937_64 rng(seed);
    std::vector<double> objective(cs.space.size());
    for (std::size_t k = 0; k < samples; ++k) {
        for (double& c : objective) c = detail::signed_unit(rng);
        auto vertex = optimize(cs, objective, lp::Sense::Minimize);
        if (!vertex) throw NumericalError("typicality-analysis", "credal set became empty while sampling");
        record("vertex-" + std::to_string(k), *vertex);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// CSV rows

inline std::string typicality_csv_header() {
    return "s1,s2,weight,distance,relative_distance,ratio,epsilon,qtr_fires,verdict\n";
}

inline std::string typicality_csv_row(const TypicalityReport& r) {
    return csv::quote(sset_text(r.s1)) + "," + csv::quote(sset_text(r.s2)) + "," + csv::fixed(r.weight) + "," +
           csv::fixed(r.distance) + "," + csv::fixed(r.relative_distance) + "," + csv::fixed(r.measured_ratio) + "," +
           csv::fixed(r.epsilon) + "," + (r.qtr_fires ? "yes" : "no") + "," + r.verdict() + "\n";
}

inline std::string branch_csv_header() {
    return "branch,sample,expectation,tail,expectation_bound,tail_bound,delta,expectation_verdict,tail_verdict\n";
}

inline std::string branch_csv_rows(const Branch& branch, const BranchBoundReport& rep) {
    std::string out;
    auto verdict = [](bool vacuous, bool ok) { return std::string(vacuous ? "vacuous" : ok ? "pass" : "fail"); };
    for (const BranchSample& s : rep.samples) {
        out += csv::quote(branch.name) + "," + s.source + "," + csv::fixed(s.stats.expectation) + "," +
               csv::fixed(s.stats.tail) + "," + csv::fixed(rep.expectation_bound) + "," + csv::fixed(rep.tail_bound) +
               "," + csv::fixed(rep.delta) + "," + verdict(rep.expectation_vacuous, s.expectation_ok) + "," +
               verdict(rep.tail_vacuous, s.tail_ok) + "\n";
    }
    return out;
}

}  // namespace iqp
