#pragma once

// Credal sets on the trajectory space as linear systems over the probability
// simplex, and the LP queries on them: feasibility with a self-checked
// certificate, lower/upper probabilities, extreme points, and the lower-bound
// non-emptiness criterion.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iqp/csv.hpp"
#include "iqp/error.hpp"
#include "iqp/event_expr.hpp"
#include "iqp/quantum.hpp"
#include "iqp/simplex.hpp"
#include "iqp/trajectory.hpp"

namespace iqp {

inline constexpr double kFeasibilityTolerance = 1e-9;
inline constexpr double kDefaultTauNorm = 1e-9;
// Right-hand sides at or below this are implied by non-negativity.
inline constexpr double kVacuousTolerance = 1e-12;
// Slack on the distance filter of the epsilon variant, so that exact-zero
// distances survive rounding.
inline constexpr double kDistanceSlack = 1e-12;

enum class Rule { Born, Qtr, QtrMin, QtrEps, QtrAlpha, Custom };

inline std::string rule_name(Rule r) {
    switch (r) {
        case Rule::Born: return "born";
        case Rule::Qtr: return "qtr";
        case Rule::QtrMin: return "qtr-min";
        case Rule::QtrEps: return "qtr-eps";
        case Rule::QtrAlpha: return "qtr-alpha";
        case Rule::Custom: return "custom";
    }
    return "unknown";
}

struct Provenance {
    Rule rule = Rule::Custom;
    double parameter = 0.0;
    std::optional<SSet> first;
    std::optional<SSet> second;
    std::string expression;  // Custom constraints: the source expression

    std::string tag() const {
        if (rule == Rule::QtrEps || rule == Rule::QtrAlpha) return rule_name(rule) + "(" + csv::fixed(parameter) + ")";
        return rule_name(rule);
    }
};

// P(event) >= rhs or P(event) = rhs. Coefficients are the event's indicator.
struct LinearConstraint {
    Event event;
    lp::Relation relation = lp::Relation::GreaterEq;
    double rhs = 0.0;
    Provenance provenance;
};

struct ConstraintSet {
    explicit ConstraintSet(TrajectorySpace s) : space(std::move(s)) {}

    TrajectorySpace space;
    std::vector<LinearConstraint> constraints;
    std::string family;
    double tau_norm = kDefaultTauNorm;
    std::size_t emitted = 0;
    std::size_t skipped = 0;   // vacuous: rhs <= 0
    std::size_t filtered = 0;  // pair outside the rule's class (same time, unequal norms, too far)

    void append(const ConstraintSet& other) {
        if (!(other.space == space)) throw InvalidArgument("credal-lp", "constraint sets over different spaces");
        constraints.insert(constraints.end(), other.constraints.begin(), other.constraints.end());
        family = family.empty() ? other.family : family + "+" + other.family;
        emitted += other.emitted;
        skipped += other.skipped;
        filtered += other.filtered;
    }

    void add(LinearConstraint c) {
        if (c.event.size() != space.size())
            throw InvalidArgument("credal-lp", "constraint event has dimension " + std::to_string(c.event.size()) +
                                                   ", space has " + std::to_string(space.size()));
        constraints.push_back(std::move(c));
        ++emitted;
    }
};

using SSetPair = std::pair<SSet, SSet>;

// ---------------------------------------------------------------------------
// Constraint generation

namespace detail {

inline void check_space(const QuantumSystem& sys, const TrajectorySpace& space) {
    if (sys.num_labels() != space.num_labels() || sys.num_times() != space.num_times())
        throw InvalidArgument("credal-lp", "trajectory space does not match the quantum system");
}

}  // namespace detail

// P(S) >= |Psi(S)|^2 and P(S^c) >= 1 - |Psi(S)|^2 for every S; together with
// normalization they pin P(S).
inline ConstraintSet born_constraints(const QuantumSystem& sys, const TrajectorySpace& space,
                                      std::span<const SSet> family) {
    detail::check_space(sys, space);
    if (family.empty()) throw InvalidArgument("credal-lp", "Born family is empty");
    ConstraintSet cs(space);
    cs.family = "born";
    for (const SSet& s : family) {
        const double w = sset_state(sys, s).weight;
        const SSet sc{s.time, s.region.complement()};
        for (const auto& [target, rhs] : {std::pair{s, w}, std::pair{sc, 1.0 - w}}) {
            if (rhs <= kVacuousTolerance) {
                ++cs.skipped;
                continue;
            }
            cs.add({sset_event(space, target), lp::Relation::GreaterEq, rhs, {Rule::Born, 0.0, target, {}, {}}});
        }
    }
    return cs;
}

// Every non-empty region with at most `max_region_size` labels, at every time.
inline std::vector<Region> regions_up_to(std::size_t num_labels, std::size_t max_region_size) {
    if (num_labels > 20) throw InvalidArgument("credal-lp", "region enumeration limited to m <= 20");
    std::vector<Region> out;
    for (unsigned long long mask = 1; mask < (1ULL << num_labels); ++mask) {
        const Region r = Region::from_mask(num_labels, mask);
        if (r.count() <= max_region_size) out.push_back(r);
    }
    return out;
}

inline std::vector<SSet> born_family(const QuantumSystem& sys, std::size_t max_region_size) {
    std::vector<SSet> family;
    for (std::size_t t = 0; t < sys.num_times(); ++t)
        for (Region& r : regions_up_to(sys.num_labels(), max_region_size)) family.push_back({t, std::move(r)});
    return family;
}

// All region pairs (|D1|, |D2| <= k, non-empty) between times t1 and t2.
inline std::vector<SSetPair> pair_family(const QuantumSystem& sys, std::size_t t1, std::size_t t2,
                                         std::size_t max_region_size) {
    sys.check_time(t1);
    sys.check_time(t2);
    const auto regions = regions_up_to(sys.num_labels(), max_region_size);
    std::vector<SSetPair> out;
    for (const Region& a : regions)
        for (const Region& b : regions) out.push_back({SSet{t1, a}, SSet{t2, b}});
    return out;
}

struct QtrVariant {
    Rule rule = Rule::Qtr;
    double parameter = 0.0;

    static QtrVariant standard() { return {Rule::Qtr, 0.0}; }
    static QtrVariant min() { return {Rule::QtrMin, 0.0}; }
    static QtrVariant eps(double e) { return {Rule::QtrEps, e}; }
    static QtrVariant alpha(double a) { return {Rule::QtrAlpha, a}; }
};

// Typicality lower bounds P(S1 & S2) >= f(S1, S2) for cross-time pairs.
//   qtr:        equal norms, f = w1 - d
//   qtr-min:    any norms,   f = min(w1, w2) - d
//   qtr-eps:    equal norms and d <= eps * w1, f = w1 - d
//   qtr-alpha:  equal norms, f = w1 - alpha * d
// with w = |Psi(S)|^2 and d = |Psi(S1) - Psi(S2)|^2.
inline ConstraintSet qtr_variant_constraints(const QuantumSystem& sys, const TrajectorySpace& space,
                                             std::span<const SSetPair> pairs, QtrVariant variant,
                                             double tau_norm = kDefaultTauNorm) {
    detail::check_space(sys, space);
    if (!(tau_norm >= 0.0)) throw InvalidArgument("credal-lp", "tau_norm must be non-negative");
    if (variant.rule == Rule::QtrEps && !(variant.parameter >= 0.0))
        throw InvalidArgument("credal-lp", "epsilon must be non-negative");
    if (variant.rule == Rule::QtrAlpha && !(variant.parameter > 0.0))
        throw InvalidArgument("credal-lp", "alpha must be positive");
    if (variant.rule != Rule::Qtr && variant.rule != Rule::QtrMin && variant.rule != Rule::QtrEps &&
        variant.rule != Rule::QtrAlpha)
        throw InvalidArgument("credal-lp", "not a typicality rule: " + rule_name(variant.rule));

    ConstraintSet cs(space);
    cs.family = rule_name(variant.rule);
    cs.tau_norm = tau_norm;
    for (const auto& [s1, s2] : pairs) {
        if (s1.time == s2.time) {  // the intersection would itself be an s-set
            ++cs.filtered;
            continue;
        }
        const SSetState a = sset_state(sys, s1);
        const SSetState b = sset_state(sys, s2);
        const double d = (a.amplitudes - b.amplitudes).squaredNorm();
        const bool equal_norm = std::abs(a.weight - b.weight) <= tau_norm;
        double rhs = 0.0;
        switch (variant.rule) {
            case Rule::QtrMin: rhs = std::min(a.weight, b.weight) - d; break;
            case Rule::QtrAlpha: rhs = a.weight - variant.parameter * d; break;
            default: rhs = a.weight - d; break;
        }
        if (variant.rule != Rule::QtrMin && !equal_norm) {
            ++cs.filtered;
            continue;
        }
        if (variant.rule == Rule::QtrEps && d > variant.parameter * a.weight + kDistanceSlack) {
            ++cs.filtered;
            continue;
        }
        if (rhs <= kVacuousTolerance) {
            ++cs.skipped;
            continue;
        }
        cs.add({sset_event(space, s1) & sset_event(space, s2), lp::Relation::GreaterEq, rhs,
                {variant.rule, variant.parameter, s1, s2, {}}});
    }
    return cs;
}

inline ConstraintSet qtr_constraints(const QuantumSystem& sys, const TrajectorySpace& space,
                                     std::span<const SSetPair> pairs, double tau_norm = kDefaultTauNorm) {
    return qtr_variant_constraints(sys, space, pairs, QtrVariant::standard(), tau_norm);
}

// P(event) (>= | =) rhs for a user-supplied event expression.
inline LinearConstraint custom_constraint(const TrajectorySpace& space, const std::string& expression, double rhs,
                                          lp::Relation relation = lp::Relation::GreaterEq) {
    return {parse_event(expression, space), relation, rhs, {Rule::Custom, 0.0, {}, {}, expression}};
}

// P(lambda) = prod_t |Psi(t)[lambda(t)]|^2: independent coupling of the Born
// marginals.
inline TrajectoryMeasure born_product_witness(const QuantumSystem& sys, const TrajectorySpace& space) {
    detail::check_space(sys, space);
    std::vector<std::vector<double>> marginals(sys.num_times());
    for (std::size_t t = 0; t < sys.num_times(); ++t) {
        const StateVector& psi = sys.state(t);
        for (Eigen::Index i = 0; i < psi.size(); ++i) marginals[t].push_back(std::norm(psi[i]));
    }
    TrajectoryMeasure p{std::vector<double>(space.size(), 1.0)};
    for (std::size_t i = 0; i < space.size(); ++i)
        for (std::size_t t = 0; t < space.num_times(); ++t) p.probs[i] *= marginals[t][space.label_at(i, t)];
    return p;
}

// ---------------------------------------------------------------------------
// LP queries

// Largest violation of any constraint (or of the simplex) by the measure.
inline double max_violation(const ConstraintSet& cs, const TrajectoryMeasure& p) {
    if (p.size() != cs.space.size()) throw InvalidArgument("credal-lp", "measure dimension mismatch");
    double worst = 0.0;
    double sum = 0.0;
    for (double v : p.probs) {
        worst = std::max(worst, -v);
        sum += v;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
    for (const LinearConstraint& c : cs.constraints) {
        const double value = event_probability(p, c.event);
        const double gap = c.relation == lp::Relation::Equal ? std::abs(value - c.rhs) : c.rhs - value;
        worst = std::max(worst, gap);
    }
    return worst;
}

struct FarkasCertificate {
    // y_i >= 0 on >= constraints (free on =) and a normalization multiplier
    // y_0 = -mu such that sum_i y_i 1_{A_i}(w) <= mu for every trajectory w.
    // Then sum_i y_i rhs_i <= mu for every measure, contradicted by `margin`.
    std::vector<double> multipliers;
    double normalization = 0.0;
    double margin = 0.0;
};

struct FeasibilityCertificate {
    std::optional<TrajectoryMeasure> witness;
    std::optional<FarkasCertificate> farkas;
    double violation = 0.0;       // witness: max constraint violation
    double infeasibility = 0.0;   // phase-1 optimum
    std::size_t pivots = 0;

    bool feasible() const { return witness.has_value(); }
};

namespace detail {

inline lp::Problem to_problem(const ConstraintSet& cs) {
    lp::Problem p;
    p.num_vars = cs.space.size();
    p.rows.reserve(cs.constraints.size() + 1);
    for (const LinearConstraint& c : cs.constraints) {
        if (c.event.size() != p.num_vars) throw InvalidArgument("credal-lp", "constraint dimension mismatch");
        if (c.relation == lp::Relation::LessEq)
            throw InvalidArgument("credal-lp", "constraints must be lower bounds or equalities");
        lp::Row row{std::vector<double>(p.num_vars, 0.0), c.relation, c.rhs};
        for (std::size_t i = 0; i < p.num_vars; ++i)
            if (c.event.test(i)) row.coeffs[i] = 1.0;
        p.rows.push_back(std::move(row));
    }
    p.rows.push_back({std::vector<double>(p.num_vars, 1.0), lp::Relation::Equal, 1.0});
    return p;
}

inline TrajectoryMeasure checked_witness(const ConstraintSet& cs, std::vector<double> x, double* violation) {
    TrajectoryMeasure p{std::move(x)};
    const double v = max_violation(cs, p);
    if (v > kFeasibilityTolerance)
        throw NumericalError("credal-lp", "LP witness violates a constraint by " + std::to_string(v));
    if (violation != nullptr) *violation = v;
    return p;
}

// Rebuilds mu from the multipliers by direct summation and normalizes so that
// mu = 1 whenever mu > 0.
inline FarkasCertificate checked_farkas(const ConstraintSet& cs, const std::vector<double>& y_raw) {
    const std::size_t k = cs.constraints.size();
    std::vector<double> y(y_raw.begin(), y_raw.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t i = 0; i < k; ++i) {
        if (cs.constraints[i].relation != lp::Relation::GreaterEq) continue;
        if (y[i] < -kFeasibilityTolerance)
            throw NumericalError("credal-lp", "Farkas multiplier " + std::to_string(i) + " is negative");
        y[i] = std::max(y[i], 0.0);
    }
    std::vector<double> load(cs.space.size(), 0.0);
    double bound = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (y[i] == 0.0) continue;
        bound += y[i] * cs.constraints[i].rhs;
        for (std::size_t w : cs.constraints[i].event.members()) load[w] += y[i];
    }
    const double mu = load.empty() ? 0.0 : *std::max_element(load.begin(), load.end());
    double scale = 1.0;
    if (mu > 0.0) {
        scale = 1.0 / mu;
    } else {
        double biggest = 0.0;
        for (double v : y) biggest = std::max(biggest, std::abs(v));
        if (biggest > 0.0) scale = 1.0 / biggest;
    }
    FarkasCertificate f;
    f.margin = (bound - mu) * scale;
    f.normalization = -mu * scale;
    f.multipliers.resize(k);
    for (std::size_t i = 0; i < k; ++i) f.multipliers[i] = y[i] * scale;
    if (!(f.margin >= kFeasibilityTolerance))
        throw NumericalError("credal-lp", "infeasibility certificate margin " + std::to_string(f.margin) +
                                              " below tolerance");
    return f;
}

}  // namespace detail

inline FeasibilityCertificate feasibility(const ConstraintSet& cs, const lp::Options& options = {}) {
    const lp::Problem problem = detail::to_problem(cs);
    const lp::Result r = lp::find_feasible(problem, options);
    FeasibilityCertificate cert;
    cert.infeasibility = r.infeasibility;
    cert.pivots = r.pivots;
    if (r.status == lp::Status::Infeasible) {
        cert.farkas = detail::checked_farkas(cs, r.farkas);
        return cert;
    }
    if (r.status != lp::Status::Optimal) throw NumericalError("credal-lp", "phase-1 LP did not terminate optimally");
    cert.witness = detail::checked_witness(cs, r.x, &cert.violation);
    return cert;
}

// Extreme point minimizing (or maximizing) sum_w objective[w] P({w}) over the
// credal set; empty when the set is empty.
inline std::optional<TrajectoryMeasure> optimize(const ConstraintSet& cs, std::span<const double> objective,
                                                 lp::Sense sense, const lp::Options& options = {}) {
    const lp::Result r = lp::solve(detail::to_problem(cs), objective, sense, options);
    if (r.status == lp::Status::Infeasible) return std::nullopt;
    if (r.status != lp::Status::Optimal) throw NumericalError("credal-lp", "bounded LP reported unbounded");
    return detail::checked_witness(cs, r.x, nullptr);
}

enum class BoundsStatus { Solved, Infeasible };

struct BoundsResult {
    BoundsStatus status = BoundsStatus::Infeasible;
    double lower = 0.0;
    double upper = 0.0;
    std::optional<TrajectoryMeasure> argmin;
    std::optional<TrajectoryMeasure> argmax;
};

inline BoundsResult lower_upper(const ConstraintSet& cs, const Event& a, const lp::Options& options = {}) {
    if (a.size() != cs.space.size()) throw InvalidArgument("credal-lp", "event dimension mismatch");
    std::vector<double> indicator(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.test(i)) indicator[i] = 1.0;
    BoundsResult out;
    auto lo = optimize(cs, indicator, lp::Sense::Minimize, options);
    if (!lo) return out;
    auto hi = optimize(cs, indicator, lp::Sense::Maximize, options);
    if (!hi) throw NumericalError("credal-lp", "feasibility changed between LP solves");
    out.status = BoundsStatus::Solved;
    out.lower = event_probability(*lo, a);
    out.upper = event_probability(*hi, a);
    out.argmin = std::move(lo);
    out.argmax = std::move(hi);
    return out;
}

// Optimum of  max sum_i a_i f_i  s.t.  a >= 0,  sum_i a_i 1_{A_i}(w) <= 1 for all w,
// over lower-bound constraints P(A_i) >= f_i. A value <= 1 means the credal set
// is non-empty.
inline double huber_check(const ConstraintSet& cs, const lp::Options& options = {}) {
    const std::size_t k = cs.constraints.size();
    if (k == 0) return 0.0;
    lp::Problem p;
    p.num_vars = k;
    p.rows.assign(cs.space.size(), lp::Row{std::vector<double>(k, 0.0), lp::Relation::LessEq, 1.0});
    std::vector<double> objective(k);
    for (std::size_t i = 0; i < k; ++i) {
        const LinearConstraint& c = cs.constraints[i];
        if (c.relation != lp::Relation::GreaterEq)
            throw InvalidArgument("credal-lp", "huber_check needs lower-bound constraints only");
        if (c.event.empty() && c.rhs > 0.0)
            throw InvalidArgument("credal-lp", "malformed constraint " + std::to_string(i) +
                                                   ": positive lower bound on the empty event");
        objective[i] = c.rhs;
        for (std::size_t w : c.event.members()) p.rows[w].coeffs[i] = 1.0;
    }
    const lp::Result r = lp::solve(p, objective, lp::Sense::Maximize, options);
    if (r.status == lp::Status::Unbounded) throw NumericalError("credal-lp", "Huber LP unbounded");
    if (r.status != lp::Status::Optimal) throw NumericalError("credal-lp", "Huber LP infeasible");
    return r.objective;
}

// ---------------------------------------------------------------------------
// CSV export

inline std::string relation_text(lp::Relation r) {
    switch (r) {
        case lp::Relation::GreaterEq: return ">=";
        case lp::Relation::LessEq: return "<=";
        case lp::Relation::Equal: return "=";
    }
    return "?";
}

inline std::string constraints_csv(const ConstraintSet& cs) {
    std::string out = "tag,relation,rhs,s1,s2\n";
    for (const LinearConstraint& c : cs.constraints) {
        const Provenance& p = c.provenance;
        const std::string first = p.rule == Rule::Custom ? p.expression : (p.first ? sset_text(*p.first) : "");
        const std::string second = p.second ? sset_text(*p.second) : "";
        out += csv::quote(p.tag()) + "," + relation_text(c.relation) + "," + csv::fixed(c.rhs) + "," +
               csv::quote(first) + "," + csv::quote(second) + "\n";
    }
    return out;
}

inline std::string measure_csv(const TrajectoryMeasure& p) {
    std::string out = "trajectory_index,probability\n";
    for (std::size_t i = 0; i < p.size(); ++i) out += std::to_string(i) + "," + csv::fixed(p.probs[i]) + "\n";
    return out;
}

inline std::string farkas_csv(const ConstraintSet& cs, const FarkasCertificate& f) {
    std::string out = "row,tag,relation,rhs,multiplier\n";
    for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
        const LinearConstraint& c = cs.constraints[i];
        out += std::to_string(i) + "," + csv::quote(c.provenance.tag()) + "," + relation_text(c.relation) + "," +
               csv::fixed(c.rhs) + "," + csv::fixed(f.multipliers[i]) + "\n";
    }
    out += "normalization,simplex,=," + csv::fixed(1.0) + "," + csv::fixed(f.normalization) + "\n";
    return out;
}

}  // namespace iqp
