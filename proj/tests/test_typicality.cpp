#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "iqp/scenario.hpp"
#include "iqp/typicality.hpp"

using namespace iqp;

namespace {

SSet ss(std::size_t t, std::initializer_list<std::size_t> labels) { return {t, Region::of(2, labels)}; }

ConstraintSet scenario_constraints(const std::string& name, QuantumSystem& sys_out) {
    const ScenarioConfig c = builtin_scenario(name);
    sys_out = make_system(c);
    return build_constraints(c, sys_out, TrajectorySpace::of(sys_out));
}

QuantumSystem placeholder() { return fixtures::uniform_identity(); }

}  // namespace

TEST(MutualTypicality, IdenticalAndDisjoint) {
    const auto p = TrajectoryMeasure::uniform(4);
    const TrajectorySpace space(2, 2);
    const Event a = sset_event(space, ss(0, {0}));
    EXPECT_DOUBLE_EQ(mutual_typicality(p, a, a, 0.0).ratio, 1.0);
    EXPECT_TRUE(mutual_typicality(p, a, a, 0.0).typical);
    EXPECT_DOUBLE_EQ(mutual_typicality(p, a, !a, 0.5).ratio, 0.0);
    EXPECT_FALSE(mutual_typicality(p, a, !a, 0.5).typical);
    EXPECT_THROW(mutual_typicality(p, Event(4), Event(4), 0.1), InvalidArgument);
}

TEST(MutualTypicality, BeamSplitterWitness) {
    auto sys = placeholder();
    const ConstraintSet cs = scenario_constraints("beam-splitter", sys);
    const auto cert = feasibility(cs);
    ASSERT_TRUE(cert.feasible());
    const auto r = mutual_typicality(*cert.witness, sset_event(cs.space, ss(1, {0})), sset_event(cs.space, ss(2, {0})),
                                     1e-9);
    EXPECT_GE(r.ratio, 1.0 - 1e-9);
    EXPECT_TRUE(r.typical);
}

TEST(QtrPredicate, Examples) {
    const auto mz = fixtures::mach_zehnder();
    EXPECT_TRUE(qtr_predicate(mz, ss(1, {0}), ss(1, {0}), 1e-12));
    // (1,{0}) and (1,{1}) have equal weight; their pullbacks are orthogonal
    EXPECT_NEAR(relative_distance(mz, ss(1, {0}), ss(1, {1})), 2.0, 1e-12);
    EXPECT_FALSE(qtr_predicate(mz, ss(1, {0}), ss(1, {1}), 0.1));
    const auto bs = fixtures::hadamard_identity();
    EXPECT_TRUE(qtr_predicate(bs, ss(1, {0}), ss(2, {0}), 1e-9));
    EXPECT_THROW(qtr_predicate(bs, ss(0, {1}), ss(1, {0}), 0.1), InvalidArgument);
    EXPECT_THROW(qtr_predicate(bs, ss(0, {0}), ss(1, {0}), 0.1), InvalidArgument);
}

TEST(QtrPredicate, MachZehnderCrossTimeRelativeDistance) {
    // (1,{0}) has weight 1/2 and distance 1/2 from (2,{0}) taken with the same
    // weight normalization: the ratio is 1.
    const auto mz = fixtures::mach_zehnder();
    EXPECT_NEAR(sset_distance(mz, ss(1, {0}), ss(2, {0})), 0.5, 1e-12);
    EXPECT_NEAR(relative_distance(mz, ss(1, {0}), ss(2, {0})), 1.0, 1e-12);
}

TEST(TypicalityReport, FiresIffRelativeDistanceSmall) {
    auto sys = placeholder();
    const ConstraintSet cs = scenario_constraints("beam-splitter", sys);
    const auto fired = typicality_report(sys, cs, ss(1, {0}), ss(2, {0}), 1e-9);
    EXPECT_TRUE(fired.qtr_fires);
    EXPECT_EQ(fired.verdict(), "pass");
    EXPECT_NEAR(fired.measured_ratio, 1.0, 1e-9);
    const auto quiet = typicality_report(sys, cs, ss(1, {0}), ss(2, {1}), 1e-9);
    EXPECT_FALSE(quiet.qtr_fires);
    EXPECT_EQ(quiet.verdict(), "not-triggered");
    EXPECT_GE(quiet.measured_ratio, -1e-9);
    EXPECT_LE(quiet.measured_ratio, 1.0 + 1e-9);
}

TEST(TypicalityReport, ChainOnWitnessesLeaky) {
    auto sys = placeholder();
    const ConstraintSet cs = scenario_constraints("leaky-branch", sys);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        std::vector<double> obj(cs.space.size());
        for (double& c : obj) c = u(rng);
        const auto p = optimize(cs, obj, lp::Sense::Minimize);
        ASSERT_TRUE(p);
        for (std::size_t t = 1; t < 4; ++t)
            for (std::size_t i = 0; i < 2; ++i) {
                const SSet s1 = ss(0, {i});
                const SSet s2 = ss(t, {i});
                const double eps = relative_distance(sys, s1, s2);
                ASSERT_LE(eps, 1e-6 + 1e-12);
                const auto r = typicality_report(sys, cs.space, *p, s1, s2, eps);
                EXPECT_TRUE(r.qtr_fires);
                EXPECT_GE(r.measured_ratio, 1.0 - eps - 1e-8);
            }
    }
}

TEST(CrossTimeBound, Examples) {
    const auto bs = fixtures::hadamard_identity();
    const auto self = cross_time_bound(bs, ss(1, {0}), ss(2, {0}), ss(2, {0}));
    EXPECT_NEAR(self.lo, 0.5, 1e-12);
    EXPECT_NEAR(self.hi, 0.5, 1e-12);
    const auto disjoint = cross_time_bound(bs, ss(1, {0}), ss(2, {0}), ss(2, {1}));
    EXPECT_NEAR(disjoint.lo, 0.0, 1e-12);
    EXPECT_NEAR(disjoint.hi, 0.0, 1e-12);
    EXPECT_THROW(cross_time_bound(bs, ss(1, {0}), ss(2, {0}), ss(1, {0})), InvalidArgument);
    EXPECT_THROW(cross_time_bound(bs, ss(0, {0}), ss(2, {0}), ss(2, {0})), InvalidArgument);
}

TEST(CrossTimeBound, GeneralDistance) {
    const auto mz = fixtures::mach_zehnder();
    // (1,{0}) vs (1,{1}) is same-time; use the equal-weight pair (1,{0}), (1,{1}) shifted: weights 1/2
    const auto b = cross_time_bound(mz, ss(1, {0}), ss(1, {1}), ss(1, {0, 1}));
    EXPECT_NEAR(b.intersection_weight, 0.5, 1e-12);
    EXPECT_NEAR(b.distance, 1.0, 1e-12);
    EXPECT_NEAR(b.lo, -0.5, 1e-12);
    EXPECT_NEAR(b.hi, 1.5, 1e-12);
}

TEST(CrossTimeBound, SandwichOnLeakyWitnesses) {
    auto sys = placeholder();
    const ConstraintSet cs = scenario_constraints("leaky-branch", sys);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        std::vector<double> obj(cs.space.size());
        for (double& c : obj) c = u(rng);
        const auto p = optimize(cs, obj, lp::Sense::Minimize);
        ASSERT_TRUE(p);
        for (std::size_t t = 1; t < 4; ++t)
            for (std::size_t i = 0; i < 2; ++i)
                for (const Region& r : regions_up_to(2, 2)) {
                    const SSet s1 = ss(0, {i});
                    const SSet s2 = ss(t, {i});
                    const auto b = cross_time_bound(sys, s1, s2, SSet{t, r});
                    const double v =
                        event_probability(*p, sset_event(cs.space, s1) & sset_event(cs.space, SSet{t, r}));
                    EXPECT_GE(v, b.lo - 1e-8);
                    EXPECT_LE(v, b.hi + 1e-8);
                }
    }
}

TEST(Branch, Construction) {
    const auto bs = fixtures::hadamard_identity();
    const Branch b = make_branch(bs, {ss(1, {0}), ss(2, {0})}, 1e-9, "r");
    EXPECT_NEAR(b.weight, 0.5, 1e-12);
    EXPECT_NEAR(b.epsilon, 0.0, 1e-12);
    EXPECT_THROW(make_branch(bs, {ss(0, {0}), ss(2, {0})}), InvalidArgument);
    EXPECT_THROW(make_branch(bs, {ss(0, {0}), ss(1, {0})}), InvalidArgument);
    EXPECT_THROW(make_branch(bs, {}), InvalidArgument);
}

TEST(BranchStats, PointMassOnConstantTrajectory) {
    const QuantumSystem sys({"a", "b"}, 3, {gates::identity(2), gates::identity(2)}, fixtures::basis(2, 0));
    const auto space = TrajectorySpace::of(sys);
    const Branch b = make_branch(sys, {ss(0, {0}), ss(1, {0}), ss(2, {0})});
    const auto st = branch_stats(born_product_witness(sys, space), space, b, 0.1);
    EXPECT_EQ(st.expectation, 1.0);
    EXPECT_EQ(st.tail, 0.0);
    EXPECT_EQ(st.n_times, 3u);
}

TEST(BranchStats, HandComputedUniform) {
    // uniform measure on 2^3 trajectories, branch {0} at t = 0, 1, 2
    const TrajectorySpace space(2, 3);
    const auto sys = QuantumSystem({"a", "b"}, 3, {gates::identity(2), gates::identity(2)}, fixtures::plus());
    const Branch b = make_branch(sys, {ss(0, {0}), ss(1, {0}), ss(2, {0})});
    const auto st = branch_stats(TrajectoryMeasure::uniform(8), space, b, 1.0 / 3.0);
    // conditioned on lambda(0) = 0: hits = 1 + Bin(2, 1/2) -> E = (1 + 1) / 3
    EXPECT_NEAR(st.expectation, 2.0 / 3.0, 1e-15);
    // Y <= 2/3 <=> at least one miss: 3/4
    EXPECT_NEAR(st.tail, 0.75, 1e-15);
    EXPECT_NEAR(st.base_probability, 0.5, 1e-15);
}

TEST(BranchStats, Properties) {
    std::mt19937_64 rng(77);
    const QuantumSystem sys({"a", "b"}, 3, {gates::identity(2), gates::identity(2)}, fixtures::plus());
    const auto space = TrajectorySpace::of(sys);
    const Branch b = make_branch(sys, {ss(0, {0}), ss(1, {0}), ss(2, {0})});
    for (int k = 0; k < 100; ++k) {
        const auto p = fixtures::random_measure(space.size(), rng);
        for (double delta : {0.1, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0}) {
            const auto st = branch_stats(p, space, b, delta);
            EXPECT_GE(st.expectation, 0.0);
            EXPECT_LE(st.expectation, 1.0 + 1e-15);
            EXPECT_GE(st.tail, 0.0);
            EXPECT_LE(st.tail, 1.0 + 1e-15);
            EXPECT_LE(st.expectation, 1.0 - st.tail * delta + 1e-12);
        }
        // conditioning on the full space is the plain expectation
        const auto all = branch_stats_given(p, space, b, Event::full(space.size()), 0.5);
        double e = 0.0;
        for (std::size_t i = 0; i < space.size(); ++i) e += p.probs[i] * branch_fraction(space, b, i);
        EXPECT_NEAR(all.expectation, e, 1e-14);
    }
    for (std::size_t i = 0; i < space.size(); ++i) {
        EXPECT_GE(branch_fraction(space, b, i), 0.0);
        EXPECT_LE(branch_fraction(space, b, i), 1.0);
    }
    EXPECT_THROW(branch_stats_given(TrajectoryMeasure::uniform(8), space, b, Event(8), 0.5), InvalidArgument);
}

TEST(BranchBounds, ZeroEpsilonBranch) {
    auto sys = placeholder();
    const ConstraintSet cs = scenario_constraints("beam-splitter", sys);
    const Branch b = make_branch(sys, {ss(1, {0}), ss(2, {0})});
    const auto rep = verify_branch_bounds(cs, b, 0.1, 20, 42, &sys);
    EXPECT_EQ(rep.samples.size(), 20u);  // product witness violates the qtr rows
    for (const auto& s : rep.samples) EXPECT_NEAR(s.stats.expectation, 1.0, 1e-9);
    EXPECT_TRUE(rep.passed());
    EXPECT_EQ(rep.expectation_verdict(), "pass");
}

TEST(BranchBounds, MillionthEpsilonTailBound) {
    auto sys = placeholder();
    const ScenarioConfig c = builtin_scenario("leaky-branch");
    const ConstraintSet cs = scenario_constraints("leaky-branch", sys);
    for (const auto& spec : c.branches) {
        const Branch b = scenario_branch(c, sys, spec);
        EXPECT_NEAR(b.epsilon, 1e-6, 1e-12);
        const auto rep = verify_branch_bounds(cs, b, 1e-3, 20, 42, &sys);
        EXPECT_NEAR(rep.tail_bound, 1e-3, 1e-12);
        EXPECT_FALSE(rep.tail_vacuous);
        EXPECT_GE(rep.samples.size(), 20u);
        EXPECT_TRUE(rep.passed());
        EXPECT_LE(rep.worst_tail, 1e-3 + 1e-8);
        EXPECT_GE(rep.worst_expectation, 1.0 - 1e-6 - 1e-8);
    }
}

TEST(BranchBounds, MachZehnderIsVacuous) {
    auto sys = placeholder();
    const ConstraintSet cs = scenario_constraints("mach-zehnder", sys);
    // (1,{0}) weight 1/2, (2,{0}) weight 1: use (1,{0}), (2,{0,1})-free branch of equal weights
    const Branch b = make_branch(sys, {ss(0, {0, 1}), ss(1, {0, 1}), ss(2, {0})});
    EXPECT_NEAR(b.epsilon, 0.0, 1e-12);
    const Branch arm = make_branch(sys, {ss(1, {0}), ss(2, {1})}, 1.0);  // unequal weights accepted by loose tau
    EXPECT_GE(arm.epsilon, 1.0 - 1e-12);
    const auto rep = verify_branch_bounds(cs, arm, 0.5, 5, 1, &sys);
    EXPECT_TRUE(rep.expectation_vacuous);
    EXPECT_TRUE(rep.tail_vacuous);
    EXPECT_EQ(rep.expectation_verdict(), "vacuous");
    EXPECT_EQ(rep.tail_verdict(), "vacuous");
}

TEST(BranchBounds, SeededSamplingIsReproducible) {
    auto sys = placeholder();
    const ConstraintSet cs = scenario_constraints("leaky-branch", sys);
    const Branch b = make_branch(sys, {ss(0, {0}), ss(1, {0}), ss(2, {0}), ss(3, {0})});
    const auto a = verify_branch_bounds(cs, b, 1e-3, 8, 7, &sys);
    const auto c = verify_branch_bounds(cs, b, 1e-3, 8, 7, &sys);
    EXPECT_EQ(branch_csv_rows(b, a), branch_csv_rows(b, c));
}

TEST(CsvExport, TypicalityRow) {
    const auto bs = fixtures::hadamard_identity();
    const auto space = TrajectorySpace::of(bs);
    const auto r = typicality_report(bs, space, TrajectoryMeasure::uniform(8), ss(1, {0}), ss(2, {0}), 1e-9);
    EXPECT_EQ(typicality_csv_header(), "s1,s2,weight,distance,relative_distance,ratio,epsilon,qtr_fires,verdict\n");
    const std::string row = typicality_csv_row(r);
    EXPECT_EQ(row, "\"(t=1,{0})\",\"(t=2,{0})\",0.500000000,0.000000000,0.000000000,0.500000000,0.000000001,yes,fail\n");
}
