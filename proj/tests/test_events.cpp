#include <gtest/gtest.h>

#include <random>

#include "iqp/event_expr.hpp"
#include "iqp/trajectory.hpp"

using namespace iqp;

namespace {

std::vector<std::size_t> members(const Event& e) { return e.members(); }

Event random_event(std::size_t size, std::mt19937_64& rng) {
    Event e(size);
    for (std::size_t i = 0; i < size; ++i) e.set(i, (rng() & 1) != 0);
    return e;
}

EventExpr random_expr(std::size_t m, std::size_t n, std::mt19937_64& rng, int depth) {
    const auto pick = rng() % 4;
    if (depth == 0 || pick == 0) {
        std::vector<std::size_t> labels;
        for (std::size_t i = 0; i < m; ++i)
            if (rng() & 1) labels.push_back(i);
        if (labels.empty()) labels.push_back(rng() % m);
        return EventExpr::atom(rng() % n, labels);
    }
    if (pick == 1) return EventExpr::negate(random_expr(m, n, rng, depth - 1));
    return EventExpr::binary(pick == 2 ? EventExpr::Kind::And : EventExpr::Kind::Or, random_expr(m, n, rng, depth - 1),
                             random_expr(m, n, rng, depth - 1));
}

}  // namespace

TEST(TrajectorySpace, MixedRadixEncoding) {
    const TrajectorySpace space(3, 3);
    EXPECT_EQ(space.size(), 27u);
    // lambda = (2, 0, 1) -> 2*9 + 0*3 + 1
    const std::vector<std::size_t> lambda{2, 0, 1};
    EXPECT_EQ(space.encode(lambda), 19u);
    EXPECT_EQ(space.decode(19), lambda);
    EXPECT_EQ(space.label_at(19, 0), 2u);
}

TEST(TrajectorySpace, CapRejection) {
    EXPECT_THROW(TrajectorySpace(4, 10), InvalidArgument);
    EXPECT_NO_THROW(TrajectorySpace(4, 10, 2'000'000));
}

TEST(SSetEvent, FirstTimeFirstLabel) {
    const TrajectorySpace space(2, 2);
    // trajectories 00, 01, 10, 11 -> indices 0..3; lambda(0) = 0 for 00 and 01
    EXPECT_EQ(members(sset_event(space, {0, Region::of(2, {0})})), (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(members(sset_event(space, {1, Region::of(2, {0})})), (std::vector<std::size_t>{0, 2}));
}

TEST(SSetEvent, FullAndEmpty) {
    const TrajectorySpace space(3, 2);
    EXPECT_EQ(sset_event(space, {1, Region::full(3)}), Event::full(9));
    EXPECT_TRUE(sset_event(space, {1, Region(3)}).empty());
}

TEST(SSetEvent, DimensionMismatch) {
    const TrajectorySpace space(2, 2);
    EXPECT_THROW(sset_event(space, {0, Region::of(3, {0})}), InvalidArgument);
    EXPECT_THROW(sset_event(space, {2, Region::of(2, {0})}), InvalidArgument);
}

TEST(SSetEvent, CardinalityLaw) {
    for (std::size_t m = 1; m <= 4; ++m)
        for (std::size_t n = 1; n <= 3; ++n) {
            const TrajectorySpace space(m, n);
            std::size_t m_pow = 1;
            for (std::size_t i = 0; i + 1 < n; ++i) m_pow *= m;
            for (unsigned long long mask = 0; mask < (1ULL << m); ++mask)
                for (std::size_t t = 0; t < n; ++t) {
                    const Region r = Region::from_mask(m, mask);
                    EXPECT_EQ(sset_event(space, {t, r}).count(), r.count() * m_pow);
                }
        }
}

TEST(Combine, Laws) {
    const TrajectorySpace space(2, 2);
    const Event a = sset_event(space, {0, Region::of(2, {0})});
    const Event b = sset_event(space, {1, Region::of(2, {0})});
    EXPECT_EQ(combine(a, a, EventOp::And), a);
    EXPECT_EQ(combine(a, combine(a, a, EventOp::Not), EventOp::Or), Event::full(4));
    EXPECT_EQ(members(combine(a, b, EventOp::And)), (std::vector<std::size_t>{0}));
    EXPECT_THROW(combine(a, Event(5), EventOp::And), InvalidArgument);
}

TEST(Combine, DeMorganRandomized) {
    std::mt19937_64 rng(3);
    for (std::size_t size : {1u, 7u, 64u, 65u, 200u}) {
        for (int k = 0; k < 20; ++k) {
            const Event a = random_event(size, rng);
            const Event b = random_event(size, rng);
            EXPECT_EQ(!(a | b), !a & !b);
            EXPECT_EQ(!(a & b), !a | !b);
            EXPECT_EQ(!!a, a);
        }
    }
}

TEST(ParseEvent, Atom) {
    const TrajectorySpace space(2, 2);
    EXPECT_EQ(members(parse_event("(t=0,{0})", space)), (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(parse_event("  ( t = 0 , { 0 } )  ", space), parse_event("(t=0,{0})", space));
}

TEST(ParseEvent, ContradictionAndExhaustion) {
    const TrajectorySpace space(2, 2);
    EXPECT_TRUE(parse_event("(t=0,{0}) & !(t=0,{0})", space).empty());
    EXPECT_EQ(parse_event("(t=0,{0}) | (t=0,{1})", space), Event::full(4));
}

TEST(ParseEvent, AndBindsTighterThanOr) {
    const TrajectorySpace space(2, 2);
    const Event a = parse_event("(t=0,{0})", space);
    const Event b = parse_event("(t=1,{0})", space);
    const Event c = parse_event("(t=1,{1})", space);
    EXPECT_EQ(parse_event("(t=0,{0}) | (t=1,{0}) & (t=1,{1})", space), a | (b & c));
    EXPECT_EQ(parse_event("((t=0,{0}) | (t=1,{0})) & (t=1,{1})", space), (a | b) & c);
}

TEST(ParseEvent, SyntaxErrorsCarryPosition) {
    const TrajectorySpace space(2, 2);
    try {
        parse_event("(t=0,{0}) (t=1,{0})", space);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 10u);
    }
    EXPECT_THROW(parse_event("(t=0,{})", space), ParseError);
    EXPECT_THROW(parse_event("(t=0,{0}) &", space), ParseError);
    EXPECT_THROW(parse_event("", space), ParseError);
    EXPECT_THROW(parse_event("(t=0,{0}", space), ParseError);
}

TEST(ParseEvent, OutOfRangeNamesToken) {
    const TrajectorySpace space(2, 2);
    try {
        parse_event("(t=0,{0}) & (t=7,{1})", space);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("'7'"), std::string::npos) << e.what();
        EXPECT_EQ(e.position(), 15u);
    }
    try {
        parse_event("(t=1,{0,12})", space);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("'12'"), std::string::npos) << e.what();
    }
}

TEST(ParseEvent, PrintParseRoundTrip) {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 300; ++k) {
        const std::size_t m = 1 + rng() % 3;
        const std::size_t n = 1 + rng() % 3;
        const TrajectorySpace space(m, n);
        const EventExpr e = random_expr(m, n, rng, 4);
        const std::string text = to_string(e);
        EXPECT_EQ(parse_event(text, space), evaluate(e, space)) << text;
        EXPECT_EQ(to_string(parse_event_expr(text)), text);
    }
}

TEST(ParseSSet, AtomOnly) {
    const SSet s = parse_sset("(t=2,{1,0})", 3, 4);
    EXPECT_EQ(s.time, 2u);
    EXPECT_EQ(s.region, Region::of(3, {0, 1}));
    EXPECT_THROW(parse_sset("(t=2,{1}) | (t=1,{0})", 3, 4), ParseError);
    EXPECT_EQ(sset_text(s), "(t=2,{0,1})");
    EXPECT_TRUE(parse_event(sset_text(SSet{1, Region(2)}), TrajectorySpace(2, 2)).empty());
}

TEST(EventProbability, UniformAndFull) {
    const TrajectorySpace space(2, 2);
    const auto p = TrajectoryMeasure::uniform(4);
    EXPECT_DOUBLE_EQ(event_probability(p, parse_event("(t=0,{0})", space)), 0.5);
    EXPECT_NEAR(event_probability(p, Event::full(4)), 1.0, 1e-15);
    EXPECT_THROW(event_probability(p, Event(5)), InvalidArgument);
}

TEST(EventProbability, AdditiveOnDisjointEvents) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const std::size_t size = 1 + rng() % 40;
        TrajectoryMeasure p{std::vector<double>(size)};
        double sum = 0.0;
        for (double& v : p.probs) sum += (v = u(rng));
        for (double& v : p.probs) v /= sum;
        const Event a = random_event(size, rng);
        const Event b = random_event(size, rng) & !a;
        EXPECT_NEAR(event_probability(p, a | b), event_probability(p, a) + event_probability(p, b), 1e-12);
        const double pa = event_probability(p, a);
        EXPECT_GE(pa, -1e-12);
        EXPECT_LE(pa, 1.0 + 1e-12);
    }
}
