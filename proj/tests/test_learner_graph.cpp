#include <doctest.h>

#include "hetcons/learner_graph.hpp"
#include "test_util.hpp"

using namespace hetcons;
using testutil::Rng;

TEST_CASE("golden graphs load, round-trip, and validate") {
    for (const auto& name : testutil::golden_names()) {
        CAPTURE(name);
        LearnerGraph g = testutil::golden(name);
        CHECK(is_condensed(g));
        CHECK(check_valid(g).ok);
        LearnerGraph back = LearnerGraph::from_json(g.to_json());
        CHECK(back == g);
    }
}

TEST_CASE("condensation fills in transitively implied safe sets") {
    AcceptorIndex idx({"x1", "x2", "x3", "x4"});
    LearnerGraph g(idx, {"a", "b", "c"});
    SetFamily q = testutil::threshold(4, 3);
    for (int i = 0; i < 3; ++i) g.set_quorums(i, q);
    int a = g.learner_index("a"), b = g.learner_index("b"), c = g.learner_index("c");
    SetFamily empty;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) g.set_edge(i, j, empty);
    g.set_edge(a, b, SetFamily::from_minimal({0b0111}));   // {x1,x2,x3}
    g.set_edge(b, c, SetFamily::from_minimal({0b1110}));   // {x2,x3,x4}

    CHECK_FALSE(is_condensed(g));
    LearnerGraph cg = condense(g);
    CHECK(is_condensed(cg));
    CHECK(cg.edge(a, c).contains(0b1111));
    // Condensing an already-condensed graph is the identity.
    CHECK(condense(cg) == cg);
}

TEST_CASE("single-learner graphs are trivially condensed") {
    AcceptorIndex idx({"x1", "x2"});
    LearnerGraph g(idx, {"only"});
    g.set_quorums(0, SetFamily::from_minimal({0b11}));
    g.set_edge(0, 0, SetFamily::from_minimal({0b01}));
    CHECK(is_condensed(g));
}

TEST_CASE("condense matches brute-force closure on random graphs") {
    Rng rng{7};
    for (int iter = 0; iter < 60; ++iter) {
        LearnerGraph g = testutil::random_graph(rng, 4, 5);
        CAPTURE(iter);
        LearnerGraph fast = condense(g);
        LearnerGraph slow = testutil::brute_force_condense(g);
        CHECK(fast == slow);
        CHECK(condense(fast) == fast);
        // Monotone: every original family is subsumed by the condensed one.
        for (int a = 0; a < g.learner_count(); ++a)
            for (int b = a; b < g.learner_count(); ++b)
                CHECK(fast.edge(a, b).subsumes(g.edge(a, b)));
        // Self-agreement: edge(a,b) is contained in both self-edges.
        for (int a = 0; a < g.learner_count(); ++a)
            for (int b = 0; b < g.learner_count(); ++b)
                CHECK((fast.edge(std::min(a, b), std::max(a, b)).minimal().empty() ||
                       fast.edge(a, a).subsumes(
                           fast.edge(std::min(a, b), std::max(a, b)))));
    }
}

TEST_CASE("validity requires a condensed graph") {
    AcceptorIndex idx({"x1", "x2", "x3"});
    LearnerGraph g(idx, {"a", "b", "c"});
    for (int i = 0; i < 3; ++i) g.set_quorums(i, testutil::threshold(3, 2));
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) g.set_edge(i, j, SetFamily());
    g.set_edge(0, 1, SetFamily::from_minimal({0b011}));
    g.set_edge(1, 2, SetFamily::from_minimal({0b110}));
    CHECK_THROWS_AS(check_valid(g), NotCondensed);
}

TEST_CASE("shrinking a safe set below tolerance yields a witness") {
    LearnerGraph g = testutil::golden("fully_homogeneous");
    // Drop one acceptor from every minimal safe set of every edge.
    for (int a = 0; a < g.learner_count(); ++a) {
        for (int b = a; b < g.learner_count(); ++b) {
            SetFamily shrunk;
            for (Mask m : g.edge(a, b).minimal())
                shrunk.insert(m & (m - 1));  // clear lowest bit
            g.set_edge(a, b, shrunk);
        }
    }
    g = condense(g);
    auto res = check_valid(g);
    CHECK_FALSE(res.ok);
    REQUIRE_FALSE(res.witnesses.empty());
    const auto& w = res.witnesses.front();
    // The witness really exhibits an empty triple intersection.
    CHECK((w.safe_set & w.qa & w.qb) == 0);
    CHECK(g.quorums(g.learner_index(w.a)).contains(w.qa));
    CHECK(g.quorums(g.learner_index(w.b)).contains(w.qb));
    CHECK(g.edge(g.learner_index(w.a), g.learner_index(w.b)).contains(w.safe_set));
}

TEST_CASE("entanglement, accuracy, and termination on the mixed example") {
    LearnerGraph g = testutil::golden("het_learners_failures_acceptors");
    const auto& idx = g.acceptors();
    Mask all = idx.full();
    Mask k1 = Mask{1} << idx.index_of("k1");
    Mask b1 = Mask{1} << idx.index_of("b1");

    SUBCASE("one third-party failure keeps same-color learners entangled") {
        ExecutionFacts f{all & ~k1, all};
        CHECK(entangled(g, "blue1", "blue2", f));
        CHECK(entangled(g, "red1", "red2", f));
        CHECK_FALSE(entangled(g, "blue1", "red1", f));
        // Symmetry.
        CHECK(entangled(g, "blue2", "blue1", f));
        CHECK(entangled(g, "red1", "blue1", f) == entangled(g, "blue1", "red1", f));
    }
    SUBCASE("accuracy tracks the learner's own trust assumptions") {
        ExecutionFacts one_black{all & ~k1, all};
        CHECK(accurate(g, "blue1", one_black));
        CHECK(accurate(g, "red1", one_black));
        ExecutionFacts plus_blue{all & ~k1 & ~b1, all};
        CHECK_FALSE(accurate(g, "blue1", plus_blue));
        CHECK(accurate(g, "red1", plus_blue));
    }
    SUBCASE("everyone accurate and terminating when all acceptors behave") {
        ExecutionFacts perfect{all, all};
        for (const auto& l : g.learners()) {
            CHECK(accurate(g, l, perfect));
            CHECK(terminating(g, l, perfect));
        }
    }
    SUBCASE("termination needs a live safe quorum") {
        // Blue quorums need 2 blue + 2 black: killing two blue acceptors
        // leaves none, while red quorums survive.
        Mask b2 = Mask{1} << idx.index_of("b2");
        ExecutionFacts f{all, all & ~b1 & ~b2};
        CHECK_FALSE(terminating(g, "blue1", f));
        CHECK(terminating(g, "red1", f));
    }
    SUBCASE("unknown learner throws") {
        ExecutionFacts f{all, all};
        CHECK_THROWS_AS(entangled(g, "blue1", "nope", f), UnknownLearner);
    }
}

TEST_CASE("derived quorums make the labeled graph valid") {
    for (const auto& name : {"fully_homogeneous", "het_acceptors", "het_learners"}) {
        CAPTURE(name);
        LearnerGraph g = testutil::golden(name);
        auto derived = derive_quorums_from_edges(g);
        LearnerGraph h = g;
        for (int i = 0; i < h.learner_count(); ++i) h.set_quorums(i, derived[i]);
        h = condense(h);
        CHECK(check_valid(h).ok);
    }
}

TEST_CASE("derived safe sets are sufficient and minimal") {
    for (const auto& name : {"fully_homogeneous", "het_learners"}) {
        CAPTURE(name);
        LearnerGraph g = testutil::golden(name);
        auto derived = derive_safe_sets_from_quorums(g);
        CHECK(derived.warnings.empty());
        for (int a = 0; a < g.learner_count(); ++a) {
            for (int b = a; b < g.learner_count(); ++b) {
                for (Mask s : derived.edge(g, a, b).minimal()) {
                    // Sufficient: s hits every pair of quorums.
                    for (Mask qa : g.quorums(a).minimal())
                        for (Mask qb : g.quorums(b).minimal())
                            CHECK((qa & qb & s) != 0);
                    // Minimal: removing any member misses some pair.
                    for (Mask bit = 1; bit; bit <<= 1) {
                        if (!(s & bit)) continue;
                        Mask t = s & ~bit;
                        bool hits_all = true;
                        for (Mask qa : g.quorums(a).minimal())
                            for (Mask qb : g.quorums(b).minimal())
                                if ((qa & qb & t) == 0) hits_all = false;
                        CHECK_FALSE(hits_all);
                        if (bit > s) break;
                    }
                }
            }
        }
    }
}

TEST_CASE("disjoint quorums yield an empty derived family plus a warning") {
    AcceptorIndex idx({"x1", "x2", "x3", "x4"});
    LearnerGraph g(idx, {"a", "b"});
    g.set_quorums(0, SetFamily::from_minimal({0b0011}));
    g.set_quorums(1, SetFamily::from_minimal({0b1100}));
    for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) g.set_edge(i, j, SetFamily::from_minimal({0b1111}));
    auto derived = derive_safe_sets_from_quorums(g);
    CHECK(derived.edge(g, 0, 1).empty());
    CHECK_FALSE(derived.warnings.empty());
}
