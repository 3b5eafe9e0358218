#include <catch2/catch_amalgamated.hpp>

#include "percloc/ball.hpp"
#include "percloc/experiment.hpp"

using namespace percloc;

TEST_CASE("bfs_ball structure") {
    SECTION("radius zero") {
        ImplicitGraph t3 = make_tree(3);
        Ball b = bfs_ball(t3, t3.root(), 0);
        CHECK(b.vertices.size() == 1);
        CHECK(b.edges.empty());
    }
    SECTION("T3 level sizes 1,3,6 and no extra edges") {
        ImplicitGraph t3 = make_tree(3);
        Ball b = bfs_ball(t3, t3.root(), 2);
        REQUIRE(b.spheres.size() == 3);
        CHECK(b.sphere_size(0) == 1);
        CHECK(b.sphere_size(1) == 3);
        CHECK(b.sphere_size(2) == 6);
        CHECK(b.edges.size() == 9);  // tree: |V|-1
        CHECK(b.self_loops == 0);
    }
    SECTION("Z2*Z3 level sizes 1,3,4 with triangles") {
        // sphere 1 = {a, b, b2}; the b ~ b2 edge makes ab, ab2, ba, b2a the
        // whole second sphere (b.b and b2.b2 fall back into sphere 1).
        ImplicitGraph g = make_free_product({FactorSpec{2}, FactorSpec{3}});
        Ball b = bfs_ball(g, g.root(), 2);
        CHECK(b.sphere_size(0) == 1);
        CHECK(b.sphere_size(1) == 3);
        CHECK(b.sphere_size(2) == 4);
        // triangle within level 1: edge b ~ b2
        int within1 = 0;
        for (const BallEdge& e : b.edges)
            if (b.level[size_t(e.u)] == 1 && b.level[size_t(e.v)] == 1) ++within1;
        CHECK(within1 == 1);
    }
    SECTION("levels agree with dist_to_root") {
        ImplicitGraph q = family_member(QuotientFamily::z2z3, 4);
        Ball b = bfs_ball(q, q.root(), 5);
        for (size_t i = 0; i < b.vertices.size(); ++i)
            CHECK(b.level[i] == q.dist_to_root(b.vertices[i]));
    }
    SECTION("balls around other centers have equal level profiles") {
        ImplicitGraph g = make_free_product({FactorSpec{2}, FactorSpec{3}});
        Word v = g.neighbors(g.neighbors(g.root())[1])[0];
        Ball b0 = bfs_ball(g, g.root(), 3);
        Ball bv = bfs_ball(g, v, 3);
        for (int j = 0; j <= 3; ++j) CHECK(b0.sphere_size(j) == bv.sphere_size(j));
    }
}

TEST_CASE("rooted isomorphism") {
    ImplicitGraph t3 = make_tree(3);
    ImplicitGraph g23 = make_free_product({FactorSpec{2}, FactorSpec{3}});

    SECTION("ball vs itself") {
        Ball b = bfs_ball(t3, t3.root(), 3);
        CHECK(rooted_isomorphic(b, b) == IsoResult::yes);
    }
    SECTION("T3 vs Z2*Z2*Z2 agree; T3 vs Z2*Z3 differ at radius 1") {
        ImplicitGraph g222 =
            make_free_product({FactorSpec{2}, FactorSpec{2}, FactorSpec{2}});
        CHECK(rooted_isomorphic(bfs_ball(t3, t3.root(), 3),
                                bfs_ball(g222, g222.root(), 3)) == IsoResult::yes);
        // the b ~ b2 triangle edge already distinguishes the radius-1 balls
        CHECK(rooted_isomorphic(bfs_ball(t3, t3.root(), 1),
                                bfs_ball(g23, g23.root(), 1)) == IsoResult::no);
    }
    SECTION("quotient at n=4 agrees with Z2*Z3 at radius 3") {
        ImplicitGraph q = family_member(QuotientFamily::z2z3, 4);
        CHECK(rooted_isomorphic(bfs_ball(q, q.root(), 3),
                                bfs_ball(g23, g23.root(), 3)) == IsoResult::yes);
    }
    SECTION("mismatched radii are rejected") {
        CHECK_THROWS_AS(rooted_isomorphic(bfs_ball(t3, t3.root(), 1),
                                          bfs_ball(t3, t3.root(), 2)),
                        std::invalid_argument);
    }
}

TEST_CASE("local agreement radius") {
    SECTION("identical graphs hit the cap") {
        ImplicitGraph t3 = make_tree(3);
        CHECK(local_radius(t3, t3, 4) == 4);
    }
    SECTION("Z2*Z3 quotients: r_n = n - 1") {
        ImplicitGraph base = family_base(QuotientFamily::z2z3);
        for (int n : {3, 4, 5})
            CHECK(local_radius(family_member(QuotientFamily::z2z3, n), base, 8) ==
                  n - 1);
    }
    SECTION("T3 quotients via <(a1 a2)^{n+1}>: r_n = n") {
        ImplicitGraph base = family_base(QuotientFamily::tree3);
        for (int n : {3, 4, 5})
            CHECK(local_radius(family_member(QuotientFamily::tree3, n), base, 8) == n);
    }
}
