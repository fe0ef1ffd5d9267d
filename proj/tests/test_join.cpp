#include <doctest.h>

#include <random>

#include "smg/join.hpp"
#include "support.hpp"

using namespace smg;
using namespace smg::testing;

namespace {

Spc list(bool doubly, std::vector<NodeSpec> nodes) {
    Spc c;
    build_list(c, "x", doubly, nodes);
    return c;
}

const ObjectLabel& head(const Spc& c) { return c.smg.label(c.smg.target(var_value(c, "x"))->obj); }

}  // namespace

TEST_CASE("join examples") {
    SUBCASE("equal inputs") {
        Spc c = list(true, {{false}, {true, 1}});
        auto j = join_spcs(c, c);
        REQUIRE(j);
        CHECK(j->status == JoinStatus::Equal);
        CHECK(check_consistency(j->spc).empty());
        CHECK(entails(c, c));
    }
    SUBCASE("one node against a 1+ segment") {
        Spc r = list(true, {{false}});
        Spc s = list(true, {{true, 1}});
        auto j = join_spcs(r, s);
        REQUIRE(j);
        CHECK(j->status == JoinStatus::RightWider);
        CHECK(head(j->spc).segment());
        CHECK(head(j->spc).len == 1);
        CHECK(entails(s, r));
        CHECK_FALSE(entails(r, s));
    }
    SUBCASE("lengths take the minimum") {
        auto j = join_spcs(list(true, {{true, 3}}), list(true, {{true, 1}}));
        REQUIRE(j);
        CHECK(j->status == JoinStatus::RightWider);
        CHECK(head(j->spc).len == 1);
    }
    SUBCASE("empty list against a 0+ segment") {
        Spc e = list(true, {});
        Spc z = list(true, {{true, 0}});
        auto j = join_spcs(z, e);
        REQUIRE(j);
        CHECK(j->status == JoinStatus::LeftWider);
        CHECK(head(j->spc).len == 0);
    }
    SUBCASE("a region and a segment chain") {
        auto j = join_spcs(list(false, {{false}, {true, 0}}), list(false, {{true, 2}}));
        REQUIRE(j);
        CHECK(j->status == JoinStatus::Incomparable);
        CHECK(check_consistency(j->spc).empty());
    }
    SUBCASE("null against an unknown value widens") {
        Spc a;
        add_var(a, "x");
        Spc b;
        add_var(b, "x", b.smg.add_value(0));
        auto j = join_spcs(a, b);
        REQUIRE(j);
        CHECK(j->status == JoinStatus::RightWider);
    }
    SUBCASE("a lone region does not join with null") {
        CHECK_FALSE(join_spcs(list(true, {{false}}), list(true, {})));
    }
    SUBCASE("different variables do not join") {
        Spc a = list(true, {});
        Spc b = a;
        add_var(b, "y");
        CHECK_FALSE(join_spcs(a, b));
    }
    SUBCASE("singly and doubly linked segments become two empty segments") {
        Spc a = list(true, {{true, 1}});
        Spc b = list(false, {{true, 1}});
        auto j = join_spcs(a, b);
        REQUIRE(j);
        CHECK(j->status == JoinStatus::Incomparable);
        CHECK(head(j->spc).len == 0);
        CHECK(includes(j->spc, a));
        CHECK(includes(j->spc, b));
    }
}

TEST_CASE("random joins over-approximate both inputs") {
    std::mt19937 rng(99);
    int joined = 0, wider = 0;
    for (int i = 0; i < 1500; ++i) {
        auto [a, b] = random_list_pair(rng);
        auto j = join_spcs(a, b);
        if (!j) continue;
        ++joined;
        CAPTURE(i);
        REQUIRE(check_consistency(j->spc).empty());
        CHECK(includes(j->spc, a));
        CHECK(includes(j->spc, b));
        // The side the status says is wider describes everything the join describes.
        const JoinStatus s = j->status;
        if (s == JoinStatus::Equal || s == JoinStatus::LeftWider) CHECK(includes(a, j->spc));
        if (s == JoinStatus::Equal || s == JoinStatus::RightWider) CHECK(includes(b, j->spc));
        if (s != JoinStatus::Equal) ++wider;
        CHECK(entails(a, b) == (s == JoinStatus::Equal || s == JoinStatus::LeftWider));
    }
    CHECK(joined >= 500);
    CHECK(wider > 0);
}

TEST_CASE("merging neighbours into a segment") {
    Spc c = list(true, {{false}, {false}});
    const ObjectId r1 = c.smg.target(var_value(c, "x"))->obj;
    const ObjectId r2 = c.smg.target(*pointer_at(c.smg, r1, kNext))->obj;
    auto m = merge_pair(c.smg, r1, r2, 0, kNext, kPrev);
    REQUIRE(m);
    CHECK(m->status == JoinStatus::Equal);
    CHECK(m->g.label(m->d).dls());
    CHECK(m->g.label(m->d).len == 2);
    CHECK(m->g.label(m->d).nfo == kNext);
    CHECK(m->g.label(m->d).pfo == kPrev);
}
