#include <doctest.h>

#include "smg/decide.hpp"
#include "support.hpp"

using namespace smg;
using namespace smg::testing;

namespace {

Spc list(std::vector<NodeSpec> nodes) {
    Spc c;
    build_list(c, "x", true, nodes);
    return c;
}

}  // namespace

TEST_CASE("looking through empty segments") {
    Spc c = list({{true, 0}, {true, 0}});
    auto [v, passed] = look_through(c.smg, var_value(c, "x"));
    CHECK(v == kZero);
    CHECK(passed.size() == 2);

    Spc d = list({{true, 0}, {false}});
    auto [w, through] = look_through(d.smg, var_value(d, "x"));
    CHECK(through.size() == 1);
    REQUIRE(d.smg.target(w));
    CHECK_FALSE(d.smg.label(d.smg.target(w)->obj).segment());
}

TEST_CASE("disequality") {
    SUBCASE("valid region against null") {
        Spc c = list({{false}});
        CHECK(prove_neq(c.smg, var_value(c, "x"), kZero));
    }
    SUBCASE("possibly empty segment against null") {
        Spc c = list({{true, 0}});
        CHECK_FALSE(prove_neq(c.smg, var_value(c, "x"), kZero));
    }
    SUBCASE("non-empty segment against null") {
        Spc c = list({{true, 1}});
        CHECK(prove_neq(c.smg, var_value(c, "x"), kZero));
    }
    SUBCASE("two unknowns") {
        Smg g;
        CHECK_FALSE(prove_neq(g, g.add_value(0), g.add_value(0)));
    }
    SUBCASE("addresses of different regions") {
        Smg g;
        const ValueId a = address_of(g, add_region(g, 8), Tg::Reg);
        const ValueId b = address_of(g, add_region(g, 8), Tg::Reg);
        CHECK(prove_neq(g, a, b));
        CHECK_FALSE(prove_neq(g, a, a));
    }
}

TEST_CASE("assuming a relation") {
    SUBCASE("x == null removes a 0+ segment") {
        Spc c = list({{true, 0}});
        auto out = assume(c, Relation::Eq, var_value(c, "x"), kZero);
        REQUIRE(out.size() == 1);
        CHECK(var_value(out[0], "x") == kZero);
        CHECK(check_consistency(out[0]).empty());
    }
    SUBCASE("x != null keeps a non-empty segment") {
        Spc c = list({{true, 0}});
        auto out = assume(c, Relation::Neq, var_value(c, "x"), kZero);
        REQUIRE_FALSE(out.empty());
        for (const Spc& s : out) {
            CHECK(check_consistency(s).empty());
            CHECK(prove_neq(s.smg, var_value(s, "x"), kZero));
        }
    }
    SUBCASE("contradictions yield nothing") {
        Spc c = list({{false}});
        CHECK(assume(c, Relation::Eq, var_value(c, "x"), kZero).empty());
        CHECK(assume(c, Relation::Neq, var_value(c, "x"), var_value(c, "x")).empty());
    }
    SUBCASE("two unknowns become one") {
        Spc c = empty_spc();
        const ValueId a = c.smg.add_value(0);
        const ValueId b = c.smg.add_value(0);
        add_var(c, "p", a);
        add_var(c, "q", b);
        auto out = assume(c, Relation::Eq, a, b);
        REQUIRE(out.size() == 1);
        CHECK(var_value(out[0], "p") == var_value(out[0], "q"));
    }
}

TEST_CASE("comparing offsets in one region") {
    Smg g;
    const ObjectId r = add_region(g, 16);
    const ValueId a0 = address_of(g, r, Tg::Reg, 0);
    const ValueId a8 = address_of(g, r, Tg::Reg, 8);
    CHECK(compare_offsets(g, a0, a8, CmpOp::Lt) == true);
    CHECK(compare_offsets(g, a8, a0, CmpOp::Le) == false);
    CHECK(compare_offsets(g, a0, a0, CmpOp::Ge) == true);
    const ValueId other = address_of(g, add_region(g, 8), Tg::Reg);
    CHECK_FALSE(compare_offsets(g, a0, other, CmpOp::Lt).has_value());
}
