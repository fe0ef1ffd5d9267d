#include <doctest.h>

#include "smg/abstraction.hpp"
#include "smg/reinterp.hpp"
#include "support.hpp"

using namespace smg;
using namespace smg::testing;

namespace {

enum class Payload { Zero, Unknown, ZeroLow, ZeroHigh };

/// x -> doubly linked chain of regions with the given payload shapes.
Spc chain(const std::vector<Payload>& ps) {
    Spc c;
    auto objs = build_list(c, "x", true, std::vector<NodeSpec>(ps.size()));
    Smg& g = c.smg;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const ObjectId o = objs[i];
        switch (ps[i]) {
            case Payload::Zero: break;
            case Payload::Unknown: write_value_in_place(g, o, 16, FieldType::data(8), g.add_value(0)); break;
            case Payload::ZeroLow: write_value_in_place(g, o, 20, FieldType::data(4), g.add_value(0)); break;
            case Payload::ZeroHigh: write_value_in_place(g, o, 16, FieldType::data(4), g.add_value(0)); break;
        }
    }
    return c;
}

const ObjectLabel& head(const Spc& c) { return c.smg.label(c.smg.target(var_value(c, "x"))->obj); }

}  // namespace

TEST_CASE("merge cost follows the join status") {
    CHECK(cost_of(JoinStatus::Equal) == 0);
    CHECK(cost_of(JoinStatus::LeftWider) == 1);
    CHECK(cost_of(JoinStatus::RightWider) == 1);
    CHECK(cost_of(JoinStatus::Incomparable) == 2);
}

TEST_CASE("length thresholds") {
    SUBCASE("two equal nodes merge") {
        Spc a = abstract_spc(chain({Payload::Zero, Payload::Zero}));
        CHECK(check_consistency(a).empty());
        CHECK(head(a).dls());
        CHECK(head(a).len == 2);
        CHECK(head(a).nfo == kNext);
        CHECK(head(a).pfo == kPrev);
        CHECK(includes(a, chain({Payload::Zero, Payload::Zero})));
    }
    SUBCASE("one side wider merges at two nodes") {
        Spc c = chain({Payload::Zero, Payload::Unknown});
        auto cands = find_candidates(c);
        REQUIRE_FALSE(cands.empty());
        auto plan = longest_mergeable_sequence(c, cands.front());
        REQUIRE(plan);
        CHECK(plan->cost == 1);
        CHECK(head(abstract_spc(c)).len == 2);
    }
    SUBCASE("crossing zero bytes need three nodes") {
        Spc two = chain({Payload::ZeroLow, Payload::ZeroHigh});
        Spc a = abstract_spc(two);
        CHECK_FALSE(head(a).segment());
        CHECK(a == two);

        Spc three = chain({Payload::ZeroLow, Payload::ZeroHigh, Payload::ZeroLow});
        auto cands = find_candidates(three);
        REQUIRE_FALSE(cands.empty());
        auto plan = longest_mergeable_sequence(three, cands.front());
        REQUIRE(plan);
        CHECK(plan->cost == 2);
        CHECK(plan->sequence.size() == 3);
        Spc b = abstract_spc(three);
        CHECK(check_consistency(b).empty());
        CHECK(head(b).dls());
        CHECK(head(b).len == 3);
        CHECK(includes(b, three));
    }
    SUBCASE("custom thresholds") {
        Spc c = chain({Payload::Zero, Payload::Zero, Payload::Zero});
        CHECK_FALSE(head(abstract_spc(c, {4, 4, 4})).segment());
        CHECK(head(abstract_spc(c, {3, 4, 4})).len == 3);
    }
}

TEST_CASE("abstraction keeps shared payloads and absorbs segments") {
    SUBCASE("region, segment, region") {
        Spc c;
        build_list(c, "x", true, {{false}, {true, 2}, {false}});
        Spc a = abstract_spc(c);
        CHECK(head(a).len == 4);
        CHECK(includes(a, c));
    }
    SUBCASE("a value shared by all nodes stays shared") {
        Spc c;
        build_list(c, "x", false, {{false, 0, 2}, {false, 0, 2}});
        Spc a = abstract_spc(c);
        REQUIRE(head(a).segment());
        const ObjectId d = a.smg.target(var_value(a, "x"))->obj;
        auto v = a.smg.field(d, payload_offset(false), FieldType::data(8));
        REQUIRE(v);
        CHECK(a.smg.level(*v) == 0);
    }
    SUBCASE("nodes with their own payload get a nested value") {
        Spc c;
        build_list(c, "x", false, {{false, 0, 1}, {false, 0, 1}});
        Spc a = abstract_spc(c);
        REQUIRE(head(a).segment());
        const ObjectId d = a.smg.target(var_value(a, "x"))->obj;
        auto v = a.smg.field(d, payload_offset(false), FieldType::data(8));
        REQUIRE(v);
        CHECK(a.smg.level(*v) == 1);
    }
    SUBCASE("a node referenced from outside can only start a segment") {
        Spc c;
        auto objs = build_list(c, "x", false, {{false}, {false}, {false}});
        add_var(c, "y", address_of(c.smg, objs[1], Tg::Reg));
        Spc a = abstract_spc(c);
        CHECK(check_consistency(a).empty());
        CHECK(includes(a, c));
        CHECK_FALSE(head(a).segment());
        CHECK(a.smg.label(a.smg.target(var_value(a, "y"))->obj).len == 2);
    }
}
