#include <doctest.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <thread>

#include "smg/driver.hpp"
#include "support.hpp"

using namespace smg;
using namespace smg::testing;
namespace drv = smg::driver;
namespace eng = smg::engine;

namespace {

eng::ErrorReport report() {
    eng::ErrorReport e;
    e.kind = eng::ErrorKind::MemLeak;
    e.line = 3;
    return e;
}

drv::MemberResult result(drv::Member m, eng::Verdict v) {
    drv::MemberResult r{m, v, {}};
    if (v == eng::Verdict::Unsafe) r.errors.push_back(report());
    return r;
}

/// What one member's answer means for the portfolio, written out per member.
std::optional<drv::Outcome> settles(drv::Member m, eng::Verdict v) {
    using M = drv::Member;
    using V = eng::Verdict;
    switch (m) {
        case M::Verifier:
            // A verifier alarm may be spurious.
            return v == V::Safe ? std::optional(drv::Outcome::True) : std::nullopt;
        case M::DfsShort:
        case M::DfsLong:
            // A bounded search proves nothing.
            return v == V::Unsafe ? std::optional(drv::Outcome::False) : std::nullopt;
        case M::Bfs:
            if (v == V::Unsafe) return drv::Outcome::False;
            if (v == V::Safe) return drv::Outcome::True;
            return std::nullopt;
    }
    return std::nullopt;
}

Spc sample_spc() {
    Spc c;
    build_list(c, "x", true, {{false, 0, 1}, {true, 2}});
    add_var(c, "y");
    return c;
}

}  // namespace

TEST_CASE("portfolio composition over every outcome and arrival order") {
    const eng::Verdict verdicts[] = {eng::Verdict::Safe, eng::Verdict::Unsafe, eng::Verdict::Unknown};
    std::array<int, 4> order{0, 1, 2, 3};
    int combos = 0;
    do {
        for (int code = 0; code < 81; ++code) {
            std::vector<drv::MemberResult> arrivals;
            int k = code;
            for (int i : order) {
                arrivals.push_back(result(drv::kMembers[i], verdicts[k % 3]));
                k /= 3;
            }
            std::optional<drv::Outcome> want;
            std::optional<drv::Member> who;
            for (const auto& r : arrivals)
                if (auto s = settles(r.member, r.verdict)) {
                    want = s;
                    who = r.member;
                    break;
                }
            const drv::Verdict got = drv::compose(arrivals);
            CHECK(got.outcome == want.value_or(drv::Outcome::Unknown));
            CHECK(got.provenance == who);
            if (got.outcome == drv::Outcome::False) CHECK(got.reports.size() == 1);
            ++combos;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    CHECK(combos == 24 * 81);
}

TEST_CASE("party stops the remaining members once a verdict is in") {
    const mil::Program p = corpus_program("sls_traverse");
    std::atomic<int> cancelled{0};
    drv::Runner runner = [&](const mil::Program&, const eng::AnalysisConfig& c) {
        eng::AnalysisResult r;
        const bool short_dfs = c.mode == eng::Mode::Hunter && c.search == eng::Search::Dfs && c.step_budget == 200u;
        if (short_dfs) {
            r.verdict = eng::Verdict::Unsafe;
            r.errors.push_back(report());
            return r;
        }
        while (!c.cancelled()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
        ++cancelled;
        r.cancelled = true;
        return r;
    };
    drv::PartyConfig pc;
    pc.timeout = 30;
    const drv::Verdict v = drv::Party(runner).run(p, pc);
    CHECK(v.outcome == drv::Outcome::False);
    CHECK(v.provenance == drv::Member::DfsShort);
    CHECK(cancelled == 3);
}

TEST_CASE("party gives up at the time limit") {
    const mil::Program p = corpus_program("sls_traverse");
    drv::Runner runner = [](const mil::Program&, const eng::AnalysisConfig& c) {
        while (!c.cancelled()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
        eng::AnalysisResult r;
        r.cancelled = true;
        return r;
    };
    drv::PartyConfig pc;
    pc.timeout = 0.05;
    CHECK(drv::Party(runner).run(p, pc).outcome == drv::Outcome::Unknown);
}

TEST_CASE("member configurations") {
    drv::PartyConfig pc;
    const auto v = drv::member_config(drv::Member::Verifier, pc);
    CHECK(v.mode == eng::Mode::Verifier);
    const auto s = drv::member_config(drv::Member::DfsShort, pc);
    CHECK(s.search == eng::Search::Dfs);
    CHECK(s.step_budget == 200u);
    CHECK(drv::member_config(drv::Member::DfsLong, pc).step_budget == 900u);
    CHECK(drv::member_config(drv::Member::Bfs, pc).search == eng::Search::Bfs);
}

TEST_CASE("real party on the corpus") {
    for (const std::string& name : {"dll_build_free", "dll_no_free", "sls_null_deref", "even_pairs"}) {
        CAPTURE(name);
        drv::PartyConfig pc;
        pc.timeout = 5;
        const drv::Verdict v = drv::run_hunting_party(corpus_program(name), pc);
        const std::string want = expected_verdict(name);
        std::string got = drv::to_string(v.outcome);
        if (v.outcome == drv::Outcome::False) got += std::string(":") + eng::to_string(v.reports.at(0).kind);
        CHECK(got == want);
    }
}

TEST_CASE("graph rendering") {
    const Spc c = sample_spc();
    const drv::DotGraph d = drv::parse_dot(drv::to_dot(c, "sample"));
    std::size_t fields = 0;
    for (const auto& [o, l] : c.smg.objects()) fields += c.smg.fields(o).size();
    CHECK(d.nodes.size() == c.smg.objects().size() + c.smg.values().size());
    CHECK(d.edges.size() == fields + c.smg.targets().size());
    const bool has_segment = std::any_of(d.nodes.begin(), d.nodes.end(),
                                         [](const auto& n) { return n.second.find("len=2+") != std::string::npos; });
    CHECK(has_segment);

    const nlohmann::json j = drv::to_json(c);
    CHECK(j["objects"].size() == c.smg.objects().size());
    CHECK(j["values"].size() == c.smg.values().size());
    CHECK(j["has_value"].size() == fields);
    CHECK(j["points_to"].size() == c.smg.targets().size());
    CHECK(j["vars"].size() == 2);
}
