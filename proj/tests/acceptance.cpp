// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
// Usage: heapsmg_acceptance <path-to-heapsmg-cli>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

#include "smg/abstraction.hpp"
#include "smg/driver.hpp"
#include "smg/join.hpp"
#include "smg/reinterp.hpp"
#include "support.hpp"

using namespace smg;
using namespace smg::testing;
namespace eng = smg::engine;
namespace drv = smg::driver;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream why;
    void require(bool cond, const std::string& msg) {
        if (!cond && ok) why << msg;
        ok = ok && cond;
    }
};

int failures = 0;

void report(const std::string& name, Check& c, const std::string& detail = "") {
    std::cout << (c.ok ? "PASS" : "FAIL") << "  " << name;
    if (!c.ok) std::cout << ": " << c.why.str();
    else if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!c.ok) ++failures;
}

std::size_t heap_objects(const Spc& c) {
    std::size_t n = 0;
    for (const auto& [o, l] : c.smg.objects())
        if (o != kNullObject && !c.is_var_region(o)) ++n;
    return n;
}

void running_example() {
    Check c;
    const mil::Program p = corpus_program("dll_build_free");
    const auto start = std::chrono::steady_clock::now();
    const eng::AnalysisResult r = eng::analyze(p, eng::AnalysisConfig::verifier());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.require(r.verdict == eng::Verdict::Safe, "verifier did not prove the program");
    c.require(secs < 1.0, "took " + std::to_string(secs) + " s");
    const int l1 = p.block_index("L1");
    c.require(l1 >= 0 && r.fixpoint[l1].size() == 1, "loop head does not hold exactly one configuration");
    if (c.ok) {
        const Spc& s = r.fixpoint[l1][0];
        c.require(heap_objects(s) == 1, "more than one heap object");
        for (const auto& [o, l] : s.smg.objects()) {
            if (o == kNullObject || s.is_var_region(o)) continue;
            c.require(l.dls() && l.len == 0 && l.hfo == 0 && l.nfo == 0 && l.pfo == 8,
                      "heap object is not a 0+ doubly-linked segment (0,0,8)");
        }
    }
    std::ostringstream d;
    d.precision(3);
    d << secs * 1000 << " ms";
    report("running example: single 0+ DLS at the loop head, verified", c, d.str());
}

void mutants(const std::string& cli) {
    Check c;
    const std::pair<const char*, const char*> cases[] = {
        {"dll_no_free", "MemLeak"},
        {"dll_use_after_free", "InvalidDeref"},
        {"dll_store_oob", "OutOfBounds"},
        {"dll_double_free", "DoubleFree"},
    };
    for (const auto& [name, kind] : cases) {
        const auto r = eng::analyze(corpus_program(name), eng::AnalysisConfig::hunter(eng::Search::Dfs, 200));
        c.require(r.verdict == eng::Verdict::Unsafe && !r.errors.empty() && eng::to_string(r.errors[0].kind) == std::string(kind),
                  std::string(name) + ": hunter missed " + kind);
        const std::string cmd = "\"" + cli + "\" --mode dfs:200 \"" + corpus_dir() + "/" + name + ".mil\" > /dev/null 2>&1";
        const int st = std::system(cmd.c_str());
        c.require(WIFEXITED(st) && WEXITSTATUS(st) == 1, std::string(name) + ": CLI exit status is not 1");
    }
    report("mutants: each error found by the 200-step DFS hunter, exit code 1", c);
}

void reinterpretation() {
    Check c;
    Smg g;
    const ObjectId o = add_region(g, 16);
    write_value_in_place(g, o, 0, FieldType::data(16), kZero);
    const ValueId a1 = address_of(g, add_region(g, 8), Tg::Reg);
    const ValueId a2 = address_of(g, add_region(g, 8), Tg::Reg);
    auto layout = [&] {
        std::vector<std::tuple<Offset, Offset, ValueId>> out;
        for (const Field& f : g.fields(o)) out.emplace_back(f.off, f.end(), f.val);
        std::sort(out.begin(), out.end());
        return out;
    };
    using L = std::vector<std::tuple<Offset, Offset, ValueId>>;
    write_value_in_place(g, o, 3, g.ptr_type(), a1);
    c.require(layout() == L{{0, 3, kZero}, {3, 11, a1}, {11, 16, kZero}}, "first write layout");
    write_value_in_place(g, o, 7, g.ptr_type(), a2);
    c.require(layout() == L{{0, 3, kZero}, {7, 15, a2}, {15, 16, kZero}}, "second write layout");
    const std::uint32_t fresh_from = g.next_id();
    const auto [h, v] = read_value(g, o, 3, FieldType::data(4));
    c.require(v >= fresh_from && !h.is_address(v), "read across the pointer is not a fresh unknown");

    std::mt19937 rng(11);
    int bad = 0;
    const int n = 1000;
    for (int i = 0; i < n; ++i)
        if (!check_random_write(rng).ok) ++bad;
    c.require(bad == 0, std::to_string(bad) + " random writes disagree with the byte model");
    report("reinterpretation: zero/pointer layout and random writes", c, std::to_string(n) + " random cases");
}

void join_soundness() {
    Check c;
    std::mt19937 rng(5);
    int joined = 0, bad = 0;
    for (int i = 0; i < 5000 && joined < 600; ++i) {
        const auto [a, b] = random_list_pair(rng);
        const auto j = join_spcs(a, b);
        if (!j) continue;
        ++joined;
        bool ok = includes(j->spc, a) && includes(j->spc, b);
        const JoinStatus s = j->status;
        if (s == JoinStatus::Equal || s == JoinStatus::LeftWider) ok = ok && includes(a, j->spc);
        if (s == JoinStatus::Equal || s == JoinStatus::RightWider) ok = ok && includes(b, j->spc);
        if (!ok) ++bad;
    }
    c.require(joined >= 500, "only " + std::to_string(joined) + " pairs joined");
    c.require(bad == 0, std::to_string(bad) + " joins violate an inclusion");
    report("join soundness: inclusions at k=3 on random pairs", c, std::to_string(joined) + " joined pairs");
}

Spc payload_chain(const std::vector<int>& kinds) {
    // 0: zero payload, 1: zero in the low half, 2: zero in the high half.
    Spc c;
    auto objs = build_list(c, "x", true, std::vector<NodeSpec>(kinds.size()));
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (kinds[i] == 1) write_value_in_place(c.smg, objs[i], 20, FieldType::data(4), c.smg.add_value(0));
        if (kinds[i] == 2) write_value_in_place(c.smg, objs[i], 16, FieldType::data(4), c.smg.add_value(0));
    }
    return c;
}

void abstraction_thresholds() {
    Check c;
    auto head = [](const Spc& s) { return s.smg.label(s.smg.target(var_value(s, "x"))->obj); };
    const Spc equal2 = abstract_spc(payload_chain({0, 0}));
    c.require(head(equal2).dls() && head(equal2).len == 2 && heap_objects(equal2) == 1,
              "two equal nodes did not become a 2+ segment");
    const Spc in2 = payload_chain({1, 2});
    c.require(abstract_spc(in2) == in2, "two incomparable nodes were merged");
    const Spc in3 = abstract_spc(payload_chain({1, 2, 1}));
    c.require(head(in3).dls() && head(in3).len == 3 && heap_objects(in3) == 1,
              "three incomparable nodes did not become a 3+ segment");
    report("abstraction thresholds (2,2,3)", c);
}

void join_status_table() {
    Check c;
    using S = JoinStatus;
    const S all[] = {S::Equal, S::LeftWider, S::RightWider, S::Incomparable};
    const S E = S::Equal, L = S::LeftWider, R = S::RightWider, I = S::Incomparable;
    const S table[4][4] = {{E, L, R, I}, {L, L, I, I}, {R, I, R, I}, {I, I, I, I}};
    int matched = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (update_join_status(all[a], all[b]) == table[a][b]) ++matched;
    c.require(matched == 16, std::to_string(16 - matched) + " entries differ");
    report("join status combination table", c, "16 entries");
}

void differential() {
    Check c;
    const auto names = corpus_names();
    c.require(names.size() >= 15, "corpus has fewer than 15 programs");
    std::size_t states = 0, misses = 0;
    for (const std::string& name : names) {
        const mil::Program p = corpus_program(name);
        eng::ConcreteLimits lim;
        lim.max_nondet_true = 3;
        const eng::ConcreteRun conc = eng::run_concrete(p, lim);
        const eng::AnalysisResult r = eng::analyze(p, eng::AnalysisConfig::verifier());
        for (const eng::ConcreteState& s : conc.states) {
            ++states;
            const auto& at = r.fixpoint[s.block];
            if (!std::any_of(at.begin(), at.end(), [&](const Spc& a) { return covered(s.spc, a); })) {
                ++misses;
                c.require(false, name + " block " + p.blocks[s.block].label + " not covered");
            }
        }
    }
    report("differential soundness over the corpus", c,
           std::to_string(names.size()) + " programs, " + std::to_string(states) + " concrete states, " +
               std::to_string(misses) + " misses");
}

void portfolio() {
    Check c;
    const eng::Verdict vs[] = {eng::Verdict::Safe, eng::Verdict::Unsafe, eng::Verdict::Unknown};
    std::array<int, 4> order{0, 1, 2, 3};
    int cases = 0, bad = 0;
    do {
        for (int code = 0; code < 81; ++code) {
            std::vector<drv::MemberResult> arrivals;
            int k = code;
            for (int i : order) {
                drv::MemberResult r{drv::kMembers[i], vs[k % 3], {}};
                if (r.verdict == eng::Verdict::Unsafe) r.errors.push_back(eng::ErrorReport{});
                arrivals.push_back(r);
                k /= 3;
            }
            drv::Outcome want = drv::Outcome::Unknown;
            for (const auto& r : arrivals) {
                const bool hunter = r.member != drv::Member::Verifier;
                if (r.member == drv::Member::Verifier && r.verdict == eng::Verdict::Safe) {
                    want = drv::Outcome::True;
                    break;
                }
                if (hunter && r.verdict == eng::Verdict::Unsafe) {
                    want = drv::Outcome::False;
                    break;
                }
                if (r.member == drv::Member::Bfs && r.verdict == eng::Verdict::Safe) {
                    want = drv::Outcome::True;
                    break;
                }
            }
            ++cases;
            if (drv::compose(arrivals).outcome != want) ++bad;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    c.require(bad == 0, std::to_string(bad) + " compositions differ");
    report("portfolio composition", c, std::to_string(cases) + " outcome/order combinations");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: " << argv[0] << " <heapsmg-cli>\n";
        return 2;
    }
    running_example();
    mutants(argv[1]);
    reinterpretation();
    join_soundness();
    abstraction_thresholds();
    join_status_table();
    differential();
    portfolio();
    return failures == 0 ? 0 : 1;
}
