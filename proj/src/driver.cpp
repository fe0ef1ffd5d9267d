#include "smg/driver.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

namespace smg::driver {

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::True: return "TRUE";
        case Outcome::False: return "FALSE";
        case Outcome::Unknown: return "UNKNOWN";
    }
    return "?";
}

const char* to_string(Member m) {
    switch (m) {
        case Member::Verifier: return "verifier";
        case Member::DfsShort: return "dfs-short";
        case Member::DfsLong: return "dfs-long";
        case Member::Bfs: return "bfs";
    }
    return "?";
}

std::optional<Verdict> decisive(const MemberResult& r) {
    using engine::Verdict;
    if (r.member == Member::Verifier) {
        if (r.verdict == Verdict::Safe) return driver::Verdict{Outcome::True, r.member, {}, "proved by the verifier"};
        return std::nullopt;
    }
    if (r.verdict == Verdict::Unsafe && !r.errors.empty())
        return driver::Verdict{Outcome::False, r.member, {r.errors.front()}, "error found by a hunter"};
    if (r.member == Member::Bfs && r.verdict == Verdict::Safe)
        return driver::Verdict{Outcome::True, r.member, {}, "state space exhausted by the BFS hunter"};
    return std::nullopt;
}

Verdict compose(const std::vector<MemberResult>& arrivals) {
    for (const MemberResult& r : arrivals)
        if (auto v = decisive(r)) return *v;
    return Verdict{Outcome::Unknown, std::nullopt, {}, "no member reached a verdict"};
}

engine::AnalysisConfig member_config(Member m, const PartyConfig& pc) {
    engine::AnalysisConfig c = pc.base;
    switch (m) {
        case Member::Verifier:
            c.mode = engine::Mode::Verifier;
            c.search = engine::Search::Bfs;
            c.step_budget.reset();
            break;
        case Member::DfsShort:
        case Member::DfsLong:
            c.mode = engine::Mode::Hunter;
            c.search = engine::Search::Dfs;
            c.step_budget = m == Member::DfsShort ? pc.dfs_short : pc.dfs_long;
            break;
        case Member::Bfs:
            c.mode = engine::Mode::Hunter;
            c.search = engine::Search::Bfs;
            c.step_budget.reset();
            break;
    }
    c.error_recovery.reset();
    return c;
}

Verdict Party::run(const mil::Program& p, const PartyConfig& pc) const {
    std::mutex mu;
    std::condition_variable cv;
    std::vector<MemberResult> arrived;
    std::atomic<bool> stop{false};
    using Clock = std::chrono::steady_clock;
    const auto deadline = pc.timeout > 0 ? Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                                                 std::chrono::duration<double>(pc.timeout))
                                         : Clock::time_point::max();

    std::vector<std::thread> threads;
    for (Member m : kMembers) {
        threads.emplace_back([&, m] {
            engine::AnalysisConfig c = member_config(m, pc);
            auto outer = c.cancelled;
            c.cancelled = [&stop, deadline, outer] {
                return stop.load() || Clock::now() >= deadline || (outer && outer());
            };
            MemberResult r{m, engine::Verdict::Unknown, {}};
            try {
                engine::AnalysisResult res = runner_(p, c);
                r.verdict = res.verdict;
                r.errors = std::move(res.errors);
            } catch (const std::exception&) {
                r.verdict = engine::Verdict::Unknown;
            }
            std::lock_guard<std::mutex> lk(mu);
            arrived.push_back(std::move(r));
            cv.notify_all();
        });
    }

    std::optional<Verdict> out;
    {
        std::unique_lock<std::mutex> lk(mu);
        std::size_t seen = 0;
        while (!out) {
            cv.wait_until(lk, deadline, [&] { return arrived.size() > seen; });
            for (; seen < arrived.size() && !out; ++seen) out = decisive(arrived[seen]);
            if (out || arrived.size() == std::size(kMembers)) break;
            if (Clock::now() >= deadline) break;
        }
    }
    stop = true;
    for (std::thread& t : threads) t.join();
    if (out) return *out;
    return Verdict{Outcome::Unknown, std::nullopt, {}, "no member reached a verdict"};
}

Verdict run_hunting_party(const mil::Program& p, const PartyConfig& pc) { return Party().run(p, pc); }

namespace {

std::string object_label(const Spc& c, ObjectId o) {
    if (o == kNullObject) return "#";
    const ObjectLabel& l = c.smg.label(o);
    std::ostringstream s;
    s << smg::to_string(l.kind) << " size=" << l.size;
    if (l.segment()) {
        s << " len=" << l.len << "+ hfo=" << l.hfo << " nfo=" << l.nfo;
        if (l.dls()) s << " pfo=" << l.pfo;
    }
    s << " level=" << l.level << (l.valid ? " valid" : " invalid");
    for (const auto& [name, r] : c.vars)
        if (r == o) s << " var=" << name;
    return s.str();
}

std::string type_label(const FieldType& t) {
    return (t.kind == FieldKind::Ptr ? "ptr" : "data") + std::to_string(t.size);
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out;
}

}  // namespace

std::string to_dot(const Spc& c, const std::string& name) {
    const Smg& g = c.smg;
    std::ostringstream out;
    out << "digraph \"" << escape(name) << "\" {\n";
    for (const auto& [o, l] : g.objects())
        out << "  o" << o << " [shape=box, label=\"" << escape(object_label(c, o)) << "\"];\n";
    for (const auto& [v, lvl] : g.values())
        out << "  v" << v << " [shape=circle, label=\"" << (v == kZero ? std::string("0") : "#" + std::to_string(v))
            << " level=" << lvl << "\"];\n";
    for (const auto& [o, l] : g.objects())
        for (const Field& f : g.fields(o))
            out << "  o" << o << " -> v" << f.val << " [label=\"" << f.off << "," << type_label(f.ty) << "\"];\n";
    for (const auto& [v, t] : g.targets())
        out << "  v" << v << " -> o" << t.obj << " [label=\"" << t.off << "," << smg::to_string(t.tg) << "\"];\n";
    out << "}\n";
    return out.str();
}

DotGraph parse_dot(const std::string& text) {
    static const std::regex node(R"re(^\s*(\w+)\s*\[shape=\w+,\s*label="((?:[^"\\]|\\.)*)"\];\s*$)re");
    static const std::regex edge(R"re(^\s*(\w+)\s*->\s*(\w+)\s*\[label="((?:[^"\\]|\\.)*)"\];\s*$)re");
    DotGraph d;
    std::istringstream in(text);
    std::string line;
    std::smatch m;
    while (std::getline(in, line)) {
        if (std::regex_match(line, m, edge))
            d.edges.emplace_back(m[1], m[2], m[3]);
        else if (std::regex_match(line, m, node))
            d.nodes.emplace_back(m[1], m[2]);
    }
    return d;
}

nlohmann::json to_json(const Spc& c) {
    using nlohmann::json;
    const Smg& g = c.smg;
    json j;
    j["ptr_size"] = g.ptr_size();
    j["objects"] = json::array();
    for (const auto& [o, l] : g.objects()) {
        json x{{"id", o},        {"kind", smg::to_string(l.kind)}, {"level", l.level},
               {"size", l.size}, {"valid", l.valid}};
        if (l.segment()) {
            x["len"] = l.len;
            x["hfo"] = l.hfo;
            x["nfo"] = l.nfo;
            if (l.dls()) x["pfo"] = l.pfo;
        }
        j["objects"].push_back(x);
    }
    j["values"] = json::array();
    for (const auto& [v, lvl] : g.values()) j["values"].push_back({{"id", v}, {"level", lvl}});
    j["has_value"] = json::array();
    for (const auto& [o, l] : g.objects())
        for (const Field& f : g.fields(o))
            j["has_value"].push_back({{"object", o},
                                      {"offset", f.off},
                                      {"type", f.ty.kind == FieldKind::Ptr ? "ptr" : "data"},
                                      {"size", f.ty.size},
                                      {"value", f.val}});
    j["points_to"] = json::array();
    for (const auto& [v, t] : g.targets())
        j["points_to"].push_back({{"value", v}, {"offset", t.off}, {"tg", smg::to_string(t.tg)}, {"object", t.obj}});
    j["vars"] = json::object();
    for (const auto& [name, o] : c.vars) j["vars"][name] = o;
    return j;
}

nlohmann::json fixpoint_json(const mil::Program& p, const engine::AnalysisResult& r) {
    using nlohmann::json;
    json j;
    j["file"] = p.file;
    j["verdict"] = engine::to_string(r.verdict);
    j["locations"] = json::array();
    for (std::size_t b = 0; b < p.blocks.size() && b < r.fixpoint.size(); ++b) {
        json loc{{"block", p.blocks[b].label}, {"loop_head", p.blocks[b].loop_head}, {"configurations", json::array()}};
        for (const Spc& c : r.fixpoint[b]) loc["configurations"].push_back(to_json(c));
        j["locations"].push_back(loc);
    }
    j["errors"] = json::array();
    for (const auto& e : r.errors)
        j["errors"].push_back({{"kind", engine::to_string(e.kind)}, {"line", e.line}, {"message", e.message}});
    return j;
}

}  // namespace smg::driver
