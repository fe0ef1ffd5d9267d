#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smg/engine.hpp"

namespace smg::driver {

enum class Outcome : std::uint8_t { True, False, Unknown };
const char* to_string(Outcome o);

enum class Member : std::uint8_t { Verifier, DfsShort, DfsLong, Bfs };
const char* to_string(Member m);
inline constexpr Member kMembers[] = {Member::Verifier, Member::DfsShort, Member::DfsLong, Member::Bfs};

struct Verdict {
    Outcome outcome = Outcome::Unknown;
    /// Configuration whose result decided the verdict.
    std::optional<Member> provenance;
    std::vector<engine::ErrorReport> reports;
    std::string note;
};

/// What one portfolio member reported.
struct MemberResult {
    Member member = Member::Verifier;
    engine::Verdict verdict = engine::Verdict::Unknown;
    std::vector<engine::ErrorReport> errors;
};

/// The verdict a single arriving result settles, if any.
std::optional<Verdict> decisive(const MemberResult& r);

/// Folds results in arrival order; the first decisive one wins, UNKNOWN otherwise.
Verdict compose(const std::vector<MemberResult>& arrivals);

struct PartyConfig {
    std::size_t dfs_short = 200;
    std::size_t dfs_long = 900;
    /// Wall-clock limit in seconds; 0 disables it.
    double timeout = 60.0;
    engine::AnalysisConfig base;
};

using Runner = std::function<engine::AnalysisResult(const mil::Program&, const engine::AnalysisConfig&)>;

engine::AnalysisConfig member_config(Member m, const PartyConfig& pc);

/// Runs the four members concurrently and composes their results.
class Party {
public:
    explicit Party(Runner runner = engine::analyze) : runner_(std::move(runner)) {}
    Verdict run(const mil::Program& p, const PartyConfig& pc) const;

private:
    Runner runner_;
};

Verdict run_hunting_party(const mil::Program& p, const PartyConfig& pc = {});

/// Graphviz rendering: objects as boxes, values as circles.
std::string to_dot(const Spc& c, const std::string& name = "smg");

/// Node and edge counts with labels, recovered from a rendering made by `to_dot`.
struct DotGraph {
    std::vector<std::pair<std::string, std::string>> nodes;
    std::vector<std::tuple<std::string, std::string, std::string>> edges;
};
DotGraph parse_dot(const std::string& text);

nlohmann::json to_json(const Spc& c);
nlohmann::json fixpoint_json(const mil::Program& p, const engine::AnalysisResult& r);

}  // namespace smg::driver
