#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smg/abstraction.hpp"
#include "smg/mil.hpp"
#include "smg/smg.hpp"

namespace smg::engine {

enum class ErrorKind : std::uint8_t {
    NullDeref,
    InvalidDeref,
    OutOfBounds,
    DoubleFree,
    InvalidFree,
    MemLeak,
    OverlappingCopy,
};

const char* to_string(ErrorKind k);
std::optional<ErrorKind> error_kind_from_string(const std::string& s);

struct TraceStep {
    int block = -1;
    int index = -1;
    int line = 0;
    bool operator==(const TraceStep&) const = default;
};

struct ErrorReport {
    ErrorKind kind = ErrorKind::InvalidDeref;
    std::string file;
    int line = 0;
    std::string message;
    std::vector<TraceStep> trace;

    /// "file:line: error: message"
    std::string format() const;
};

/// One result of a transfer step. `halted` states carry an error and are not continued;
/// leak reports keep the collected state so analysis may go on.
struct Successor {
    Spc spc;
    std::optional<ErrorReport> error;
    bool halted = false;
    /// Target block of a branch or goto; -1 otherwise.
    int block = -1;
};

std::vector<Successor> exec_instr(const Spc& c, const mil::Instr& in, const std::string& file = "<input>");

/// Initial configuration: one uninitialised region per program variable.
Spc initial_spc(const mil::Program& p, unsigned ptr_size = 8);

enum class Mode : std::uint8_t { Verifier, Hunter };
enum class Search : std::uint8_t { Bfs, Dfs };
enum class Where : std::uint8_t { Loop, Block, Never };
enum class Verdict : std::uint8_t { Safe, Unsafe, Unknown };

const char* to_string(Verdict v);

struct AnalysisConfig {
    Mode mode = Mode::Verifier;
    Search search = Search::Bfs;
    /// Hunters: instructions per path (DFS) or in total (BFS). Verifier: in total.
    std::optional<std::size_t> step_budget;
    Where abstraction_at = Where::Loop;
    Where join_at = Where::Loop;
    LenThresholds len_thresholds = kDefaultThresholds;
    unsigned ptr_size = 8;
    /// Continue after leaks. Defaults to on for the verifier and off for hunters.
    std::optional<bool> error_recovery;
    /// Hard cap on executed instructions; reaching it yields Unknown.
    std::size_t max_steps = 2'000'000;
    /// Check consistency after every step and throw on a violation.
    bool paranoid = false;
    /// Polled once per transfer step; returning true aborts with Unknown.
    std::function<bool()> cancelled;

    static AnalysisConfig verifier();
    static AnalysisConfig hunter(Search s, std::optional<std::size_t> budget);
};

struct AnalysisResult {
    Verdict verdict = Verdict::Unknown;
    /// Stored configurations per block entry.
    std::vector<std::vector<Spc>> fixpoint;
    std::vector<ErrorReport> errors;
    std::size_t steps = 0;
    bool truncated = false;
    bool cancelled = false;
};

AnalysisResult analyze(const mil::Program& p, const AnalysisConfig& cfg);

struct ConcreteLimits {
    /// Non-zero results of nondet() allowed per path.
    unsigned max_nondet_true = 4;
    /// Instructions per path.
    std::size_t max_path_steps = 400;
    std::size_t max_states = 200000;
    unsigned ptr_size = 8;
};

struct ConcreteState {
    int block = -1;
    Spc spc;
};

struct ConcreteRun {
    /// Distinct segment-free configurations seen at block entries.
    std::vector<ConcreteState> states;
    std::vector<ErrorReport> errors;
    bool truncated = false;
};

/// Reference interpreter over segment-free graphs; nondet() forks into zero and a fresh value.
ConcreteRun run_concrete(const mil::Program& p, const ConcreteLimits& lim = {});

}  // namespace smg::engine
