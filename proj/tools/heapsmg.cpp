#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>

#include "smg/driver.hpp"

namespace {

using namespace smg;

enum Exit { kTrue = 0, kFalse = 1, kUnknown = 2, kInputError = 3, kInternalError = 4 };

void print_report(const engine::ErrorReport& e, const mil::Program& p) {
    std::cerr << e.format() << "\n";
    for (const engine::TraceStep& s : e.trace) {
        const mil::Instr& in = p.blocks[s.block].instrs[s.index];
        std::cerr << p.file << ":" << s.line << ": note: trace: " << p.blocks[s.block].label << ": "
                  << mil::print_instr(in) << "\n";
    }
}

std::optional<engine::Where> parse_where(const std::string& s, bool allow_never) {
    if (s == "loop") return engine::Where::Loop;
    if (s == "block") return engine::Where::Block;
    if (s == "never" && allow_never) return engine::Where::Never;
    return std::nullopt;
}

int run(int argc, char** argv) {
    CLI::App app{"Shape analysis of pointer programs written in MIL"};
    std::string file, mode = "party", dot_dir, dump, len_thr, join_at = "loop", abstraction_at = "loop";
    unsigned ptr_size = 8;
    double timeout = 60.0;
    app.add_option("file", file, "program to analyse")->required();
    app.add_option("--mode", mode, "verifier | dfs:N | bfs | party");
    app.add_option("--dot-dir", dot_dir, "write one DOT file per stored configuration");
    app.add_option("--dump-fixpoint", dump, "write the stored configurations as JSON");
    app.add_option("--len-thr", len_thr, "merge length thresholds per cost, c0,c1,c2");
    app.add_option("--join-at", join_at, "loop | block | never");
    app.add_option("--abstraction-at", abstraction_at, "loop | block");
    app.add_option("--ptr-size", ptr_size, "pointer size in bytes")->check(CLI::IsMember({4u, 8u}));
    app.add_option("--timeout", timeout, "wall-clock limit in seconds (0 disables)")->check(CLI::NonNegativeNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    engine::AnalysisConfig base;
    base.ptr_size = ptr_size;
    auto ja = parse_where(join_at, true);
    auto aa = parse_where(abstraction_at, false);
    if (!ja || !aa) {
        std::cerr << "heapsmg: invalid --join-at or --abstraction-at value\n";
        return kInputError;
    }
    base.join_at = *ja;
    base.abstraction_at = *aa;
    if (!len_thr.empty()) {
        static const std::regex thr(R"(^(\d+),(\d+),(\d+)$)");
        std::smatch m;
        if (!std::regex_match(len_thr, m, thr)) {
            std::cerr << "heapsmg: --len-thr expects three comma-separated numbers\n";
            return kInputError;
        }
        for (int i = 0; i < 3; ++i) base.len_thresholds[i] = static_cast<unsigned>(std::stoul(m[i + 1]));
    }

    mil::Program p;
    try {
        p = mil::parse_file(file);
    } catch (const mil::ParseError& e) {
        std::cerr << file << ":" << e.line << ":" << e.col << ": error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "heapsmg: " << e.what() << "\n";
        return kInputError;
    }

    using Clock = std::chrono::steady_clock;
    const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(timeout));
    if (timeout > 0) base.cancelled = [deadline] { return Clock::now() >= deadline; };

    driver::Outcome outcome;
    std::vector<engine::ErrorReport> reports;
    std::optional<engine::AnalysisResult> single;
    if (mode == "party") {
        driver::PartyConfig pc;
        pc.base = base;
        pc.base.cancelled = nullptr;
        pc.timeout = timeout;
        driver::Verdict v = driver::run_hunting_party(p, pc);
        outcome = v.outcome;
        reports = v.reports;
        if (v.provenance) std::cerr << "heapsmg: verdict from " << driver::to_string(*v.provenance) << "\n";
    } else {
        engine::AnalysisConfig c = base;
        static const std::regex dfs(R"(^dfs:(\d+)$)");
        std::smatch m;
        if (mode == "verifier") {
            c.mode = engine::Mode::Verifier;
        } else if (mode == "bfs") {
            c.mode = engine::Mode::Hunter;
            c.search = engine::Search::Bfs;
        } else if (std::regex_match(mode, m, dfs)) {
            c.mode = engine::Mode::Hunter;
            c.search = engine::Search::Dfs;
            c.step_budget = std::stoul(m[1]);
        } else {
            std::cerr << "heapsmg: unknown mode '" << mode << "'\n";
            return kInputError;
        }
        single = engine::analyze(p, c);
        reports = single->errors;
        outcome = single->verdict == engine::Verdict::Safe     ? driver::Outcome::True
                  : single->verdict == engine::Verdict::Unsafe ? driver::Outcome::False
                                                               : driver::Outcome::Unknown;
    }

    for (const auto& e : reports) print_report(e, p);
    std::cout << driver::to_string(outcome);
    if (outcome == driver::Outcome::False && !reports.empty()) std::cout << ":" << engine::to_string(reports.front().kind);
    std::cout << "\n";

    if ((!dump.empty() || !dot_dir.empty()) && !single) {
        engine::AnalysisConfig c = base;
        c.mode = engine::Mode::Verifier;
        single = engine::analyze(p, c);
    }
    if (!dump.empty()) {
        std::ofstream out(dump);
        if (!out) {
            std::cerr << "heapsmg: cannot write '" << dump << "'\n";
            return kInputError;
        }
        out << driver::fixpoint_json(p, *single).dump(2) << "\n";
    }
    if (!dot_dir.empty()) {
        std::filesystem::create_directories(dot_dir);
        for (std::size_t b = 0; b < single->fixpoint.size(); ++b)
            for (std::size_t i = 0; i < single->fixpoint[b].size(); ++i) {
                const std::string name = p.blocks[b].label + "." + std::to_string(i + 1);
                std::ofstream out(std::filesystem::path(dot_dir) / (name + ".dot"));
                out << driver::to_dot(single->fixpoint[b][i], name);
            }
    }

    switch (outcome) {
        case driver::Outcome::True: return kTrue;
        case driver::Outcome::False: return kFalse;
        case driver::Outcome::Unknown: return kUnknown;
    }
    return kUnknown;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "heapsmg: internal error: " << e.what() << "\n";
        return kInternalError;
    }
}
