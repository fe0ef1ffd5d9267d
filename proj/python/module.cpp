#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smg/driver.hpp"
#include "smg/engine.hpp"
#include "smg/mil.hpp"

namespace py = pybind11;
using namespace smg;

namespace {

py::dict report_dict(const engine::ErrorReport& e) {
    py::dict d;
    d["kind"] = engine::to_string(e.kind);
    d["file"] = e.file;
    d["line"] = e.line;
    d["message"] = e.message;
    d["text"] = e.format();
    return d;
}

engine::AnalysisConfig config_for(const std::string& mode, unsigned ptr_size) {
    engine::AnalysisConfig c;
    if (mode == "verifier") {
        c = engine::AnalysisConfig::verifier();
    } else if (mode == "bfs") {
        c = engine::AnalysisConfig::hunter(engine::Search::Bfs, std::nullopt);
    } else if (mode.rfind("dfs:", 0) == 0) {
        c = engine::AnalysisConfig::hunter(engine::Search::Dfs, std::stoul(mode.substr(4)));
    } else {
        throw py::value_error("unknown mode '" + mode + "'");
    }
    c.ptr_size = ptr_size;
    return c;
}

/// Runs one analysis; the GIL is released while the engine works.
py::dict analyze_source(const std::string& text, const std::string& mode, unsigned ptr_size, bool with_dot) {
    const mil::Program p = mil::parse_program(text);
    py::dict out;
    py::list errors;
    if (mode == "party") {
        driver::PartyConfig pc;
        pc.base.ptr_size = ptr_size;
        driver::Verdict v;
        {
            py::gil_scoped_release nogil;
            v = driver::run_hunting_party(p, pc);
        }
        out["verdict"] = driver::to_string(v.outcome);
        out["member"] = v.provenance ? py::cast(driver::to_string(*v.provenance)) : py::none();
        for (const auto& e : v.reports) errors.append(report_dict(e));
        out["errors"] = errors;
        return out;
    }
    const engine::AnalysisConfig cfg = config_for(mode, ptr_size);
    engine::AnalysisResult r;
    {
        py::gil_scoped_release nogil;
        r = engine::analyze(p, cfg);
    }
    out["verdict"] = engine::to_string(r.verdict);
    out["steps"] = r.steps;
    for (const auto& e : r.errors) errors.append(report_dict(e));
    out["errors"] = errors;
    py::dict fix;
    for (std::size_t b = 0; b < r.fixpoint.size(); ++b) {
        py::list at;
        for (const Spc& s : r.fixpoint[b]) at.append(with_dot ? py::cast(driver::to_dot(s, p.blocks[b].label)) : py::cast(s.smg.objects().size()));
        fix[py::str(p.blocks[b].label)] = at;
    }
    out["fixpoint"] = fix;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Shape analysis of MIL pointer programs";

    py::register_exception<mil::ParseError>(m, "ParseError", PyExc_ValueError);

    m.def(
        "parse",
        [](const std::string& text) {
            const mil::Program p = mil::parse_program(text);
            py::dict d;
            d["vars"] = p.vars;
            std::vector<std::string> labels;
            for (const auto& b : p.blocks) labels.push_back(b.label);
            d["blocks"] = labels;
            std::vector<std::string> heads;
            for (int h : p.loop_heads()) heads.push_back(p.blocks[h].label);
            d["loop_heads"] = heads;
            d["text"] = mil::print_program(p);
            return d;
        },
        py::arg("text"), "Parse a program; returns its variables, block labels, loop heads and canonical text.");

    m.def("analyze", &analyze_source, py::arg("text"), py::arg("mode") = "verifier", py::arg("ptr_size") = 8u,
          py::arg("dot") = false,
          "Analyse a program. mode: verifier, bfs, dfs:N or party. With dot=True the stored "
          "configurations are returned as Graphviz text, otherwise as object counts.");
}
