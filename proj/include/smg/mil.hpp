#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "smg/smg.hpp"

namespace smg::mil {

enum class Op : std::uint8_t {
    Malloc,
    Calloc,
    Free,
    Null,
    Copy,
    AddOff,
    Load,
    Store,
    Nondet,
    Memset,
    Memcpy,
    Branch,
    Goto,
    Exit,
};

enum class CondOp : std::uint8_t { Eq, Ne, Lt, Le };

/// Field type as written in the source; pointer width is fixed later.
struct MilType {
    bool ptr = true;
    unsigned size = 0;
    bool operator==(const MilType&) const = default;
    FieldType resolve(unsigned ptr_size) const { return ptr ? FieldType::ptr(ptr_size) : FieldType::data(size); }
};

/// An operand that is either a variable or the null constant (empty name).
struct Operand {
    std::string var;
    bool is_null() const { return var.empty(); }
    bool operator==(const Operand&) const = default;
};

/// One instruction. Field use per op:
///  malloc/calloc: dst, n | free: a | null/nondet: dst | copy: dst, a | addoff: dst, a, n
///  load: dst, a, off, ty | store: a, off, ty, b | memset: a, off, n | memcpy: a, off, b, off2, n
///  branch: a cond b, then_label, else_label | goto: then_label
struct Instr {
    Op op = Op::Exit;
    std::string dst;
    Operand a, b;
    std::int64_t n = 0;
    std::int64_t off = 0;
    std::int64_t off2 = 0;
    MilType ty;
    CondOp cond = CondOp::Eq;
    std::string then_label, else_label;
    int then_block = -1, else_block = -1;
    int line = 0;

    bool terminator() const { return op == Op::Branch || op == Op::Goto || op == Op::Exit; }
    bool same_code(const Instr& o) const;
};

struct Block {
    std::string label;
    std::vector<Instr> instrs;
    std::vector<int> succ;
    bool loop_head = false;
};

struct Program {
    std::vector<std::string> vars;
    std::vector<Block> blocks;
    int entry = 0;
    std::string file = "<input>";

    int block_index(const std::string& label) const;
    std::vector<int> loop_heads() const;
};

enum class ParseErrorKind { Syntax, DuplicateLabel, UnknownVariable, UnknownLabel };

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, int line, int col, const std::string& msg);
    ParseErrorKind kind;
    int line;
    int col;
};

/// Parses a program; the CFG (successors, loop heads) is built as well.
Program parse_program(const std::string& text, const std::string& file = "<input>");
Program parse_file(const std::string& path);

/// Fills successors and marks targets of DFS back edges, visiting successors in order.
void build_cfg(Program& p);

std::string print_instr(const Instr& i);
/// Canonical text; parsing it yields the same program.
std::string print_program(const Program& p);

const char* to_string(Op op);

}  // namespace smg::mil
