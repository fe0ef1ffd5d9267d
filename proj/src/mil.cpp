#include "smg/mil.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace smg::mil {

ParseError::ParseError(ParseErrorKind k, int l, int c, const std::string& msg)
    : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), kind(k), line(l), col(c) {}

bool Instr::same_code(const Instr& o) const {
    return op == o.op && dst == o.dst && a == o.a && b == o.b && n == o.n && off == o.off && off2 == o.off2 &&
           ty == o.ty && cond == o.cond && then_label == o.then_label && else_label == o.else_label;
}

int Program::block_index(const std::string& label) const {
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].label == label) return static_cast<int>(i);
    return -1;
}

std::vector<int> Program::loop_heads() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].loop_head) out.push_back(static_cast<int>(i));
    return out;
}

const char* to_string(Op op) {
    switch (op) {
        case Op::Malloc: return "malloc";
        case Op::Calloc: return "calloc";
        case Op::Free: return "free";
        case Op::Null: return "null";
        case Op::Copy: return "copy";
        case Op::AddOff: return "addoff";
        case Op::Load: return "load";
        case Op::Store: return "store";
        case Op::Nondet: return "nondet";
        case Op::Memset: return "memset";
        case Op::Memcpy: return "memcpy";
        case Op::Branch: return "branch";
        case Op::Goto: return "goto";
        case Op::Exit: return "exit";
    }
    return "?";
}

namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::int64_t num = 0;
    int line = 0, col = 0;
};

const std::set<std::string> kKeywords{"vars",   "null",   "malloc", "calloc", "free",   "load",  "store",
                                      "nondet", "memset", "memcpy", "branch", "goto",   "exit"};

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto adv = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
            while (i < s.size() && s[i] != '\n') adv(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            t.kind = Tok::Ident;
            t.text = s.substr(i, j - i);
            adv(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            t.kind = Tok::Int;
            t.text = s.substr(i, j - i);
            try {
                t.num = std::stoll(t.text);
            } catch (const std::out_of_range&) {
                throw ParseError(ParseErrorKind::Syntax, line, col, "integer literal out of range");
            }
            adv(j - i);
        } else {
            static const char* two[] = {"==", "!=", "<="};
            t.kind = Tok::Punct;
            for (const char* p : two)
                if (s.compare(i, 2, p) == 0) t.text = p;
            if (t.text.empty()) {
                if (std::string("=;,:[]()+-<").find(c) == std::string::npos)
                    throw ParseError(ParseErrorKind::Syntax, line, col, std::string("unexpected character '") + c + "'");
                t.text = std::string(1, c);
            }
            adv(t.text.size());
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.line = line;
    end.col = col;
    out.push_back(end);
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

    Program run() {
        Program p;
        expect_word("vars");
        while (true) {
            const Token& v = ident("variable name");
            if (kKeywords.count(v.text)) fail(v, "keyword '" + v.text + "' used as variable");
            if (vars_.count(v.text)) fail(v, "variable '" + v.text + "' declared twice");
            vars_.insert(v.text);
            p.vars.push_back(v.text);
            if (accept(",")) continue;
            expect(";");
            break;
        }
        std::map<std::string, int> labels;
        std::vector<std::pair<Token, std::string>> uses;
        bool first = true;
        while (peek().kind != Tok::End) {
            Block b;
            if (peek().kind == Tok::Ident && peek(1).kind == Tok::Punct && peek(1).text == ":") {
                const Token lt = next();
                next();
                if (labels.count(lt.text))
                    throw ParseError(ParseErrorKind::DuplicateLabel, lt.line, lt.col,
                                     "label '" + lt.text + "' defined twice");
                b.label = lt.text;
            } else if (first) {
                b.label = "entry";
            } else {
                fail(peek(), "expected a label");
            }
            labels[b.label] = static_cast<int>(p.blocks.size());
            first = false;
            while (peek().kind != Tok::End && !(peek(1).kind == Tok::Punct && peek(1).text == ":")) {
                Instr in = instr();
                if (!b.instrs.empty() && b.instrs.back().terminator())
                    fail(peek(), "instruction after the end of block '" + b.label + "'");
                if (in.op == Op::Branch) {
                    uses.push_back({last_label_tok_[0], in.then_label});
                    uses.push_back({last_label_tok_[1], in.else_label});
                } else if (in.op == Op::Goto) {
                    uses.push_back({last_label_tok_[0], in.then_label});
                }
                b.instrs.push_back(std::move(in));
                if (b.instrs.back().terminator() && peek().kind == Tok::End) break;
            }
            if (b.instrs.empty() || !b.instrs.back().terminator())
                fail(peek(), "block '" + b.label + "' does not end with branch, goto or exit");
            p.blocks.push_back(std::move(b));
        }
        if (p.blocks.empty()) fail(peek(), "program has no blocks");
        for (const auto& [tok, l] : uses)
            if (!labels.count(l))
                throw ParseError(ParseErrorKind::UnknownLabel, tok.line, tok.col, "unknown label '" + l + "'");
        for (Block& b : p.blocks)
            for (Instr& in : b.instrs) {
                if (in.op == Op::Branch) {
                    in.then_block = labels.at(in.then_label);
                    in.else_block = labels.at(in.else_label);
                } else if (in.op == Op::Goto) {
                    in.then_block = labels.at(in.then_label);
                }
            }
        build_cfg(p);
        return p;
    }

private:
    std::vector<Token> t_;
    std::size_t pos_ = 0;
    std::set<std::string> vars_;
    Token last_label_tok_[2];

    const Token& peek(std::size_t k = 0) const { return t_[std::min(pos_ + k, t_.size() - 1)]; }
    const Token& next() {
        const Token& t = t_[pos_];
        if (pos_ + 1 < t_.size()) ++pos_;
        return t;
    }
    [[noreturn]] static void fail(const Token& t, const std::string& msg) {
        throw ParseError(ParseErrorKind::Syntax, t.line, t.col, msg);
    }
    static std::string show(const Token& t) { return t.kind == Tok::End ? "end of input" : "'" + t.text + "'"; }
    bool accept(const std::string& p) {
        if (peek().kind == Tok::Punct && peek().text == p) {
            next();
            return true;
        }
        return false;
    }
    void expect(const std::string& p) {
        if (!accept(p)) fail(peek(), "expected '" + p + "', found " + show(peek()));
    }
    bool accept_word(const std::string& w) {
        if (peek().kind == Tok::Ident && peek().text == w) {
            next();
            return true;
        }
        return false;
    }
    void expect_word(const std::string& w) {
        if (!accept_word(w)) fail(peek(), "expected '" + w + "', found " + show(peek()));
    }
    const Token& ident(const char* what) {
        if (peek().kind != Tok::Ident) fail(peek(), std::string("expected ") + what + ", found " + show(peek()));
        return next();
    }
    std::string var() {
        const Token& t = ident("variable");
        if (!vars_.count(t.text))
            throw ParseError(ParseErrorKind::UnknownVariable, t.line, t.col, "unknown variable '" + t.text + "'");
        return t.text;
    }
    Operand operand() {
        if (accept_word("null")) return {};
        if (peek().kind == Tok::Int && peek().num == 0) {
            next();
            return {};
        }
        return {var()};
    }
    std::int64_t integer() {
        bool neg = accept("-");
        if (peek().kind != Tok::Int) fail(peek(), "expected an integer, found " + show(peek()));
        const std::int64_t v = next().num;
        return neg ? -v : v;
    }
    std::int64_t offset_suffix() {
        if (accept("+")) return integer();
        if (accept("-")) {
            if (peek().kind != Tok::Int) fail(peek(), "expected an integer, found " + show(peek()));
            return -next().num;
        }
        return 0;
    }
    MilType type() {
        const Token& t = ident("type");
        if (t.text == "ptr") return {true, 0};
        static const std::map<std::string, unsigned> data{{"data1", 1}, {"data2", 2}, {"data4", 4}, {"data8", 8}};
        auto it = data.find(t.text);
        if (it == data.end()) fail(t, "unknown type '" + t.text + "'");
        return {false, it->second};
    }
    std::int64_t size_arg() {
        const Token& t = peek();
        std::int64_t n = integer();
        if (n < 0) fail(t, "size must not be negative");
        return n;
    }
    std::string label_ref(int slot) {
        last_label_tok_[slot] = peek();
        return ident("label").text;
    }
    void end_instr() {
        if (accept(";")) return;
        if (peek().kind == Tok::End) return;
        fail(peek(), "expected ';', found " + show(peek()));
    }

    Instr instr() {
        Instr in;
        in.line = peek().line;
        const Token head = peek();
        if (head.kind != Tok::Ident) fail(head, "expected an instruction, found " + show(head));
        if (accept_word("free")) {
            in.op = Op::Free;
            expect("(");
            in.a = {var()};
            expect(")");
        } else if (accept_word("store")) {
            in.op = Op::Store;
            expect("[");
            in.a = {var()};
            in.off = offset_suffix();
            expect(":");
            in.ty = type();
            expect("]");
            expect("=");
            in.b = operand();
        } else if (accept_word("memset")) {
            in.op = Op::Memset;
            expect("(");
            in.a = {var()};
            in.off = offset_suffix();
            expect(",");
            const Token& z = peek();
            if (integer() != 0) fail(z, "only zero fill is supported");
            expect(",");
            in.n = size_arg();
            expect(")");
        } else if (accept_word("memcpy")) {
            in.op = Op::Memcpy;
            expect("(");
            in.a = {var()};
            in.off = offset_suffix();
            expect(",");
            in.b = {var()};
            in.off2 = offset_suffix();
            expect(",");
            in.n = size_arg();
            expect(")");
        } else if (accept_word("branch")) {
            in.op = Op::Branch;
            in.a = operand();
            const Token& c = peek();
            if (accept("=="))
                in.cond = CondOp::Eq;
            else if (accept("!="))
                in.cond = CondOp::Ne;
            else if (accept("<="))
                in.cond = CondOp::Le;
            else if (accept("<"))
                in.cond = CondOp::Lt;
            else
                fail(c, "expected a comparison, found " + show(c));
            in.b = operand();
            expect(",");
            in.then_label = label_ref(0);
            expect(",");
            in.else_label = label_ref(1);
        } else if (accept_word("goto")) {
            in.op = Op::Goto;
            in.then_label = label_ref(0);
        } else if (accept_word("exit")) {
            in.op = Op::Exit;
        } else {
            in.dst = var();
            expect("=");
            if (accept_word("malloc") || (peek().text == "calloc" && peek().kind == Tok::Ident)) {
                in.op = Op::Malloc;
                if (accept_word("calloc")) in.op = Op::Calloc;
                expect("(");
                in.n = size_arg();
                expect(")");
            } else if (accept_word("null")) {
                in.op = Op::Null;
            } else if (accept_word("nondet")) {
                in.op = Op::Nondet;
                expect("(");
                expect(")");
            } else if (accept_word("load")) {
                in.op = Op::Load;
                expect("[");
                in.a = {var()};
                in.off = offset_suffix();
                expect(":");
                in.ty = type();
                expect("]");
            } else if (peek().kind == Tok::Ident && !kKeywords.count(peek().text)) {
                in.a = {var()};
                if (peek().kind == Tok::Punct && (peek().text == "+" || peek().text == "-")) {
                    in.op = Op::AddOff;
                    in.n = offset_suffix();
                } else {
                    in.op = Op::Copy;
                }
            } else if (peek().kind == Tok::Int && peek().num == 0) {
                next();
                in.op = Op::Null;
            } else {
                fail(peek(), "unknown expression " + show(peek()));
            }
        }
        end_instr();
        return in;
    }
};

std::string offset_text(std::int64_t off) {
    if (off < 0) return " - " + std::to_string(-off);
    return " + " + std::to_string(off);
}

std::string type_text(const MilType& t) { return t.ptr ? "ptr" : "data" + std::to_string(t.size); }

std::string operand_text(const Operand& o) { return o.is_null() ? "null" : o.var; }

}  // namespace

Program parse_program(const std::string& text, const std::string& file) {
    Program p = Parser(lex(text)).run();
    p.file = file;
    return p;
}

Program parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_program(ss.str(), path);
}

void build_cfg(Program& p) {
    for (Block& b : p.blocks) {
        b.succ.clear();
        b.loop_head = false;
        const Instr& t = b.instrs.back();
        if (t.op == Op::Branch) {
            b.succ.push_back(t.then_block);
            if (t.else_block != t.then_block) b.succ.push_back(t.else_block);
        } else if (t.op == Op::Goto) {
            b.succ.push_back(t.then_block);
        }
    }
    // Iterative DFS; 0 unvisited, 1 on stack, 2 done.
    std::vector<int> state(p.blocks.size(), 0);
    std::vector<std::pair<int, std::size_t>> stack{{p.entry, 0}};
    state[p.entry] = 1;
    while (!stack.empty()) {
        auto& [b, k] = stack.back();
        if (k == p.blocks[b].succ.size()) {
            state[b] = 2;
            stack.pop_back();
            continue;
        }
        const int s = p.blocks[b].succ[k++];
        if (state[s] == 1) {
            p.blocks[s].loop_head = true;
        } else if (state[s] == 0) {
            state[s] = 1;
            stack.push_back({s, 0});
        }
    }
}

std::string print_instr(const Instr& i) {
    switch (i.op) {
        case Op::Malloc: return i.dst + " = malloc(" + std::to_string(i.n) + ");";
        case Op::Calloc: return i.dst + " = calloc(" + std::to_string(i.n) + ");";
        case Op::Free: return "free(" + i.a.var + ");";
        case Op::Null: return i.dst + " = null;";
        case Op::Copy: return i.dst + " = " + i.a.var + ";";
        case Op::AddOff: return i.dst + " = " + i.a.var + offset_text(i.n) + ";";
        case Op::Load: return i.dst + " = load [" + i.a.var + offset_text(i.off) + " : " + type_text(i.ty) + "];";
        case Op::Store:
            return "store [" + i.a.var + offset_text(i.off) + " : " + type_text(i.ty) + "] = " + operand_text(i.b) + ";";
        case Op::Nondet: return i.dst + " = nondet();";
        case Op::Memset: return "memset(" + i.a.var + offset_text(i.off) + ", 0, " + std::to_string(i.n) + ");";
        case Op::Memcpy:
            return "memcpy(" + i.a.var + offset_text(i.off) + ", " + i.b.var + offset_text(i.off2) + ", " +
                   std::to_string(i.n) + ");";
        case Op::Branch: {
            static const char* ops[] = {"==", "!=", "<", "<="};
            return "branch " + operand_text(i.a) + " " + ops[static_cast<int>(i.cond)] + " " + operand_text(i.b) +
                   ", " + i.then_label + ", " + i.else_label + ";";
        }
        case Op::Goto: return "goto " + i.then_label + ";";
        case Op::Exit: return "exit;";
    }
    return "";
}

std::string print_program(const Program& p) {
    std::string out = "vars ";
    for (std::size_t i = 0; i < p.vars.size(); ++i) out += (i ? ", " : "") + p.vars[i];
    out += ";\n";
    for (const Block& b : p.blocks) {
        out += "\n" + b.label + ":\n";
        for (const Instr& i : b.instrs) out += "  " + print_instr(i) + "\n";
    }
    return out;
}

}  // namespace smg::mil
