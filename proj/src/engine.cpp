#include "smg/engine.hpp"

#include <deque>
#include <map>
#include <memory>
#include <set>
#include <variant>

#include "smg/concretise.hpp"
#include "smg/decide.hpp"
#include "smg/join.hpp"
#include "smg/reinterp.hpp"

namespace smg::engine {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::NullDeref: return "NullDeref";
        case ErrorKind::InvalidDeref: return "InvalidDeref";
        case ErrorKind::OutOfBounds: return "OutOfBounds";
        case ErrorKind::DoubleFree: return "DoubleFree";
        case ErrorKind::InvalidFree: return "InvalidFree";
        case ErrorKind::MemLeak: return "MemLeak";
        case ErrorKind::OverlappingCopy: return "OverlappingCopy";
    }
    return "?";
}

std::optional<ErrorKind> error_kind_from_string(const std::string& s) {
    for (int k = 0; k <= static_cast<int>(ErrorKind::OverlappingCopy); ++k)
        if (s == to_string(static_cast<ErrorKind>(k))) return static_cast<ErrorKind>(k);
    return std::nullopt;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Safe: return "TRUE";
        case Verdict::Unsafe: return "FALSE";
        case Verdict::Unknown: return "UNKNOWN";
    }
    return "?";
}

std::string ErrorReport::format() const {
    return file + ":" + std::to_string(line) + ": error: " + message + " [" + to_string(kind) + "]";
}

AnalysisConfig AnalysisConfig::verifier() { return {}; }

AnalysisConfig AnalysisConfig::hunter(Search s, std::optional<std::size_t> budget) {
    AnalysisConfig c;
    c.mode = Mode::Hunter;
    c.search = s;
    c.step_budget = budget;
    return c;
}

namespace {

ValueId get_var(Spc& c, const std::string& name) {
    return read_value_in_place(c.smg, c.vars.at(name), 0, c.smg.ptr_type());
}

ValueId get_operand(Spc& c, const mil::Operand& o) { return o.is_null() ? kZero : get_var(c, o.var); }

void set_var(Spc& c, const std::string& name, ValueId v) {
    write_value_in_place(c.smg, c.vars.at(name), 0, c.smg.ptr_type(), v);
}

/// Splits `c` until the value of `var` no longer addresses an end of a segment.
std::vector<Spc> expose(const Spc& c, const std::string& var) {
    std::vector<Spc> work{c};
    std::vector<Spc> out;
    while (!work.empty()) {
        Spc s = std::move(work.back());
        work.pop_back();
        const ValueId v = get_var(s, var);
        const Target* t = s.smg.target(v);
        if (!t || t->obj == kNullObject || !s.smg.label(t->obj).segment() || (t->tg != Tg::Fst && t->tg != Tg::Lst)) {
            out.push_back(std::move(s));
            continue;
        }
        const ObjectId d = t->obj;
        const End end = t->tg == Tg::Fst ? End::Front : End::Back;
        if (s.smg.label(d).len == 0) {
            Spc r = s;
            remove_zero_segment_in_place(r.smg, d);
            work.push_back(std::move(r));
        }
        materialise_in_place(s.smg, d, end);
        work.push_back(std::move(s));
    }
    return out;
}

struct Access {
    ObjectId obj;
    Offset off;
};

class Step {
public:
    Step(const mil::Instr& in, const std::string& file) : in_(in), file_(file) {}

    std::vector<Successor> run(const Spc& c);

private:
    const mil::Instr& in_;
    const std::string& file_;
    std::vector<Successor> out_;

    void fail(const Spc& s, ErrorKind k, const std::string& msg) {
        Successor r{s, ErrorReport{k, file_, in_.line, msg, {}}, true, -1};
        out_.push_back(std::move(r));
    }
    void ok(Spc s, int block = -1) { out_.push_back(Successor{std::move(s), std::nullopt, false, block}); }

    std::variant<Access, ErrorKind> resolve(const Spc& s, ValueId v, Offset of, Offset size, std::string& msg) {
        if (v == kZero) {
            msg = "dereference of a null pointer";
            return ErrorKind::NullDeref;
        }
        const Target* t = s.smg.target(v);
        if (!t) {
            msg = "dereference of a value that is not a valid pointer";
            return ErrorKind::InvalidDeref;
        }
        if (t->obj == kNullObject) {
            msg = "dereference of a null pointer";
            return ErrorKind::NullDeref;
        }
        const ObjectLabel& l = s.smg.label(t->obj);
        if (l.segment()) throw Error("dereference of a summarised target");
        if (!l.valid) {
            msg = "dereference of freed memory";
            return ErrorKind::InvalidDeref;
        }
        const Offset off = t->off + of;
        if (off < 0 || off + size > l.size) {
            msg = "access of " + std::to_string(size) + " bytes at offset " + std::to_string(off) +
                  " is out of bounds of an object of size " + std::to_string(l.size);
            return ErrorKind::OutOfBounds;
        }
        return Access{t->obj, off};
    }

    /// Resolves the address held by `var` plus `of`; reports and returns nullopt on failure.
    std::optional<Access> access(Spc& s, const std::string& var, Offset of, Offset size) {
        std::string msg;
        auto r = resolve(s, get_var(s, var), of, size, msg);
        if (auto* k = std::get_if<ErrorKind>(&r)) {
            fail(s, *k, msg);
            return std::nullopt;
        }
        return std::get<Access>(r);
    }

    void exec_free(const Spc& c);
    void exec_addoff(const Spc& c);
    void exec_memcpy(const Spc& c);
    void exec_branch(const Spc& c);
    void exec_exit(const Spc& c);
};

void Step::exec_free(const Spc& c) {
    Spc c0 = c;
    if (get_var(c0, in_.a.var) == kZero) return ok(std::move(c0));
    for (Spc& s : expose(c0, in_.a.var)) {
        const ValueId v = get_var(s, in_.a.var);
        if (v == kZero) {
            ok(std::move(s));
            continue;
        }
        const Target* t = s.smg.target(v);
        if (!t || t->obj == kNullObject) {
            fail(s, ErrorKind::InvalidFree, "free of a value that is not a heap pointer");
            continue;
        }
        const ObjectId o = t->obj;
        if (s.is_var_region(o)) {
            fail(s, ErrorKind::InvalidFree, "free of a non-heap object");
            continue;
        }
        if (!s.smg.label(o).valid) {
            fail(s, ErrorKind::DoubleFree, "double free");
            continue;
        }
        if (t->off != 0) {
            fail(s, ErrorKind::InvalidFree, "free of a pointer into the middle of an object");
            continue;
        }
        s.smg.clear_fields(o);
        s.smg.label(o).valid = false;
        ok(std::move(s));
    }
}

void Step::exec_addoff(const Spc& c) {
    if (in_.n == 0) {
        Spc s = c;
        set_var(s, in_.dst, get_var(s, in_.a.var));
        return ok(std::move(s));
    }
    for (Spc& s : expose(c, in_.a.var)) {
        const ValueId v = get_var(s, in_.a.var);
        const Target* t = s.smg.target(v);
        ValueId r;
        if (!t || t->obj == kNullObject)
            r = s.smg.add_value(0);
        else
            r = s.smg.address(t->off + in_.n, Tg::Reg, t->obj, 0);
        set_var(s, in_.dst, r);
        ok(std::move(s));
    }
}

void Step::exec_memcpy(const Spc& c) {
    for (Spc& s1 : expose(c, in_.a.var)) {
        for (Spc& s : expose(s1, in_.b.var)) {
            if (in_.n == 0) {
                ok(std::move(s));
                continue;
            }
            auto dst = access(s, in_.a.var, in_.off, in_.n);
            if (!dst) continue;
            auto src = access(s, in_.b.var, in_.off2, in_.n);
            if (!src) continue;
            if (dst->obj == src->obj && dst->off < src->off + in_.n && src->off < dst->off + in_.n) {
                fail(s, ErrorKind::OverlappingCopy, "memcpy with overlapping source and destination");
                continue;
            }
            Smg& g = s.smg;
            const Offset lo = src->off;
            const Offset hi = src->off + in_.n;
            std::vector<std::pair<Offset, Offset>> zeros;
            for (auto [a, b] : zero_intervals(g, src->obj))
                if (a < hi && lo < b) zeros.emplace_back(std::max(a, lo), std::min(b, hi));
            std::vector<Field> fields;
            for (const Field& f : g.fields(src->obj))
                if (f.val != kZero && f.off >= lo && f.end() <= hi) fields.push_back(f);
            const ValueId scratch = g.add_value(0);
            const FieldType span = FieldType::data(static_cast<std::uint32_t>(in_.n));
            write_value_in_place(g, dst->obj, dst->off, span, scratch);
            g.remove_field(dst->obj, dst->off, span);
            g.remove_value(scratch);
            for (auto [a, b] : zeros)
                write_value_in_place(g, dst->obj, dst->off + (a - lo), FieldType::data(static_cast<std::uint32_t>(b - a)),
                                     kZero);
            for (const Field& f : fields) write_value_in_place(g, dst->obj, dst->off + (f.off - lo), f.ty, f.val);
            ok(std::move(s));
        }
    }
}

void Step::exec_branch(const Spc& c) {
    Spc s = c;
    const ValueId v1 = get_operand(s, in_.a);
    const ValueId v2 = get_operand(s, in_.b);
    const int t = in_.then_block;
    const int e = in_.else_block;
    if (in_.cond == mil::CondOp::Eq || in_.cond == mil::CondOp::Ne) {
        const int on_eq = in_.cond == mil::CondOp::Eq ? t : e;
        const int on_neq = in_.cond == mil::CondOp::Eq ? e : t;
        if (v1 == v2) return ok(std::move(s), on_eq);
        if (prove_neq(s.smg, v1, v2)) return ok(std::move(s), on_neq);
        for (Spc& r : assume(s, Relation::Eq, v1, v2)) ok(std::move(r), on_eq);
        for (Spc& r : assume(s, Relation::Neq, v1, v2)) ok(std::move(r), on_neq);
        return;
    }
    const CmpOp op = in_.cond == mil::CondOp::Lt ? CmpOp::Lt : CmpOp::Le;
    std::optional<bool> d;
    if (v1 == v2)
        d = op == CmpOp::Le;
    else
        d = compare_offsets(s.smg, v1, v2, op);
    if (d) return ok(std::move(s), *d ? t : e);
    ok(s, t);
    ok(std::move(s), e);
}

void Step::exec_exit(const Spc& c) {
    Spc s = c;
    for (const auto& [name, o] : c.vars) s.smg.remove_object(o);
    s.vars.clear();
    ok(std::move(s));
}

std::vector<Successor> Step::run(const Spc& c) {
    using mil::Op;
    const unsigned ps = c.smg.ptr_size();
    switch (in_.op) {
        case Op::Malloc:
        case Op::Calloc: {
            Spc s = c;
            ObjectLabel l;
            l.size = in_.n;
            const ObjectId r = s.smg.add_object(l);
            if (in_.op == Op::Calloc && in_.n > 0)
                s.smg.set_field(r, 0, FieldType::data(static_cast<std::uint32_t>(in_.n)), kZero);
            set_var(s, in_.dst, s.smg.address(0, Tg::Reg, r, 0));
            ok(std::move(s));
            break;
        }
        case Op::Free: exec_free(c); break;
        case Op::Null: {
            Spc s = c;
            set_var(s, in_.dst, kZero);
            ok(std::move(s));
            break;
        }
        case Op::Nondet: {
            Spc s = c;
            set_var(s, in_.dst, s.smg.add_value(0));
            ok(std::move(s));
            break;
        }
        case Op::Copy: {
            Spc s = c;
            set_var(s, in_.dst, get_operand(s, in_.a));
            ok(std::move(s));
            break;
        }
        case Op::AddOff: exec_addoff(c); break;
        case Op::Load: {
            const FieldType ty = in_.ty.resolve(ps);
            for (Spc& s : expose(c, in_.a.var)) {
                auto a = access(s, in_.a.var, in_.off, ty.size);
                if (!a) continue;
                const ValueId v = read_value_in_place(s.smg, a->obj, a->off, ty);
                set_var(s, in_.dst, v);
                ok(std::move(s));
            }
            break;
        }
        case Op::Store: {
            const FieldType ty = in_.ty.resolve(ps);
            for (Spc& s : expose(c, in_.a.var)) {
                auto a = access(s, in_.a.var, in_.off, ty.size);
                if (!a) continue;
                const ValueId v = get_operand(s, in_.b);
                write_value_in_place(s.smg, a->obj, a->off, ty, v);
                ok(std::move(s));
            }
            break;
        }
        case Op::Memset: {
            for (Spc& s : expose(c, in_.a.var)) {
                if (in_.n == 0) {
                    ok(std::move(s));
                    continue;
                }
                auto a = access(s, in_.a.var, in_.off, in_.n);
                if (!a) continue;
                write_value_in_place(s.smg, a->obj, a->off, FieldType::data(static_cast<std::uint32_t>(in_.n)), kZero);
                ok(std::move(s));
            }
            break;
        }
        case Op::Memcpy: exec_memcpy(c); break;
        case Op::Branch: exec_branch(c); break;
        case Op::Goto: ok(c, in_.then_block); break;
        case Op::Exit: exec_exit(c); break;
    }
    for (Successor& r : out_) {
        if (r.halted) continue;
        auto leaked = collect_garbage_in_place(r.spc);
        if (!leaked.empty() && !r.error)
            r.error = ErrorReport{ErrorKind::MemLeak, file_, in_.line,
                                  "memory leak of " + std::to_string(leaked.size()) + " object(s)", {}};
    }
    return std::move(out_);
}

struct TraceNode {
    TraceStep step;
    std::shared_ptr<const TraceNode> parent;
};
using TracePtr = std::shared_ptr<const TraceNode>;

std::vector<TraceStep> unwind(const TracePtr& t) {
    std::vector<TraceStep> out;
    for (const TraceNode* n = t.get(); n; n = n->parent.get()) out.push_back(n->step);
    return {out.rbegin(), out.rend()};
}

}  // namespace

std::vector<Successor> exec_instr(const Spc& c, const mil::Instr& in, const std::string& file) {
    return Step(in, file).run(c);
}

Spc initial_spc(const mil::Program& p, unsigned ptr_size) {
    Spc c = empty_spc(ptr_size);
    for (const std::string& v : p.vars) add_variable(c, v);
    return c;
}

namespace {

struct Item {
    int block;
    Spc spc;
    TracePtr trace;
    std::size_t depth;
};

class Analyzer {
public:
    Analyzer(const mil::Program& p, const AnalysisConfig& cfg) : p_(p), cfg_(cfg) {
        const std::size_t n = p.blocks.size();
        res_.fixpoint.resize(n);
        seen_.resize(n);
        hunter_ = cfg.mode == Mode::Hunter;
        recovery_ = cfg.error_recovery.value_or(!hunter_);
        for (std::size_t b = 0; b < n; ++b) {
            auto at = [&](Where w) {
                return w == Where::Block || (w == Where::Loop && p.blocks[b].loop_head);
            };
            join_point_.push_back(!hunter_ && at(cfg.join_at));
            abstract_point_.push_back(!hunter_ && at(cfg.abstraction_at));
        }
    }

    AnalysisResult run() {
        arrive(p_.entry, initial_spc(p_, cfg_.ptr_size), nullptr, 0);
        while (!work_.empty() && !stop_) {
            if (cfg_.cancelled && cfg_.cancelled()) {
                res_.cancelled = true;
                break;
            }
            Item it;
            if (cfg_.search == Search::Dfs) {
                it = std::move(work_.back());
                work_.pop_back();
            } else {
                it = std::move(work_.front());
                work_.pop_front();
            }
            run_block(std::move(it));
        }
        if (!res_.errors.empty())
            res_.verdict = Verdict::Unsafe;
        else if (res_.truncated || res_.cancelled || !work_.empty())
            res_.verdict = Verdict::Unknown;
        else
            res_.verdict = Verdict::Safe;
        return std::move(res_);
    }

private:
    const mil::Program& p_;
    const AnalysisConfig& cfg_;
    AnalysisResult res_;
    std::deque<Item> work_;
    std::vector<std::map<std::string, std::size_t>> seen_;
    std::vector<bool> join_point_, abstract_point_;
    bool hunter_ = false;
    bool recovery_ = true;
    bool stop_ = false;

    void arrive(int block, Spc s, TracePtr trace, std::size_t depth) {
        if (hunter_) {
            const std::string key = canonical_key(s);
            auto [pos, fresh] = seen_[block].try_emplace(key, depth);
            if (!fresh) {
                if (pos->second <= depth) return;
                pos->second = depth;
            } else {
                res_.fixpoint[block].push_back(s);
            }
            work_.push_back(Item{block, std::move(s), std::move(trace), depth});
            return;
        }
        auto& stored = res_.fixpoint[block];
        if (abstract_point_[block]) {
            s = abstract_spc(s, cfg_.len_thresholds);
            if (cfg_.paranoid) check(s, "abstraction result");
        }
        for (const Spc& t : stored)
            if (entails(t, s)) return;
        if (join_point_[block]) {
            for (bool changed = true; changed;) {
                changed = false;
                for (std::size_t i = 0; i < stored.size(); ++i) {
                    auto j = join_spcs(s, stored[i]);
                    if (!j) continue;
                    if (cfg_.paranoid) check(j->spc, "join result");
                    s = std::move(j->spc);
                    stored.erase(stored.begin() + static_cast<std::ptrdiff_t>(i));
                    changed = true;
                    break;
                }
            }
        }
        if (cfg_.paranoid) check(s, "stored configuration");
        stored.push_back(s);
        work_.push_back(Item{block, std::move(s), std::move(trace), depth});
    }

    void check(const Spc& s, const char* what) const {
        auto v = check_consistency(s);
        if (!v.empty()) throw Error(std::string("inconsistent ") + what + ": " + to_string(v.front().kind) + " " + v.front().detail);
    }

    bool over_budget(std::size_t depth) {
        if (res_.steps >= cfg_.max_steps) {
            res_.truncated = true;
            stop_ = true;
            return true;
        }
        if (!cfg_.step_budget) return false;
        if (hunter_ && cfg_.search == Search::Dfs) {
            if (depth >= *cfg_.step_budget) {
                res_.truncated = true;
                return true;
            }
            return false;
        }
        if (res_.steps >= *cfg_.step_budget) {
            res_.truncated = true;
            stop_ = true;
            return true;
        }
        return false;
    }

    void run_block(Item it) {
        const mil::Block& b = p_.blocks[it.block];
        struct Cur {
            Spc spc;
            TracePtr trace;
            std::size_t depth;
        };
        std::vector<Cur> cur;
        cur.push_back({std::move(it.spc), std::move(it.trace), it.depth});
        for (std::size_t idx = 0; idx < b.instrs.size() && !cur.empty(); ++idx) {
            const mil::Instr& in = b.instrs[idx];
            std::vector<Cur> next;
            std::vector<std::pair<int, Cur>> exits;
            for (Cur& c : cur) {
                if (stop_ || over_budget(c.depth)) continue;
                if (cfg_.cancelled && cfg_.cancelled()) {
                    res_.cancelled = true;
                    stop_ = true;
                    continue;
                }
                ++res_.steps;
                auto succ = exec_instr(c.spc, in, p_.file);
                auto trace = std::make_shared<const TraceNode>(
                    TraceNode{TraceStep{it.block, static_cast<int>(idx), in.line}, c.trace});
                for (Successor& s : succ) {
                    if (s.error) {
                        s.error->trace = unwind(trace);
                        res_.errors.push_back(*s.error);
                        if (hunter_ || !recovery_) {
                            stop_ = hunter_;
                            continue;
                        }
                        if (s.halted) continue;
                    }
                    if (cfg_.paranoid) check(s.spc, mil::to_string(in.op));
                    if (in.terminator()) {
                        if (s.block >= 0) exits.push_back({s.block, Cur{std::move(s.spc), trace, c.depth + 1}});
                    } else {
                        next.push_back(Cur{std::move(s.spc), trace, c.depth + 1});
                    }
                }
                if (stop_) return;
            }
            // Depth-first search explores the first successor first.
            if (cfg_.search == Search::Dfs) std::reverse(exits.begin(), exits.end());
            for (auto& [blk, c] : exits) arrive(blk, std::move(c.spc), std::move(c.trace), c.depth);
            cur = std::move(next);
        }
    }
};

}  // namespace

AnalysisResult analyze(const mil::Program& p, const AnalysisConfig& cfg) { return Analyzer(p, cfg).run(); }

namespace {

struct CItem {
    int block;
    Spc spc;
    unsigned nondet_true;
    std::size_t steps;
};

}  // namespace

ConcreteRun run_concrete(const mil::Program& p, const ConcreteLimits& lim) {
    ConcreteRun run;
    std::vector<std::map<std::string, unsigned>> seen(p.blocks.size());
    std::vector<CItem> work;
    std::size_t total = 0;
    auto arrive = [&](int block, Spc s, unsigned nt, std::size_t steps) {
        const std::string key = canonical_key(s);
        auto [pos, fresh] = seen[block].try_emplace(key, nt);
        if (!fresh) {
            if (pos->second <= nt) return;
            pos->second = nt;
        } else {
            run.states.push_back({block, s});
        }
        work.push_back({block, std::move(s), nt, steps});
    };
    arrive(p.entry, initial_spc(p, lim.ptr_size), 0, 0);
    while (!work.empty()) {
        CItem it = std::move(work.back());
        work.pop_back();
        std::vector<CItem> cur{std::move(it)};
        const mil::Block& b = p.blocks[cur.front().block];
        for (std::size_t idx = 0; idx < b.instrs.size() && !cur.empty(); ++idx) {
            const mil::Instr& in = b.instrs[idx];
            std::vector<CItem> next;
            for (CItem& c : cur) {
                if (c.steps >= lim.max_path_steps || total >= lim.max_states) {
                    run.truncated = true;
                    continue;
                }
                ++total;
                std::vector<std::pair<Successor, unsigned>> succ;
                if (in.op == mil::Op::Nondet) {
                    Spc z = c.spc;
                    set_var(z, in.dst, kZero);
                    succ.push_back({Successor{std::move(z), std::nullopt, false, -1}, c.nondet_true});
                    if (c.nondet_true < lim.max_nondet_true) {
                        Spc f = c.spc;
                        set_var(f, in.dst, f.smg.add_value(0));
                        succ.push_back({Successor{std::move(f), std::nullopt, false, -1}, c.nondet_true + 1});
                    } else {
                        run.truncated = true;
                    }
                    for (auto& [s, nt] : succ) collect_garbage_in_place(s.spc);
                } else if (in.op == mil::Op::Branch) {
                    Spc s = c.spc;
                    const ValueId v1 = get_operand(s, in.a);
                    const ValueId v2 = get_operand(s, in.b);
                    bool holds;
                    switch (in.cond) {
                        case mil::CondOp::Eq: holds = v1 == v2; break;
                        case mil::CondOp::Ne: holds = v1 != v2; break;
                        default: {
                            const CmpOp op = in.cond == mil::CondOp::Lt ? CmpOp::Lt : CmpOp::Le;
                            auto d = compare_offsets(s.smg, v1, v2, op);
                            holds = d ? *d : (op == CmpOp::Lt ? v1 < v2 : v1 <= v2);
                        }
                    }
                    const int blk = holds ? in.then_block : in.else_block;
                    succ.push_back({Successor{std::move(s), std::nullopt, false, blk}, c.nondet_true});
                } else {
                    for (Successor& s : exec_instr(c.spc, in, p.file)) succ.push_back({std::move(s), c.nondet_true});
                }
                for (auto& [s, nt] : succ) {
                    if (s.error) {
                        run.errors.push_back(*s.error);
                        if (s.halted) continue;
                    }
                    if (in.terminator()) {
                        if (s.block >= 0) arrive(s.block, std::move(s.spc), nt, c.steps + 1);
                    } else {
                        next.push_back({c.block, std::move(s.spc), nt, c.steps + 1});
                    }
                }
            }
            cur = std::move(next);
        }
    }
    return run;
}

}  // namespace smg::engine
