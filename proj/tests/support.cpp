#include "support.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "smg/reinterp.hpp"

#ifndef HEAPSMG_CORPUS_DIR
#define HEAPSMG_CORPUS_DIR "tests/corpus"
#endif

namespace smg::testing {

ObjectId add_region(Smg& g, Offset size, unsigned level, bool valid) {
    ObjectLabel l;
    l.kind = ObjKind::Reg;
    l.size = size;
    l.level = level;
    l.valid = valid;
    return g.add_object(l);
}

ObjectId add_segment(Smg& g, bool doubly, Offset size, unsigned len, Offset hfo, Offset nfo, Offset pfo) {
    ObjectLabel l;
    l.kind = doubly ? ObjKind::Dls : ObjKind::Sls;
    l.size = size;
    l.len = len;
    l.hfo = hfo;
    l.nfo = nfo;
    l.pfo = doubly ? pfo : 0;
    return g.add_object(l);
}

ValueId address_of(Smg& g, ObjectId o, Tg tg, Offset off) {
    if (o == kNullObject) return kZero;
    const ObjectLabel& l = g.label(o);
    if (!l.segment()) tg = Tg::Reg;
    else if (tg == Tg::Reg) tg = Tg::Fst;
    return g.address(off, tg, o, l.level + (tg == Tg::All ? 1 : 0));
}

void set_ptr(Smg& g, ObjectId o, Offset off, ValueId v) { write_value_in_place(g, o, off, g.ptr_type(), v); }

ObjectId add_var(Spc& c, const std::string& name, ValueId v) {
    ObjectId r = add_variable(c, name);
    set_ptr(c.smg, r, 0, v);
    return r;
}

ValueId var_value(const Spc& c, const std::string& name) {
    auto v = pointer_at(c.smg, c.vars.at(name), 0);
    return v ? *v : kZero;
}

std::vector<ObjectId> build_list(Spc& c, const std::string& var, bool doubly, const std::vector<NodeSpec>& nodes) {
    Smg& g = c.smg;
    std::vector<ObjectId> objs;
    for (const NodeSpec& n : nodes)
        objs.push_back(n.segment ? add_segment(g, doubly, node_size(doubly), n.len) : add_region(g, node_size(doubly)));
    std::optional<ValueId> shared;
    for (std::size_t i = 0; i < objs.size(); ++i) {
        const ObjectId o = objs[i];
        const ValueId next = i + 1 < objs.size() ? address_of(g, objs[i + 1], Tg::Fst) : kZero;
        set_ptr(g, o, kNext, next);
        if (doubly) set_ptr(g, o, kPrev, i > 0 ? address_of(g, objs[i - 1], Tg::Lst) : kZero);
        ValueId payload = kZero;
        if (nodes[i].payload == 1) payload = g.add_value(0);
        if (nodes[i].payload == 2) {
            if (!shared) shared = g.add_value(0);
            payload = *shared;
        }
        write_value_in_place(g, o, payload_offset(doubly), FieldType::data(8), payload);
    }
    add_var(c, var, objs.empty() ? kZero : address_of(g, objs.front(), Tg::Fst));
    return objs;
}

Spc random_list_spc(std::mt19937& rng, bool doubly, int y_shape) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    Spc c;
    std::vector<NodeSpec> nodes(static_cast<std::size_t>(pick(0, 3)));
    for (NodeSpec& n : nodes) {
        n.segment = pick(0, 1) == 1;
        n.len = static_cast<unsigned>(pick(0, 2));
        n.payload = pick(0, 2);
    }
    // Two possibly-empty segments in a row would be redundant but are allowed.
    auto objs = build_list(c, "x", doubly, nodes);
    switch (y_shape < 0 ? pick(0, 2) : y_shape) {
        case 0: add_var(c, "y"); break;
        case 1: add_var(c, "y", var_value(c, "x")); break;
        default: {
            ObjectId r = add_region(c.smg, 8);
            write_value_in_place(c.smg, r, 0, FieldType::data(8), pick(0, 1) ? kZero : c.smg.add_value(0));
            add_var(c, "y", address_of(c.smg, r, Tg::Reg));
        }
    }
    (void)objs;
    return c;
}

std::pair<Spc, Spc> random_list_pair(std::mt19937& rng) {
    const bool doubly = std::uniform_int_distribution<int>(0, 2)(rng) != 0;
    const int y = std::uniform_int_distribution<int>(0, 2)(rng);
    Spc a = random_list_spc(rng, doubly, y);
    Spc b = random_list_spc(rng, doubly, y);
    return {std::move(a), std::move(b)};
}

bool includes(const Spc& general, const Spc& specific, unsigned k) {
    ConcretiseLimits lim;
    lim.per_segment = k;
    for (const Spc& m : concretise(specific, lim))
        if (!covered(m, general)) return false;
    return true;
}

namespace {

/// What one byte of an object holds: zero, nothing known, or a byte of a non-zero field.
struct ByteInfo {
    enum Kind { Zero, Unknown, Part } kind = Unknown;
    Field field{};
    bool operator==(const ByteInfo& o) const { return kind == o.kind && (kind != Part || field == o.field); }
};

std::vector<ByteInfo> byte_model(const Smg& g, ObjectId o) {
    const Offset n = g.label(o).size;
    std::vector<ByteInfo> out(static_cast<std::size_t>(n));
    for (Offset b = 0; b < n; ++b) {
        if (zero_covered(g, o, b, b + 1)) {
            out[b].kind = ByteInfo::Zero;
            continue;
        }
        for (const Field& f : g.fields(o))
            if (f.val != kZero && f.off <= b && b < f.end()) {
                out[b].kind = ByteInfo::Part;
                out[b].field = f;
            }
    }
    return out;
}

std::string describe(const std::vector<ByteInfo>& m) {
    std::ostringstream s;
    for (const ByteInfo& b : m)
        s << (b.kind == ByteInfo::Zero ? '0' : b.kind == ByteInfo::Unknown ? '?' : static_cast<char>('a' + b.field.val % 26));
    return s.str();
}

}  // namespace

WriteCase check_random_write(std::mt19937& rng) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    Smg g;
    const Offset size = 8 * pick(1, 4);
    const ObjectId o = add_region(g, size);
    if (pick(0, 1)) write_value_in_place(g, o, 0, FieldType::data(static_cast<std::uint32_t>(size)), kZero);
    const ObjectId t1 = add_region(g, 8);
    const ObjectId t2 = add_region(g, 8);
    const ValueId a1 = address_of(g, t1, Tg::Reg);
    const ValueId a2 = address_of(g, t2, Tg::Reg);
    auto random_write = [&](Smg& h) {
        static const std::uint32_t sizes[] = {1, 2, 4, 8};
        const bool ptr = pick(0, 1) == 1;
        const FieldType ty = ptr ? h.ptr_type() : FieldType::data(sizes[pick(0, 3)]);
        const Offset off = pick(0, static_cast<int>(size - ty.size));
        ValueId v = kZero;
        switch (pick(0, 3)) {
            case 0: v = kZero; break;
            case 1: v = ptr ? a1 : h.add_value(0); break;
            case 2: v = ptr ? a2 : h.add_value(0); break;
            default: v = h.add_value(0); break;
        }
        return Field{off, ty, v};
    };
    for (int i = pick(0, 5); i > 0; --i) {
        Field f = random_write(g);
        write_value_in_place(g, o, f.off, f.ty, f.val);
    }
    const Field w = random_write(g);
    const auto before = byte_model(g, o);
    std::vector<ByteInfo> expect = before;
    for (Offset b = 0; b < size; ++b) {
        const bool inside = w.off <= b && b < w.end();
        if (inside) {
            expect[b].kind = w.val == kZero ? ByteInfo::Zero : ByteInfo::Part;
            expect[b].field = w;
        } else if (before[b].kind == ByteInfo::Part && before[b].field.off < w.end() && w.off < before[b].field.end()) {
            expect[b] = ByteInfo{};
        }
    }
    WriteCase res;
    Smg after;
    try {
        after = write_value(g, o, w.off, w.ty, w.val);
    } catch (const std::exception& e) {
        return {false, std::string("write threw: ") + e.what()};
    }
    if (!check_consistency(after).empty()) return {false, "inconsistent result"};
    const auto got = byte_model(after, o);
    if (got != expect) return {false, "bytes " + describe(got) + " expected " + describe(expect)};
    auto [g2, rv] = read_value(after, o, w.off, w.ty);
    if (rv != w.val) return {false, "read-back differs"};
    (void)g2;
    return res;
}

std::string corpus_dir() { return HEAPSMG_CORPUS_DIR; }

std::vector<std::string> corpus_names() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(corpus_dir()))
        if (e.path().extension() == ".mil") out.push_back(e.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

mil::Program corpus_program(const std::string& name) { return mil::parse_file(corpus_dir() + "/" + name + ".mil"); }

std::string expected_verdict(const std::string& name) {
    std::string s = read_file(corpus_dir() + "/" + name + ".expected");
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace smg::testing
