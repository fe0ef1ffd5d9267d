#include "smg/decide.hpp"

#include <algorithm>

#include "smg/reinterp.hpp"

namespace smg {

std::pair<ValueId, std::set<ObjectId>> look_through(const Smg& g, ValueId v) {
    std::set<ObjectId> visited;
    while (true) {
        const Target* t = g.target(v);
        if (!t || t->obj == kNullObject || !g.has_object(t->obj)) break;
        const ObjectLabel& l = g.label(t->obj);
        if (!l.segment() || l.len != 0 || visited.count(t->obj)) break;
        visited.insert(t->obj);
        std::optional<ValueId> nxt;
        if (t->tg == Tg::Fst)
            nxt = g.field(t->obj, l.nfo, g.ptr_type());
        else if (t->tg == Tg::Lst && l.dls())
            nxt = g.field(t->obj, l.pfo, g.ptr_type());
        if (!nxt) break;
        v = *nxt;
    }
    return {v, visited};
}

bool prove_neq(const Smg& g, ValueId v1, ValueId v2) {
    auto [w1, s1] = look_through(g, v1);
    auto [w2, s2] = look_through(g, v2);
    if (w1 == w2) return false;
    for (ObjectId o : s1)
        if (s2.count(o)) return false;
    const Target* t1 = g.target(w1);
    const Target* t2 = g.target(w2);
    if (!t1 || !t2) return false;
    const ObjectId o1 = t1->obj;
    const ObjectId o2 = t2->obj;
    if (o1 == o2) {
        if (t1->tg == t2->tg) return true;
        if ((t1->tg == Tg::Fst && t2->tg == Tg::Lst) || (t1->tg == Tg::Lst && t2->tg == Tg::Fst))
            return g.label(o1).len1() >= 2;
        return false;
    }
    if (t1->off < 0 || t2->off < 0) return false;
    if (w1 != kZero && g.label(o1).size <= t1->off) return false;
    if (w2 != kZero && g.label(o2).size <= t2->off) return false;
    if (w1 == kZero || w2 == kZero) return true;
    return g.label(o1).valid && g.label(o2).valid;
}

namespace {

/// Possibly-empty segments leading from `from` to `to` along one direction.
std::optional<std::vector<ObjectId>> empty_chain(const Smg& g, ValueId from, ValueId to, Tg dir) {
    std::vector<ObjectId> chain;
    ValueId v = from;
    while (v != to) {
        const Target* t = g.target(v);
        if (!t || t->obj == kNullObject || t->tg != dir) return std::nullopt;
        const ObjectLabel& l = g.label(t->obj);
        if (!l.segment() || l.len != 0) return std::nullopt;
        if (dir == Tg::Lst && !l.dls()) return std::nullopt;
        if (std::find(chain.begin(), chain.end(), t->obj) != chain.end()) return std::nullopt;
        chain.push_back(t->obj);
        auto nxt = g.field(t->obj, dir == Tg::Fst ? l.nfo : l.pfo, g.ptr_type());
        if (!nxt) return std::nullopt;
        v = *nxt;
    }
    if (chain.empty()) return std::nullopt;
    return chain;
}

std::optional<std::vector<ObjectId>> find_chain(const Smg& g, ValueId v1, ValueId v2) {
    for (Tg dir : {Tg::Fst, Tg::Lst}) {
        if (auto c = empty_chain(g, v1, v2, dir)) return c;
        if (auto c = empty_chain(g, v2, v1, dir)) return c;
    }
    return std::nullopt;
}

/// The segment addressed by `v1` and `v2` through its two ends.
std::optional<ObjectId> both_ends(const Smg& g, ValueId v1, ValueId v2) {
    const Target* t1 = g.target(v1);
    const Target* t2 = g.target(v2);
    if (!t1 || !t2 || t1->obj != t2->obj || t1->obj == kNullObject) return std::nullopt;
    if (!g.label(t1->obj).dls()) return std::nullopt;
    if ((t1->tg == Tg::Fst && t2->tg == Tg::Lst) || (t1->tg == Tg::Lst && t2->tg == Tg::Fst)) return t1->obj;
    return std::nullopt;
}

/// Replaces `from` by `to` everywhere, keeping zero fields in canonical shape.
void substitute(Smg& g, ValueId from, ValueId to) {
    std::vector<std::pair<ObjectId, Field>> uses;
    for (const auto& [o, l] : g.objects())
        for (const Field& f : g.fields(o))
            if (f.val == from) uses.push_back({o, f});
    for (const auto& [o, f] : uses) g.remove_field(o, f.off, f.ty);
    g.remove_value(from);
    for (const auto& [o, f] : uses) {
        const ObjectLabel& l = g.label(o);
        const bool link = l.segment() && f.ty == g.ptr_type() && (f.off == l.nfo || (l.dls() && f.off == l.pfo));
        if (to != kZero || link)
            g.set_field(o, f.off, f.ty, to);
        else
            write_value_in_place(g, o, f.off, f.ty, to);
    }
}

}  // namespace

std::vector<Spc> assume(const Spc& c, Relation rel, ValueId v1, ValueId v2) {
    const Smg& g = c.smg;
    if (v1 == v2) return rel == Relation::Eq ? std::vector<Spc>{c} : std::vector<Spc>{};
    if (rel == Relation::Eq) {
        if (prove_neq(g, v1, v2)) return {};
        if (!g.is_address(v1) || !g.is_address(v2)) {
            Spc out = c;
            const ValueId from = g.is_address(v1) ? v2 : v1;
            const ValueId to = from == v1 ? v2 : v1;
            substitute(out.smg, from, to);
            return {out};
        }
        if (auto chain = find_chain(g, v1, v2)) {
            Spc out = c;
            for (ObjectId d : *chain) remove_zero_segment_in_place(out.smg, d);
            return {out};
        }
        if (auto d = both_ends(g, v1, v2)) {
            if (g.label(*d).len != 1) return {c};
            Spc out = c;
            materialise_in_place(out.smg, *d, End::Front);
            remove_zero_segment_in_place(out.smg, *d);
            return {out};
        }
        return {c};
    }
    if (auto chain = find_chain(g, v1, v2)) {
        std::vector<Spc> out;
        for (ObjectId d : *chain) {
            Spc s = c;
            s.smg.label(d).len = 1;
            out.push_back(std::move(s));
        }
        return out;
    }
    if (auto d = both_ends(g, v1, v2)) {
        const ObjectLabel& l = g.label(*d);
        auto n = g.field(*d, l.nfo, g.ptr_type());
        auto p = g.field(*d, l.pfo, g.ptr_type());
        if (l.len == 1 || (n && p && *n == *p)) {
            Spc out = c;
            out.smg.label(*d).len = std::max(2u, l.len);
            return {out};
        }
    }
    return {c};
}

std::optional<bool> compare_offsets(const Smg& g, ValueId v1, ValueId v2, CmpOp op) {
    const Target* t1 = g.target(v1);
    const Target* t2 = g.target(v2);
    if (!t1 || !t2 || t1->obj != t2->obj || t1->obj == kNullObject) return std::nullopt;
    if (g.label(t1->obj).segment()) return std::nullopt;
    switch (op) {
        case CmpOp::Lt: return t1->off < t2->off;
        case CmpOp::Le: return t1->off <= t2->off;
        case CmpOp::Gt: return t1->off > t2->off;
        case CmpOp::Ge: return t1->off >= t2->off;
    }
    return std::nullopt;
}

}  // namespace smg
