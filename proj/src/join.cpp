#include "smg/join.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace smg {

std::optional<std::uint32_t> JoinContext::image(int side, std::uint32_t n) const {
    auto it = fwd[side].find(n);
    if (it == fwd[side].end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> JoinContext::preimage(int side, std::uint32_t n) const {
    auto it = back[side].find(n);
    if (it == back[side].end()) return std::nullopt;
    return it->second;
}

void JoinContext::map(int side, std::uint32_t from, std::uint32_t to) {
    if (auto old = image(side, from)) back[side].erase(*old);
    if (auto old = preimage(side, to)) fwd[side].erase(*old);
    fwd[side][from] = to;
    back[side][to] = from;
}

void JoinContext::prune(const std::function<bool(std::uint32_t)>& keep) {
    for (int s = 0; s < 2; ++s) {
        for (auto it = fwd[s].begin(); it != fwd[s].end();) {
            if (keep(it->second)) {
                ++it;
                continue;
            }
            back[s].erase(it->second);
            it = fwd[s].erase(it);
        }
    }
}

namespace {

bool is_link_field(const Smg& g, ObjectId o, const Field& f) {
    const ObjectLabel& l = g.label(o);
    if (!l.segment() || f.ty != g.ptr_type()) return false;
    return f.off == l.nfo || (l.dls() && f.off == l.pfo);
}

/// Specifier compatible with the kind of `o`.
Tg fit_specifier(const Smg& g, Tg tg, ObjectId o) {
    const ObjectLabel& l = g.label(o);
    if (!l.segment()) return Tg::Reg;
    if (tg == Tg::Reg) return Tg::Fst;
    if (tg == Tg::Lst && !l.dls()) return Tg::Fst;
    return tg;
}

void collect(const Smg& g, std::uint32_t start, std::uint32_t blocked, std::set<std::uint32_t>& seen) {
    std::deque<std::uint32_t> work;
    if (start != blocked && seen.insert(start).second) work.push_back(start);
    while (!work.empty()) {
        std::uint32_t n = work.front();
        work.pop_front();
        auto push = [&](std::uint32_t m) {
            if (m != blocked && seen.insert(m).second) work.push_back(m);
        };
        if (g.has_object(n))
            for (const Field& f : g.fields(n)) push(f.val);
        else if (const Target* t = g.target(n))
            push(t->obj);
    }
}

/// Replaces an image built too early by the fresh object `o`: addresses move
/// to `o`, nodes only reachable through the old image disappear.
void discard_image(JoinContext& ctx, ObjectId old, ObjectId o) {
    Smg& g = *ctx.dst;
    for (ValueId a : g.addresses_of(old)) {
        Target t = *g.target(a);
        Target nt{t.off, fit_specifier(g, t.tg, o), o};
        if (auto b = g.find_address(nt.off, nt.tg, nt.obj); b && *b != a) {
            g.replace_value(a, *b);
            g.remove_value(a);
        } else {
            g.set_target(a, nt);
            g.set_level(a, g.label(o).level + (nt.tg == Tg::All ? 1 : 0));
        }
    }
    std::set<std::uint32_t> below;
    for (const Field& f : g.fields(old)) collect(g, f.val, old, below);
    std::set<std::uint32_t> kept;
    for (const auto& [x, l] : g.objects())
        if (x != old && !below.count(x)) collect(g, x, old, kept);
    for (const auto& [v, l] : g.values())
        if (!below.count(v)) collect(g, v, old, kept);
    for (std::uint32_t n : below) {
        if (kept.count(n) || n == kNullObject) continue;
        if (g.has_object(n))
            g.remove_object(n);
        else if (g.has_value(n))
            g.remove_value(n);
    }
    g.remove_object(old);
    ctx.prune([&](std::uint32_t n) { return g.has_object(n) || g.has_value(n); });
}

}  // namespace

bool join_sub_smgs(JoinContext& ctx, ObjectId o1, ObjectId o2, ObjectId o, int ldiff,
                   const std::vector<ByteRange>& dest_links) {
    Smg& g1 = *ctx.src[0];
    Smg& g2 = *ctx.src[1];
    JoinStatus s = join_fields_in_place(g1, g2, o1, o2, dest_links);
    ctx.status = update_join_status(ctx.status, s);
    const std::vector<Field> fields = g1.fields(o1);
    for (const Field& f : fields) {
        auto v2 = g2.field(o2, f.off, f.ty);
        if (!v2) return false;
        int ld = ldiff;
        if (g1.label(o1).segment() && !is_link_field(g1, o1, f)) ld += 1;
        if (g2.label(o2).segment() && !is_link_field(g2, o2, f)) ld -= 1;
        auto v = join_values(ctx, f.val, *v2, ld);
        if (!v) return false;
        if (!ctx.dst->has_object(o)) return false;
        ctx.dst->set_field(o, f.off, f.ty, *v);
    }
    return true;
}

std::optional<ValueId> join_values(JoinContext& ctx, ValueId v1, ValueId v2, int ldiff) {
    const Smg& g1 = *ctx.src[0];
    const Smg& g2 = *ctx.src[1];
    if (v1 == v2 && (ctx.same_graph || v1 == kZero)) return v1;
    auto i1 = ctx.image(0, v1);
    auto i2 = ctx.image(1, v2);
    if (i1 && i2 && *i1 == *i2) return *i1;
    if (!g1.has_value(v1) || !g2.has_value(v2)) return std::nullopt;
    const bool addr1 = g1.is_address(v1);
    const bool addr2 = g2.is_address(v2);
    if (!addr1 && !addr2) {
        if (i1 || i2) return std::nullopt;
        const int l1 = static_cast<int>(g1.level(v1));
        const int l2 = static_cast<int>(g2.level(v2));
        ValueId v = ctx.dst->add_value(static_cast<unsigned>(std::max(l1, l2)));
        ctx.map(0, v1, v);
        ctx.map(1, v2, v);
        if (l1 - l2 < ldiff) ctx.status = update_join_status(ctx.status, JoinStatus::RightWider);
        if (l1 - l2 > ldiff) ctx.status = update_join_status(ctx.status, JoinStatus::LeftWider);
        return v;
    }
    if (!addr1 || !addr2) return std::nullopt;
    JoinStep r = join_target_objects(ctx, v1, v2, ldiff);
    if (r.outcome == JoinOutcome::Fail) return std::nullopt;
    if (r.outcome == JoinOutcome::Ok) return r.value;
    const ObjectId o1 = g1.target(v1)->obj;
    const ObjectId o2 = g2.target(v2)->obj;
    if (g1.label(o1).segment()) {
        r = insert_segment_and_join(ctx, 0, v1, v2, ldiff);
        if (r.outcome == JoinOutcome::Fail) return std::nullopt;
        if (r.outcome == JoinOutcome::Ok) return r.value;
    }
    if (g2.label(o2).segment()) {
        r = insert_segment_and_join(ctx, 1, v1, v2, ldiff);
        if (r.outcome == JoinOutcome::Ok) return r.value;
    }
    return std::nullopt;
}

ValueId map_target_address(JoinContext& ctx, ValueId a1, ValueId a2) {
    const Smg& g1 = *ctx.src[0];
    const Smg& g2 = *ctx.src[1];
    Smg& g = *ctx.dst;
    const Target t1 = *g1.target(a1);
    const Target t2 = *g2.target(a2);
    ObjectId o = t1.obj == kNullObject ? kNullObject : *ctx.image(0, t1.obj);
    Tg tg = g1.label(t1.obj).segment() ? t1.tg : t2.tg;
    tg = fit_specifier(g, tg, o);
    if (auto a = g.find_address(t1.off, tg, o)) return *a;
    ValueId a = g.add_value(std::max(g1.level(a1), g2.level(a2)));
    g.set_target(a, Target{t1.off, tg, o});
    if (!ctx.image(0, a1)) ctx.map(0, a1, a);
    if (!ctx.image(1, a2)) ctx.map(1, a2, a);
    return a;
}

std::optional<JoinStatus> match_objects(const JoinContext& ctx, JoinStatus s, ObjectId o1, ObjectId o2) {
    const Smg& g1 = *ctx.src[0];
    const Smg& g2 = *ctx.src[1];
    if (o1 == kNullObject || o2 == kNullObject) return std::nullopt;
    auto i1 = ctx.image(0, o1);
    auto i2 = ctx.image(1, o2);
    if (i1 && i2 && *i1 != *i2) return std::nullopt;
    if (i1 && ctx.preimage(1, *i1)) return std::nullopt;
    if (i2 && ctx.preimage(0, *i2)) return std::nullopt;
    const ObjectLabel& l1 = g1.label(o1);
    const ObjectLabel& l2 = g2.label(o2);
    if (l1.size != l2.size || l1.valid != l2.valid) return std::nullopt;
    if (l1.segment() && l2.segment()) {
        if (l1.kind != l2.kind) return std::nullopt;
        if (l1.nfo != l2.nfo || l1.hfo != l2.hfo || (l1.dls() && l1.pfo != l2.pfo)) return std::nullopt;
    }
    for (const Field& f : g1.fields(o1)) {
        auto v2 = g2.field(o2, f.off, f.ty);
        if (!v2) continue;
        auto m1 = ctx.image(0, f.val);
        auto m2 = ctx.image(1, *v2);
        if (m1 && m2 && *m1 != *m2) return std::nullopt;
    }
    if (l1.len1() < l2.len1() || (l1.segment() && !l2.segment())) s = update_join_status(s, JoinStatus::LeftWider);
    if (l1.len1() > l2.len1() || (!l1.segment() && l2.segment())) s = update_join_status(s, JoinStatus::RightWider);
    return s;
}

JoinStep join_target_objects(JoinContext& ctx, ValueId a1, ValueId a2, int ldiff) {
    const Smg& g1 = *ctx.src[0];
    const Smg& g2 = *ctx.src[1];
    Smg& g = *ctx.dst;
    const Target t1 = *g1.target(a1);
    const Target t2 = *g2.target(a2);
    if (t1.off != t2.off) return {JoinOutcome::Retry};
    if (static_cast<int>(g1.level(a1)) - static_cast<int>(g2.level(a2)) != ldiff) return {JoinOutcome::Retry};
    const ObjectId o1 = t1.obj;
    const ObjectId o2 = t2.obj;
    const ObjectLabel l1 = g1.label(o1);
    const ObjectLabel l2 = g2.label(o2);
    if (l1.kind == l2.kind && t1.tg != t2.tg) return {JoinOutcome::Retry};
    auto i1 = ctx.image(0, o1);
    auto i2 = ctx.image(1, o2);
    if ((o1 == kNullObject && o2 == kNullObject) || (i1 && i2 && *i1 == *i2))
        return {JoinOutcome::Ok, map_target_address(ctx, a1, a2)};
    auto s = match_objects(ctx, ctx.status, o1, o2);
    if (!s) return {JoinOutcome::Retry};
    ctx.status = *s;

    ObjectLabel l = l1.segment() ? l1 : (l2.segment() ? l2 : l1);
    if (l1.segment() || l2.segment()) l.len = std::min(l1.len1(), l2.len1());
    l.level = std::max(l1.level, l2.level);
    ObjectId o = g.add_object(l);
    if (i1) discard_image(ctx, *i1, o);
    if (i2 && g.has_object(*i2)) discard_image(ctx, *i2, o);
    ctx.map(0, o1, o);
    ctx.map(1, o2, o);
    ValueId a = map_target_address(ctx, a1, a2);
    if (!join_sub_smgs(ctx, o1, o2, o, ldiff)) return {JoinOutcome::Fail};
    return {JoinOutcome::Ok, a};
}

JoinStep insert_segment_and_join(JoinContext& ctx, int side, ValueId a1, ValueId a2, int ldiff) {
    const int s = side;
    const Smg& src = *ctx.src[s];
    Smg& g = *ctx.dst;
    const ValueId mine = s == 0 ? a1 : a2;
    const ValueId theirs = s == 0 ? a2 : a1;
    const Target t = *src.target(mine);
    const ObjectId d1 = t.obj;
    const ObjectLabel dl = src.label(d1);
    Offset nf;
    if (t.tg == Tg::Fst)
        nf = dl.nfo;
    else if (t.tg == Tg::Lst && dl.dls())
        nf = dl.pfo;
    else
        return {JoinOutcome::Retry};
    auto next = src.field(d1, nf, src.ptr_type());
    if (!next) return {JoinOutcome::Fail};
    const ValueId a_next = *next;
    auto join_next = [&]() {
        return s == 0 ? join_values(ctx, a_next, theirs, ldiff) : join_values(ctx, theirs, a_next, ldiff);
    };

    if (auto d = ctx.image(s, d1)) {
        if (ctx.preimage(1 - s, *d)) return {JoinOutcome::Retry};
        // The other side must continue where the inserted segment does.
        auto succ = join_next();
        if (!succ || !g.has_object(*d)) return {JoinOutcome::Fail};
        if (auto cur = g.field(*d, nf, g.ptr_type()); cur && *cur != *succ) return {JoinOutcome::Fail};
        if (auto a = ctx.image(s, mine)) return {JoinOutcome::Ok, *a};
        ValueId a = g.address(t.off, fit_specifier(g, t.tg, *d), *d, src.level(mine));
        if (!ctx.preimage(s, a)) ctx.map(s, mine, a);
        return {JoinOutcome::Ok, a};
    }

    auto in = ctx.image(s, a_next);
    auto it = ctx.image(1 - s, theirs);
    if (in && it && *in != *it) return {JoinOutcome::Retry};

    JoinStatus gain = dl.len == 0 ? JoinStatus::LeftWider : JoinStatus::Incomparable;
    if (s == 1) gain = mirror(gain);
    ctx.status = update_join_status(ctx.status, gain);

    // Copy the sub-graph below d1 that is not yet part of the destination. Nodes
    // copied from the shallower side sink to the nesting depth of the other one.
    const unsigned shift = static_cast<unsigned>(std::max(0, s == 0 ? -ldiff : ldiff));
    // Within one graph, nodes reachable without passing through d1 stay shared.
    std::set<std::uint32_t> outside;
    if (ctx.same_graph)
        for (const auto& [x, l] : g.objects())
            if (x != d1 && x != kNullObject && g.addresses_of(x).empty()) collect(g, x, d1, outside);
    std::deque<ObjectId> work;
    std::function<ObjectId(ObjectId)> obj_image = [&](ObjectId x) -> ObjectId {
        if (x == kNullObject) return kNullObject;
        if (x != d1 && outside.count(x)) return x;
        if (auto i = ctx.image(s, x)) return *i;
        ObjectLabel l = src.label(x);
        if (x == d1) l.len = 0;
        l.level += shift;
        ObjectId y = g.add_object(l);
        ctx.map(s, x, y);
        work.push_back(x);
        return y;
    };
    auto val_image = [&](ValueId v) -> ValueId {
        if (v == kZero) return kZero;
        if (auto i = ctx.image(s, v)) return *i;
        if (outside.count(v)) return v;
        if (const Target* vt = src.target(v)) {
            ObjectId to = obj_image(vt->obj);
            Tg tg = fit_specifier(g, vt->tg, to);
            if (auto a = g.find_address(vt->off, tg, to)) {
                if (!ctx.preimage(s, *a)) ctx.map(s, v, *a);
                return *a;
            }
            ValueId a = g.add_value(g.label(to).level + (tg == Tg::All ? 1 : 0));
            g.set_target(a, Target{vt->off, tg, to});
            ctx.map(s, v, a);
            return a;
        }
        ValueId nv = g.add_value(src.level(v) + shift);
        ctx.map(s, v, nv);
        return nv;
    };
    const ObjectId d = obj_image(d1);
    while (!work.empty()) {
        ObjectId x = work.front();
        work.pop_front();
        const ObjectId y = *ctx.image(s, x);
        for (const Field& f : std::vector<Field>(src.fields(x))) {
            if (x == d1 && f.off == nf && f.ty == src.ptr_type()) continue;
            ValueId v = val_image(f.val);
            if (!g.has_object(y)) continue;
            // A back link reaches the last node of whatever segment its target became.
            const ObjectLabel& yl = g.label(y);
            const Target* vt = g.target(v);
            if (yl.dls() && f.off == yl.pfo && f.ty == src.ptr_type() && vt && vt->tg == Tg::Fst &&
                g.label(vt->obj).dls()) {
                if (auto b = g.find_address(vt->off, Tg::Lst, vt->obj)) {
                    v = *b;
                } else {
                    const Target lt{vt->off, Tg::Lst, vt->obj};
                    v = g.add_value(g.label(vt->obj).level);
                    g.set_target(v, lt);
                }
            }
            g.set_field(y, f.off, f.ty, v);
        }
    }

    ValueId a;
    if (auto found = g.find_address(t.off, t.tg, d)) {
        a = *found;
    } else {
        a = g.add_value(g.label(d).level + (t.tg == Tg::All ? 1 : 0));
        g.set_target(a, Target{t.off, t.tg, d});
        ctx.map(s, mine, a);
    }
    auto a_succ = join_next();
    if (!a_succ) return {JoinOutcome::Fail};
    if (!g.has_object(d)) return {JoinOutcome::Fail};
    g.set_field(d, nf, g.ptr_type(), *a_succ);
    return {JoinOutcome::Ok, a};
}

std::optional<JoinedSpc> join_spcs(const Spc& c1, const Spc& c2) {
    if (c1.vars.size() != c2.vars.size()) return std::nullopt;
    Smg g1 = c1.smg;
    Smg g2 = c2.smg;
    Spc out(c1.smg.ptr_size());
    JoinContext ctx;
    ctx.src = {&g1, &g2};
    ctx.dst = &out.smg;
    for (const auto& [name, r1] : c1.vars) {
        auto it = c2.vars.find(name);
        if (it == c2.vars.end()) return std::nullopt;
        const ObjectId r2 = it->second;
        if (!(g1.label(r1) == g2.label(r2))) return std::nullopt;
        ObjectId r = out.smg.add_object(g1.label(r1));
        ctx.map(0, r1, r);
        ctx.map(1, r2, r);
        out.vars[name] = r;
    }
    for (const auto& [name, r1] : c1.vars) {
        const ObjectId r2 = c2.vars.at(name);
        const ObjectId r = out.vars.at(name);
        if (!out.smg.has_object(r)) return std::nullopt;
        try {
            if (!join_sub_smgs(ctx, r1, r2, r, 0)) return std::nullopt;
        } catch (const Error&) {
            return std::nullopt;
        }
    }
    if (has_zero_plus_cycle(out.smg)) return std::nullopt;
    collect_garbage_in_place(out);
    return JoinedSpc{ctx.status, std::move(out)};
}

bool entails(const Spc& c1, const Spc& c2) {
    auto j = join_spcs(c1, c2);
    return j && (j->status == JoinStatus::Equal || j->status == JoinStatus::LeftWider);
}

std::optional<MergeResult> merge_pair(const Smg& g0, ObjectId o1, ObjectId o2, Offset hfo, Offset nfo,
                                      std::optional<Offset> pfo) {
    MergeResult res;
    res.g = g0;
    Smg& g = res.g;
    const FieldType pty = g.ptr_type();
    const ObjectLabel l1 = g.label(o1);
    const ObjectLabel l2 = g.label(o2);
    if (l1.size != l2.size || l1.level != l2.level) return std::nullopt;

    std::vector<Offset> links{nfo};
    if (pfo) links.push_back(*pfo);
    std::map<std::pair<ObjectId, Offset>, std::optional<ValueId>> saved;
    for (ObjectId o : {o1, o2})
        for (Offset off : links) {
            saved[{o, off}] = g.field(o, off, pty);
            g.set_field(o, off, pty, kZero);
        }

    ObjectLabel dl;
    dl.kind = pfo ? ObjKind::Dls : ObjKind::Sls;
    dl.level = l1.level;
    dl.size = l1.size;
    dl.valid = true;
    dl.len = l1.len1() + l2.len1();
    dl.hfo = hfo;
    dl.nfo = nfo;
    dl.pfo = pfo.value_or(0);
    const ObjectId d = g.add_object(dl);
    res.d = d;

    JoinContext ctx;
    ctx.src = {&g, &g};
    ctx.dst = &g;
    ctx.same_graph = true;
    ctx.map(0, o1, d);
    ctx.map(1, o2, d);
    try {
        if (!join_sub_smgs(ctx, o1, o2, d, 0, link_ranges(g, d))) return std::nullopt;
    } catch (const Error&) {
        return std::nullopt;
    }

    for (const auto& [key, v] : saved) {
        if (v)
            g.set_field(key.first, key.second, pty, *v);
        else
            g.remove_field(key.first, key.second, pty);
    }
    if (has_zero_plus_cycle(g)) return std::nullopt;

    for (int s = 0; s < 2; ++s) {
        NodeSet& src = s == 0 ? res.left_src : res.right_src;
        for (const auto& [from, to] : ctx.fwd[s]) {
            if (g.has_object(from))
                src.objects.insert(from);
            else
                src.values.insert(from);
            if (to == d) continue;
            if (g.has_object(to))
                res.nested.objects.insert(to);
            else if (g.has_value(to))
                res.nested.values.insert(to);
        }
    }
    if (!l1.segment() && !l2.segment()) {
        for (ObjectId o : res.nested.objects) g.label(o).level += 1;
        for (ValueId v : res.nested.values) g.set_level(v, g.level(v) + 1);
        for (ValueId a : g.addresses_of(d)) {
            Target t = *g.target(a);
            g.remove_target(a);
            t.tg = Tg::All;
            if (auto b = g.find_address(t.off, t.tg, d)) {
                g.replace_value(a, *b);
                g.remove_value(a);
            } else {
                g.set_target(a, t);
            }
        }
    }
    res.status = ctx.status;
    return res;
}

}  // namespace smg
