#include "smg/abstraction.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace smg {

unsigned cost_of(JoinStatus s) {
    switch (s) {
        case JoinStatus::Equal: return 0;
        case JoinStatus::LeftWider:
        case JoinStatus::RightWider: return 1;
        case JoinStatus::Incomparable: return 2;
    }
    return 2;
}

namespace {

bool is_candidate_object(const Spc& c, ObjectId o) {
    if (o == kNullObject || c.is_var_region(o) || !c.smg.has_object(o)) return false;
    const ObjectLabel& l = c.smg.label(o);
    return l.valid && l.level == 0;
}

const Target* ptr_target(const Smg& g, const Field& f) {
    if (f.ty != g.ptr_type()) return nullptr;
    return g.target(f.val);
}

/// Objects holding `a` in some field, skipping the link fields of sequence members.
std::vector<ObjectId> holders(const Smg& g, ValueId a, const std::set<ObjectId>& seq, const CandidateEntry& e) {
    std::vector<ObjectId> out;
    for (const auto& [x, l] : g.objects()) {
        for (const Field& f : g.fields(x)) {
            if (f.val != a) continue;
            const bool link = f.ty == g.ptr_type() && (f.off == e.nfo || (e.pfo && f.off == *e.pfo));
            if (link && seq.count(x)) continue;
            out.push_back(x);
            break;
        }
    }
    return out;
}

bool all_holders_in(const std::vector<ObjectId>& hs, const std::set<ObjectId>& allowed) {
    return std::all_of(hs.begin(), hs.end(), [&](ObjectId h) { return allowed.count(h) != 0; });
}

/// Private nodes below `root` are reachable through `root` only and are heap nodes.
bool private_part_ok(const Spc& c, const NodeSet& src, ObjectId root, const std::set<ObjectId>& seq,
                     const CandidateEntry& e) {
    const Smg& g = c.smg;
    for (ObjectId o : src.objects) {
        if (o == root || !g.has_object(o)) continue;
        if (c.is_var_region(o)) return false;
        for (ValueId a : g.addresses_of(o))
            if (!src.values.count(a)) return false;
    }
    for (const auto& [x, l] : g.objects()) {
        if (src.objects.count(x)) continue;
        for (const Field& f : g.fields(x)) {
            const bool link = f.ty == g.ptr_type() && (f.off == e.nfo || (e.pfo && f.off == *e.pfo));
            if (link && seq.count(x)) continue;
            if (src.values.count(f.val)) return false;
        }
    }
    return true;
}

bool labels_fit(const ObjectLabel& l, const CandidateEntry& e) {
    if (!l.segment()) return true;
    if (l.dls() != e.pfo.has_value()) return false;
    return l.hfo == e.hfo && l.nfo == e.nfo && (!e.pfo || l.pfo == *e.pfo);
}

/// Successor of `cur` along the entry's next field, if linked at the head offset.
std::optional<ObjectId> successor(const Smg& g, ObjectId cur, const CandidateEntry& e) {
    auto v = pointer_at(g, cur, e.nfo);
    if (!v) return std::nullopt;
    const Target* t = g.target(*v);
    if (!t || t->obj == kNullObject || t->off != e.hfo || (t->tg != Tg::Fst && t->tg != Tg::Reg))
        return std::nullopt;
    return t->obj;
}

bool back_linked(const Smg& g, ObjectId o2, ObjectId cur, const CandidateEntry& e) {
    if (!e.pfo) return true;
    auto v = pointer_at(g, o2, *e.pfo);
    if (!v) return false;
    const Target* t = g.target(*v);
    return t && t->obj == cur && t->off == e.hfo && (t->tg == Tg::Lst || t->tg == Tg::Reg);
}

}  // namespace

std::vector<CandidateEntry> find_candidates(const Spc& c) {
    const Smg& g = c.smg;
    std::vector<CandidateEntry> out;
    auto add = [&](const CandidateEntry& e) {
        if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
    };
    for (const auto& [oc, lc] : g.objects()) {
        if (!is_candidate_object(c, oc)) continue;
        for (const Field& f1 : g.fields(oc)) {
            const Target* t1 = ptr_target(g, f1);
            if (!t1 || (t1->tg != Tg::Fst && t1->tg != Tg::Reg)) continue;
            const ObjectId o = t1->obj;
            if (o == oc || !is_candidate_object(c, o)) continue;
            bool back = false;
            for (const Field& f2 : g.fields(o)) {
                const Target* t2 = ptr_target(g, f2);
                if (!t2 || t2->obj != oc || t2->off != t1->off) continue;
                back = true;
                if ((t2->tg == Tg::Lst || t2->tg == Tg::Reg) && f1.off < f2.off) add({oc, t1->off, f1.off, f2.off});
            }
            if (!back) add({oc, t1->off, f1.off, std::nullopt});
        }
    }
    return out;
}

std::optional<MergePlan> longest_mergeable_sequence(const Spc& c, const CandidateEntry& e) {
    const Smg& g = c.smg;
    if (!is_candidate_object(c, e.head) || !labels_fit(g.label(e.head), e)) return std::nullopt;
    MergePlan plan;
    plan.entry = e;
    plan.sequence.push_back(e.head);
    std::set<ObjectId> seq{e.head};
    ObjectId cur = e.head;
    while (true) {
        auto nxt = successor(g, cur, e);
        if (!nxt) break;
        const ObjectId o2 = *nxt;
        if (seq.count(o2) || !is_candidate_object(c, o2)) break;
        const ObjectLabel& l1 = g.label(cur);
        const ObjectLabel& l2 = g.label(o2);
        if (!labels_fit(l2, e) || l1.size != l2.size) break;
        if (!back_linked(g, o2, cur, e)) break;
        auto m = merge_pair(g, cur, o2, e.hfo, e.nfo, e.pfo);
        if (!m) break;
        std::set<ObjectId> with = seq;
        with.insert(o2);
        if (!private_part_ok(c, m->left_src, cur, with, e) || !private_part_ok(c, m->right_src, o2, with, e)) break;

        const ObjectId pred = plan.sequence.size() >= 2 ? plan.sequence[plan.sequence.size() - 2] : kNullObject;
        bool ok = true;
        for (ValueId a : g.addresses_of(cur)) {
            const Target& t = *g.target(a);
            auto hs = holders(g, a, with, e);
            std::set<ObjectId> allowed = m->left_src.objects;
            if (t.off != e.hfo) {
                ok = ok && all_holders_in(hs, allowed);
            } else if (t.tg == Tg::Reg && cur != e.head) {
                allowed.insert(o2);
                allowed.insert(pred);
                ok = ok && all_holders_in(hs, allowed);
            } else if (t.tg == Tg::Lst) {
                ok = ok && all_holders_in(hs, {o2});
            }
        }
        for (ValueId a : g.addresses_of(o2)) {
            const Target& t = *g.target(a);
            auto hs = holders(g, a, with, e);
            std::set<ObjectId> allowed = m->right_src.objects;
            if (t.off != e.hfo) {
                ok = ok && all_holders_in(hs, allowed);
            } else if (t.tg == Tg::Fst) {
                ok = ok && all_holders_in(hs, {cur});
            } else if (t.tg == Tg::Reg && !e.pfo) {
                allowed.insert(cur);
                ok = ok && all_holders_in(hs, allowed);
            }
        }
        if (!ok) break;
        plan.cost = std::max(plan.cost, cost_of(m->status));
        plan.sequence.push_back(o2);
        seq.insert(o2);
        cur = o2;
    }
    if (plan.sequence.size() < 2) return std::nullopt;
    return plan;
}

namespace {

void retarget(Smg& g, ValueId a, Target nt) {
    if (auto b = g.find_address(nt.off, nt.tg, nt.obj); b && *b != a) {
        g.replace_value(a, *b);
        g.remove_value(a);
        return;
    }
    g.set_target(a, nt);
}

}  // namespace

std::optional<Spc> merge_sequence(const Spc& c, const MergePlan& plan) {
    const CandidateEntry& e = plan.entry;
    Spc out = c;
    ObjectId cur = plan.sequence.front();
    const FieldType pty = c.smg.ptr_type();
    for (std::size_t i = 1; i < plan.sequence.size(); ++i) {
        const ObjectId o2 = plan.sequence[i];
        const Smg& g0 = out.smg;
        if (!g0.has_object(cur) || !g0.has_object(o2)) return std::nullopt;
        auto a_n = pointer_at(g0, o2, e.nfo);
        auto a_p = e.pfo ? pointer_at(g0, cur, *e.pfo) : std::nullopt;
        if (!a_n || (e.pfo && !a_p)) return std::nullopt;
        auto m = merge_pair(g0, cur, o2, e.hfo, e.nfo, e.pfo);
        if (!m) return std::nullopt;
        Smg g = std::move(m->g);
        const ObjectId d = m->d;
        g.set_field(d, e.nfo, pty, *a_n);
        if (e.pfo) g.set_field(d, *e.pfo, pty, *a_p);
        for (ValueId a : g.addresses_of(cur)) {
            const Target t = *g.target(a);
            if (t.off == e.hfo && (t.tg == Tg::Fst || t.tg == Tg::Reg)) retarget(g, a, {e.hfo, Tg::Fst, d});
        }
        if (e.pfo) {
            for (ValueId a : g.addresses_of(o2)) {
                const Target t = *g.target(a);
                if (t.off == e.hfo && (t.tg == Tg::Lst || t.tg == Tg::Reg)) retarget(g, a, {e.hfo, Tg::Lst, d});
            }
        }
        out.smg = std::move(g);
        collect_garbage_in_place(out);
        cur = d;
    }
    if (!check_consistency(out).empty()) return std::nullopt;
    return out;
}

Spc abstract_spc(const Spc& c, const LenThresholds& thr) {
    Spc cur = c;
    std::vector<std::vector<ObjectId>> failed;
    while (true) {
        std::optional<MergePlan> best;
        for (const CandidateEntry& e : find_candidates(cur)) {
            auto p = longest_mergeable_sequence(cur, e);
            if (!p || p->sequence.size() < thr[p->cost]) continue;
            if (std::find(failed.begin(), failed.end(), p->sequence) != failed.end()) continue;
            if (!best) {
                best = p;
                continue;
            }
            auto key = [](const MergePlan& m) {
                return std::make_tuple(m.cost, -static_cast<long>(m.sequence.size()), m.sequence.front());
            };
            if (key(*p) < key(*best)) best = p;
        }
        if (!best) return cur;
        auto merged = merge_sequence(cur, *best);
        if (!merged) {
            failed.push_back(best->sequence);
            continue;
        }
        cur = std::move(*merged);
        failed.clear();
    }
}

}  // namespace smg
