#include "smg/concretise.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <map>
#include <sstream>

namespace smg {

std::size_t region_count(const Smg& g) {
    std::size_t n = 0;
    for (const auto& [o, l] : g.objects())
        if (o != kNullObject && !l.segment()) ++n;
    return n;
}

std::string canonical_key(const Spc& c) {
    const Smg& g = c.smg;
    std::map<ObjectId, std::size_t> oidx{{kNullObject, 0}};
    std::map<ValueId, std::size_t> vidx;
    std::deque<ObjectId> work;
    auto visit_obj = [&](ObjectId o) {
        if (oidx.emplace(o, oidx.size()).second) work.push_back(o);
        return oidx[o];
    };
    std::ostringstream out;
    for (const auto& [name, r] : c.vars) {
        out << name << "=" << visit_obj(r) << ";";
    }
    while (!work.empty()) {
        ObjectId o = work.front();
        work.pop_front();
        const ObjectLabel& l = g.label(o);
        out << "\n#" << oidx[o] << " " << to_string(l.kind) << " s" << l.size << (l.valid ? " v" : " f");
        if (l.segment()) out << " len" << l.len << " lv" << l.level << " h" << l.hfo << " n" << l.nfo << " p" << l.pfo;
        out << " z[";
        for (auto [a, b] : zero_intervals(g, o)) out << a << "-" << b << ",";
        out << "]";
        for (const Field& f : g.fields(o)) {
            if (f.val == kZero) continue;
            out << " (" << f.off << (f.ty.kind == FieldKind::Ptr ? "p" : "d") << f.ty.size << ")";
            if (const Target* t = g.target(f.val)) {
                out << "A" << visit_obj(t->obj) << "@" << t->off << to_string(t->tg);
            } else {
                auto [it, fresh] = vidx.emplace(f.val, vidx.size());
                out << "U" << it->second;
            }
        }
    }
    return out.str();
}

namespace {

ObjectId first_level0_segment(const Smg& g) {
    for (const auto& [o, l] : g.objects())
        if (l.segment() && l.level == 0) return o;
    return kNullObject;
}

}  // namespace

bool for_each_concretisation(const Spc& c, const ConcretiseLimits& lim,
                             const std::function<bool(const Spc&)>& visit) {
    struct Item {
        Spc c;
        std::map<ObjectId, unsigned> mats;
    };
    std::vector<Item> stack;
    stack.push_back({collect_garbage(c).first, {}});
    std::size_t explored = 0;
    while (!stack.empty()) {
        Item it = std::move(stack.back());
        stack.pop_back();
        if (++explored > lim.cap) throw BudgetExceeded("concretisation exceeded its graph budget");
        if (region_count(it.c.smg) > lim.max_regions) continue;
        ObjectId d = first_level0_segment(it.c.smg);
        if (d == kNullObject) {
            collect_garbage_in_place(it.c);
            if (!visit(it.c)) return false;
            continue;
        }
        const ObjectLabel& dl = it.c.smg.label(d);
        if (it.mats[d] < lim.per_segment && region_count(it.c.smg) < lim.max_regions) {
            Item m = it;
            materialise_in_place(m.c.smg, d, End::Front);
            m.mats[d] += 1;
            stack.push_back(std::move(m));
        }
        if (dl.len == 0) {
            remove_zero_segment_in_place(it.c.smg, d);
            collect_garbage_in_place(it.c);
            stack.push_back(std::move(it));
        }
    }
    return true;
}

std::vector<Spc> concretise(const Spc& c, const ConcretiseLimits& lim) {
    std::vector<Spc> out;
    std::set<std::string> seen;
    for_each_concretisation(c, lim, [&](const Spc& m) {
        if (seen.insert(canonical_key(m)).second) out.push_back(m);
        return true;
    });
    return out;
}

std::set<std::string> concretise_bounded(const Spc& c, unsigned k, std::size_t cap) {
    ConcretiseLimits lim;
    lim.per_segment = k;
    lim.cap = cap;
    std::set<std::string> out;
    for_each_concretisation(c, lim, [&](const Spc& m) {
        out.insert(canonical_key(m));
        return true;
    });
    return out;
}

std::set<std::string> concretise_bounded(const Smg& g, unsigned k, std::size_t cap) {
    Spc c(g.ptr_size());
    c.smg = g;
    for (const auto& [o, l] : g.objects()) {
        if (o == kNullObject || l.segment() || l.level != 0) continue;
        char name[16];
        std::snprintf(name, sizeof name, "r%08u", o);
        c.vars[name] = o;
    }
    return concretise_bounded(c, k, cap);
}

namespace {

/// Value stored in `specific` over the bytes of a field, as seen by an unknown of `general`.
/// Absent or partially covered fields yield a token that matches nothing else.
struct Instantiation {
    std::map<ValueId, std::int64_t> sigma;
    std::int64_t next_token = -1;

    bool bind(ValueId general, std::int64_t specific) {
        auto [it, fresh] = sigma.emplace(general, specific);
        return fresh || it->second == specific;
    }
};

bool zero_subset(const Smg& gg, ObjectId og, const Smg& gs, ObjectId os) {
    auto zs = zero_intervals(gs, os);
    for (auto [a, b] : zero_intervals(gg, og)) {
        bool in = false;
        for (auto [c, d] : zs)
            if (c <= a && b <= d) in = true;
        if (!in) return false;
    }
    return true;
}

}  // namespace

bool instance_of(const Spc& general, const Spc& specific) {
    const Smg& gg = general.smg;
    const Smg& gs = specific.smg;
    if (general.vars.size() != specific.vars.size()) return false;
    std::map<ObjectId, ObjectId> pair_gs{{kNullObject, kNullObject}}, pair_sg{{kNullObject, kNullObject}};
    std::deque<std::pair<ObjectId, ObjectId>> work;
    auto link = [&](ObjectId a, ObjectId b) {
        auto i = pair_gs.find(a);
        auto j = pair_sg.find(b);
        if (i != pair_gs.end() || j != pair_sg.end())
            return i != pair_gs.end() && j != pair_sg.end() && i->second == b && j->second == a;
        pair_gs[a] = b;
        pair_sg[b] = a;
        work.emplace_back(a, b);
        return true;
    };
    for (const auto& [name, r] : general.vars) {
        auto it = specific.vars.find(name);
        if (it == specific.vars.end() || !link(r, it->second)) return false;
    }
    Instantiation inst;
    while (!work.empty()) {
        auto [og, os] = work.front();
        work.pop_front();
        const ObjectLabel& lg = gg.label(og);
        const ObjectLabel& ls = gs.label(os);
        if (lg.segment() || ls.segment() || lg.size != ls.size || lg.valid != ls.valid) return false;
        if (!zero_subset(gg, og, gs, os)) return false;
        for (const Field& f : gg.fields(og)) {
            if (f.val == kZero) continue;
            auto sv = gs.field(os, f.off, f.ty);
            if (const Target* tg = gg.target(f.val)) {
                if (!sv) return false;
                const Target* ts = gs.target(*sv);
                if (!ts || *sv == kZero || ts->off != tg->off) return false;
                if (!link(tg->obj, ts->obj)) return false;
                continue;
            }
            std::int64_t w;
            if (sv && gs.is_address(*sv) && *sv != kZero)
                return false;
            else if (sv)
                w = *sv;
            else if (zero_covered(gs, os, f.off, f.end()))
                w = kZero;
            else
                w = inst.next_token--;
            if (!inst.bind(f.val, w)) return false;
        }
        for (const Field& f : gs.fields(os)) {
            if (f.val == kZero || !gs.is_address(f.val)) continue;
            auto gv = gg.field(og, f.off, f.ty);
            if (!gv || !gg.is_address(*gv) || *gv == kZero) return false;
        }
    }
    return true;
}

bool covered(const Spc& concrete, const Spc& abstract, std::size_t cap) {
    Spc s = collect_garbage(concrete).first;
    ConcretiseLimits lim;
    lim.per_segment = std::numeric_limits<unsigned>::max();
    lim.max_regions = region_count(s.smg);
    lim.cap = cap;
    bool found = false;
    for_each_concretisation(abstract, lim, [&](const Spc& m) {
        if (instance_of(m, s)) found = true;
        return !found;
    });
    return found;
}

}  // namespace smg
