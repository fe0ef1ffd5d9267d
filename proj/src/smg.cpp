#include "smg/smg.hpp"
#include "smg/reinterp.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace smg {

namespace {

bool field_less(const Field& a, const Field& b) {
    return std::tie(a.off, a.ty) < std::tie(b.off, b.ty);
}

const std::vector<Field> kNoFields;

}  // namespace

Smg::Smg(unsigned ptr_size) : ptr_size_(ptr_size) {
    ObjectLabel null;
    null.kind = ObjKind::Reg;
    null.size = 0;
    null.level = 0;
    null.valid = false;
    objs_[kNullObject] = null;
    vals_[kZero] = 0;
    set_target(kZero, Target{0, Tg::Reg, kNullObject});
}

ObjectId Smg::add_object(const ObjectLabel& label) {
    ObjectId id = next_id_++;
    objs_[id] = label;
    return id;
}

ValueId Smg::add_value(unsigned level) {
    ValueId id = next_id_++;
    vals_[id] = level;
    return id;
}

const ObjectLabel& Smg::label(ObjectId o) const {
    auto it = objs_.find(o);
    if (it == objs_.end()) throw Error("unknown object " + std::to_string(o));
    return it->second;
}

ObjectLabel& Smg::label(ObjectId o) {
    auto it = objs_.find(o);
    if (it == objs_.end()) throw Error("unknown object " + std::to_string(o));
    return it->second;
}

unsigned Smg::level(ValueId v) const {
    auto it = vals_.find(v);
    if (it == vals_.end()) throw Error("unknown value " + std::to_string(v));
    return it->second;
}

void Smg::set_level(ValueId v, unsigned level) {
    auto it = vals_.find(v);
    if (it == vals_.end()) throw Error("unknown value " + std::to_string(v));
    it->second = level;
}

const std::vector<Field>& Smg::fields(ObjectId o) const {
    auto it = hv_.find(o);
    return it == hv_.end() ? kNoFields : it->second;
}

std::optional<ValueId> Smg::field(ObjectId o, Offset off, FieldType ty) const {
    for (const Field& f : fields(o))
        if (f.off == off && f.ty == ty) return f.val;
    return std::nullopt;
}

void Smg::set_field(ObjectId o, Offset off, FieldType ty, ValueId v) {
    auto& fs = hv_[o];
    for (Field& f : fs) {
        if (f.off == off && f.ty == ty) {
            f.val = v;
            return;
        }
    }
    Field nf{off, ty, v};
    fs.insert(std::upper_bound(fs.begin(), fs.end(), nf, field_less), nf);
}

bool Smg::remove_field(ObjectId o, Offset off, FieldType ty) {
    auto it = hv_.find(o);
    if (it == hv_.end()) return false;
    auto& fs = it->second;
    for (auto f = fs.begin(); f != fs.end(); ++f) {
        if (f->off == off && f->ty == ty) {
            fs.erase(f);
            if (fs.empty()) hv_.erase(it);
            return true;
        }
    }
    return false;
}

void Smg::set_fields(ObjectId o, std::vector<Field> fs) {
    std::sort(fs.begin(), fs.end(), field_less);
    if (fs.empty())
        hv_.erase(o);
    else
        hv_[o] = std::move(fs);
}

void Smg::clear_fields(ObjectId o) { hv_.erase(o); }

void Smg::replace_value(ValueId from, ValueId to) {
    for (auto& [o, fs] : hv_)
        for (Field& f : fs)
            if (f.val == from) f.val = to;
}

const Target* Smg::target(ValueId v) const {
    auto it = pt_.find(v);
    return it == pt_.end() ? nullptr : &it->second;
}

void Smg::set_target(ValueId v, Target t) {
    remove_target(v);
    auto key = std::make_tuple(t.off, t.tg, t.obj);
    auto it = addr_.find(key);
    if (it != addr_.end() && it->second != v)
        throw Error("points-to edge would break injectivity");
    pt_[v] = t;
    addr_[key] = v;
}

void Smg::remove_target(ValueId v) {
    auto it = pt_.find(v);
    if (it == pt_.end()) return;
    addr_.erase(std::make_tuple(it->second.off, it->second.tg, it->second.obj));
    pt_.erase(it);
}

std::optional<ValueId> Smg::find_address(Offset off, Tg tg, ObjectId o) const {
    auto it = addr_.find(std::make_tuple(off, tg, o));
    if (it == addr_.end()) return std::nullopt;
    return it->second;
}

ValueId Smg::address(Offset off, Tg tg, ObjectId o, unsigned level) {
    if (auto a = find_address(off, tg, o)) return *a;
    ValueId a = add_value(level);
    set_target(a, Target{off, tg, o});
    return a;
}

std::vector<ValueId> Smg::addresses_of(ObjectId o) const {
    std::vector<ValueId> out;
    for (const auto& [v, t] : pt_)
        if (t.obj == o) out.push_back(v);
    return out;
}

void Smg::remove_object(ObjectId o) {
    if (o == kNullObject) return;
    for (ValueId a : addresses_of(o)) remove_value(a);
    hv_.erase(o);
    objs_.erase(o);
}

void Smg::remove_value(ValueId v) {
    if (v == kZero) return;
    remove_target(v);
    vals_.erase(v);
    for (auto it = hv_.begin(); it != hv_.end();) {
        auto& fs = it->second;
        fs.erase(std::remove_if(fs.begin(), fs.end(), [v](const Field& f) { return f.val == v; }), fs.end());
        if (fs.empty())
            it = hv_.erase(it);
        else
            ++it;
    }
}

bool Spc::is_var_region(ObjectId o) const {
    for (const auto& [name, r] : vars)
        if (r == o) return true;
    return false;
}

Spc empty_spc(unsigned ptr_size) { return Spc(ptr_size); }

ObjectId add_variable(Spc& c, const std::string& name) {
    ObjectLabel l;
    l.size = c.smg.ptr_size();
    ObjectId r = c.smg.add_object(l);
    c.vars[name] = r;
    return r;
}

const char* to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::NullObject: return "NullObject";
        case ViolationKind::SegmentInvalid: return "SegmentInvalid";
        case ViolationKind::InvalidRegionEdge: return "InvalidRegionEdge";
        case ViolationKind::FieldOutOfBounds: return "FieldOutOfBounds";
        case ViolationKind::MissingLink: return "MissingLink";
        case ViolationKind::LinkOrder: return "LinkOrder";
        case ViolationKind::HeadOffset: return "HeadOffset";
        case ViolationKind::SpecifierMismatch: return "SpecifierMismatch";
        case ViolationKind::ZeroPlusCycle: return "ZeroPlusCycle";
        case ViolationKind::ZeroUnderAddress: return "ZeroUnderAddress";
        case ViolationKind::Nesting: return "Nesting";
        case ViolationKind::AddressLevel: return "AddressLevel";
        case ViolationKind::AllTarget: return "AllTarget";
        case ViolationKind::DanglingEdge: return "DanglingEdge";
        case ViolationKind::VariableRegion: return "VariableRegion";
    }
    return "?";
}

const char* to_string(ObjKind k) {
    switch (k) {
        case ObjKind::Reg: return "reg";
        case ObjKind::Dls: return "dls";
        case ObjKind::Sls: return "sls";
    }
    return "?";
}

const char* to_string(Tg t) {
    switch (t) {
        case Tg::Fst: return "fst";
        case Tg::Lst: return "lst";
        case Tg::All: return "all";
        case Tg::Reg: return "reg";
    }
    return "?";
}

bool has_zero_plus_cycle(const Smg& g) {
    // Each address into a 0+ segment at fst/lst leads to the value stored in
    // the corresponding link; a cycle in this successor relation is fatal.
    std::map<ValueId, ValueId> succ;
    for (const auto& [a, t] : g.targets()) {
        if (!g.has_object(t.obj)) continue;
        const ObjectLabel& l = g.label(t.obj);
        if (!l.segment() || l.len != 0) continue;
        std::optional<ValueId> nxt;
        if (t.tg == Tg::Fst)
            nxt = g.field(t.obj, l.nfo, g.ptr_type());
        else if (t.tg == Tg::Lst && l.dls())
            nxt = g.field(t.obj, l.pfo, g.ptr_type());
        if (nxt) succ[a] = *nxt;
    }
    std::map<ValueId, int> state;
    for (const auto& [start, _] : succ) {
        if (state[start] != 0) continue;
        std::vector<ValueId> path;
        ValueId cur = start;
        while (true) {
            auto it = succ.find(cur);
            if (it == succ.end()) break;
            int& st = state[cur];
            if (st == 1) return true;
            if (st == 2) break;
            st = 1;
            path.push_back(cur);
            cur = it->second;
        }
        for (ValueId v : path) state[v] = 2;
    }
    return false;
}

namespace {

void violate(std::vector<Violation>& out, ViolationKind k, const std::string& detail) {
    out.push_back({k, detail});
}

std::string obj_name(ObjectId o) { return "object " + std::to_string(o); }

std::string val_name(ValueId v) { return "value " + std::to_string(v); }

}  // namespace

std::vector<Violation> check_consistency(const Smg& g) {
    std::vector<Violation> out;
    const FieldType pty = g.ptr_type();

    if (!g.has_object(kNullObject)) {
        violate(out, ViolationKind::NullObject, "null object missing");
        return out;
    }
    {
        const ObjectLabel& n = g.label(kNullObject);
        const Target* t = g.target(kZero);
        if (n.kind != ObjKind::Reg || n.size != 0 || n.level != 0 || n.valid || !g.fields(kNullObject).empty())
            violate(out, ViolationKind::NullObject, "null object mislabelled");
        if (!g.has_value(kZero) || g.level(kZero) != 0 || !t || !(*t == Target{0, Tg::Reg, kNullObject}))
            violate(out, ViolationKind::NullObject, "zero value does not point to the null object");
    }

    for (const auto& [o, l] : g.objects()) {
        if (o == kNullObject) continue;
        if (l.segment() && !l.valid) violate(out, ViolationKind::SegmentInvalid, obj_name(o));
        if (!l.segment() && !l.valid && !g.fields(o).empty())
            violate(out, ViolationKind::InvalidRegionEdge, obj_name(o));
        for (const Field& f : g.fields(o)) {
            if (f.off < 0 || f.end() > l.size)
                violate(out, ViolationKind::FieldOutOfBounds, obj_name(o) + " at " + std::to_string(f.off));
            if (!g.has_value(f.val))
                violate(out, ViolationKind::DanglingEdge, obj_name(o) + " holds missing " + val_name(f.val));
            if (f.val != kZero && g.is_address(f.val))
                for (const Field& z : g.fields(o))
                    if (z.val == kZero && z.off < f.end() && f.off < z.end())
                        violate(out, ViolationKind::ZeroUnderAddress, obj_name(o) + " at " + std::to_string(f.off));
        }
        if (l.segment()) {
            auto check_link = [&](Offset off, const char* what) {
                auto v = g.field(o, off, pty);
                if (!v || !g.is_address(*v))
                    violate(out, ViolationKind::MissingLink, obj_name(o) + " lacks " + what);
                if (off < 0 || off + static_cast<Offset>(pty.size) > l.size)
                    violate(out, ViolationKind::FieldOutOfBounds, obj_name(o) + " link outside");
            };
            check_link(l.nfo, "next");
            if (l.dls()) {
                check_link(l.pfo, "prev");
                if (!(l.nfo < l.pfo)) violate(out, ViolationKind::LinkOrder, obj_name(o));
            }
        }
    }

    for (const auto& [a, t] : g.targets()) {
        if (!g.has_object(t.obj)) {
            violate(out, ViolationKind::DanglingEdge, val_name(a) + " targets missing " + obj_name(t.obj));
            continue;
        }
        if (!g.has_value(a)) violate(out, ViolationKind::DanglingEdge, val_name(a) + " not in V");
        const ObjectLabel& l = g.label(t.obj);
        switch (t.tg) {
            case Tg::Reg:
                if (l.segment()) violate(out, ViolationKind::SpecifierMismatch, val_name(a) + " reg into segment");
                break;
            case Tg::Fst:
            case Tg::Lst:
                if (!l.segment() || (t.tg == Tg::Lst && !l.dls()))
                    violate(out, ViolationKind::SpecifierMismatch, val_name(a));
                else if (t.off != l.hfo)
                    violate(out, ViolationKind::HeadOffset, val_name(a));
                break;
            case Tg::All:
                if (!l.segment()) violate(out, ViolationKind::SpecifierMismatch, val_name(a) + " all into region");
                break;
        }
        if (g.has_value(a)) {
            unsigned want = l.level + (t.tg == Tg::All ? 1 : 0);
            if (g.level(a) != want) violate(out, ViolationKind::AddressLevel, val_name(a));
        }
    }

    if (has_zero_plus_cycle(g)) violate(out, ViolationKind::ZeroPlusCycle, "cycle of 0+ segments");

    // Nesting: every nested object has exactly one parent segment one level up.
    std::map<ObjectId, std::vector<ObjectId>> parents;
    for (const auto& [p, pl] : g.objects()) {
        if (!pl.segment()) continue;
        NodeSet ns = nested_below(g, p);
        for (ObjectId o : ns.objects)
            if (g.label(o).level == pl.level + 1) parents[o].push_back(p);
    }
    std::map<ObjectId, ObjectId> parent;
    for (const auto& [o, l] : g.objects()) {
        if (l.level == 0) continue;
        auto it = parents.find(o);
        if (it == parents.end() || it->second.size() != 1)
            violate(out, ViolationKind::Nesting, obj_name(o) + " has no unique parent");
        else
            parent[o] = it->second.front();
    }
    for (const auto& [o, l] : g.objects()) {
        for (const Field& f : g.fields(o)) {
            const Target* t = g.target(f.val);
            if (!t || !g.has_object(t->obj)) continue;
            const ObjectLabel& tl = g.label(t->obj);
            if (l.level > tl.level) {
                bool ancestor = false;
                ObjectId cur = o;
                while (parent.count(cur)) {
                    cur = parent[cur];
                    if (cur == t->obj) {
                        ancestor = true;
                        break;
                    }
                }
                if ((t->tg == Tg::All) != ancestor && t->obj != kNullObject)
                    violate(out, ViolationKind::AllTarget, obj_name(o) + " -> " + obj_name(t->obj));
            } else if (t->tg == Tg::All) {
                violate(out, ViolationKind::AllTarget, obj_name(o) + " all-edge from outside");
            }
        }
    }
    return out;
}

std::vector<Violation> check_consistency(const Spc& c) {
    auto out = check_consistency(c.smg);
    std::set<ObjectId> seen;
    for (const auto& [name, r] : c.vars) {
        if (!c.smg.has_object(r)) {
            violate(out, ViolationKind::VariableRegion, name + " has no region");
            continue;
        }
        const ObjectLabel& l = c.smg.label(r);
        if (l.segment() || l.level != 0 || !l.valid || r == kNullObject || !seen.insert(r).second)
            violate(out, ViolationKind::VariableRegion, name);
    }
    return out;
}

NodeSet nested_below(const Smg& g, ObjectId d) {
    NodeSet ns;
    const unsigned lvl = g.label(d).level;
    std::deque<ObjectId> work{d};
    while (!work.empty()) {
        ObjectId o = work.front();
        work.pop_front();
        for (const Field& f : g.fields(o)) {
            if (g.level(f.val) <= lvl || !ns.values.insert(f.val).second) continue;
            const Target* t = g.target(f.val);
            if (!t || t->obj == d) continue;
            if (g.label(t->obj).level > lvl && ns.objects.insert(t->obj).second) work.push_back(t->obj);
        }
    }
    return ns;
}

ObjectId materialise_in_place(Smg& g, ObjectId d, End end) {
    if (!g.has_object(d) || !g.label(d).segment()) throw Error("materialise: not a segment");
    const ObjectLabel dl = g.label(d);
    if (end == End::Back && !dl.dls()) throw Error("materialise: back end of a singly-linked segment");
    if (dl.level != 0) throw Error("materialise: nested segment");
    const FieldType pty = g.ptr_type();

    NodeSet ns = nested_below(g, d);
    ObjectLabel rl;
    rl.kind = ObjKind::Reg;
    rl.size = dl.size;
    rl.level = 0;
    rl.valid = true;
    ObjectId r = g.add_object(rl);

    std::map<ObjectId, ObjectId> omap{{d, r}};
    std::map<ValueId, ValueId> vmap;
    for (ObjectId o : ns.objects) {
        ObjectLabel l = g.label(o);
        l.level -= 1;
        omap[o] = g.add_object(l);
    }
    for (ValueId v : ns.values) vmap[v] = g.add_value(g.level(v) - 1);
    for (ValueId v : ns.values) {
        const Target* t = g.target(v);
        if (!t) continue;
        Target nt = *t;
        if (t->obj == d) {
            nt.obj = r;
            nt.tg = Tg::Reg;
        } else if (omap.count(t->obj)) {
            nt.obj = omap[t->obj];
        }
        g.set_target(vmap[v], nt);
    }
    for (const auto& [o, copy] : omap) {
        std::vector<Field> fs;
        for (Field f : g.fields(o)) {
            if (g.level(f.val) == 0)
                fs.push_back(f);
            else if (vmap.count(f.val))
                fs.push_back({f.off, f.ty, vmap[f.val]});
            else
                throw Error("materialise: nested field escapes the segment");
        }
        g.set_fields(copy, std::move(fs));
    }

    const Tg head_tg = end == End::Front ? Tg::Fst : Tg::Lst;
    ValueId a_head = g.address(dl.hfo, head_tg, d, 0);
    g.set_target(a_head, Target{dl.hfo, Tg::Reg, r});
    ValueId a_rest = g.add_value(0);
    g.set_target(a_rest, Target{dl.hfo, head_tg, d});
    // Links are written like stores so that zero bytes under them go away.
    if (end == End::Front) {
        write_value_in_place(g, r, dl.nfo, pty, a_rest);
        if (dl.dls()) write_value_in_place(g, d, dl.pfo, pty, a_head);
    } else {
        write_value_in_place(g, r, dl.pfo, pty, a_rest);
        write_value_in_place(g, d, dl.nfo, pty, a_head);
    }
    if (g.label(d).len > 0) g.label(d).len -= 1;
    return r;
}

std::pair<Smg, ObjectId> materialise(const Smg& g, ObjectId d, End end) {
    Smg out = g;
    ObjectId r = materialise_in_place(out, d, end);
    return {std::move(out), r};
}

void remove_zero_segment_in_place(Smg& g, ObjectId d) {
    if (!g.has_object(d) || !g.label(d).segment()) throw Error("remove: not a segment");
    const ObjectLabel dl = g.label(d);
    if (dl.len != 0) throw Error("remove: segment has non-zero length");
    const FieldType pty = g.ptr_type();
    auto a_n = g.field(d, dl.nfo, pty);
    auto a_p = dl.dls() ? g.field(d, dl.pfo, pty) : std::nullopt;
    auto a_f = g.find_address(dl.hfo, Tg::Fst, d);
    auto a_l = g.find_address(dl.hfo, Tg::Lst, d);

    NodeSet ns = nested_below(g, d);
    if (a_f && a_n) g.replace_value(*a_f, *a_n);
    if (a_l && a_p) g.replace_value(*a_l, *a_p);
    for (ValueId v : ns.values) g.remove_value(v);
    for (ObjectId o : ns.objects) g.remove_object(o);
    if (a_f) g.remove_value(*a_f);
    if (a_l) g.remove_value(*a_l);
    g.remove_object(d);
}

Smg remove_zero_segment(const Smg& g, ObjectId d) {
    Smg out = g;
    remove_zero_segment_in_place(out, d);
    return out;
}

NodeSet reachable(const Smg& g, const std::vector<ObjectId>& roots) {
    NodeSet ns;
    std::deque<ObjectId> work;
    for (ObjectId r : roots)
        if (g.has_object(r) && ns.objects.insert(r).second) work.push_back(r);
    while (!work.empty()) {
        ObjectId o = work.front();
        work.pop_front();
        for (const Field& f : g.fields(o)) {
            if (!ns.values.insert(f.val).second) continue;
            const Target* t = g.target(f.val);
            if (t && ns.objects.insert(t->obj).second) work.push_back(t->obj);
        }
    }
    return ns;
}

std::vector<ObjectId> collect_garbage_in_place(Spc& c) {
    Smg& g = c.smg;
    std::vector<ObjectId> roots;
    for (const auto& [name, r] : c.vars) roots.push_back(r);
    NodeSet live = reachable(g, roots);
    live.objects.insert(kNullObject);
    live.values.insert(kZero);
    std::vector<ObjectId> dead_objs, leaked;
    std::vector<ValueId> dead_vals;
    for (const auto& [o, l] : g.objects()) {
        if (live.objects.count(o)) continue;
        dead_objs.push_back(o);
        if (l.valid && l.level == 0) leaked.push_back(o);
    }
    for (const auto& [v, lvl] : g.values())
        if (!live.values.count(v)) dead_vals.push_back(v);
    for (ValueId v : dead_vals) g.remove_value(v);
    for (ObjectId o : dead_objs) g.remove_object(o);
    return leaked;
}

std::pair<Spc, std::vector<ObjectId>> collect_garbage(const Spc& c) {
    Spc out = c;
    auto leaked = collect_garbage_in_place(out);
    return {std::move(out), std::move(leaked)};
}

std::vector<std::pair<Offset, Offset>> zero_intervals(const Smg& g, ObjectId o) {
    std::vector<std::pair<Offset, Offset>> iv;
    for (const Field& f : g.fields(o))
        if (f.val == kZero) iv.emplace_back(f.off, f.end());
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<Offset, Offset>> out;
    for (auto [a, b] : iv) {
        if (!out.empty() && a <= out.back().second)
            out.back().second = std::max(out.back().second, b);
        else
            out.emplace_back(a, b);
    }
    return out;
}

bool zero_covered(const Smg& g, ObjectId o, Offset from, Offset to) {
    if (from >= to) return true;
    for (auto [a, b] : zero_intervals(g, o))
        if (a <= from && to <= b) return true;
    return false;
}

std::optional<ValueId> pointer_at(const Smg& g, ObjectId o, Offset off) {
    if (auto v = g.field(o, off, g.ptr_type())) return v;
    if (zero_covered(g, o, off, off + g.ptr_size())) return kZero;
    return std::nullopt;
}

}  // namespace smg
