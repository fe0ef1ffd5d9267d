#include "smg/reinterp.hpp"

#include <algorithm>

namespace smg {

const char* to_string(JoinStatus s) {
    switch (s) {
        case JoinStatus::Equal: return "equal";
        case JoinStatus::LeftWider: return "left-wider";
        case JoinStatus::RightWider: return "right-wider";
        case JoinStatus::Incomparable: return "incomparable";
    }
    return "?";
}

JoinStatus update_join_status(JoinStatus s1, JoinStatus s2) {
    if (s1 == JoinStatus::Equal) return s2;
    if (s2 == JoinStatus::Equal || s1 == s2) return s1;
    return JoinStatus::Incomparable;
}

namespace {

void check_access(const Smg& g, ObjectId o, Offset off, FieldType ty) {
    if (!g.has_object(o)) throw InvalidTargetError("no such object");
    const ObjectLabel& l = g.label(o);
    if (!l.valid) throw InvalidTargetError("object is not valid");
    if (off < 0 || off + static_cast<Offset>(ty.size) > l.size) throw OutOfBoundsError("field outside object");
}

bool overlaps(const Field& f, Offset a, Offset b) { return f.off < b && a < f.end(); }

/// One flag per byte of the object.
using ByteMask = std::vector<char>;

ByteMask zero_mask(const Smg& g, ObjectId o) {
    ByteMask m(static_cast<std::size_t>(std::max<Offset>(g.label(o).size, 0)), 0);
    for (const Field& f : g.fields(o))
        if (f.val == kZero)
            for (Offset i = std::max<Offset>(f.off, 0); i < std::min<Offset>(f.end(), m.size()); ++i) m[i] = 1;
    return m;
}

bool all_set(const ByteMask& m, Offset a, Offset b) {
    for (Offset i = a; i < b; ++i)
        if (i < 0 || i >= static_cast<Offset>(m.size()) || !m[i]) return false;
    return true;
}

std::vector<ByteRange> mask_ranges(const ByteMask& m) {
    std::vector<ByteRange> out;
    for (std::size_t i = 0; i < m.size();) {
        if (!m[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < m.size() && m[j]) ++j;
        out.emplace_back(static_cast<Offset>(i), static_cast<Offset>(j));
        i = j;
    }
    return out;
}

}  // namespace

void coalesce_zero_blocks(Smg& g, ObjectId o) {
    std::vector<Field> keep;
    std::vector<ByteRange> blocks;
    for (const Field& f : g.fields(o)) {
        if (f.val == kZero && f.ty.kind == FieldKind::Data)
            blocks.emplace_back(f.off, f.end());
        else
            keep.push_back(f);
    }
    std::sort(blocks.begin(), blocks.end());
    std::vector<ByteRange> merged;
    for (auto [a, b] : blocks) {
        if (!merged.empty() && a <= merged.back().second)
            merged.back().second = std::max(merged.back().second, b);
        else
            merged.emplace_back(a, b);
    }
    for (auto [a, b] : merged) keep.push_back({a, FieldType::data(static_cast<std::uint32_t>(b - a)), kZero});
    g.set_fields(o, std::move(keep));
}

ValueId read_value_in_place(Smg& g, ObjectId o, Offset off, FieldType ty) {
    check_access(g, o, off, ty);
    if (auto v = g.field(o, off, ty)) return *v;
    if (zero_covered(g, o, off, off + ty.size)) {
        // Data views of zero bytes are already described by the zero blocks.
        if (ty.kind == FieldKind::Ptr) g.set_field(o, off, ty, kZero);
        return kZero;
    }
    ValueId v = g.add_value(g.label(o).level);
    g.set_field(o, off, ty, v);
    return v;
}

std::pair<Smg, ValueId> read_value(const Smg& g, ObjectId o, Offset off, FieldType ty) {
    Smg out = g;
    ValueId v = read_value_in_place(out, o, off, ty);
    return {std::move(out), v};
}

void write_value_in_place(Smg& g, ObjectId o, Offset off, FieldType ty, ValueId v) {
    check_access(g, o, off, ty);
    if (!g.has_value(v)) throw Error("write of an unknown value");
    if (auto cur = g.field(o, off, ty); cur && *cur == v) return;
    const Offset end = off + ty.size;
    std::vector<Field> out;
    for (const Field& f : g.fields(o)) {
        if (!overlaps(f, off, end)) {
            out.push_back(f);
            continue;
        }
        if (f.val != kZero) continue;
        if (v == kZero) {
            out.push_back(f);
            continue;
        }
        if (f.off < off) out.push_back({f.off, FieldType::data(static_cast<std::uint32_t>(off - f.off)), kZero});
        if (end < f.end()) out.push_back({end, FieldType::data(static_cast<std::uint32_t>(f.end() - end)), kZero});
    }
    if (v == kZero) {
        out.push_back({off, FieldType::data(ty.size), kZero});
        if (ty.kind == FieldKind::Ptr) out.push_back({off, ty, kZero});
    } else {
        out.push_back({off, ty, v});
    }
    g.set_fields(o, std::move(out));
    coalesce_zero_blocks(g, o);
}

Smg write_value(const Smg& g, ObjectId o, Offset off, FieldType ty, ValueId v) {
    Smg out = g;
    write_value_in_place(out, o, off, ty, v);
    return out;
}

std::vector<ByteRange> link_ranges(const Smg& g, ObjectId o) {
    std::vector<ByteRange> out;
    const ObjectLabel& l = g.label(o);
    const Offset ps = g.ptr_size();
    if (l.segment()) out.emplace_back(l.nfo, l.nfo + ps);
    if (l.dls()) out.emplace_back(l.pfo, l.pfo + ps);
    return out;
}

JoinStatus join_fields_in_place(Smg& g1, Smg& g2, ObjectId o1, ObjectId o2,
                                const std::vector<ByteRange>& dest_links) {
    if (g1.label(o1).size != g2.label(o2).size) throw Error("join_fields: size mismatch");
    const Offset size = g1.label(o1).size;
    Smg* gs[2] = {&g1, &g2};
    const ObjectId os[2] = {o1, o2};

    std::vector<ByteRange> excl = dest_links;
    for (int i = 0; i < 2; ++i)
        for (auto r : link_ranges(*gs[i], os[i])) excl.push_back(r);
    auto is_excl_range = [&](Offset a, Offset b) {
        return std::find(excl.begin(), excl.end(), ByteRange{a, b}) != excl.end();
    };

    ByteMask raw[2] = {zero_mask(g1, o1), zero_mask(g2, o2)};
    ByteMask common(static_cast<std::size_t>(size), 0);
    for (Offset i = 0; i < size; ++i) common[i] = raw[0][i] && raw[1][i];
    for (auto [a, b] : excl)
        for (Offset i = std::max<Offset>(a, 0); i < std::min(b, size); ++i) common[i] = 0;
    const auto blocks = mask_ranges(common);

    const FieldType pty = g1.ptr_type();
    std::vector<Field> next[2];
    for (int i = 0; i < 2; ++i) {
        const Smg& me = *gs[i];
        const Smg& other = *gs[1 - i];
        const ObjectId other_o = os[1 - i];
        for (const Field& f : me.fields(os[i])) {
            if (f.val != kZero) {
                next[i].push_back(f);
                continue;
            }
            // Zero pointer views survive over link fields.
            if (f.ty == pty && is_excl_range(f.off, f.end())) next[i].push_back(f);
        }
        for (auto [a, b] : blocks) next[i].push_back({a, FieldType::data(static_cast<std::uint32_t>(b - a)), kZero});
        // A null pointer may stand for an empty segment in front of the other side's target.
        for (const Field& f : other.fields(other_o)) {
            if (f.ty != pty || !other.is_address(f.val)) continue;
            if (f.val == kZero && !is_excl_range(f.off, f.end())) continue;
            if (!all_set(raw[i], f.off, f.end())) continue;
            bool present = std::any_of(next[i].begin(), next[i].end(),
                                       [&](const Field& x) { return x.off == f.off && x.ty == f.ty; });
            if (!present) next[i].push_back({f.off, f.ty, kZero});
        }
    }

    JoinStatus s = JoinStatus::Equal;
    for (int i = 0; i < 2; ++i) {
        ByteMask after(static_cast<std::size_t>(size), 0);
        for (const Field& f : next[i])
            if (f.val == kZero)
                for (Offset b = std::max<Offset>(f.off, 0); b < std::min(f.end(), size); ++b) after[b] = 1;
        for (Offset b = 0; b < size; ++b) {
            if (raw[i][b] && !after[b]) {
                s = update_join_status(s, i == 0 ? JoinStatus::RightWider : JoinStatus::LeftWider);
                break;
            }
        }
    }

    auto has = [](const std::vector<Field>& fs, const Field& f) {
        return std::any_of(fs.begin(), fs.end(), [&](const Field& x) { return x.off == f.off && x.ty == f.ty; });
    };
    std::vector<Field> add[2];
    for (int i = 0; i < 2; ++i) {
        for (const Field& f : next[i]) {
            if (f.val == kZero && f.ty.kind == FieldKind::Data) continue;
            if (!has(next[1 - i], f)) {
                Smg& other = *gs[1 - i];
                ValueId v = other.add_value(other.label(os[1 - i]).level);
                add[1 - i].push_back({f.off, f.ty, v});
            }
        }
    }
    for (int i = 0; i < 2; ++i) {
        for (const Field& f : add[i]) next[i].push_back(f);
        gs[i]->set_fields(os[i], std::move(next[i]));
    }
    return s;
}

JoinFieldsResult join_fields(const Smg& g1, const Smg& g2, ObjectId o1, ObjectId o2) {
    JoinFieldsResult r{JoinStatus::Equal, g1, g2};
    r.status = join_fields_in_place(r.g1, r.g2, o1, o2);
    return r;
}

}  // namespace smg
