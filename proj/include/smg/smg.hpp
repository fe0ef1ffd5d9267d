#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace smg {

using ObjectId = std::uint32_t;
using ValueId = std::uint32_t;
using Offset = std::int64_t;

inline constexpr ObjectId kNullObject = 0;
inline constexpr ValueId kZero = 0;

enum class ObjKind : std::uint8_t { Reg, Dls, Sls };
enum class Tg : std::uint8_t { Fst, Lst, All, Reg };
enum class FieldKind : std::uint8_t { Ptr, Data };

struct FieldType {
    FieldKind kind = FieldKind::Data;
    std::uint32_t size = 1;

    static FieldType ptr(std::uint32_t ptr_size) { return {FieldKind::Ptr, ptr_size}; }
    static FieldType data(std::uint32_t n) { return {FieldKind::Data, n}; }
    auto operator<=>(const FieldType&) const = default;
};

struct ObjectLabel {
    ObjKind kind = ObjKind::Reg;
    unsigned level = 0;
    Offset size = 0;
    bool valid = true;
    unsigned len = 0;
    Offset hfo = 0;
    Offset nfo = 0;
    Offset pfo = 0;

    bool segment() const { return kind != ObjKind::Reg; }
    bool dls() const { return kind == ObjKind::Dls; }
    /// Minimum number of concrete nodes: len for segments, 1 for regions.
    unsigned len1() const { return segment() ? len : 1; }
    bool operator==(const ObjectLabel&) const = default;
};

struct Field {
    Offset off = 0;
    FieldType ty;
    ValueId val = kZero;

    Offset end() const { return off + static_cast<Offset>(ty.size); }
    bool operator==(const Field&) const = default;
};

struct Target {
    Offset off = 0;
    Tg tg = Tg::Reg;
    ObjectId obj = kNullObject;
    bool operator==(const Target&) const = default;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Symbolic memory graph. Objects and values share one monotone id counter.
class Smg {
public:
    explicit Smg(unsigned ptr_size = 8);

    unsigned ptr_size() const { return ptr_size_; }
    FieldType ptr_type() const { return FieldType::ptr(ptr_size_); }
    std::uint32_t next_id() const { return next_id_; }

    ObjectId add_object(const ObjectLabel& label);
    ValueId add_value(unsigned level);

    bool has_object(ObjectId o) const { return objs_.count(o) != 0; }
    bool has_value(ValueId v) const { return vals_.count(v) != 0; }
    const ObjectLabel& label(ObjectId o) const;
    ObjectLabel& label(ObjectId o);
    unsigned level(ValueId v) const;
    void set_level(ValueId v, unsigned level);

    const std::map<ObjectId, ObjectLabel>& objects() const { return objs_; }
    const std::map<ValueId, unsigned>& values() const { return vals_; }
    const std::map<ValueId, Target>& targets() const { return pt_; }

    // has-value edges
    const std::vector<Field>& fields(ObjectId o) const;
    std::optional<ValueId> field(ObjectId o, Offset off, FieldType ty) const;
    void set_field(ObjectId o, Offset off, FieldType ty, ValueId v);
    bool remove_field(ObjectId o, Offset off, FieldType ty);
    void set_fields(ObjectId o, std::vector<Field> fs);
    void clear_fields(ObjectId o);
    /// Rewrites every has-value edge holding `from` to hold `to`.
    void replace_value(ValueId from, ValueId to);

    // points-to edges
    bool is_address(ValueId v) const { return pt_.count(v) != 0; }
    const Target* target(ValueId v) const;
    void set_target(ValueId v, Target t);
    void remove_target(ValueId v);
    std::optional<ValueId> find_address(Offset off, Tg tg, ObjectId o) const;
    /// Existing address for (off, tg, o) or a fresh one at the given level.
    ValueId address(Offset off, Tg tg, ObjectId o, unsigned level);
    std::vector<ValueId> addresses_of(ObjectId o) const;

    void remove_object(ObjectId o);
    void remove_value(ValueId v);

    bool operator==(const Smg&) const = default;

private:
    unsigned ptr_size_;
    std::uint32_t next_id_ = 1;
    std::map<ObjectId, ObjectLabel> objs_;
    std::map<ValueId, unsigned> vals_;
    std::map<ObjectId, std::vector<Field>> hv_;
    std::map<ValueId, Target> pt_;
    std::map<std::tuple<Offset, Tg, ObjectId>, ValueId> addr_;
};

/// Symbolic program configuration: an SMG plus the variable to region map.
struct Spc {
    Smg smg;
    std::map<std::string, ObjectId> vars;

    explicit Spc(unsigned ptr_size = 8) : smg(ptr_size) {}
    bool is_var_region(ObjectId o) const;
    bool operator==(const Spc&) const = default;
};

Spc empty_spc(unsigned ptr_size = 8);

/// Adds a variable region of pointer size.
ObjectId add_variable(Spc& c, const std::string& name);

enum class ViolationKind {
    NullObject,
    SegmentInvalid,
    InvalidRegionEdge,
    FieldOutOfBounds,
    MissingLink,
    LinkOrder,
    HeadOffset,
    SpecifierMismatch,
    ZeroPlusCycle,
    ZeroUnderAddress,
    Nesting,
    AddressLevel,
    AllTarget,
    DanglingEdge,
    VariableRegion,
};

struct Violation {
    ViolationKind kind;
    std::string detail;
};

const char* to_string(ViolationKind k);
const char* to_string(ObjKind k);
const char* to_string(Tg t);

std::vector<Violation> check_consistency(const Smg& g);
std::vector<Violation> check_consistency(const Spc& c);

enum class End { Front, Back };

/// Nodes of the sub-graph nested below a segment, the segment excluded.
struct NodeSet {
    std::set<ObjectId> objects;
    std::set<ValueId> values;
};
NodeSet nested_below(const Smg& g, ObjectId d);

/// Materialises a concrete region from one end of a level-0 segment, in place.
ObjectId materialise_in_place(Smg& g, ObjectId d, End end);
std::pair<Smg, ObjectId> materialise(const Smg& g, ObjectId d, End end);

void remove_zero_segment_in_place(Smg& g, ObjectId d);
Smg remove_zero_segment(const Smg& g, ObjectId d);

/// Objects and values reachable from the given roots along has-value and points-to edges.
NodeSet reachable(const Smg& g, const std::vector<ObjectId>& roots);

/// Removes everything unreachable from variables; returns the removed valid heap objects.
std::vector<ObjectId> collect_garbage_in_place(Spc& c);
std::pair<Spc, std::vector<ObjectId>> collect_garbage(const Spc& c);

/// True when following next/prev of 0+ segments can return to where it started.
bool has_zero_plus_cycle(const Smg& g);

/// Bytes covered by zero-valued edges of an object, as sorted disjoint intervals.
std::vector<std::pair<Offset, Offset>> zero_intervals(const Smg& g, ObjectId o);
bool zero_covered(const Smg& g, ObjectId o, Offset from, Offset to);
/// Pointer stored at `off`: the edge value, zero over zero bytes, nullopt when unknown.
std::optional<ValueId> pointer_at(const Smg& g, ObjectId o, Offset off);

}  // namespace smg
