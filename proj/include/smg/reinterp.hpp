#pragma once

#include <utility>
#include <vector>

#include "smg/smg.hpp"

namespace smg {

/// Relation between the two inputs of a join. LeftWider: the first input
/// describes at least the heaps of the second one.
enum class JoinStatus : std::uint8_t { Equal, LeftWider, RightWider, Incomparable };

const char* to_string(JoinStatus s);
JoinStatus update_join_status(JoinStatus s1, JoinStatus s2);
inline JoinStatus mirror(JoinStatus s) {
    if (s == JoinStatus::LeftWider) return JoinStatus::RightWider;
    if (s == JoinStatus::RightWider) return JoinStatus::LeftWider;
    return s;
}

class OutOfBoundsError : public Error {
public:
    using Error::Error;
};

class InvalidTargetError : public Error {
public:
    using Error::Error;
};

/// Reads field (off, ty) of `o`, adding an edge for it when it was not present.
ValueId read_value_in_place(Smg& g, ObjectId o, Offset off, FieldType ty);
std::pair<Smg, ValueId> read_value(const Smg& g, ObjectId o, Offset off, FieldType ty);

/// Writes `v` to field (off, ty) of `o`, keeping zero bytes that are not overwritten.
void write_value_in_place(Smg& g, ObjectId o, Offset off, FieldType ty, ValueId v);
Smg write_value(const Smg& g, ObjectId o, Offset off, FieldType ty, ValueId v);

/// Merges adjacent or overlapping zero blocks of an object.
void coalesce_zero_blocks(Smg& g, ObjectId o);

using ByteRange = std::pair<Offset, Offset>;

/// Makes the field sets of `o1` and `o2` identical. `dest_links` are the link
/// ranges of a destination segment whose bytes must not be covered by zero blocks.
JoinStatus join_fields_in_place(Smg& g1, Smg& g2, ObjectId o1, ObjectId o2,
                                const std::vector<ByteRange>& dest_links = {});

struct JoinFieldsResult {
    JoinStatus status;
    Smg g1;
    Smg g2;
};
JoinFieldsResult join_fields(const Smg& g1, const Smg& g2, ObjectId o1, ObjectId o2);

/// Link field byte ranges of a segment; empty for regions.
std::vector<ByteRange> link_ranges(const Smg& g, ObjectId o);

}  // namespace smg
