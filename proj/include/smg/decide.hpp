#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "smg/smg.hpp"

namespace smg {

/// Follows possibly-empty segments from `v`: next links from fst addresses, prev links from lst ones.
std::pair<ValueId, std::set<ObjectId>> look_through(const Smg& g, ValueId v);

/// Sound, incomplete disequality check of two level-0 values.
bool prove_neq(const Smg& g, ValueId v1, ValueId v2);

enum class Relation { Eq, Neq };

/// Restricts `c` to the heaps where `v1 rel v2` holds. Several configurations may result;
/// an empty result means the relation cannot hold.
std::vector<Spc> assume(const Spc& c, Relation rel, ValueId v1, ValueId v2);

enum class CmpOp { Lt, Le, Gt, Ge };

/// Decides an ordering between two addresses into the same region.
std::optional<bool> compare_offsets(const Smg& g, ValueId v1, ValueId v2, CmpOp op);

}  // namespace smg
