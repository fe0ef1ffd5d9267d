#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "smg/smg.hpp"

namespace smg {

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

struct ConcretiseLimits {
    /// Materialisations allowed per segment.
    unsigned per_segment = 3;
    /// Upper bound on the number of regions of a produced graph (variables included).
    std::size_t max_regions = std::numeric_limits<std::size_t>::max();
    /// Upper bound on explored graphs.
    std::size_t cap = 4096;
};

/// Number of non-null regions.
std::size_t region_count(const Smg& g);

/// Deterministic text form of a segment-free configuration, BFS from the variables by name.
std::string canonical_key(const Spc& c);

/// Enumerates the segment-free graphs of `c`; stops early when `visit` returns false.
/// Returns false iff enumeration was stopped by `visit`.
bool for_each_concretisation(const Spc& c, const ConcretiseLimits& lim,
                             const std::function<bool(const Spc&)>& visit);

std::vector<Spc> concretise(const Spc& c, const ConcretiseLimits& lim);
std::set<std::string> concretise_bounded(const Spc& c, unsigned k, std::size_t cap = 4096);
/// Graph-only form; the level-0 regions of `g` act as roots.
std::set<std::string> concretise_bounded(const Smg& g, unsigned k, std::size_t cap = 4096);

/// True when every heap described by the segment-free `specific` is also described by
/// the segment-free `general`; unknown values of `general` may be instantiated.
bool instance_of(const Spc& general, const Spc& specific);

/// True when the segment-free `concrete` is represented by `abstract`.
bool covered(const Spc& concrete, const Spc& abstract, std::size_t cap = 200000);

}  // namespace smg
