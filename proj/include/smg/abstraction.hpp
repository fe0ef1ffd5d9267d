#pragma once

#include <array>
#include <optional>
#include <vector>

#include "smg/join.hpp"
#include "smg/smg.hpp"

namespace smg {

struct CandidateEntry {
    ObjectId head = kNullObject;
    Offset hfo = 0;
    Offset nfo = 0;
    /// Absent for singly-linked candidates.
    std::optional<Offset> pfo;
    bool operator==(const CandidateEntry&) const = default;
};

struct MergePlan {
    std::vector<ObjectId> sequence;
    unsigned cost = 0;
    CandidateEntry entry;
};

/// Minimum sequence length per merge cost (0, 1, 2).
using LenThresholds = std::array<unsigned, 3>;
inline constexpr LenThresholds kDefaultThresholds{2, 2, 3};

unsigned cost_of(JoinStatus s);

std::vector<CandidateEntry> find_candidates(const Spc& c);
std::optional<MergePlan> longest_mergeable_sequence(const Spc& c, const CandidateEntry& e);
/// Merges the plan left to right; nullopt when some elementary merge fails.
std::optional<Spc> merge_sequence(const Spc& c, const MergePlan& plan);
Spc abstract_spc(const Spc& c, const LenThresholds& thr = kDefaultThresholds);

}  // namespace smg
